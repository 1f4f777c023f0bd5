use serde::{Deserialize, Serialize};

use super::overlap::{dice_lesionwise, nsd_lesionwise};
use super::{match_lesions, MatchResult};
use crate::error::{Error, Result};
use crate::lesion::{extract_surface, lesion_volume, max_diameter, LesionSet};
use crate::stats::spearman_rho_value;

/// Segmentation and size metrics of one detected ground-truth lesion.
/// Differences are ground truth minus prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionMetrics {
    pub gt_id: u32,
    pub pred_ids: Vec<u32>,
    pub dice: f64,
    pub nsd: f64,
    pub gt_volume_mm3: f64,
    pub pred_volume_mm3: f64,
    pub gt_diameter_mm: f64,
    pub pred_diameter_mm: f64,
    pub volume_diff_mm3: f64,
    pub diameter_diff_mm: f64,
}

/// Matches `pred` to `gt` and computes metrics for every detected lesion.
///
/// The prediction side of a pair is the union of all predictions overlapping
/// the ground-truth lesion.
pub fn study_metrics(gt: &LesionSet, pred: &LesionSet, tau_mm: f64) -> Result<(MatchResult, Vec<LesionMetrics>)> {
    let matches = match_lesions(gt, pred)?;
    let geometry = &gt.geometry;
    let mut metrics = Vec::with_capacity(matches.tp_count());
    for tp in &matches.true_positives {
        let g = gt.get(tp.gt_id).expect("gt id from matching");
        let mut union: Vec<usize> = tp
            .pred_ids
            .iter()
            .flat_map(|&id| pred.get(id).expect("pred id from matching").voxels.iter().copied())
            .collect();
        union.sort_unstable();
        let pred_volume_mm3 = lesion_volume(union.len(), geometry.spacing);
        let pred_diameter_mm = max_diameter(&extract_surface(&union, geometry), geometry);
        metrics.push(LesionMetrics {
            gt_id: tp.gt_id,
            pred_ids: tp.pred_ids.clone(),
            dice: dice_lesionwise(g, &union),
            nsd: nsd_lesionwise(g, &union, tau_mm, geometry)?,
            gt_volume_mm3: g.volume_mm3,
            pred_volume_mm3,
            gt_diameter_mm: g.max_diameter_mm,
            pred_diameter_mm,
            volume_diff_mm3: g.volume_mm3 - pred_volume_mm3,
            diameter_diff_mm: g.max_diameter_mm - pred_diameter_mm,
        });
    }
    Ok((matches, metrics))
}

/// Spearman rho between ground-truth and predicted sizes of detected
/// lesions, as `(volume, diameter)`.
pub fn size_correlation(tp_metrics: &[LesionMetrics]) -> Result<(f64, f64)> {
    if tp_metrics.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "size correlation needs at least 3 detected lesions, got {}",
            tp_metrics.len()
        )));
    }
    let pick = |f: fn(&LesionMetrics) -> f64| tp_metrics.iter().map(f).collect::<Vec<_>>();
    let rho_volume = spearman_rho_value(&pick(|m| m.gt_volume_mm3), &pick(|m| m.pred_volume_mm3))?;
    let rho_diameter = spearman_rho_value(&pick(|m| m.gt_diameter_mm), &pick(|m| m.pred_diameter_mm))?;
    Ok((rho_volume, rho_diameter))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LesionStatus {
    TP,
    FN,
    FP,
}

impl LesionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LesionStatus::TP => "TP",
            LesionStatus::FN => "FN",
            LesionStatus::FP => "FP",
        }
    }
}

/// One flat per-lesion row: a ground-truth lesion (TP/FN) or an unmatched
/// prediction (FP). For FP rows `lesion_id` is the prediction id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionRecord {
    pub study_id: String,
    pub lesion_id: u32,
    pub status: LesionStatus,
    pub gt_diameter_mm: Option<f64>,
    pub pred_diameter_mm: Option<f64>,
    pub gt_volume_mm3: Option<f64>,
    pub pred_volume_mm3: Option<f64>,
    pub dice: Option<f64>,
    pub nsd: Option<f64>,
    /// Matched prediction ids, `;`-separated (TP rows only).
    pub matched_pred_ids: String,
}

/// Everything the cohort aggregation needs from one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEvaluation {
    pub study_id: String,
    pub matches: MatchResult,
    pub records: Vec<LesionRecord>,
}

impl StudyEvaluation {
    pub fn evaluate(study_id: impl Into<String>, gt: &LesionSet, pred: &LesionSet, tau_mm: f64) -> Result<Self> {
        let study_id = study_id.into();
        let (matches, metrics) = study_metrics(gt, pred, tau_mm)?;
        let mut records = Vec::with_capacity(gt.len() + matches.fp_count());
        let mut metrics = metrics.into_iter().peekable();
        for lesion in &gt.lesions {
            let m = metrics.next_if(|m| m.gt_id == lesion.id);
            let record = match m {
                Some(m) => LesionRecord {
                    study_id: study_id.clone(),
                    lesion_id: lesion.id,
                    status: LesionStatus::TP,
                    gt_diameter_mm: Some(m.gt_diameter_mm),
                    pred_diameter_mm: Some(m.pred_diameter_mm),
                    gt_volume_mm3: Some(m.gt_volume_mm3),
                    pred_volume_mm3: Some(m.pred_volume_mm3),
                    dice: Some(m.dice),
                    nsd: Some(m.nsd),
                    matched_pred_ids: join_ids(&m.pred_ids),
                },
                None => LesionRecord {
                    study_id: study_id.clone(),
                    lesion_id: lesion.id,
                    status: LesionStatus::FN,
                    gt_diameter_mm: Some(lesion.max_diameter_mm),
                    pred_diameter_mm: None,
                    gt_volume_mm3: Some(lesion.volume_mm3),
                    pred_volume_mm3: None,
                    dice: None,
                    nsd: None,
                    matched_pred_ids: String::new(),
                },
            };
            records.push(record);
        }
        for &id in &matches.false_positives {
            let p = pred.get(id).expect("pred id from matching");
            records.push(LesionRecord {
                study_id: study_id.clone(),
                lesion_id: id,
                status: LesionStatus::FP,
                gt_diameter_mm: None,
                pred_diameter_mm: Some(p.max_diameter_mm),
                gt_volume_mm3: None,
                pred_volume_mm3: Some(p.volume_mm3),
                dice: None,
                nsd: None,
                matched_pred_ids: String::new(),
            });
        }
        Ok(StudyEvaluation { study_id, matches, records })
    }

    /// Metrics of detected lesions, rebuilt from the records.
    pub fn tp_metrics(&self) -> Vec<LesionMetrics> {
        self.records.iter().filter_map(LesionRecord::to_metrics).collect()
    }
}

impl LesionRecord {
    /// The pair metrics of a TP row; `None` for other rows.
    pub fn to_metrics(&self) -> Option<LesionMetrics> {
        if self.status != LesionStatus::TP {
            return None;
        }
        let (gv, pv) = (self.gt_volume_mm3?, self.pred_volume_mm3?);
        let (gd, pd) = (self.gt_diameter_mm?, self.pred_diameter_mm?);
        Some(LesionMetrics {
            gt_id: self.lesion_id,
            pred_ids: self.matched_pred_ids.split(';').filter_map(|s| s.parse().ok()).collect(),
            dice: self.dice?,
            nsd: self.nsd?,
            gt_volume_mm3: gv,
            pred_volume_mm3: pv,
            gt_diameter_mm: gd,
            pred_diameter_mm: pd,
            volume_diff_mm3: gv - pv,
            diameter_diff_mm: gd - pd,
        })
    }
}

fn join_ids(ids: &[u32]) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}
