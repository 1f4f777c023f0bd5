use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::curves::{cumulative_curves, default_thresholds, CurvePoint};
use super::strata::{SizeBand, StratumSpec};
use super::study::{LesionMetrics, LesionRecord, LesionStatus, StudyEvaluation};
use crate::error::{Error, Result};
use crate::stats::{bootstrap_ci_unordered, spearman_rho_value, BootstrapCI, BootstrapOptions, Descriptive, BOOTSTRAP_RNG};

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateOptions {
    pub strata: StratumSpec,
    pub bootstrap: BootstrapOptions,
    pub curve_thresholds: Vec<f64>,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions {
            strata: StratumSpec::default(),
            bootstrap: BootstrapOptions::default(),
            curve_thresholds: default_thresholds(),
        }
    }
}

/// One row of a detection table: a rate over one size stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub stratum: String,
    pub numerator: usize,
    pub denominator: usize,
    /// Absent when the stratum is empty.
    pub estimate: Option<BootstrapCI>,
}

impl RateRow {
    pub fn value(&self) -> Option<f64> {
        self.estimate.as_ref().map(|e| e.point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortCounts {
    pub n_cases: usize,
    pub n_studies_evaluated: usize,
    pub n_positive_studies: usize,
    pub n_negative_studies: usize,
    pub n_gt_lesions: usize,
    pub n_pred_lesions: usize,
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
}

/// Lesion-wise segmentation quality of detected lesions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationSummary {
    pub n_tp: usize,
    pub dice: Option<BootstrapCI>,
    pub nsd: Option<BootstrapCI>,
    /// Mean of ground truth minus prediction.
    pub volume_diff_mm3: Option<BootstrapCI>,
    pub diameter_diff_mm: Option<BootstrapCI>,
    pub spearman_volume: Option<BootstrapCI>,
    pub spearman_diameter: Option<BootstrapCI>,
}

/// Cohort size statistics of ground-truth lesions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub gt_diameter_mm: Descriptive,
    pub gt_volume_mm3: Descriptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub n_resamples: usize,
    pub confidence: f64,
    pub seed: u64,
    pub rng: String,
    /// Resampling unit per metric family.
    pub unit_sensitivity: String,
    pub unit_fp_per_case: String,
    pub unit_segmentation: String,
}

/// Aggregated detection, segmentation and size statistics of a cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub counts: CohortCounts,
    pub strata: StratumSpec,
    pub bootstrap: BootstrapSettings,
    /// First row covers all lesions, then one row per size band (by
    /// ground-truth diameter).
    pub sensitivity: Vec<RateRow>,
    /// First row covers all predictions, then one row per size band (by
    /// predicted diameter).
    pub fp_per_case: Vec<RateRow>,
    pub segmentation: SegmentationSummary,
    pub sizes: SizeSummary,
    pub curves: Vec<CurvePoint>,
    /// Sorted by study id.
    pub studies: Vec<StudyEvaluation>,
}

impl CohortReport {
    pub fn records(&self) -> impl Iterator<Item = &LesionRecord> {
        self.studies.iter().flat_map(|s| s.records.iter())
    }

    pub fn tp_metrics(&self) -> Vec<LesionMetrics> {
        self.records().filter_map(LesionRecord::to_metrics).collect()
    }

    pub fn overall_sensitivity(&self) -> Option<f64> {
        self.sensitivity.first().and_then(RateRow::value)
    }

    pub fn overall_fp_per_case(&self) -> Option<f64> {
        self.fp_per_case.first().and_then(RateRow::value)
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Aggregates per-study evaluations into a cohort report.
///
/// `n_cases` is the number of studies in the cohort; studies not present in
/// `studies` count as cases without predictions. The result does not depend
/// on the order of `studies`.
pub fn aggregate_cohort(studies: &[StudyEvaluation], n_cases: usize, options: &AggregateOptions) -> Result<CohortReport> {
    if studies.is_empty() || n_cases == 0 {
        return Err(Error::EmptyCohort);
    }
    if n_cases < studies.len() {
        return Err(Error::InvalidArgument(format!("n_cases {n_cases} is less than the {} evaluated studies", studies.len())));
    }
    let mut studies = studies.to_vec();
    studies.sort_by(|a, b| a.study_id.cmp(&b.study_id));
    if let Some(w) = studies.windows(2).find(|w| w[0].study_id == w[1].study_id) {
        return Err(Error::InvalidArgument(format!("duplicate study id {:?}", w[0].study_id)));
    }
    let boot = &options.bootstrap;
    let records: Vec<&LesionRecord> = studies.iter().flat_map(|s| s.records.iter()).collect();

    let n_positive = studies.iter().filter(|s| s.matches.tp_count() + s.matches.fn_count() > 0).count();
    let n_pred_lesions: usize = studies
        .iter()
        .map(|s| {
            let matched: BTreeSet<u32> = s.matches.true_positives.iter().flat_map(|tp| tp.pred_ids.iter().copied()).collect();
            matched.len() + s.matches.fp_count()
        })
        .sum();
    let tp = records.iter().filter(|r| r.status == LesionStatus::TP).count();
    let fn_ = records.iter().filter(|r| r.status == LesionStatus::FN).count();
    let fp = records.iter().filter(|r| r.status == LesionStatus::FP).count();
    let counts = CohortCounts {
        n_cases,
        n_studies_evaluated: studies.len(),
        n_positive_studies: n_positive,
        n_negative_studies: n_cases - n_positive,
        n_gt_lesions: tp + fn_,
        n_pred_lesions,
        tp,
        fn_,
        fp,
    };

    let mut bands = vec![SizeBand::all()];
    bands.extend(options.strata.bands());

    let mut sensitivity = Vec::with_capacity(bands.len());
    for band in &bands {
        let hits: Vec<f64> = records
            .iter()
            .filter(|r| r.status != LesionStatus::FP && r.gt_diameter_mm.is_some_and(|d| band.contains(d)))
            .map(|r| if r.status == LesionStatus::TP { 1.0 } else { 0.0 })
            .collect();
        let numerator = hits.iter().filter(|&&h| h > 0.0).count();
        let estimate = if hits.is_empty() { None } else { Some(bootstrap_ci_unordered(&hits, f64::total_cmp, mean, boot)?) };
        sensitivity.push(RateRow { stratum: band.label.clone(), numerator, denominator: hits.len(), estimate });
    }

    let mut fp_per_case = Vec::with_capacity(bands.len());
    for band in &bands {
        let mut per_case: Vec<f64> = studies
            .iter()
            .map(|s| {
                s.records
                    .iter()
                    .filter(|r| r.status == LesionStatus::FP && r.pred_diameter_mm.is_some_and(|d| band.contains(d)))
                    .count() as f64
            })
            .collect();
        per_case.resize(n_cases, 0.0);
        let numerator = per_case.iter().sum::<f64>() as usize;
        let estimate = Some(bootstrap_ci_unordered(&per_case, f64::total_cmp, mean, boot)?);
        fp_per_case.push(RateRow { stratum: band.label.clone(), numerator, denominator: n_cases, estimate });
    }

    let tp_metrics: Vec<LesionMetrics> = records.iter().filter_map(|r| r.to_metrics()).collect();
    let segmentation = segmentation_summary(&tp_metrics, boot)?;

    let gt_diameters: Vec<f64> = records.iter().filter_map(|r| r.gt_diameter_mm).collect();
    let gt_volumes: Vec<f64> = records.iter().filter_map(|r| r.gt_volume_mm3).collect();
    let sizes = SizeSummary { gt_diameter_mm: Descriptive::of(&gt_diameters), gt_volume_mm3: Descriptive::of(&gt_volumes) };

    let owned: Vec<LesionRecord> = records.into_iter().cloned().collect();
    let curves = cumulative_curves(&owned, n_cases, &options.curve_thresholds)?;

    Ok(CohortReport {
        counts,
        strata: options.strata.clone(),
        bootstrap: BootstrapSettings {
            n_resamples: boot.n_resamples,
            confidence: boot.confidence,
            seed: boot.seed,
            rng: BOOTSTRAP_RNG.into(),
            unit_sensitivity: "lesion".into(),
            unit_fp_per_case: "study".into(),
            unit_segmentation: "lesion".into(),
        },
        sensitivity,
        fp_per_case,
        segmentation,
        sizes,
        curves,
        studies,
    })
}

fn segmentation_summary(tp: &[LesionMetrics], boot: &BootstrapOptions) -> Result<SegmentationSummary> {
    let mean_of = |f: fn(&LesionMetrics) -> f64| -> Result<Option<BootstrapCI>> {
        if tp.is_empty() {
            return Ok(None);
        }
        let values: Vec<f64> = tp.iter().map(f).collect();
        bootstrap_ci_unordered(&values, f64::total_cmp, mean, boot).map(Some)
    };
    let rho_of = |gt: fn(&LesionMetrics) -> f64, pred: fn(&LesionMetrics) -> f64| -> Result<Option<BootstrapCI>> {
        let pairs: Vec<(f64, f64)> = tp.iter().map(|m| (gt(m), pred(m))).collect();
        let rho = |p: &[(f64, f64)]| {
            let (x, y): (Vec<f64>, Vec<f64>) = p.iter().copied().unzip();
            spearman_rho_value(&x, &y).ok()
        };
        if rho(&pairs).is_none() {
            return Ok(None);
        }
        bootstrap_ci_unordered(&pairs, |a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)), rho, boot).map(Some)
    };
    Ok(SegmentationSummary {
        n_tp: tp.len(),
        dice: mean_of(|m| m.dice)?,
        nsd: mean_of(|m| m.nsd)?,
        volume_diff_mm3: mean_of(|m| m.volume_diff_mm3)?,
        diameter_diff_mm: mean_of(|m| m.diameter_diff_mm)?,
        spearman_volume: rho_of(|m| m.gt_volume_mm3, |m| m.pred_volume_mm3)?,
        spearman_diameter: rho_of(|m| m.gt_diameter_mm, |m| m.pred_diameter_mm)?,
    })
}
