use serde::{Deserialize, Serialize};

use super::study::{LesionRecord, LesionStatus};
use crate::error::{Error, Result};

/// Metrics restricted to lesions at least `threshold_mm` in diameter.
/// `None` marks an empty selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold_mm: f64,
    pub n_gt: usize,
    pub n_tp: usize,
    pub n_fp: usize,
    pub sensitivity: Option<f64>,
    pub fp_per_case: Option<f64>,
    pub mean_dice: Option<f64>,
}

/// 0 to 10 mm in 0.5 mm steps.
pub fn default_thresholds() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.5).collect()
}

/// Cumulative diameter curves.
///
/// At threshold `t`: sensitivity over ground-truth lesions with diameter
/// ≥ t, false positives per case over unmatched predictions with diameter
/// ≥ t, and mean DICE over detected lesions with ground-truth diameter ≥ t.
/// The FP rate is undefined once no lesion of either kind reaches `t`.
pub fn cumulative_curves(records: &[LesionRecord], n_cases: usize, thresholds: &[f64]) -> Result<Vec<CurvePoint>> {
    if thresholds.iter().any(|t| !t.is_finite()) || thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(format!("curve thresholds must be finite and ascending: {thresholds:?}")));
    }
    let points = thresholds
        .iter()
        .map(|&t| {
            let mut n_gt = 0;
            let mut n_tp = 0;
            let mut n_fp = 0;
            let mut dice_sum = 0.0;
            let mut n_pred = 0;
            for r in records {
                if r.gt_diameter_mm.is_some_and(|d| d >= t) {
                    n_gt += 1;
                    if r.status == LesionStatus::TP {
                        n_tp += 1;
                        dice_sum += r.dice.unwrap_or(0.0);
                    }
                }
                if r.pred_diameter_mm.is_some_and(|d| d >= t) {
                    n_pred += 1;
                    if r.status == LesionStatus::FP {
                        n_fp += 1;
                    }
                }
            }
            CurvePoint {
                threshold_mm: t,
                n_gt,
                n_tp,
                n_fp,
                sensitivity: (n_gt > 0).then(|| n_tp as f64 / n_gt as f64),
                fp_per_case: (n_cases > 0 && n_gt + n_pred > 0).then(|| n_fp as f64 / n_cases as f64),
                mean_dice: (n_tp > 0).then(|| dice_sum / n_tp as f64),
            }
        })
        .collect();
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(d: f64, hit: bool, dice: f64) -> LesionRecord {
        LesionRecord {
            study_id: "s".into(),
            lesion_id: 1,
            status: if hit { LesionStatus::TP } else { LesionStatus::FN },
            gt_diameter_mm: Some(d),
            pred_diameter_mm: hit.then_some(d),
            gt_volume_mm3: Some(1.0),
            pred_volume_mm3: hit.then_some(1.0),
            dice: hit.then_some(dice),
            nsd: hit.then_some(1.0),
            matched_pred_ids: String::new(),
        }
    }

    fn fp(d: f64) -> LesionRecord {
        LesionRecord {
            status: LesionStatus::FP,
            gt_diameter_mm: None,
            gt_volume_mm3: None,
            dice: None,
            nsd: None,
            ..gt(d, true, 0.0)
        }
    }

    #[test]
    fn threshold_zero_gives_overall() {
        let records = vec![gt(1.0, false, 0.0), gt(5.0, true, 0.8), fp(1.5)];
        let c = cumulative_curves(&records, 4, &[0.0]).unwrap();
        assert_eq!(c[0].sensitivity, Some(0.5));
        assert_eq!(c[0].fp_per_case, Some(0.25));
        assert_eq!(c[0].mean_dice, Some(0.8));
    }

    #[test]
    fn beyond_all_lesions_is_undefined() {
        let records = vec![gt(1.0, false, 0.0), gt(5.0, true, 0.8), fp(1.5)];
        let c = cumulative_curves(&records, 4, &[2.0, 6.0]).unwrap();
        assert_eq!(c[0].sensitivity, Some(1.0));
        assert_eq!(c[0].fp_per_case, Some(0.0));
        assert_eq!((c[1].sensitivity, c[1].fp_per_case, c[1].mean_dice), (None, None, None));
    }

    #[test]
    fn rejects_descending_thresholds() {
        assert!(cumulative_curves(&[], 1, &[2.0, 1.0]).is_err());
    }
}
