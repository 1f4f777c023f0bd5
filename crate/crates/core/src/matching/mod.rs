//! Prediction-to-ground-truth matching and lesion-wise metrics.
//!
//! A ground-truth lesion counts as detected when any predicted voxel
//! overlaps it. Predictions overlapping no ground-truth lesion are false
//! positives.

mod cohort;
mod curves;
mod overlap;
mod strata;
mod study;

pub use cohort::{aggregate_cohort, AggregateOptions, CohortCounts, CohortReport, BootstrapSettings, RateRow, SegmentationSummary, SizeSummary};
pub use curves::{cumulative_curves, default_thresholds, CurvePoint};
pub use overlap::{dice, dice_lesionwise, nsd, nsd_lesionwise, DEFAULT_TAU_MM};
pub use strata::{BandMode, SizeBand, StratumSpec};
pub use study::{
    size_correlation, study_metrics, LesionMetrics, LesionRecord, LesionStatus, StudyEvaluation,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lesion::LesionSet;

/// A detected ground-truth lesion and every prediction overlapping it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruePositive {
    pub gt_id: u32,
    pub pred_ids: Vec<u32>,
}

/// Per-study assignment of predictions to ground-truth lesions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub true_positives: Vec<TruePositive>,
    pub false_negatives: Vec<u32>,
    pub false_positives: Vec<u32>,
}

impl MatchResult {
    pub fn tp_count(&self) -> usize {
        self.true_positives.len()
    }

    pub fn fn_count(&self) -> usize {
        self.false_negatives.len()
    }

    pub fn fp_count(&self) -> usize {
        self.false_positives.len()
    }
}

/// Matches predicted lesions to ground-truth lesions by any voxel overlap.
///
/// A prediction overlapping several ground-truth lesions is listed under
/// each of them. Output ids are ascending.
pub fn match_lesions(gt: &LesionSet, pred: &LesionSet) -> Result<MatchResult> {
    gt.geometry.ensure_compatible(&pred.geometry)?;
    let gt_labels = gt.label_volume();
    let mut overlaps: Vec<Vec<u32>> = vec![Vec::new(); gt.len()];
    let mut false_positives = Vec::new();
    for p in &pred.lesions {
        let mut hit: Vec<u32> = p.voxels.iter().map(|&v| gt_labels[v]).filter(|&l| l != 0).collect();
        hit.sort_unstable();
        hit.dedup();
        if hit.is_empty() {
            false_positives.push(p.id);
        }
        for g in hit {
            overlaps[g as usize - 1].push(p.id);
        }
    }
    let mut result = MatchResult { false_positives, ..Default::default() };
    for (lesion, pred_ids) in gt.lesions.iter().zip(overlaps) {
        if pred_ids.is_empty() {
            result.false_negatives.push(lesion.id);
        } else {
            result.true_positives.push(TruePositive { gt_id: lesion.id, pred_ids });
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lesion::{connected_components, Connectivity};
    use crate::volume::{BinaryMask, Geometry};
    use crate::Error;

    fn set(dims: [usize; 3], boxes: &[([usize; 3], [usize; 3])]) -> LesionSet {
        let geometry = Geometry::new(dims, [0.5; 3]).unwrap();
        let mask = BinaryMask::from_fn(geometry, |x, y, z| {
            boxes.iter().any(|(lo, hi)| (lo[0]..hi[0]).contains(&x) && (lo[1]..hi[1]).contains(&y) && (lo[2]..hi[2]).contains(&z))
        });
        connected_components(&mask, Connectivity::TwentySix)
    }

    const A: ([usize; 3], [usize; 3]) = ([1, 1, 1], [3, 3, 3]);
    const B: ([usize; 3], [usize; 3]) = ([6, 1, 1], [8, 3, 3]);

    #[test]
    fn identical_sets_match_fully() {
        let gt = set([10, 5, 5], &[A, B]);
        let m = match_lesions(&gt, &gt.clone()).unwrap();
        assert_eq!((m.tp_count(), m.fn_count(), m.fp_count()), (2, 0, 0));
    }

    #[test]
    fn partial_detection() {
        let gt = set([10, 5, 5], &[A, B]);
        let pred = set([10, 5, 5], &[([2, 2, 2], [3, 3, 3])]);
        let m = match_lesions(&gt, &pred).unwrap();
        assert_eq!((m.tp_count(), m.fn_count(), m.fp_count()), (1, 1, 0));
        assert_eq!(m.false_negatives, vec![2]);
    }

    #[test]
    fn disjoint_prediction_is_false_positive() {
        let gt = set([10, 5, 5], &[A, B]);
        let pred = set([10, 5, 5], &[([4, 0, 0], [5, 1, 1])]);
        let m = match_lesions(&gt, &pred).unwrap();
        assert_eq!((m.tp_count(), m.fn_count(), m.fp_count()), (0, 2, 1));
    }

    #[test]
    fn spanning_prediction_credits_both() {
        let gt = set([10, 5, 5], &[A, B]);
        let pred = set([10, 5, 5], &[([2, 2, 2], [7, 3, 3])]);
        let m = match_lesions(&gt, &pred).unwrap();
        assert_eq!(m.true_positives, vec![TruePositive { gt_id: 1, pred_ids: vec![1] }, TruePositive { gt_id: 2, pred_ids: vec![1] }]);
        assert_eq!(m.fp_count(), 0);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let gt = set([10, 5, 5], &[A]);
        let pred = set([10, 5, 6], &[A]);
        assert!(matches!(match_lesions(&gt, &pred), Err(Error::IncompatibleGrids(_))));
    }
}
