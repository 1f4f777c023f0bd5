//! `scatter`: ground-truth versus predicted sizes of detected lesions.

use std::fs;

use lesionmetrics::matching::{size_correlation, LesionMetrics, LesionRecord};
use serde::{Deserialize, Serialize};

use crate::args::ScatterArgs;
use crate::error::CmdResult;
use crate::format::fixed2;
use crate::records::read_lesions;
use crate::svg::{compose, scatter_panel, Axis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSummary {
    pub n_detected: usize,
    pub spearman_diameter: f64,
    pub spearman_volume: f64,
}

pub fn run_scatter(args: &ScatterArgs) -> CmdResult<ScatterSummary> {
    let records = read_lesions(&args.lesions)?;
    let detected: Vec<(&LesionRecord, LesionMetrics)> = records.iter().filter_map(|r| Some((r, r.to_metrics()?))).collect();
    let metrics: Vec<LesionMetrics> = detected.iter().map(|(_, m)| m.clone()).collect();
    let (rho_volume, rho_diameter) = size_correlation(&metrics)?;
    let summary = ScatterSummary { n_detected: metrics.len(), spearman_diameter: rho_diameter, spearman_volume: rho_volume };

    fs::create_dir_all(&args.out_dir)?;
    let mut w = csv::Writer::from_path(args.out_dir.join("scatter.csv"))?;
    w.write_record(["study_id", "lesion_id", "gt_diameter_mm", "pred_diameter_mm", "gt_volume_mm3", "pred_volume_mm3"])?;
    for (r, m) in &detected {
        w.write_record([
            r.study_id.clone(),
            r.lesion_id.to_string(),
            fixed2(Some(m.gt_diameter_mm)),
            fixed2(Some(m.pred_diameter_mm)),
            fixed2(Some(m.gt_volume_mm3)),
            fixed2(Some(m.pred_volume_mm3)),
        ])?;
    }
    w.flush()?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(args.out_dir.join("scatter.json"), json)?;
    fs::write(args.out_dir.join("scatter.svg"), scatter_svg(&metrics, &summary))?;
    Ok(summary)
}

/// Predicted size on x, ground truth on y, with the identity line.
pub fn scatter_svg(metrics: &[LesionMetrics], summary: &ScatterSummary) -> String {
    let panel = |title: &str, unit: &str, pairs: Vec<(f64, f64)>, rho: f64| {
        let all = pairs.iter().flat_map(|&(a, b)| [a, b]).collect::<Vec<_>>();
        let x = Axis::fit(format!("predicted [{unit}]"), all.iter().copied());
        let y = Axis::fit(format!("ground truth [{unit}]"), all.iter().copied());
        scatter_panel(title, x, y, &pairs, &format!("Spearman rho = {rho:.2} (n = {})", pairs.len()), true)
    };
    compose(&[
        panel("Maximal diameter", "mm", metrics.iter().map(|m| (m.pred_diameter_mm, m.gt_diameter_mm)).collect(), summary.spearman_diameter),
        panel("Volume", "mm³", metrics.iter().map(|m| (m.pred_volume_mm3, m.gt_volume_mm3)).collect(), summary.spearman_volume),
    ])
}
