//! `curves`: cumulative diameter curves from lesions.csv.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use lesionmetrics::matching::{cumulative_curves, default_thresholds, CurvePoint, LesionRecord};
use log::info;

use crate::args::CurvesArgs;
use crate::error::{CmdResult, CommandError};
use crate::evaluate::ReportFile;
use crate::format::{fixed2, parse_list};
use crate::records::read_lesions;
use crate::svg::{compose, line_panel, Axis, Series};

/// Number of studies behind a lesion table: an explicit value, else the
/// run's report.json, else the studies that appear in the table (which
/// misses studies without any lesion).
fn resolve_n_cases(args: &CurvesArgs, records: &[LesionRecord]) -> CmdResult<usize> {
    if let Some(n) = args.n_cases {
        return Ok(n);
    }
    let sibling = args.lesions.parent().map(|p| p.join("report.json"));
    let report: Option<PathBuf> = args.report.clone().or(sibling.filter(|p| p.exists()));
    if let Some(path) = report {
        let n = ReportFile::load(&path)?.report.counts.n_cases;
        info!("n_cases = {n} from {}", path.display());
        return Ok(n);
    }
    let n = records.iter().map(|r| r.study_id.as_str()).collect::<BTreeSet<_>>().len();
    log::warn!("no report.json found; counting {n} studies present in the lesion table");
    Ok(n)
}

pub fn run_curves(args: &CurvesArgs) -> CmdResult<Vec<CurvePoint>> {
    let records = read_lesions(&args.lesions)?;
    if records.is_empty() {
        return Err(CommandError::Data(format!("{} contains no lesions", args.lesions.display())));
    }
    let thresholds = match &args.thresholds {
        Some(s) => parse_list(s).map_err(CommandError::Config)?,
        None => default_thresholds(),
    };
    let n_cases = resolve_n_cases(args, &records)?;
    let points = cumulative_curves(&records, n_cases, &thresholds)?;
    fs::create_dir_all(&args.out_dir)?;
    write_curves_csv(&points, &args.out_dir.join("curves.csv"))?;
    fs::write(args.out_dir.join("curves.svg"), curves_svg(&points))?;
    Ok(points)
}

pub fn write_curves_csv(points: &[CurvePoint], path: &Path) -> CmdResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["threshold_mm", "n_gt", "n_tp", "n_fp", "sensitivity", "fp_per_case", "mean_dice"])?;
    for p in points {
        w.write_record([
            fixed2(Some(p.threshold_mm)),
            p.n_gt.to_string(),
            p.n_tp.to_string(),
            p.n_fp.to_string(),
            fixed2(p.sensitivity),
            fixed2(p.fp_per_case),
            fixed2(p.mean_dice),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn curves_svg(points: &[CurvePoint]) -> String {
    let xs = || points.iter().map(|p| p.threshold_mm);
    let x_axis = || {
        let lo = xs().fold(f64::INFINITY, f64::min);
        let hi = xs().fold(f64::NEG_INFINITY, f64::max);
        Axis::new("minimum diameter [mm]", lo, hi)
    };
    let series = |label: &str, f: fn(&CurvePoint) -> Option<f64>| Series { label: label.into(), points: points.iter().map(|p| (p.threshold_mm, f(p))).collect() };
    let fp = series("FP/case", |p| p.fp_per_case);
    let fp_axis = Axis::fit("FP/case", fp.points.iter().filter_map(|p| p.1));
    compose(&[
        line_panel("Cumulative sensitivity", x_axis(), Axis::new("sensitivity", 0.0, 1.0), &[series("sensitivity", |p| p.sensitivity)]),
        line_panel("Cumulative FP/case", x_axis(), fp_axis, &[fp]),
        line_panel("Mean DICE of detected lesions", x_axis(), Axis::new("DICE", 0.0, 1.0), &[series("DICE", |p| p.mean_dice)]),
    ])
}
