//! `evaluate`: per-study matching and metrics, then cohort aggregation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lesionmetrics::matching::{aggregate_cohort, default_thresholds, AggregateOptions, BandMode, CohortReport, RateRow, StratumSpec, StudyEvaluation};
use lesionmetrics::stats::{BootstrapCI, BootstrapOptions};
use lesionmetrics::{binarize, connected_components, load_volume, BinaryMask, Connectivity};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::EvaluateArgs;
use crate::error::{CmdResult, CommandError};
use crate::format::fixed2;
use crate::records::write_lesions;

pub const SCHEMA_VERSION: u32 = 1;
/// Largest tolerated fraction of skipped studies.
const MAX_SKIPPED_FRACTION: f64 = 0.10;

/// Validated evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub gt_dir: Option<PathBuf>,
    pub pred_dir: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub tau_mm: f64,
    pub connectivity: Connectivity,
    pub strata: StratumSpec,
    pub bootstrap_n: usize,
    pub confidence: f64,
    pub seed: u64,
    pub threshold: f64,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub workers: usize,
}

impl RunConfig {
    pub fn from_args(args: &EvaluateArgs) -> CmdResult<Self> {
        let connectivity: Connectivity = args.connectivity.parse()?;
        let mode: BandMode = args.band_mode.parse()?;
        let strata = StratumSpec::parse(&args.strata, mode)?;
        if !(args.tau_mm.is_finite() && args.tau_mm > 0.0) {
            return Err(CommandError::Config(format!("--tau-mm must be positive, got {}", args.tau_mm)));
        }
        if args.bootstrap_n < 100 {
            return Err(CommandError::Config(format!("--bootstrap-n must be at least 100, got {}", args.bootstrap_n)));
        }
        if !(args.confidence > 0.0 && args.confidence < 1.0) {
            return Err(CommandError::Config(format!("--confidence must be in (0, 1), got {}", args.confidence)));
        }
        if !args.threshold.is_finite() {
            return Err(CommandError::Config("--threshold must be finite".into()));
        }
        let workers = match args.workers {
            Some(0) => return Err(CommandError::Config("--workers must be at least 1".into())),
            Some(n) => n,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        Ok(RunConfig {
            gt_dir: args.gt_dir.clone(),
            pred_dir: args.pred_dir.clone(),
            manifest: args.manifest.clone(),
            tau_mm: args.tau_mm,
            connectivity,
            strata,
            bootstrap_n: args.bootstrap_n,
            confidence: args.confidence,
            seed: args.seed,
            threshold: args.threshold,
            out_dir: args.out_dir.clone(),
            workers,
        })
    }
}

/// A ground-truth file and its prediction, if one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPair {
    pub study_id: String,
    pub gt: PathBuf,
    pub pred: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedStudy {
    pub study_id: String,
    pub error: String,
}

/// Contents of report.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub config: RunConfig,
    pub skipped_studies: Vec<SkippedStudy>,
    #[serde(flatten)]
    pub report: CohortReport,
}

impl ReportFile {
    pub fn load(path: &Path) -> CmdResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CommandError::Data(format!("{}: {e}", path.display())))?;
        let file: ReportFile = serde_json::from_str(&text).map_err(|e| CommandError::Data(format!("{}: {e}", path.display())))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CommandError::Data(format!("{}: unsupported schema_version {}", path.display(), file.schema_version)));
        }
        Ok(file)
    }
}

fn volume_stem(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    name.strip_suffix(".nii.gz").or_else(|| name.strip_suffix(".nii")).map(str::to_owned)
}

fn list_volumes(dir: &Path) -> CmdResult<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CommandError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        if let Some(stem) = volume_stem(&path) {
            if let Some(prev) = out.insert(stem.clone(), path.clone()) {
                return Err(CommandError::Config(format!("study {stem:?} has two files: {} and {}", prev.display(), path.display())));
            }
        }
    }
    Ok(out)
}

/// Pairs files by stem. Predictions without ground truth are an error.
pub fn pair_directories(gt_dir: &Path, pred_dir: &Path) -> CmdResult<Vec<StudyPair>> {
    let gt = list_volumes(gt_dir)?;
    let mut pred = list_volumes(pred_dir)?;
    if gt.is_empty() {
        return Err(CommandError::Config(format!("no .nii or .nii.gz files in {}", gt_dir.display())));
    }
    let pairs = gt
        .into_iter()
        .map(|(study_id, gt)| {
            let pred = pred.remove(&study_id);
            StudyPair { study_id, gt, pred }
        })
        .collect();
    if !pred.is_empty() {
        let orphans: Vec<_> = pred.keys().cloned().collect();
        return Err(CommandError::Config(format!("predictions without ground truth: {}", orphans.join(", "))));
    }
    Ok(pairs)
}

#[derive(Deserialize)]
struct ManifestFile {
    studies: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct ManifestEntry {
    study_id: String,
    gt_path: PathBuf,
    pred_path: Option<PathBuf>,
}

/// Pairs listed in a manifest; a listed prediction that does not exist
/// counts as missing.
pub fn pair_manifest(path: &Path) -> CmdResult<Vec<StudyPair>> {
    let text = fs::read_to_string(path).map_err(|e| CommandError::Config(format!("cannot read manifest {}: {e}", path.display())))?;
    let file: ManifestFile = serde_json::from_str(&text).map_err(|e| CommandError::Config(format!("bad manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut pairs: Vec<StudyPair> = file
        .studies
        .into_iter()
        .map(|e| StudyPair {
            study_id: e.study_id,
            gt: base.join(e.gt_path),
            pred: e.pred_path.map(|p| base.join(p)).filter(|p| p.exists()),
        })
        .collect();
    pairs.sort_by(|a, b| a.study_id.cmp(&b.study_id));
    if let Some(w) = pairs.windows(2).find(|w| w[0].study_id == w[1].study_id) {
        return Err(CommandError::Config(format!("manifest lists study {:?} twice", w[0].study_id)));
    }
    if pairs.is_empty() {
        return Err(CommandError::Config("manifest lists no studies".into()));
    }
    Ok(pairs)
}

fn load_mask(path: &Path, threshold: f64) -> lesionmetrics::Result<BinaryMask> {
    let grid = load_volume(path)?;
    Ok(binarize(&grid, threshold)?.with_origin(grid.origin()))
}

pub fn evaluate_study(pair: &StudyPair, config: &RunConfig) -> lesionmetrics::Result<StudyEvaluation> {
    let gt = load_mask(&pair.gt, config.threshold)?;
    let pred = match &pair.pred {
        Some(p) => load_mask(p, config.threshold)?,
        None => BinaryMask::empty(*gt.geometry()),
    };
    gt.geometry().ensure_compatible(pred.geometry())?;
    let gt_set = connected_components(&gt, config.connectivity);
    let pred_set = connected_components(&pred, config.connectivity);
    StudyEvaluation::evaluate(pair.study_id.clone(), &gt_set, &pred_set, config.tau_mm)
}

/// Output of a completed run.
pub struct Evaluation {
    pub file: ReportFile,
}

pub fn run_evaluate(config: &RunConfig) -> CmdResult<Evaluation> {
    let pairs = match (&config.manifest, &config.gt_dir, &config.pred_dir) {
        (Some(m), _, _) => pair_manifest(m)?,
        (None, Some(g), Some(p)) => pair_directories(g, p)?,
        _ => return Err(CommandError::Config("either --manifest or both --gt-dir and --pred-dir are required".into())),
    };
    for pair in pairs.iter().filter(|p| p.pred.is_none()) {
        warn!("{}: no prediction file, evaluating as empty prediction", pair.study_id);
    }
    info!("evaluating {} studies with {} workers", pairs.len(), config.workers);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CommandError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(String, lesionmetrics::Result<StudyEvaluation>)> =
        pool.install(|| pairs.par_iter().map(|p| (p.study_id.clone(), evaluate_study(p, config))).collect());

    let mut studies = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (study_id, result) in results {
        match result {
            Ok(s) => studies.push(s),
            Err(e) => {
                warn!("{study_id}: skipped: {e}");
                skipped.push(SkippedStudy { study_id, error: e.to_string() });
            }
        }
    }
    if skipped.len() as f64 > MAX_SKIPPED_FRACTION * pairs.len() as f64 {
        let first = &skipped[0];
        return Err(CommandError::Data(format!(
            "{} of {} studies skipped (first: {}: {})",
            skipped.len(),
            pairs.len(),
            first.study_id,
            first.error
        )));
    }

    let options = AggregateOptions {
        strata: config.strata.clone(),
        bootstrap: BootstrapOptions { n_resamples: config.bootstrap_n, confidence: config.confidence, seed: config.seed, workers: config.workers },
        curve_thresholds: default_thresholds(),
    };
    let n_cases = studies.len();
    let report = aggregate_cohort(&studies, n_cases, &options)?;
    Ok(Evaluation { file: ReportFile { schema_version: SCHEMA_VERSION, config: config.clone(), skipped_studies: skipped, report } })
}

/// Writes report.json, report.csv and lesions.csv into `out_dir`.
pub fn write_outputs(eval: &Evaluation, out_dir: &Path) -> CmdResult<()> {
    fs::create_dir_all(out_dir)?;
    let mut json = serde_json::to_string_pretty(&eval.file)?;
    json.push('\n');
    fs::write(out_dir.join("report.json"), json)?;
    write_report_csv(&eval.file.report, &out_dir.join("report.csv"))?;
    let records: Vec<_> = eval.file.report.records().collect();
    write_lesions(&out_dir.join("lesions.csv"), &records)?;
    Ok(())
}

pub const REPORT_HEADER: [&str; 7] = ["metric", "stratum", "events", "n", "point", "lower", "upper"];

fn ci_cells(ci: Option<&BootstrapCI>) -> [String; 3] {
    [fixed2(ci.map(|c| c.point)), fixed2(ci.map(|c| c.lower)), fixed2(ci.map(|c| c.upper))]
}

/// Table-shaped summary: one row per metric and stratum, two decimals.
pub fn write_report_csv(report: &CohortReport, path: &Path) -> CmdResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(REPORT_HEADER)?;
    let rate = |w: &mut csv::Writer<fs::File>, metric: &str, row: &RateRow| -> CmdResult<()> {
        let [p, l, u] = ci_cells(row.estimate.as_ref());
        w.write_record([metric.to_string(), row.stratum.clone(), row.numerator.to_string(), row.denominator.to_string(), p, l, u])?;
        Ok(())
    };
    for row in &report.sensitivity {
        rate(&mut w, "sensitivity", row)?;
    }
    for row in &report.fp_per_case {
        rate(&mut w, "fp_per_case", row)?;
    }
    let seg = &report.segmentation;
    let n_tp = seg.n_tp.to_string();
    for (metric, ci) in [
        ("dice", &seg.dice),
        ("nsd", &seg.nsd),
        ("volume_diff_mm3", &seg.volume_diff_mm3),
        ("diameter_diff_mm", &seg.diameter_diff_mm),
        ("spearman_volume", &seg.spearman_volume),
        ("spearman_diameter", &seg.spearman_diameter),
    ] {
        let [p, l, u] = ci_cells(ci.as_ref());
        w.write_record([metric, "detected", "", &n_tp, &p, &l, &u])?;
    }
    w.flush()?;
    Ok(())
}
