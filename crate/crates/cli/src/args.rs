use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "lesionmetrics", version, about = "Lesion-wise detection and segmentation evaluation of 3D masks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate predictions against ground truth and write report files.
    Evaluate(EvaluateArgs),
    /// Test for differences between two or more evaluated runs.
    Compare(CompareArgs),
    /// Cumulative sensitivity, FP/case and DICE over a diameter threshold.
    Curves(CurvesArgs),
    /// Ground-truth versus predicted sizes of detected lesions.
    Scatter(ScatterArgs),
    /// Generate a synthetic phantom cohort.
    Phantom(PhantomArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Ground-truth masks (.nii / .nii.gz), paired with predictions by file stem.
    #[arg(long, required_unless_present = "manifest")]
    pub gt_dir: Option<PathBuf>,
    /// Predicted masks; a missing file counts as an empty prediction.
    #[arg(long, required_unless_present = "manifest")]
    pub pred_dir: Option<PathBuf>,
    /// JSON file listing studies as {"studies": [{"study_id", "gt_path", "pred_path"}]}; paths are relative to the file.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// NSD tolerance in mm.
    #[arg(long, default_value_t = 0.5)]
    pub tau_mm: f64,
    /// 6, 18 or 26.
    #[arg(long, default_value = "26")]
    pub connectivity: String,
    /// Stratum boundaries in mm.
    #[arg(long, default_value = "2,4")]
    pub strata: String,
    /// overlapping or disjoint.
    #[arg(long, default_value = "overlapping")]
    pub band_mode: String,
    #[arg(long, default_value_t = 10_000)]
    pub bootstrap_n: usize,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Voxels above this value are foreground.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Output directory of an `evaluate` run; give at least two.
    #[arg(long = "run", required = true, num_args = 1)]
    pub runs: Vec<PathBuf>,
    #[arg(long, default_value = "compare")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Apply Yates' correction to the detection chi-square test.
    #[arg(long)]
    pub yates: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CurvesArgs {
    /// lesions.csv written by `evaluate`.
    #[arg(long)]
    pub lesions: PathBuf,
    /// Comma-separated thresholds in mm; defaults to 0 to 10 in 0.5 steps.
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Number of studies in the cohort. Defaults to the value in report.json.
    #[arg(long)]
    pub n_cases: Option<usize>,
    /// report.json of the same run; defaults to the file next to the lesions file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value = "curves")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScatterArgs {
    #[arg(long)]
    pub lesions: PathBuf,
    #[arg(long, default_value = "scatter")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PhantomArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 101)]
    pub n_positive: usize,
    #[arg(long, default_value_t = 41)]
    pub n_negative: usize,
    /// Ground-truth lesions in total (at least one per positive study).
    #[arg(long, default_value_t = 124)]
    pub n_lesions: usize,
    #[arg(long, default_value_t = 1.0)]
    pub diameter_min_mm: f64,
    #[arg(long, default_value_t = 8.0)]
    pub diameter_max_mm: f64,
    /// Voxels per axis, one value or three comma-separated.
    #[arg(long, default_value = "64")]
    pub dims: String,
    /// Voxel spacing in mm, one value or three comma-separated.
    #[arg(long, default_value = "0.5")]
    pub spacing: String,
    /// Lesions left out of the prediction, chosen at random.
    #[arg(long, default_value_t = 0)]
    pub n_missed: usize,
    /// Leave out every lesion with measured diameter below this.
    #[arg(long)]
    pub miss_below_mm: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub n_false_positives: usize,
    #[arg(long, default_value_t = 1.0)]
    pub fp_diameter_min_mm: f64,
    #[arg(long, default_value_t = 6.0)]
    pub fp_diameter_max_mm: f64,
    /// Dilation (positive) or erosion (negative) steps applied to predictions.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub morph_steps: i32,
    /// Prediction shift in mm, three comma-separated values.
    #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
    pub offset_mm: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
