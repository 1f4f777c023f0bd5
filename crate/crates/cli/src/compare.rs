//! `compare`: hypothesis tests between evaluated runs of the same cohort.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lesionmetrics::matching::{LesionRecord, LesionStatus};
use lesionmetrics::stats::{chi_square_2x2, kruskal_wallis, mann_whitney_u, ChiSquareOptions, TestResult};
use serde::{Deserialize, Serialize};

use crate::args::CompareArgs;
use crate::error::{CmdResult, CommandError};
use crate::evaluate::{ReportFile, SCHEMA_VERSION};
use crate::records::read_lesions;

/// Lesion-wise distributions compared between runs.
pub const METRICS: [&str; 4] = ["dice", "nsd", "volume_diff_mm3", "diameter_diff_mm"];

pub struct Run {
    pub name: String,
    pub path: PathBuf,
    pub report: ReportFile,
    pub lesions: Vec<LesionRecord>,
}

impl Run {
    pub fn load(dir: &Path) -> CmdResult<Self> {
        let report = ReportFile::load(&dir.join("report.json"))?;
        let lesions = read_lesions(&dir.join("lesions.csv"))?;
        let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or("run").to_string();
        Ok(Run { name, path: dir.to_path_buf(), report, lesions })
    }

    fn tp_fn(&self) -> (u64, u64) {
        let c = &self.report.report.counts;
        (c.tp as u64, c.fn_ as u64)
    }

    /// Values of `metric` over detected lesions; differences are gt − pred.
    pub fn metric(&self, metric: &str) -> Vec<f64> {
        self.lesions
            .iter()
            .filter(|r| r.status == LesionStatus::TP)
            .filter_map(|r| match metric {
                "dice" => r.dice,
                "nsd" => r.nsd,
                "volume_diff_mm3" => Some(r.gt_volume_mm3? - r.pred_volume_mm3?),
                "diameter_diff_mm" => Some(r.gt_diameter_mm? - r.pred_diameter_mm?),
                _ => None,
            })
            .collect()
    }

    /// Ground-truth inventory: study id → number of ground-truth lesions.
    fn cohort(&self) -> BTreeMap<&str, usize> {
        self.report.report.studies.iter().map(|s| (s.study_id.as_str(), s.matches.tp_count() + s.matches.fn_count())).collect()
    }
}

/// A test outcome, or why it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestEntry {
    Done {
        #[serde(flatten)]
        result: TestResult,
        significant: bool,
    },
    Failed {
        error: String,
    },
}

impl TestEntry {
    fn from(r: lesionmetrics::Result<TestResult>, alpha: f64) -> Self {
        match r {
            Ok(result) => TestEntry::Done { significant: result.is_significant(alpha), result },
            Err(e) => TestEntry::Failed { error: e.to_string() },
        }
    }

    pub fn result(&self) -> Option<&TestResult> {
        match self {
            TestEntry::Done { result, .. } => Some(result),
            TestEntry::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub path: PathBuf,
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub n_cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub run_a: String,
    pub run_b: String,
    /// Chi-square on detected/missed counts.
    pub detection: TestEntry,
    /// Mann-Whitney U per lesion-wise metric.
    pub metrics: BTreeMap<String, TestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub alpha: f64,
    pub runs: Vec<RunSummary>,
    pub pairwise: Vec<PairComparison>,
    /// Kruskal-Wallis per metric across all runs; present with more than two runs.
    pub kruskal_wallis: Option<BTreeMap<String, TestEntry>>,
}

pub fn compare_runs(runs: &[Run], alpha: f64, yates: bool) -> CmdResult<Comparison> {
    if runs.len() < 2 {
        return Err(CommandError::Config("compare needs at least two runs".into()));
    }
    let reference = runs[0].cohort();
    for run in &runs[1..] {
        if run.cohort() != reference || run.report.report.counts.n_cases != runs[0].report.report.counts.n_cases {
            return Err(CommandError::Data(format!(
                "runs {} and {} did not evaluate the same ground-truth cohort",
                runs[0].path.display(),
                run.path.display()
            )));
        }
    }
    let summaries = runs
        .iter()
        .map(|r| {
            let c = &r.report.report.counts;
            RunSummary { name: r.name.clone(), path: r.path.clone(), tp: c.tp, fn_: c.fn_, fp: c.fp, n_cases: c.n_cases }
        })
        .collect();

    let mut pairwise = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (a, b) = (&runs[i], &runs[j]);
            let (tp_a, fn_a) = a.tp_fn();
            let (tp_b, fn_b) = b.tp_fn();
            let detection = TestEntry::from(chi_square_2x2([[tp_a, fn_a], [tp_b, fn_b]], ChiSquareOptions { yates }), alpha);
            let metrics = METRICS
                .iter()
                .map(|&m| (m.to_string(), TestEntry::from(mann_whitney_u(&a.metric(m), &b.metric(m)), alpha)))
                .collect();
            pairwise.push(PairComparison { run_a: a.name.clone(), run_b: b.name.clone(), detection, metrics });
        }
    }

    let kruskal_wallis = (runs.len() > 2).then(|| {
        METRICS
            .iter()
            .map(|&m| {
                let groups: Vec<Vec<f64>> = runs.iter().map(|r| r.metric(m)).collect();
                let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
                (m.to_string(), TestEntry::from(kruskal_wallis(&refs), alpha))
            })
            .collect()
    });

    Ok(Comparison { schema_version: SCHEMA_VERSION, alpha, runs: summaries, pairwise, kruskal_wallis })
}

fn csv_row(w: &mut csv::Writer<fs::File>, comparison: &str, metric: &str, entry: &TestEntry) -> CmdResult<()> {
    match entry {
        TestEntry::Done { result, significant } => w.write_record([
            comparison,
            metric,
            serde_json::to_value(result.method)?.as_str().unwrap_or_default(),
            &format!("{}", result.statistic),
            &format!("{}", result.p_value),
            if *significant { "true" } else { "false" },
            "",
        ])?,
        TestEntry::Failed { error } => w.write_record([comparison, metric, "", "NA", "NA", "NA", error.as_str()])?,
    }
    Ok(())
}

pub fn run_compare(args: &CompareArgs) -> CmdResult<Comparison> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CommandError::Config(format!("--alpha must be in (0, 1), got {}", args.alpha)));
    }
    let runs = args.runs.iter().map(|d| Run::load(d)).collect::<CmdResult<Vec<_>>>()?;
    let comparison = compare_runs(&runs, args.alpha, args.yates)?;

    fs::create_dir_all(&args.out_dir)?;
    let mut json = serde_json::to_string_pretty(&comparison)?;
    json.push('\n');
    fs::write(args.out_dir.join("compare.json"), json)?;

    let mut w = csv::Writer::from_path(args.out_dir.join("compare.csv"))?;
    w.write_record(["comparison", "metric", "method", "statistic", "p_value", "significant", "error"])?;
    for p in &comparison.pairwise {
        let name = format!("{} vs {}", p.run_a, p.run_b);
        csv_row(&mut w, &name, "detection", &p.detection)?;
        for (metric, entry) in &p.metrics {
            csv_row(&mut w, &name, metric, entry)?;
        }
    }
    if let Some(kw) = &comparison.kruskal_wallis {
        for (metric, entry) in kw {
            csv_row(&mut w, "all runs", metric, entry)?;
        }
    }
    w.flush()?;
    Ok(comparison)
}
