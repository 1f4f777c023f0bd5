use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lesionmetrics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lesionmetrics")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = lesionmetrics(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small phantom cohort evaluated once.
fn cohort(dir: &Path) -> (PathBuf, PathBuf) {
    let ph = dir.join("phantom");
    let run = dir.join("run");
    ok(&[
        "phantom", "--out-dir", s(&ph), "--n-positive", "12", "--n-negative", "4", "--n-lesions", "15", "--dims", "40",
        "--n-missed", "3", "--n-false-positives", "4", "--morph-steps", "-1", "--seed", "3",
    ]);
    ok(&["evaluate", "--manifest", s(&ph.join("manifest.json")), "--out-dir", s(&run), "--bootstrap-n", "500"]);
    (ph, run)
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

#[test]
fn evaluate_output_does_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let (ph, run) = cohort(dir.path());
    let other = dir.path().join("run4");
    ok(&["evaluate", "--manifest", s(&ph.join("manifest.json")), "--out-dir", s(&other), "--bootstrap-n", "500", "--workers", "4"]);
    for file in ["report.json", "report.csv", "lesions.csv"] {
        assert_eq!(fs::read(run.join(file)).unwrap(), fs::read(other.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn evaluate_directories_matches_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (ph, run) = cohort(dir.path());
    let by_dir = dir.path().join("bydir");
    ok(&["evaluate", "--gt-dir", s(&ph.join("gt")), "--pred-dir", s(&ph.join("pred")), "--out-dir", s(&by_dir), "--bootstrap-n", "500"]);
    assert_eq!(fs::read(run.join("lesions.csv")).unwrap(), fs::read(by_dir.join("lesions.csv")).unwrap());
    assert_eq!(fs::read(run.join("report.csv")).unwrap(), fs::read(by_dir.join("report.csv")).unwrap());
}

#[test]
fn self_comparison_finds_no_difference() {
    let dir = tempfile::tempdir().unwrap();
    let (_, run) = cohort(dir.path());
    for name in ["a", "b", "c"] {
        copy_dir(&run, &dir.path().join(name));
    }
    let out = dir.path().join("cmp");
    let runs: Vec<String> = ["a", "b", "c"].iter().map(|n| dir.path().join(n).display().to_string()).collect();
    ok(&["compare", "--run", &runs[0], "--run", &runs[1], "--run", &runs[2], "--out-dir", s(&out)]);
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("compare.json")).unwrap()).unwrap();
    let n_tp = doc["runs"][0]["tp"].as_f64().unwrap();
    assert!(n_tp > 0.0);
    assert_eq!(doc["pairwise"].as_array().unwrap().len(), 3);
    for pair in doc["pairwise"].as_array().unwrap() {
        assert_eq!(pair["detection"]["p_value"].as_f64(), Some(1.0));
        for metric in ["dice", "nsd", "volume_diff_mm3", "diameter_diff_mm"] {
            let m = &pair["metrics"][metric];
            assert_eq!(m["statistic"].as_f64(), Some(n_tp * n_tp / 2.0), "{metric}");
            assert_eq!(m["p_value"].as_f64(), Some(1.0), "{metric}");
            assert_eq!(m["significant"], Value::Bool(false));
        }
    }
    for metric in ["dice", "nsd"] {
        assert_eq!(doc["kruskal_wallis"][metric]["statistic"].as_f64(), Some(0.0), "{metric}");
    }
    assert!(out.join("compare.csv").exists());
}

#[test]
fn curves_and_scatter_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let (_, run) = cohort(dir.path());
    let lesions = run.join("lesions.csv");
    let cur = dir.path().join("cur");
    ok(&["curves", "--lesions", s(&lesions), "--out-dir", s(&cur), "--thresholds", "0,2,4,100"]);
    let csv = fs::read_to_string(cur.join("curves.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().last().unwrap().ends_with("NA,NA,NA"), "{csv}");
    assert!(fs::read_to_string(cur.join("curves.svg")).unwrap().starts_with("<svg"));

    let sc = dir.path().join("sc");
    ok(&["scatter", "--lesions", s(&lesions), "--out-dir", s(&sc)]);
    let doc: Value = serde_json::from_str(&fs::read_to_string(sc.join("scatter.json")).unwrap()).unwrap();
    let rho = doc["spearman_diameter"].as_f64().unwrap();
    assert!((-1.0..=1.0).contains(&rho));
    assert!(sc.join("scatter.svg").exists() && sc.join("scatter.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| lesionmetrics(args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["evaluate", "--no-such-flag"]), Some(1));
    assert_eq!(code(&["evaluate", "--gt-dir", s(dir.path()), "--pred-dir", s(dir.path()), "--confidence", "1.5"]), Some(1));
    assert_eq!(code(&["curves", "--lesions", s(&dir.path().join("missing.csv"))]), Some(2));

    // With three detections many resamples repeat one lesion, leaving the
    // size correlation undefined on more than 1% of them.
    let ph = dir.path().join("tiny");
    ok(&["phantom", "--out-dir", s(&ph), "--n-positive", "3", "--n-negative", "0", "--n-lesions", "3", "--dims", "32", "--seed", "1"]);
    let out = dir.path().join("tiny_run");
    assert_eq!(code(&["evaluate", "--manifest", s(&ph.join("manifest.json")), "--out-dir", s(&out), "--bootstrap-n", "200"]), Some(3));
}
