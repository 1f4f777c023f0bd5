//! Command implementations behind the `lesionmetrics` binary.

pub mod args;
pub mod compare;
pub mod curves;
pub mod error;
pub mod evaluate;
pub mod format;
pub mod phantom;
pub mod records;
pub mod scatter;
pub mod svg;

pub use error::{CmdResult, CommandError};

use args::{Cli, Command};

/// Runs one parsed command line.
pub fn run(cli: &Cli) -> CmdResult<()> {
    match &cli.command {
        Command::Evaluate(a) => {
            let config = evaluate::RunConfig::from_args(a)?;
            let eval = evaluate::run_evaluate(&config)?;
            evaluate::write_outputs(&eval, &config.out_dir)?;
            let r = &eval.file.report;
            println!(
                "{} studies ({} skipped): sensitivity {}, FP/case {}",
                r.counts.n_cases,
                eval.file.skipped_studies.len(),
                format::fixed2(r.overall_sensitivity()),
                format::fixed2(r.overall_fp_per_case())
            );
        }
        Command::Compare(a) => {
            let c = compare::run_compare(a)?;
            for p in &c.pairwise {
                let det = p.detection.result().map(|r| format!("p = {:.4}", r.p_value)).unwrap_or_else(|| "undefined".into());
                println!("{} vs {}: detection {det}", p.run_a, p.run_b);
            }
        }
        Command::Curves(a) => {
            let points = curves::run_curves(a)?;
            println!("{} curve points written to {}", points.len(), a.out_dir.display());
        }
        Command::Scatter(a) => {
            let s = scatter::run_scatter(a)?;
            println!("{} detected lesions: rho diameter {:.2}, rho volume {:.2}", s.n_detected, s.spearman_diameter, s.spearman_volume);
        }
        Command::Phantom(a) => {
            let m = phantom::run_phantom(a)?;
            println!(
                "{} studies, {} lesions, expected TP {} FN {} FP {}",
                m.n_cases, m.n_gt_lesions, m.expected.tp, m.expected.fn_, m.expected.fp
            );
        }
    }
    Ok(())
}
