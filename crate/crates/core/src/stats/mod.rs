//! Nonparametric tests, rank correlation and percentile bootstrap intervals.
//!
//! All p-values are two-sided.

mod bootstrap;
mod contingency;
mod descriptive;
mod kruskal;
mod mann_whitney;
mod rank;
mod spearman;

pub use bootstrap::{bootstrap_ci, bootstrap_ci_unordered, BootstrapCI, BootstrapOptions, BOOTSTRAP_RNG};
pub use contingency::{chi_square_2x2, ChiSquareOptions};
pub use descriptive::{mean, median, percentile_linear, std_dev, Descriptive};
pub use kruskal::kruskal_wallis;
pub use mann_whitney::{mann_whitney_u, mann_whitney_u_with, MannWhitneyOptions};
pub use rank::{midranks, tie_sizes};
pub use spearman::{spearman_rho, spearman_rho_value};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    ChiSquare,
    ChiSquareYates,
    MannWhitneyExact,
    MannWhitneyAsymptotic,
    KruskalWallis,
    Spearman,
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    /// Sample sizes (table row totals for chi-square).
    pub n: Vec<usize>,
    /// Set when the data admit no variation (e.g. every value tied); the
    /// p-value is then 1 by convention.
    #[serde(default)]
    pub degenerate: bool,
}

impl TestResult {
    pub fn is_significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub(crate) fn ensure_finite(name: &str, values: &[f64]) -> crate::Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(crate::Error::InvalidArgument(format!("{name} contains non-finite values")))
    }
}
