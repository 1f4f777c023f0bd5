use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::rank::{midranks, tie_term};
use super::{ensure_finite, TestMethod, TestResult};
use crate::error::{Error, Result};

/// Kruskal-Wallis H test with tie correction; p from chi-square with k − 1
/// degrees of freedom.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData("Kruskal-Wallis needs at least two groups".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InsufficientData("Kruskal-Wallis groups must be nonempty".into()));
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    ensure_finite("Kruskal-Wallis sample", &pooled)?;
    let n = pooled.len() as f64;
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();

    let correction = 1.0 - tie_term(&pooled) / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(TestResult {
            method: TestMethod::KruskalWallis,
            statistic: 0.0,
            p_value: 1.0,
            n: sizes,
            degenerate: true,
        });
    }

    let ranks = midranks(&pooled);
    let mut offset = 0;
    let mut weighted = 0.0;
    for &size in &sizes {
        let sum: f64 = ranks[offset..offset + size].iter().sum();
        weighted += sum * sum / size as f64;
        offset += size;
    }
    let h = (12.0 / (n * (n + 1.0)) * weighted - 3.0 * (n + 1.0)) / correction;
    let h = h.max(0.0);
    let dof = (groups.len() - 1) as f64;
    let p_value = ChiSquared::new(dof).expect("positive dof").sf(h).clamp(0.0, 1.0);
    Ok(TestResult { method: TestMethod::KruskalWallis, statistic: h, p_value, n: sizes, degenerate: false })
}
