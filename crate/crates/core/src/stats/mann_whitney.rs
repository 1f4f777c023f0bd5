use statrs::distribution::{ContinuousCDF, Normal};

use super::rank::{midranks, tie_term};
use super::{ensure_finite, TestMethod, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct MannWhitneyOptions {
    /// Largest combined sample size for which the exact permutation
    /// distribution is enumerated; above it the normal approximation is used.
    pub exact_max_total: usize,
}

impl Default for MannWhitneyOptions {
    fn default() -> Self {
        MannWhitneyOptions { exact_max_total: 20 }
    }
}

/// Two-sided Mann-Whitney U test with default options.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    mann_whitney_u_with(a, b, MannWhitneyOptions::default())
}

/// Two-sided Mann-Whitney U test. The reported statistic is U for `a`.
///
/// Ties get midranks. Small samples use the exact permutation distribution
/// of the (midrank) rank sum, which stays valid with ties. Large samples use
/// the normal approximation with tie-corrected variance and a 0.5
/// continuity correction.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], options: MannWhitneyOptions) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("Mann-Whitney needs two nonempty samples".into()));
    }
    ensure_finite("Mann-Whitney sample a", a)?;
    ensure_finite("Mann-Whitney sample b", b)?;
    let (na, nb) = (a.len(), b.len());
    let total = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u_a = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let n = vec![na, nb];

    let method = if total <= options.exact_max_total { TestMethod::MannWhitneyExact } else { TestMethod::MannWhitneyAsymptotic };
    if pooled.iter().all(|&v| v == pooled[0]) {
        return Ok(TestResult {
            method,
            statistic: u_a,
            p_value: 1.0,
            n,
            degenerate: true,
        });
    }

    if total <= options.exact_max_total {
        let p_value = exact_p_value(&ranks, na);
        return Ok(TestResult { method: TestMethod::MannWhitneyExact, statistic: u_a, p_value, n, degenerate: false });
    }

    let (fa, fb, ft) = (na as f64, nb as f64, total as f64);
    let u_max = u_a.max(fa * fb - u_a);
    let mu = fa * fb / 2.0;
    let sigma = (fa * fb / 12.0 * ((ft + 1.0) - tie_term(&pooled) / (ft * (ft - 1.0)))).sqrt();
    let z = (u_max - mu - 0.5) / sigma;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = (2.0 * normal.sf(z)).clamp(0.0, 1.0);
    Ok(TestResult { method: TestMethod::MannWhitneyAsymptotic, statistic: u_a, p_value, n, degenerate: false })
}

/// P(|T − E[T]| ≥ |t_obs − E[T]|) where T is the rank sum of a random
/// `na`-subset of the pooled midranks and `ranks[..na]` is the observed one.
fn exact_p_value(ranks: &[f64], na: usize) -> f64 {
    // Doubled midranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|&r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..na].iter().sum();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: number of k-subsets of the items seen so far with sum s
    let mut ways = vec![vec![0f64; max_sum + 1]; na + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=na).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let (prev, cur) = (&lower[k - 1], &mut upper[0]);
            for s in (r..=max_sum).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let counts = &ways[na];
    let total: f64 = counts.iter().sum();
    // E[T] in doubled units is na (N + 1); compare |2s − 2E| to stay integral.
    let n = ranks.len();
    let centre2 = 2 * na * (n + 1);
    let dev_obs = (2 * observed).abs_diff(centre2);
    let extreme: f64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| (2 * s).abs_diff(centre2) >= dev_obs)
        .map(|(_, &c)| c)
        .sum();
    (extreme / total).clamp(0.0, 1.0)
}
