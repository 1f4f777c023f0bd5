use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::descriptive::percentile_linear;
use crate::error::{Error, Result};

/// Generator used for resampling. Resample `r` draws from
/// `ChaCha8Rng::seed_from_u64(seed)` with its stream set to `r`; each index
/// is `(next_u64() · n) >> 64`.
pub const BOOTSTRAP_RNG: &str = "chacha8-stream-per-resample";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub n_resamples: usize,
    pub confidence: f64,
    pub seed: u64,
    /// Threads used to evaluate resamples; results do not depend on it.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions { n_resamples: 10_000, confidence: 0.95, seed: 0, workers: 1 }
    }
}

/// Percentile bootstrap interval.
///
/// `lower <= upper` always holds; the point estimate need not lie inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_resamples: usize,
    /// Resamples on which the statistic was undefined.
    pub n_skipped: usize,
    pub confidence: f64,
    pub seed: u64,
}

/// Percentile bootstrap CI of `statistic` over `data` resampled with
/// replacement.
///
/// `statistic` returns `None` when undefined on a resample; such resamples
/// are skipped, and more than 1% skipped is an error.
pub fn bootstrap_ci<T, F>(data: &[T], statistic: F, options: &BootstrapOptions) -> Result<BootstrapCI>
where
    T: Clone + Sync,
    F: Fn(&[T]) -> Option<f64> + Sync,
{
    if data.is_empty() {
        return Err(Error::InsufficientData("bootstrap on empty data".into()));
    }
    if options.n_resamples < 100 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 100 resamples, got {}",
            options.n_resamples
        )));
    }
    if !(options.confidence > 0.0 && options.confidence < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence {} not in (0, 1)", options.confidence)));
    }
    let point = statistic(data)
        .ok_or_else(|| Error::InsufficientData("statistic undefined on the full sample".into()))?;

    let workers = options.workers.clamp(1, options.n_resamples);
    let chunk = options.n_resamples.div_ceil(workers);
    let mut values: Vec<Option<f64>> = Vec::with_capacity(options.n_resamples);
    if workers == 1 {
        values.extend(resample_range(data, &statistic, options.seed, 0..options.n_resamples));
    } else {
        let parts: Vec<Vec<Option<f64>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let range = (w * chunk)..((w + 1) * chunk).min(options.n_resamples);
                    let statistic = &statistic;
                    scope.spawn(move || resample_range(data, statistic, options.seed, range))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("bootstrap worker panicked")).collect()
        });
        values.extend(parts.into_iter().flatten());
    }

    let mut defined: Vec<f64> = values.iter().filter_map(|v| *v).filter(|v| !v.is_nan()).collect();
    let skipped = options.n_resamples - defined.len();
    if skipped * 100 > options.n_resamples {
        return Err(Error::DegenerateBootstrap { skipped, total: options.n_resamples });
    }
    defined.sort_by(f64::total_cmp);
    let alpha = (1.0 - options.confidence) / 2.0;
    let lower = percentile_linear(&defined, alpha).expect("nonempty");
    let upper = percentile_linear(&defined, 1.0 - alpha).expect("nonempty");
    Ok(BootstrapCI {
        point,
        lower,
        upper,
        n_resamples: options.n_resamples,
        n_skipped: skipped,
        confidence: options.confidence,
        seed: options.seed,
    })
}

/// [`bootstrap_ci`] on `data` sorted by `order`, so the interval does not
/// depend on the order in which observations arrive.
pub fn bootstrap_ci_unordered<T, F>(
    data: &[T],
    order: impl FnMut(&T, &T) -> std::cmp::Ordering,
    statistic: F,
    options: &BootstrapOptions,
) -> Result<BootstrapCI>
where
    T: Clone + Sync,
    F: Fn(&[T]) -> Option<f64> + Sync,
{
    let mut sorted = data.to_vec();
    sorted.sort_by(order);
    bootstrap_ci(&sorted, statistic, options)
}

fn resample_range<T: Clone, F: Fn(&[T]) -> Option<f64>>(
    data: &[T],
    statistic: &F,
    seed: u64,
    range: std::ops::Range<usize>,
) -> Vec<Option<f64>> {
    let n = data.len() as u128;
    let mut scratch: Vec<T> = Vec::with_capacity(data.len());
    range
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            scratch.clear();
            for _ in 0..data.len() {
                let i = ((rng.next_u64() as u128 * n) >> 64) as usize;
                scratch.push(data[i].clone());
            }
            statistic(&scratch)
        })
        .collect()
}
