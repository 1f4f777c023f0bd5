use serde::{Deserialize, Serialize};

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_linear(&sorted, 0.5)
}

/// Quantile `q` in [0, 1] of ascending `sorted` with linear interpolation
/// between order statistics.
pub fn percentile_linear(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Mean, standard deviation and median of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub median: Option<f64>,
}

impl Descriptive {
    pub fn of(values: &[f64]) -> Self {
        Descriptive { n: values.len(), mean: mean(values), sd: std_dev(values), median: median(values) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_values() {
        let d = Descriptive::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(d.mean, Some(2.5));
        assert_eq!(d.median, Some(2.5));
        assert!((d.sd.unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Descriptive::of(&[]).mean, None);
    }

    #[test]
    fn percentile_interpolates() {
        let s = [0.0, 10.0, 20.0, 30.0, 40.0];
        assert_eq!(percentile_linear(&s, 0.025), Some(1.0));
        assert_eq!(percentile_linear(&s, 1.0), Some(40.0));
        assert_eq!(percentile_linear(&s, 0.5), Some(20.0));
    }
}
