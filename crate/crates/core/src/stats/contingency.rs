use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{TestMethod, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct ChiSquareOptions {
    /// Apply Yates' continuity correction.
    pub yates: bool,
}

/// Pearson chi-square test of independence on a 2×2 table of counts
/// (`table[row][col]`), one degree of freedom.
pub fn chi_square_2x2(table: [[u64; 2]; 2], options: ChiSquareOptions) -> Result<TestResult> {
    let [[a, b], [c, d]] = table.map(|row| row.map(|v| v as f64));
    let rows = [a + b, c + d];
    let cols = [a + c, b + d];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return Err(Error::DegenerateTable(format!("zero margin in {table:?}")));
    }
    let total = a + b + c + d;
    let mut diff = (a * d - b * c).abs();
    if options.yates {
        // every cell is moved toward its expectation by at most 0.5
        diff = (diff - total / 2.0).max(0.0);
    }
    let statistic = total * diff * diff / (rows[0] * rows[1] * cols[0] * cols[1]);
    let p_value = ChiSquared::new(1.0).expect("1 dof").sf(statistic).clamp(0.0, 1.0);
    Ok(TestResult {
        method: if options.yates { TestMethod::ChiSquareYates } else { TestMethod::ChiSquare },
        statistic,
        p_value,
        n: vec![rows[0] as usize, rows[1] as usize],
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_proportions() {
        let r = chi_square_2x2([[50, 50], [50, 50]], Default::default()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn perfect_separation() {
        let r = chi_square_2x2([[10, 0], [0, 10]], Default::default()).unwrap();
        assert_eq!(r.statistic, 20.0);
        // chi2(1) tail at 20 = erfc(sqrt(10))
        assert!((r.p_value - 7.744_216_431_044_09e-6).abs() < 1e-15);
    }

    #[test]
    fn zero_margin_is_degenerate() {
        let err = chi_square_2x2([[5, 0], [7, 0]], Default::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateTable(_)));
    }

    #[test]
    fn yates_shrinks_statistic() {
        let plain = chi_square_2x2([[12, 5], [6, 11]], Default::default()).unwrap();
        let yates = chi_square_2x2([[12, 5], [6, 11]], ChiSquareOptions { yates: true }).unwrap();
        assert!(yates.statistic < plain.statistic);
        assert!(yates.p_value > plain.p_value);
    }

    #[test]
    fn transpose_and_row_swap_invariant() {
        let t = [[105, 19], [76, 48]];
        let r = chi_square_2x2(t, Default::default()).unwrap();
        let tr = chi_square_2x2([[105, 76], [19, 48]], Default::default()).unwrap();
        let sw = chi_square_2x2([[76, 48], [105, 19]], Default::default()).unwrap();
        assert!((r.statistic - tr.statistic).abs() < 1e-12);
        assert!((r.p_value - sw.p_value).abs() < 1e-15);
    }
}
