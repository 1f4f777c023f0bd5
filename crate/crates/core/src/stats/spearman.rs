use statrs::distribution::{ContinuousCDF, StudentsT};

use super::rank::midranks;
use super::{ensure_finite, TestMethod, TestResult};
use crate::error::{Error, Result};

/// Spearman rank correlation: Pearson correlation of midranks, p from the
/// t distribution with n − 2 degrees of freedom.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<TestResult> {
    let rho = spearman_rho_value(x, y)?;
    let dof = (x.len() - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (dof / ((rho + 1.0) * (1.0 - rho))).sqrt();
        let dist = StudentsT::new(0.0, 1.0, dof).expect("positive dof");
        (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
    };
    Ok(TestResult {
        method: TestMethod::Spearman,
        statistic: rho,
        p_value,
        n: vec![x.len()],
        degenerate: false,
    })
}

/// Correlation coefficient only.
pub fn spearman_rho_value(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "Spearman samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!("Spearman needs at least 3 pairs, got {}", x.len())));
    }
    ensure_finite("Spearman x", x)?;
    ensure_finite("Spearman y", y)?;
    let rx = midranks(x);
    let ry = midranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero rank variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
