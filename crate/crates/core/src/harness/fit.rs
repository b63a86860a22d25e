//! Ordinary least squares on `(ln eps, ln loss)`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Fitted power law `loss ~ exp(intercept) * eps^slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    /// Two-sided 95% interval for the slope (Student t, n - 2 dof).
    pub ci95: (f64, f64),
    pub points: usize,
    /// Points dropped for a non-positive coordinate.
    pub dropped: usize,
}

/// Fits a line through `(ln x, ln y)`. Points with a non-positive
/// coordinate are dropped and counted; at least 3 must remain.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let dropped = points.len() - logs.len();
    let n = logs.len();
    if n < 3 {
        return Err(Error::Param(format!("slope fit needs 3 positive points, have {n}")));
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Param("slope fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).map_err(|e| Error::Param(e.to_string()))?.inverse_cdf(0.975);
    Ok(LogLogFit { slope, intercept, stderr, ci95: (slope - t * stderr, slope + t * stderr), points: n, dropped })
}
