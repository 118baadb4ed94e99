//! Ordinary least-squares line fits for log-log scaling exponents.

use serde::Serialize;

use crate::record::ser_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    #[serde(serialize_with = "ser_f64")]
    pub slope: f64,
    #[serde(serialize_with = "ser_f64")]
    pub intercept: f64,
    /// Coefficient of determination from the residuals, clamped to `[0, 1]`.
    #[serde(serialize_with = "ser_f64")]
    pub r_squared: f64,
}

impl LinearFit {
    /// Fits `y = slope x + intercept`. `None` with fewer than two points or
    /// when every `x` is equal.
    pub fn least_squares(points: &[(f64, f64)]) -> Option<LinearFit> {
        if points.len() < 2 {
            return None;
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        let ss_res: f64 = points
            .iter()
            .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
            .sum();
        let r_squared = if ss_tot > 0.0 {
            (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
        } else {
            1.0
        };
        Some(LinearFit {
            slope,
            intercept,
            r_squared,
        })
    }
}
