//! Report records shared by the verification and moment modules, plus the
//! writers that serialize them deterministically.

use serde::{Deserialize, Serialize};

/// Pointwise residual summary for one verified identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub id: String,
    pub norm_max: f64,
    pub norm_rms: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub n_points: usize,
}

impl ResidualReport {
    pub fn from_residuals(id: &str, residuals: &[f64], tolerance: f64) -> Self {
        let n = residuals.len();
        let norm_max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let norm_rms = if n == 0 {
            0.0
        } else {
            (residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt()
        };
        ResidualReport {
            id: id.to_string(),
            norm_max,
            norm_rms,
            tolerance,
            pass: norm_max <= tolerance,
            n_points: n,
        }
    }
}

/// Log-log convergence fit of an error against the perturbation size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub id: String,
    /// Strictly decreasing perturbation sizes.
    pub eps_list: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log(error) against log(eps).
    pub slope: f64,
    pub intercept: f64,
    /// Slopes of consecutive pairs, exposing pre-asymptotic values.
    pub pairwise_slopes: Vec<f64>,
    pub target_slope: f64,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn new(id: &str, eps_list: &[f64], errors: &[f64], target_slope: f64) -> Self {
        assert_eq!(eps_list.len(), errors.len());
        let (slope, intercept) = fit_loglog(eps_list, errors);
        let pairwise_slopes = (1..eps_list.len())
            .map(|i| {
                (errors[i - 1].max(f64::MIN_POSITIVE) / errors[i].max(f64::MIN_POSITIVE)).ln()
                    / (eps_list[i - 1] / eps_list[i]).ln()
            })
            .collect();
        ConvergenceReport {
            id: id.to_string(),
            eps_list: eps_list.to_vec(),
            errors: errors.to_vec(),
            slope,
            intercept,
            pairwise_slopes,
            target_slope,
            pass: slope >= target_slope,
        }
    }

    /// Two-column `(log10 eps, log10 error)` table plus a reference line of
    /// the target slope anchored at the first point; rows in the stored
    /// (descending eps) order.
    pub fn plot_table(&self) -> Vec<(f64, f64, f64)> {
        let anchor = self.errors[0].max(f64::MIN_POSITIVE).log10();
        let e0 = self.eps_list[0].log10();
        self.eps_list
            .iter()
            .zip(&self.errors)
            .map(|(&e, &err)| {
                let le = e.log10();
                (
                    le,
                    err.max(f64::MIN_POSITIVE).log10(),
                    anchor + self.target_slope * (le - e0),
                )
            })
            .collect()
    }
}

/// Ordinary least squares on `(ln eps, ln error)`; returns `(slope, intercept)`.
pub fn fit_loglog(eps: &[f64], errors: &[f64]) -> (f64, f64) {
    let n = eps.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (&e, &err) in eps.iter().zip(errors) {
        let lx = e.ln();
        let ly = err.max(f64::MIN_POSITIVE).ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Minimal RFC-4180-style CSV writer: comma separator, `\r\n` line ends;
/// the numeric tables emitted here never need quoting.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push_str("\r\n");
    for row in rows {
        out.push_str(&row.join(","));
        out.push_str("\r\n");
    }
    out
}
