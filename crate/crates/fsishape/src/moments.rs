//! Statistics of the random solution: quadrature and Monte Carlo moment
//! estimation, the second-order approximations of mean and variance, and
//! convergence-order studies.
//!
//! The random amplitude is uniform on `[-1, 1]`, so every moment reduces to
//! a one-dimensional integral in the amplitude; a 64-point Gauss-Legendre
//! rule integrates these entire integrands to machine precision and serves
//! as the ground truth. Monte Carlo is the consistency check, with
//! counter-based per-sample streams so estimates are independent of worker
//! count and reproducible from the master seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::example::{self, ExampleParams, PerturbationSample};
use crate::geometry::GaussLegendre;
use crate::report::ConvergenceReport;
use crate::tensor::{frobenius, Matrix};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Default Gauss order of the amplitude quadrature.
pub const ORACLE_QUADRATURE_ORDER: usize = 64;
/// Default Monte Carlo sample count.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// Uniform amplitude on `[-1, 1]` with deterministic per-index draws.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeDistribution {
    pub seed: u64,
}

impl AmplitudeDistribution {
    pub fn new(seed: u64) -> Self {
        AmplitudeDistribution { seed }
    }

    /// Density value (constant 1/2 on the support).
    pub fn pdf(&self) -> f64 {
        0.5
    }

    /// Exact second moment of the amplitude.
    pub fn second_moment() -> f64 {
        1.0 / 3.0
    }

    /// Deterministic draw for a sample index: one keyed stream per index,
    /// so any subset of samples can be generated independently and in
    /// parallel without changing values.
    pub fn sample(&self, index: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        2.0 * rng.gen::<f64>() - 1.0
    }
}

/// Scalar observables of the random solution at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Pressure,
    Displacement(usize),
    Stress(usize, usize),
}

impl Quantity {
    /// Value of the perturbed solution at `point` for amplitude `a`.
    pub fn perturbed(&self, point: &[f64; 2], eps: f64, a: f64) -> f64 {
        let x = point[0] - eps * a;
        let y = point[1] - eps * a;
        match self {
            Quantity::Pressure => (PI * x).cos() * (PI * y).cos(),
            Quantity::Displacement(_) => (PI * x).sin() * (PI * y).sin(),
            Quantity::Stress(i, j) => stress_entry(x, y, *i, *j),
        }
    }

    /// Unperturbed value.
    pub fn unperturbed(&self, point: &[f64; 2]) -> f64 {
        self.perturbed(point, 0.0, 0.0)
    }

    /// First-order sensitivity at unit amplitude.
    pub fn derivative_unit(&self, point: &[f64; 2]) -> f64 {
        let s = (PI * (point[0] + point[1])).sin();
        let c = (PI * (point[0] + point[1])).cos();
        match self {
            Quantity::Pressure => PI * s,
            Quantity::Displacement(_) => -PI * s,
            Quantity::Stress(i, j) => {
                if i == j {
                    -4.0 * PI * PI * c
                } else {
                    -2.0 * PI * PI * c
                }
            }
        }
    }

    /// The compact evaluation window guaranteeing the point stays inside
    /// both the reference and every admissible perturbed domain.
    pub fn window(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Quantity::Pressure => ([-0.5, 0.5], [-0.5, 0.5]),
            _ => ([1.25, 1.75], [1.25, 1.75]),
        }
    }

    pub fn in_window(&self, point: &[f64; 2]) -> bool {
        let (wx, wy) = self.window();
        (wx[0]..=wx[1]).contains(&point[0]) && (wy[0]..=wy[1]).contains(&point[1])
    }

    pub fn name(&self) -> String {
        match self {
            Quantity::Pressure => "pressure".into(),
            Quantity::Displacement(i) => format!("displacement{}", i + 1),
            Quantity::Stress(i, j) => format!("stress{}{}", i + 1, j + 1),
        }
    }
}

fn stress_entry(x: f64, y: f64, i: usize, j: usize) -> f64 {
    let s = (PI * (x + y)).sin();
    if i != j {
        PI * s
    } else if i == 0 {
        PI * (s + 2.0 * (PI * x).cos() * (PI * y).sin())
    } else {
        PI * (s + 2.0 * (PI * x).sin() * (PI * y).cos())
    }
}

/// Mean/variance estimate with standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub variance: f64,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
    pub n_samples: usize,
    pub method: String,
}

fn check_window(q: Quantity, point: &[f64; 2]) -> Result<()> {
    if q.in_window(point) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            x: point[0],
            y: point[1],
            region: match q {
                Quantity::Pressure => "fluid evaluation window",
                _ => "solid evaluation window",
            },
        })
    }
}

/// Quadrature moments: exact up to the (entire) integrand's Gauss error,
/// which is far below double precision at order 64.
pub fn moment_oracle(
    _params: &ExampleParams,
    point: &[f64; 2],
    eps: f64,
    quantity: Quantity,
    order: usize,
) -> Result<MomentEstimate> {
    check_window(quantity, point)?;
    if !(0.0..=example::EPS_MAX).contains(&eps) {
        return Err(Error::EpsilonTooLarge {
            eps,
            max: example::EPS_MAX,
        });
    }
    let gl = GaussLegendre::new(order);
    let mean = gl.integrate(-1.0, 1.0, |t| 0.5 * quantity.perturbed(point, eps, t));
    let second = gl.integrate(-1.0, 1.0, |t| {
        0.5 * quantity.perturbed(point, eps, t).powi(2)
    });
    Ok(MomentEstimate {
        mean,
        variance: (second - mean * mean).max(0.0),
        stderr_mean: 0.0,
        stderr_variance: 0.0,
        n_samples: order,
        method: "gauss-quadrature".into(),
    })
}

/// Quadrature mean of the full stress tensor.
pub fn stress_mean_oracle(point: &[f64; 2], eps: f64, order: usize) -> Matrix {
    let gl = GaussLegendre::new(order);
    Matrix::from_fn(2, 2, |i, j| {
        gl.integrate(-1.0, 1.0, |t| {
            0.5 * Quantity::Stress(i, j).perturbed(point, eps, t)
        })
    })
}

/// Tensor variance in the componentwise-contraction convention:
/// `E[sigma : sigma] - E[sigma] : E[sigma]`.
pub fn stress_frobenius_variance_oracle(point: &[f64; 2], eps: f64, order: usize) -> f64 {
    let gl = GaussLegendre::new(order);
    let mean = stress_mean_oracle(point, eps, order);
    let second = gl.integrate(-1.0, 1.0, |t| {
        let m = Matrix::from_fn(2, 2, |i, j| Quantity::Stress(i, j).perturbed(point, eps, t));
        0.5 * frobenius(&m, &m).unwrap()
    });
    second - frobenius(&mean, &mean).unwrap()
}

/// Second-order approximation of the tensor variance:
/// `eps^2 E[sigma' : sigma']`.
pub fn stress_frobenius_variance_taylor(point: &[f64; 2], eps: f64) -> f64 {
    let unit = example::first_order_with_amplitude(1.0)
        .stress
        .eval(&point[..]);
    eps * eps * AmplitudeDistribution::second_moment() * frobenius(&unit, &unit).unwrap()
}

/// Pairwise (cascade) summation: deterministic for a fixed value order.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

/// Monte Carlo moments with unbiased variance and standard errors.
///
/// Sampling is parallel over sample indices; the reduction uses pairwise
/// summation over the index-ordered values, so the estimate is bit-identical
/// for any worker count.
pub fn moment_monte_carlo(
    _params: &ExampleParams,
    point: &[f64; 2],
    eps: f64,
    quantity: Quantity,
    n: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    check_window(quantity, point)?;
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let dist = AmplitudeDistribution::new(seed);
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| quantity.perturbed(point, eps, dist.sample(i)))
        .collect();
    let nf = n as f64;
    let mean = pairwise_sum(&values) / nf;
    let centered2: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let m2 = pairwise_sum(&centered2);
    let variance = m2 / (nf - 1.0);
    let centered4: Vec<f64> = centered2.iter().map(|c| c * c).collect();
    let m4 = pairwise_sum(&centered4) / nf;
    // Var(s^2) ~ (mu4 - (n-3)/(n-1) s^4) / n
    let var_of_var = ((m4 - (nf - 3.0) / (nf - 1.0) * variance * variance) / nf).max(0.0);
    Ok(MomentEstimate {
        mean,
        variance,
        stderr_mean: (variance / nf).sqrt(),
        stderr_variance: var_of_var.sqrt(),
        n_samples: n,
        method: "monte-carlo".into(),
    })
}

/// Second-order approximations: the mean is the unperturbed value, the
/// variance is `eps^2 E[a^2] (q'[1])^2` with `E[a^2] = 1/3` folded in.
pub fn taylor_moment_approximation(point: &[f64; 2], eps: f64, quantity: Quantity) -> (f64, f64) {
    let mean = quantity.unperturbed(point);
    let unit = quantity.derivative_unit(point);
    let variance = eps * eps * AmplitudeDistribution::second_moment() * unit * unit;
    (mean, variance)
}

/// Amplitude moments by quadrature and Monte Carlo, with standard errors
/// for the sampled estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmplitudeMomentCheck {
    pub quadrature_mean: f64,
    pub quadrature_second: f64,
    pub mc_mean: f64,
    pub mc_mean_se: f64,
    pub mc_second: f64,
    pub mc_second_se: f64,
}

pub fn amplitude_moment_check(n: usize, seed: u64) -> AmplitudeMomentCheck {
    let gl = GaussLegendre::new(ORACLE_QUADRATURE_ORDER);
    let quadrature_mean = gl.integrate(-1.0, 1.0, |t| 0.5 * t);
    let quadrature_second = gl.integrate(-1.0, 1.0, |t| 0.5 * t * t);

    let dist = AmplitudeDistribution::new(seed);
    let draws: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| dist.sample(i))
        .collect();
    let nf = n as f64;
    let mc_mean = pairwise_sum(&draws) / nf;
    let squares: Vec<f64> = draws.iter().map(|a| a * a).collect();
    let mc_second = pairwise_sum(&squares) / nf;
    let var_a = pairwise_sum(
        &draws
            .iter()
            .map(|a| (a - mc_mean) * (a - mc_mean))
            .collect::<Vec<_>>(),
    ) / (nf - 1.0);
    let var_a2 = pairwise_sum(
        &squares
            .iter()
            .map(|s| (s - mc_second) * (s - mc_second))
            .collect::<Vec<_>>(),
    ) / (nf - 1.0);
    AmplitudeMomentCheck {
        quadrature_mean,
        quadrature_second,
        mc_mean,
        mc_mean_se: (var_a / nf).sqrt(),
        mc_second,
        mc_second_se: (var_a2 / nf).sqrt(),
    }
}

/// What a convergence study measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StudyTarget {
    /// `|E[q^eps] - q|`, second order.
    Mean,
    /// `|Var[q^eps] - eps^2 E[(q')^2]|`, third order.
    Variance,
    /// Sup over (point, amplitude) pairs of the second-order Taylor
    /// remainder, third order.
    TaylorRemainder,
}

impl StudyTarget {
    pub fn name(&self) -> &'static str {
        match self {
            StudyTarget::Mean => "mean",
            StudyTarget::Variance => "variance",
            StudyTarget::TaylorRemainder => "taylor-remainder",
        }
    }

    pub fn target_slope(&self) -> f64 {
        match self {
            StudyTarget::Mean => 1.9,
            StudyTarget::Variance => 2.7,
            StudyTarget::TaylorRemainder => 2.9,
        }
    }
}

/// Default fluid-window evaluation points (pressure quantities).
pub fn fluid_window_points() -> [[f64; 2]; 5] {
    [
        [0.1, 0.15],
        [0.2, 0.05],
        [-0.1, 0.4],
        [0.15, 0.15],
        [-0.3, 0.45],
    ]
}

/// Default solid-window evaluation points (displacement/stress quantities).
pub fn solid_window_points() -> [[f64; 2]; 5] {
    [
        [1.35, 1.35],
        [1.45, 1.3],
        [1.3, 1.5],
        [1.6, 1.6],
        [1.7, 1.6],
    ]
}

/// Convergence study for one quantity at one point.
pub fn convergence_study(
    params: &ExampleParams,
    point: &[f64; 2],
    quantity: Quantity,
    target: StudyTarget,
    eps_list: &[f64],
    order: usize,
) -> Result<ConvergenceReport> {
    if eps_list.len() < 3 {
        return Err(Error::TooFewEpsilons(eps_list.len()));
    }
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let err = match target {
            StudyTarget::Mean => {
                let est = moment_oracle(params, point, eps, quantity, order)?;
                (est.mean - quantity.unperturbed(point)).abs()
            }
            StudyTarget::Variance => {
                let est = moment_oracle(params, point, eps, quantity, order)?;
                let (_, var_approx) = taylor_moment_approximation(point, eps, quantity);
                (est.variance - var_approx).abs()
            }
            StudyTarget::TaylorRemainder => taylor_remainder_sup(params, eps, 50, 9157)?,
        };
        errors.push(err);
    }
    Ok(ConvergenceReport::new(
        &format!(
            "{}-{}-({:.2},{:.2})",
            target.name(),
            quantity.name(),
            point[0],
            point[1]
        ),
        eps_list,
        &errors,
        target.target_slope(),
    ))
}

/// Sup over deterministic (point, amplitude) pairs of
/// `|p^eps - p - eps p' - (eps^2/2) p''|`.
pub fn taylor_remainder_sup(
    params: &ExampleParams,
    eps: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let dist = AmplitudeDistribution::new(seed);
    let p0 = example::pressure();
    let mut worst = 0.0f64;
    for i in 0..n_pairs {
        let a = dist.sample(i as u64);
        // deterministic point sweep of the fluid window
        let t = i as f64 / n_pairs as f64;
        let point = [-0.5 + t, 0.45 - 0.9 * t * t];
        let sample = PerturbationSample::new(eps, a)?;
        let first = example::shape_derivative_fields(params, &sample);
        let second = example::shape_hessian_fields(params, &sample);
        let (_, pe) = example::perturbed_fields(params, &sample);
        let remainder = pe.eval(&point)
            - p0.eval(&point)
            - eps * first.pressure.eval(&point)
            - 0.5 * eps * eps * second.pressure.eval(&point);
        worst = worst.max(remainder.abs());
    }
    Ok(worst)
}

/// The standard sweep: mean and variance studies for the pressure at the
/// fluid points and for displacement components at the solid points, plus
/// one Taylor-remainder study.
pub fn standard_convergence_suite(
    params: &ExampleParams,
    eps_list: &[f64],
    order: usize,
) -> Result<Vec<ConvergenceReport>> {
    let mut out = Vec::new();
    for pt in fluid_window_points() {
        out.push(convergence_study(
            params,
            &pt,
            Quantity::Pressure,
            StudyTarget::Mean,
            eps_list,
            order,
        )?);
    }
    for pt in fluid_window_points() {
        out.push(convergence_study(
            params,
            &pt,
            Quantity::Pressure,
            StudyTarget::Variance,
            eps_list,
            order,
        )?);
    }
    for pt in solid_window_points() {
        out.push(convergence_study(
            params,
            &pt,
            Quantity::Displacement(0),
            StudyTarget::Mean,
            eps_list,
            order,
        )?);
    }
    for pt in solid_window_points() {
        out.push(convergence_study(
            params,
            &pt,
            Quantity::Displacement(1),
            StudyTarget::Variance,
            eps_list,
            order,
        )?);
    }
    out.push(convergence_study(
        params,
        &fluid_window_points()[0],
        Quantity::Pressure,
        StudyTarget::TaylorRemainder,
        eps_list,
        order,
    )?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> ExampleParams {
        ExampleParams::default()
    }

    #[test]
    fn amplitude_draws_are_deterministic_and_uniform() {
        let dist = AmplitudeDistribution::new(42);
        assert_eq!(dist.sample(17), dist.sample(17));
        assert_ne!(dist.sample(17), dist.sample(18));

        let n = 1_000_000u64;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for i in 0..n {
            let a = dist.sample(i);
            assert!((-1.0..=1.0).contains(&a));
            sum += a;
            sum2 += a * a;
        }
        let mean = sum / n as f64;
        let second = sum2 / n as f64;
        // 3 sigma bands: sd(a) = 1/sqrt(3), sd(a^2) = sqrt(4/45)
        assert!(
            mean.abs() <= 3.0 * (1.0 / 3.0f64.sqrt()) / (n as f64).sqrt(),
            "mean {mean}"
        );
        assert!(
            (second - 1.0 / 3.0).abs() <= 3.0 * (4.0f64 / 45.0).sqrt() / (n as f64).sqrt(),
            "second moment {second}"
        );
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let p = params();
        // zero perturbation: mean is the field value, variance zero
        let est = moment_oracle(&p, &[0.3, 0.3], 0.0, Quantity::Pressure, 64).unwrap();
        assert_abs_diff_eq!(
            est.mean,
            (0.3 * PI).cos() * (0.3 * PI).cos(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(est.variance, 0.0, epsilon = 1e-14);

        // closed form at the origin: E[cos^2(pi eps t)] over uniform t
        // equals 1/2 + sin(2 pi eps) / (4 pi eps)
        let eps = 0.1;
        let est = moment_oracle(&p, &[0.0, 0.0], eps, Quantity::Pressure, 64).unwrap();
        let exact = 0.5 + (2.0 * PI * eps).sin() / (4.0 * PI * eps);
        assert_abs_diff_eq!(est.mean, exact, epsilon = 1e-13);

        // variance at (0.25, 0.25): eps^2 pi^2 / 3 to leading order
        let pt = [0.25, 0.25];
        let est = moment_oracle(&p, &pt, 0.05, Quantity::Pressure, 64).unwrap();
        let lead = 0.05f64.powi(2) * PI * PI / 3.0;
        assert!((est.variance - lead).abs() <= 0.05f64.powi(3) * 50.0);
        let (_, taylor_var) = taylor_moment_approximation(&pt, 0.05, Quantity::Pressure);
        assert_abs_diff_eq!(taylor_var, lead, epsilon = 1e-14);
    }

    #[test]
    fn first_order_mean_vanishes_under_quadrature() {
        // the sensitivity is odd in the amplitude, so its quadrature mean
        // must vanish to roundoff
        let gl = GaussLegendre::new(64);
        for pt in fluid_window_points() {
            let q = Quantity::Pressure;
            let val = gl.integrate(-1.0, 1.0, |t| 0.5 * t * q.derivative_unit(&pt));
            assert!(val.abs() <= 1e-12);
        }
    }

    #[test]
    fn variance_equals_correlation_for_centered_sensitivity() {
        // for the centered first-order field, Cov = Cor at coincident points
        let gl = GaussLegendre::new(64);
        let pt = [0.2, 0.1];
        let unit = Quantity::Pressure.derivative_unit(&pt);
        let cor = gl.integrate(-1.0, 1.0, |t| 0.5 * (t * unit) * (t * unit));
        let mean = gl.integrate(-1.0, 1.0, |t| 0.5 * t * unit);
        let cov = cor - mean * mean;
        assert_abs_diff_eq!(cov, cor, epsilon = 1e-14);
        assert_abs_diff_eq!(cor, unit * unit / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_oracle() {
        let p = params();
        let pt = [0.3, 0.3];
        let eps = 0.1;
        let oracle = moment_oracle(&p, &pt, eps, Quantity::Pressure, 64).unwrap();
        let mc = moment_monte_carlo(&p, &pt, eps, Quantity::Pressure, 100_000, 7).unwrap();
        assert!(
            (mc.mean - oracle.mean).abs() <= 3.0 * mc.stderr_mean,
            "mean off"
        );
        assert!(
            (mc.variance - oracle.variance).abs() <= 3.0 * mc.stderr_variance,
            "variance off"
        );

        // zero perturbation: exactly zero variance
        let mc0 = moment_monte_carlo(&p, &pt, 0.0, Quantity::Pressure, 1000, 7).unwrap();
        assert_eq!(mc0.variance, 0.0);

        // doubling n shrinks the mean standard error by about sqrt(2)
        let mc2 = moment_monte_carlo(&p, &pt, eps, Quantity::Pressure, 200_000, 7).unwrap();
        let ratio = mc.stderr_mean / mc2.stderr_mean;
        assert!((ratio - 2f64.sqrt()).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let p = params();
        let pt = [0.2, 0.05];
        let a = moment_monte_carlo(&p, &pt, 0.1, Quantity::Pressure, 50_000, 99).unwrap();
        let b = moment_monte_carlo(&p, &pt, 0.1, Quantity::Pressure, 50_000, 99).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.variance.to_bits(), b.variance.to_bits());

        // independent of worker count
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let r1 = pool1
            .install(|| moment_monte_carlo(&p, &pt, 0.1, Quantity::Pressure, 50_000, 99).unwrap());
        let r4 = pool4
            .install(|| moment_monte_carlo(&p, &pt, 0.1, Quantity::Pressure, 50_000, 99).unwrap());
        assert_eq!(r1.mean.to_bits(), r4.mean.to_bits());
        assert_eq!(r1.variance.to_bits(), r4.variance.to_bits());
    }

    #[test]
    fn window_checks_reject_outside_points() {
        let p = params();
        assert!(moment_oracle(&p, &[0.9, 0.9], 0.1, Quantity::Pressure, 32).is_err());
        assert!(moment_oracle(&p, &[0.3, 0.3], 0.1, Quantity::Displacement(0), 32).is_err());
        assert!(moment_oracle(&p, &[1.5, 1.5], 0.1, Quantity::Displacement(0), 32).is_ok());
        assert!(moment_oracle(&p, &[0.3, 0.3], 0.3, Quantity::Pressure, 32).is_err());
    }

    #[test]
    fn mean_convergence_is_second_order() {
        let p = params();
        let eps = [0.2, 0.1, 0.05, 0.025];
        for pt in fluid_window_points() {
            let rep = convergence_study(&p, &pt, Quantity::Pressure, StudyTarget::Mean, &eps, 64)
                .unwrap();
            assert!(
                rep.slope >= 1.9,
                "{} slope {} errors {:?}",
                rep.id,
                rep.slope,
                rep.errors
            );
        }
    }

    #[test]
    fn variance_convergence_is_at_least_third_order() {
        let p = params();
        let eps = [0.2, 0.1, 0.05, 0.025];
        for pt in fluid_window_points() {
            let rep =
                convergence_study(&p, &pt, Quantity::Pressure, StudyTarget::Variance, &eps, 64)
                    .unwrap();
            assert!(
                rep.slope >= 2.7,
                "{} slope {} errors {:?}",
                rep.id,
                rep.slope,
                rep.errors
            );
        }
        for pt in solid_window_points() {
            let rep = convergence_study(
                &p,
                &pt,
                Quantity::Displacement(0),
                StudyTarget::Variance,
                &eps,
                64,
            )
            .unwrap();
            assert!(
                rep.slope >= 2.7,
                "{} slope {} errors {:?}",
                rep.id,
                rep.slope,
                rep.errors
            );
        }
    }

    #[test]
    fn taylor_remainder_is_third_order() {
        let p = params();
        let eps = [0.2, 0.1, 0.05, 0.025];
        let rep = convergence_study(
            &p,
            &fluid_window_points()[0],
            Quantity::Pressure,
            StudyTarget::TaylorRemainder,
            &eps,
            64,
        )
        .unwrap();
        assert!(
            rep.slope >= 2.9,
            "slope {} errors {:?}",
            rep.slope,
            rep.errors
        );
    }

    #[test]
    fn stress_tensor_variance_convention() {
        // E[sigma:sigma] - E[sigma]:E[sigma] matches eps^2 E[sigma':sigma']
        // to third order
        let pt = [1.35, 1.35];
        let eps = 0.05;
        let oracle = stress_frobenius_variance_oracle(&pt, eps, 64);
        let taylor = stress_frobenius_variance_taylor(&pt, eps);
        assert!(
            (oracle - taylor).abs() <= 200.0 * eps.powi(3),
            "oracle {oracle} taylor {taylor}"
        );
        assert!(taylor > 0.0);
    }

    #[test]
    fn stress_frobenius_variance_converges_at_third_order() {
        // |Var_frob(sigma^eps) - eps^2 E[sigma':sigma']| = O(eps^3)
        let eps_list: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
        for pt in [[1.35, 1.35], [1.6, 1.6]] {
            let errors: Vec<f64> = eps_list
                .iter()
                .map(|&e| {
                    (stress_frobenius_variance_oracle(&pt, e, 64)
                        - stress_frobenius_variance_taylor(&pt, e))
                    .abs()
                })
                .collect();
            let rep = ConvergenceReport::new("stress-var", &eps_list, &errors, 2.7);
            assert!(rep.slope >= 2.7, "slope {} at {:?}, errors {:?}", rep.slope, pt, errors);
        }
    }

    #[test]
    fn few_epsilons_rejected() {
        let p = params();
        assert!(matches!(
            convergence_study(
                &p,
                &[0.1, 0.15],
                Quantity::Pressure,
                StudyTarget::Mean,
                &[0.1, 0.05],
                32
            ),
            Err(Error::TooFewEpsilons(2))
        ));
    }
}
