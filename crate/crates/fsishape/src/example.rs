//! Closed-form benchmark on the square solid/fluid geometry.
//!
//! The unperturbed solution, its translated perturbation, the first- and
//! second-order shape sensitivities and the boundary data they generate are
//! all available analytically, with hand-differentiated partials up to the
//! orders the verification residuals need. The random perturbation
//! translates both squares by `eps * a` along the diagonal, which moves
//! each flat side with normal speed `<V, n>`.

use std::f64::consts::PI;

use crate::fields::{ScalarField, TensorField, VectorField};
use crate::tensor::Matrix;
use crate::{Error, Result};

/// Largest admissible perturbation size.
pub const EPS_MAX: f64 = 0.25;

/// Physical parameters of the benchmark problem.
#[derive(Debug, Clone, Copy)]
pub struct ExampleParams {
    /// Squared driving frequency, `6 pi^2`.
    pub mu2: f64,
    pub rho_solid: f64,
    pub rho_fluid: f64,
    pub lambda: f64,
    pub nu: f64,
    /// Acoustic wave speed; `sqrt(3)` so that `mu^2 / c^2 = 2 pi^2` and the
    /// pressure satisfies the Helmholtz equation exactly.
    pub wave_speed: f64,
    /// Gravity constant of the model statement; the benchmark never uses it.
    pub gravity: f64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams {
            mu2: 6.0 * PI * PI,
            rho_solid: 3.0,
            rho_fluid: 1.0,
            lambda: 1.0,
            nu: 1.0,
            wave_speed: 3f64.sqrt(),
            gravity: 9.81,
        }
    }
}

impl ExampleParams {
    /// `mu^2 / c^2`, the Helmholtz coefficient (`2 pi^2` for the defaults).
    pub fn helmholtz_coefficient(&self) -> f64 {
        self.mu2 / (self.wave_speed * self.wave_speed)
    }

    /// `mu^2 rho_s`, the momentum-equation zeroth-order coefficient.
    pub fn momentum_coefficient(&self) -> f64 {
        self.mu2 * self.rho_solid
    }
}

/// One realization of the random boundary amplitude.
///
/// `a` drives the perturbation itself, `b` the second direction entering
/// the shape Hessian; `b` defaults to `a`.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationSample {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
}

impl PerturbationSample {
    pub fn new(epsilon: f64, a: f64) -> Result<Self> {
        Self::with_second(epsilon, a, a)
    }

    pub fn with_second(epsilon: f64, a: f64, b: f64) -> Result<Self> {
        if !(0.0..=EPS_MAX).contains(&epsilon) {
            return Err(Error::EpsilonTooLarge {
                eps: epsilon,
                max: EPS_MAX,
            });
        }
        if a.abs() > 1.0 || b.abs() > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "amplitudes must lie in [-1, 1], got a = {a}, b = {b}"
            )));
        }
        Ok(PerturbationSample { epsilon, a, b })
    }

    /// Normal speed `<V, n>` of a flat side with outward normal `n` under
    /// the diagonal translation with amplitude `amp`.
    pub fn normal_speed(amp: f64, normal: &[f64; 2]) -> f64 {
        amp * (normal[0] + normal[1])
    }
}

fn sp(t: f64) -> f64 {
    (PI * t).sin()
}

fn cp(t: f64) -> f64 {
    (PI * t).cos()
}

fn s_sum(x: &[f64]) -> f64 {
    (PI * (x[0] + x[1])).sin()
}

fn c_sum(x: &[f64]) -> f64 {
    (PI * (x[0] + x[1])).cos()
}

/// Displacement `u = sin(pi x) sin(pi y) (1, 1)` with analytic Jacobian.
pub fn displacement() -> VectorField {
    VectorField::new(2, "u", |x| {
        let v = sp(x[0]) * sp(x[1]);
        vec![v, v]
    })
    .with_jacobian(|x| {
        let gx = PI * cp(x[0]) * sp(x[1]);
        let gy = PI * sp(x[0]) * cp(x[1]);
        Matrix::from_rows(&[&[gx, gy], &[gx, gy]])
    })
}

/// The gradient of `u` as a tensor field, with analytic partials (needed
/// for normal derivatives of `grad u` in the second-order boundary data).
pub fn displacement_gradient() -> TensorField {
    TensorField::new(2, "grad_u", |x| {
        let gx = PI * cp(x[0]) * sp(x[1]);
        let gy = PI * sp(x[0]) * cp(x[1]);
        Matrix::from_rows(&[&[gx, gy], &[gx, gy]])
    })
    .with_partials(|x| {
        let pp = PI * PI;
        let dxx = -pp * sp(x[0]) * sp(x[1]);
        let dxy = pp * cp(x[0]) * cp(x[1]);
        let dyy = -pp * sp(x[0]) * sp(x[1]);
        let dx = Matrix::from_rows(&[&[dxx, dxy], &[dxx, dxy]]);
        let dy = Matrix::from_rows(&[&[dxy, dyy], &[dxy, dyy]]);
        vec![dx, dy]
    })
}

/// Pressure `p = cos(pi x) cos(pi y)` with analytic gradient.
pub fn pressure() -> ScalarField {
    ScalarField::new(2, "p", |x| cp(x[0]) * cp(x[1]))
        .with_gradient(|x| vec![-PI * sp(x[0]) * cp(x[1]), -PI * cp(x[0]) * sp(x[1])])
}

/// `grad p` as a vector field whose Jacobian is the pressure Hessian.
pub fn pressure_gradient() -> VectorField {
    VectorField::new(2, "grad_p", |x| {
        vec![-PI * sp(x[0]) * cp(x[1]), -PI * cp(x[0]) * sp(x[1])]
    })
    .with_jacobian(|x| {
        let pp = PI * PI;
        Matrix::from_rows(&[
            &[-pp * cp(x[0]) * cp(x[1]), pp * sp(x[0]) * sp(x[1])],
            &[pp * sp(x[0]) * sp(x[1]), -pp * cp(x[0]) * cp(x[1])],
        ])
    })
}

/// Stress tensor of the benchmark with analytic partials.
pub fn stress() -> TensorField {
    TensorField::new(2, "sigma", |x| {
        let s = s_sum(x);
        Matrix::from_rows(&[
            &[PI * (s + 2.0 * cp(x[0]) * sp(x[1])), PI * s],
            &[PI * s, PI * (s + 2.0 * sp(x[0]) * cp(x[1]))],
        ])
    })
    .with_partials(|x| {
        let pp = PI * PI;
        let c = c_sum(x);
        let ss = sp(x[0]) * sp(x[1]);
        let cc = cp(x[0]) * cp(x[1]);
        let dx = Matrix::from_rows(&[
            &[pp * (c - 2.0 * ss), pp * c],
            &[pp * c, pp * (c + 2.0 * cc)],
        ]);
        let dy = Matrix::from_rows(&[
            &[pp * (c + 2.0 * cc), pp * c],
            &[pp * c, pp * (c - 2.0 * ss)],
        ]);
        vec![dx, dy]
    })
}

/// Row-wise divergence of the stress, with analytic Jacobian.
pub fn stress_divergence() -> VectorField {
    VectorField::new(2, "div_sigma", |x| {
        let v = 2.0 * PI * PI * (c_sum(x) - sp(x[0]) * sp(x[1]));
        vec![v, v]
    })
    .with_jacobian(|x| {
        let p3 = PI * PI * PI;
        let gx = -2.0 * p3 * (s_sum(x) + cp(x[0]) * sp(x[1]));
        let gy = -2.0 * p3 * (s_sum(x) + sp(x[0]) * cp(x[1]));
        Matrix::from_rows(&[&[gx, gy], &[gx, gy]])
    })
}

/// Body force `F = div sigma + mu^2 rho_s u`, chosen so the momentum
/// equation holds identically.
pub fn body_force(params: &ExampleParams) -> VectorField {
    let m = params.momentum_coefficient();
    VectorField::new(2, "f", move |x| {
        let v = 2.0 * PI * PI * (c_sum(x) - sp(x[0]) * sp(x[1])) + m * sp(x[0]) * sp(x[1]);
        vec![v, v]
    })
    .with_jacobian(move |x| {
        let p3 = PI * PI * PI;
        let gx = -2.0 * p3 * (s_sum(x) + cp(x[0]) * sp(x[1])) + m * PI * cp(x[0]) * sp(x[1]);
        let gy = -2.0 * p3 * (s_sum(x) + sp(x[0]) * cp(x[1])) + m * PI * sp(x[0]) * cp(x[1]);
        Matrix::from_rows(&[&[gx, gy], &[gx, gy]])
    })
}

/// Sensitivity of the body force under the diagonal translation: the data
/// seen by the perturbed problem move with the domain, so `F` inherits the
/// derivative `-a (d_x + d_y) F`.
pub fn body_force_shape_derivative(
    params: &ExampleParams,
    sample: &PerturbationSample,
) -> VectorField {
    let a = sample.a;
    let m = params.momentum_coefficient();
    VectorField::new(2, "f_prime", move |x| {
        // F = (2 pi^2 cos(pi(x+y)) + (m - 2 pi^2) sin(pi x) sin(pi y)) (1,1),
        // so (d_x + d_y) F = (m - 6 pi^2) pi sin(pi(x+y)) (1,1)
        let v = -a * (m - 6.0 * PI * PI) * PI * s_sum(x);
        vec![v, v]
    })
}

/// The unperturbed solution triple.
pub fn exact_fields(_params: &ExampleParams) -> (VectorField, ScalarField, TensorField) {
    (displacement(), pressure(), stress())
}

fn shifted(x: &[f64], s: f64) -> [f64; 2] {
    [x[0] - s, x[1] - s]
}

/// Perturbed displacement and pressure: the exact fields translated by
/// `eps * a` along the diagonal.
pub fn perturbed_fields(
    _params: &ExampleParams,
    sample: &PerturbationSample,
) -> (VectorField, ScalarField) {
    let s = sample.epsilon * sample.a;
    let u = VectorField::new(2, "u_eps", move |x| {
        let y = shifted(x, s);
        let v = sp(y[0]) * sp(y[1]);
        vec![v, v]
    })
    .with_jacobian(move |x| {
        let y = shifted(x, s);
        let gx = PI * cp(y[0]) * sp(y[1]);
        let gy = PI * sp(y[0]) * cp(y[1]);
        Matrix::from_rows(&[&[gx, gy], &[gx, gy]])
    });
    let p = ScalarField::new(2, "p_eps", move |x| {
        let y = shifted(x, s);
        cp(y[0]) * cp(y[1])
    })
    .with_gradient(move |x| {
        let y = shifted(x, s);
        vec![-PI * sp(y[0]) * cp(y[1]), -PI * cp(y[0]) * sp(y[1])]
    });
    (u, p)
}

/// Perturbed stress (translated like the other fields).
pub fn perturbed_stress(sample: &PerturbationSample) -> TensorField {
    let s = sample.epsilon * sample.a;
    TensorField::new(2, "sigma_eps", move |x| {
        let y = shifted(x, s);
        let ss = (PI * (y[0] + y[1])).sin();
        Matrix::from_rows(&[
            &[PI * (ss + 2.0 * cp(y[0]) * sp(y[1])), PI * ss],
            &[PI * ss, PI * (ss + 2.0 * sp(y[0]) * cp(y[1]))],
        ])
    })
}

/// First-order shape sensitivities (linear in the amplitude).
pub struct FirstOrderFields {
    pub displacement: VectorField,
    pub stress: TensorField,
    pub pressure: ScalarField,
    /// Gradient of the pressure sensitivity; its Jacobian is the Hessian.
    pub pressure_gradient: VectorField,
}

pub fn shape_derivative_fields(
    _params: &ExampleParams,
    sample: &PerturbationSample,
) -> FirstOrderFields {
    first_order_with_amplitude(sample.a)
}

/// First-order fields for an explicit amplitude (the sensitivities are
/// linear in it, so scaling one set covers every direction).
pub fn first_order_with_amplitude(a: f64) -> FirstOrderFields {
    let displacement = VectorField::new(2, "u_prime", move |x| {
        let v = -a * PI * s_sum(x);
        vec![v, v]
    })
    .with_jacobian(move |x| {
        let g = -a * PI * PI * c_sum(x);
        Matrix::from_rows(&[&[g, g], &[g, g]])
    });

    let stress = TensorField::new(2, "sigma_prime", move |x| {
        let c = -a * PI * PI * c_sum(x);
        Matrix::from_rows(&[&[4.0 * c, 2.0 * c], &[2.0 * c, 4.0 * c]])
    })
    .with_partials(move |x| {
        let d = a * PI * PI * PI * s_sum(x);
        let m = Matrix::from_rows(&[&[4.0 * d, 2.0 * d], &[2.0 * d, 4.0 * d]]);
        vec![m.clone(), m]
    });

    let pressure =
        ScalarField::new(2, "p_prime", move |x| a * PI * s_sum(x)).with_gradient(move |x| {
            let g = a * PI * PI * c_sum(x);
            vec![g, g]
        });

    let pressure_gradient = VectorField::new(2, "grad_p_prime", move |x| {
        let g = a * PI * PI * c_sum(x);
        vec![g, g]
    })
    .with_jacobian(move |x| {
        let h = -a * PI * PI * PI * s_sum(x);
        Matrix::from_rows(&[&[h, h], &[h, h]])
    });

    FirstOrderFields {
        displacement,
        stress,
        pressure,
        pressure_gradient,
    }
}

/// Second-order shape sensitivities (bilinear in the two amplitudes).
pub struct SecondOrderFields {
    pub displacement: VectorField,
    pub stress: TensorField,
    pub pressure: ScalarField,
    pub pressure_gradient: VectorField,
}

pub fn shape_hessian_fields(
    _params: &ExampleParams,
    sample: &PerturbationSample,
) -> SecondOrderFields {
    let ab = sample.a * sample.b;

    let displacement = VectorField::new(2, "u_second", move |x| {
        let v = 2.0 * ab * PI * PI * c_sum(x);
        vec![v, v]
    })
    .with_jacobian(move |x| {
        let g = -2.0 * ab * PI * PI * PI * s_sum(x);
        Matrix::from_rows(&[&[g, g], &[g, g]])
    });

    let stress = TensorField::new(2, "sigma_second", move |x| {
        let s = -ab * PI * PI * PI * s_sum(x);
        Matrix::from_rows(&[&[8.0 * s, 4.0 * s], &[4.0 * s, 8.0 * s]])
    })
    .with_partials(move |x| {
        let d = -ab * PI * PI * PI * PI * c_sum(x);
        let m = Matrix::from_rows(&[&[8.0 * d, 4.0 * d], &[4.0 * d, 8.0 * d]]);
        vec![m.clone(), m]
    });

    let pressure = ScalarField::new(2, "p_second", move |x| -2.0 * ab * PI * PI * c_sum(x))
        .with_gradient(move |x| {
            let g = 2.0 * ab * PI * PI * PI * s_sum(x);
            vec![g, g]
        });

    let pressure_gradient = VectorField::new(2, "grad_p_second", move |x| {
        let g = 2.0 * ab * PI * PI * PI * s_sum(x);
        vec![g, g]
    })
    .with_jacobian(move |x| {
        let h = 2.0 * ab * PI * PI * PI * PI * c_sum(x);
        Matrix::from_rows(&[&[h, h], &[h, h]])
    });

    SecondOrderFields {
        displacement,
        stress,
        pressure,
        pressure_gradient,
    }
}

/// First-order boundary source `G` for a side where the perturbation
/// amplitude `kappa` is constant: every term involving derivatives of
/// `kappa` or of the (flat-side) normal drops and `G = kappa div sigma`.
pub fn boundary_source(kappa: f64) -> VectorField {
    VectorField::new(2, "g_data", move |x| {
        let v = kappa * 2.0 * PI * PI * (c_sum(x) - sp(x[0]) * sp(x[1]));
        vec![v, v]
    })
    .with_jacobian(move |x| {
        let p3 = PI * PI * PI;
        let gx = -2.0 * kappa * p3 * (s_sum(x) + cp(x[0]) * sp(x[1]));
        let gy = -2.0 * kappa * p3 * (s_sum(x) + sp(x[0]) * cp(x[1]));
        Matrix::from_rows(&[&[gx, gy], &[gx, gy]])
    })
}

/// The two-term split of `G` as a matrix field: first column from the
/// `sin(pi(x+y))` part of the stress, second from the separable part. The
/// row sums reproduce `boundary_source`.
pub fn boundary_source_split(kappa: f64) -> TensorField {
    TensorField::new(2, "g_split", move |x| {
        let c1 = 2.0 * kappa * PI * PI * c_sum(x);
        let c2 = -2.0 * kappa * PI * PI * sp(x[0]) * sp(x[1]);
        Matrix::from_rows(&[&[c1, c2], &[c1, c2]])
    })
}

/// Second-order boundary data on a flat side with outward normal `n`.
///
/// `kappa` / `kappa1` are the constant per-side amplitudes of the first and
/// second perturbation; `amp_first` / `amp_second` are the global amplitudes
/// of the two sensitivity directions (they coincide with the kappas in the
/// literal convention but pick up side-dependent signs in the velocity
/// convention).
pub struct HessianBoundaryData {
    pub h1: VectorField,
    pub h2: VectorField,
    pub h3: TensorField,
    /// `n^T h3 n`, the scalar the flat-side identities consume.
    pub h3_normal: ScalarField,
    pub h4: ScalarField,
}

pub fn hessian_boundary_data(
    params: &ExampleParams,
    kappa: f64,
    kappa1: f64,
    amp_first: f64,
    amp_second: f64,
    normal: [f64; 2],
) -> HessianBoundaryData {
    let mu2 = params.mu2;
    let rho_f = params.rho_fluid;
    let c2 = params.wave_speed * params.wave_speed;
    let rho_s = params.rho_solid;
    // cross factor kappa1 * (first direction) + kappa * (second direction)
    let cross = kappa1 * amp_first + kappa * amp_second;
    let kk = kappa * kappa1;
    let n = normal;

    let grad_u = displacement_gradient();
    let grad_p = pressure_gradient();
    let unit_first = first_order_with_amplitude(1.0);
    let div_sigma = stress_divergence();

    let h1 = {
        let du = unit_first.stress.clone();
        let dsj = div_sigma.clone();
        VectorField::new(2, "h1", move |x| {
            // 2 kappa * div sigma'[second] + kappa kappa1 * d_n(div sigma)
            let div_sp: Vec<f64> = du.divergence(x);
            let jn = dsj.jacobian(x).matvec(&[n[0], n[1]]);
            (0..2)
                .map(|i| -(2.0 * kappa * amp_second * div_sp[i] + kk * jn[i]) / rho_s)
                .collect()
        })
    };

    let h2 = {
        let gp_prime = unit_first.pressure_gradient.clone();
        let gp = grad_p.clone();
        VectorField::new(2, "h2", move |x| {
            let a1 = gp_prime.eval(x);
            let hn = gp.jacobian(x).matvec(&[n[0], n[1]]);
            (0..2)
                .map(|i| -(kappa * amp_second * a1[i] + kk * hn[i]) / rho_f)
                .collect()
        })
    };

    let h3 = {
        let gu_prime = unit_first.displacement.clone();
        let gu = grad_u.clone();
        TensorField::new(2, "h3", move |x| {
            let j_prime = gu_prime.jacobian(x);
            let parts = gu.partials(x);
            let dn = parts[0].scale(n[0]).add(&parts[1].scale(n[1]));
            j_prime.scale(cross).add(&dn.scale(kk)).scale(-mu2)
        })
    };

    let h3_normal = {
        let gu_prime = unit_first.displacement.clone();
        let gu = grad_u;
        ScalarField::new(2, "h3_normal", move |x| {
            let j_prime = gu_prime.jacobian(x);
            let parts = gu.partials(x);
            let dn = parts[0].scale(n[0]).add(&parts[1].scale(n[1]));
            let m = j_prime.scale(cross).add(&dn.scale(kk)).scale(-mu2);
            let mn = m.matvec(&[n[0], n[1]]);
            n[0] * mn[0] + n[1] * mn[1]
        })
    };

    let h4 = {
        let p_prime = unit_first.pressure.clone();
        let gp = pressure_gradient();
        ScalarField::new(2, "h4", move |x| {
            let dpn = {
                let g = gp.eval(x);
                g[0] * n[0] + g[1] * n[1]
            };
            mu2 / (rho_f * c2) * (cross * p_prime.eval(x) + kk * dpn)
        })
    };

    HessianBoundaryData {
        h1,
        h2,
        h3,
        h3_normal,
        h4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{l_operator, strain};
    use crate::tensor::{frobenius, hooke};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn solid_point(rng: &mut StdRng) -> [f64; 2] {
        loop {
            let x: f64 = rng.gen_range(-2.0..2.0);
            let y: f64 = rng.gen_range(-2.0..2.0);
            if x.abs() >= 1.0 || y.abs() >= 1.0 {
                return [x, y];
            }
        }
    }

    #[test]
    fn pinned_field_values() {
        let (u, p, sigma) = exact_fields(&ExampleParams::default());
        assert_abs_diff_eq!(p.eval(&[0.0, 0.0]), 1.0);
        let uv = u.eval(&[0.5, 0.5]);
        assert_abs_diff_eq!(uv[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(uv[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sigma.eval(&[0.25, 0.25])[(0, 1)], PI, epsilon = 1e-14);
    }

    #[test]
    fn constitutive_identity_at_random_points() {
        let params = ExampleParams::default();
        let (u, _, sigma) = exact_fields(&params);
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let x = solid_point(&mut rng);
            let e = strain(&u, &x);
            let ce = hooke(&e, params.lambda, params.nu).unwrap();
            assert!(ce.sub(&sigma.eval(&x)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn helmholtz_identity_analytic() {
        let params = ExampleParams::default();
        let p = pressure();
        let gp = pressure_gradient();
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..100 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let lap = gp.jacobian(&x).trace();
            assert_abs_diff_eq!(
                lap + params.helmholtz_coefficient() * p.eval(&x),
                0.0,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn momentum_equation_closes() {
        let params = ExampleParams::default();
        let f = body_force(&params);
        let u = displacement();
        let sigma = stress();
        let m = params.momentum_coefficient();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let x = solid_point(&mut rng);
            let div = l_operator(&Matrix::identity(2), &sigma, &x);
            let uv = u.eval(&x);
            let fv = f.eval(&x);
            for i in 0..2 {
                assert_abs_diff_eq!(div[i] + m * uv[i] - fv[i], 0.0, epsilon = 1e-10);
            }
        }
        // pinned value: F_1(0.5, 0.5) = 14 pi^2
        assert_abs_diff_eq!(f.eval(&[0.5, 0.5])[0], 14.0 * PI * PI, epsilon = 1e-10);
        // deterministic evaluation
        assert_eq!(f.eval(&[0.3, 0.4]), f.eval(&[0.3, 0.4]));
    }

    #[test]
    fn perturbed_fields_match_spots() {
        let params = ExampleParams::default();
        let zero = PerturbationSample::new(0.0, 0.7).unwrap();
        let (u0, p0) = perturbed_fields(&params, &zero);
        let (u, p, _) = exact_fields(&params);
        let x = [0.3, -0.6];
        assert_eq!(u0.eval(&x), u.eval(&x));
        assert_eq!(p0.eval(&x), p.eval(&x));

        let s = PerturbationSample::new(0.1, 1.0).unwrap();
        let (_, pe) = perturbed_fields(&params, &s);
        // peak translates with the domain
        assert_abs_diff_eq!(pe.eval(&[0.1, 0.1]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            pe.eval(&[0.0, 0.0]),
            (0.1 * PI).cos().powi(2),
            epsilon = 1e-15
        );
    }

    #[test]
    fn sample_validation() {
        assert!(PerturbationSample::new(0.3, 0.5).is_err());
        assert!(PerturbationSample::new(0.1, 1.5).is_err());
        assert!(PerturbationSample::new(0.25, -1.0).is_ok());
    }

    #[test]
    fn first_order_pinned_values() {
        let params = ExampleParams::default();
        let s = PerturbationSample::new(0.1, 1.0).unwrap();
        let d = shape_derivative_fields(&params, &s);
        assert_abs_diff_eq!(d.pressure.eval(&[0.5, 0.0]), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(
            d.stress.eval(&[0.0, 0.0])[(0, 0)],
            -4.0 * PI * PI,
            epsilon = 1e-12
        );
        let zero = shape_derivative_fields(&params, &PerturbationSample::new(0.1, 0.0).unwrap());
        assert_eq!(zero.pressure.eval(&[0.3, 0.2]), 0.0);
        assert_eq!(zero.displacement.eval(&[0.3, 0.2]), vec![0.0, 0.0]);
    }

    #[test]
    fn second_order_pinned_values() {
        let params = ExampleParams::default();
        let s = PerturbationSample::with_second(0.1, 1.0, 1.0).unwrap();
        let h = shape_hessian_fields(&params, &s);
        assert_abs_diff_eq!(
            h.pressure.eval(&[0.0, 0.0]),
            -2.0 * PI * PI,
            epsilon = 1e-12
        );
        let uv = h.displacement.eval(&[0.25, 0.25]);
        assert_abs_diff_eq!(uv[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uv[1], 0.0, epsilon = 1e-12);
        let sz = shape_hessian_fields(
            &params,
            &PerturbationSample::with_second(0.1, 0.0, 1.0).unwrap(),
        );
        assert_eq!(sz.pressure.eval(&[0.3, 0.1]), 0.0);
    }

    #[test]
    fn first_order_constitutive_and_pde_structure() {
        let params = ExampleParams::default();
        let s = PerturbationSample::new(0.05, 0.6).unwrap();
        let d = shape_derivative_fields(&params, &s);
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..50 {
            let x = solid_point(&mut rng);
            let e = strain(&d.displacement, &x);
            let ce = hooke(&e, params.lambda, params.nu).unwrap();
            assert!(ce.sub(&d.stress.eval(&x)).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn boundary_source_matches_split_and_pins() {
        let g = boundary_source(1.0);
        let split = boundary_source_split(1.0);
        assert_abs_diff_eq!(
            split.eval(&[0.0, 0.0])[(0, 0)],
            2.0 * PI * PI,
            epsilon = 1e-12
        );
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..30 {
            let x = solid_point(&mut rng);
            let v = g.eval(&x);
            let m = split.eval(&x);
            for i in 0..2 {
                assert_abs_diff_eq!(v[i], m[(i, 0)] + m[(i, 1)], epsilon = 1e-10);
            }
        }
        let gz = boundary_source(0.0);
        assert_eq!(gz.eval(&[0.4, 1.3]), vec![0.0, 0.0]);
    }

    #[test]
    fn hessian_boundary_data_on_top_interface() {
        // printed data on the top interface side with literal amplitudes:
        // h2 = a b pi^2 (cos(pi x), 0), n^T h3 n = -12 a b pi^4 cos(pi x),
        // h4 = -4 a b pi^3 sin(pi x)
        let params = ExampleParams::default();
        let (a, b) = (0.8, -0.5);
        let data = hessian_boundary_data(&params, a, b, a, b, [0.0, 1.0]);
        for xv in [-0.7, -0.2, 0.25, 0.5, 0.9] {
            let x = [xv, 1.0];
            let h2 = data.h2.eval(&x);
            assert_abs_diff_eq!(h2[0], a * b * PI * PI * cp(xv), epsilon = 1e-10);
            assert_abs_diff_eq!(h2[1], 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(
                data.h3_normal.eval(&x),
                -12.0 * a * b * PI.powi(4) * cp(xv),
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(
                data.h4.eval(&x),
                -4.0 * a * b * PI.powi(3) * sp(xv),
                epsilon = 1e-10
            );
            assert!(data.h1.eval(&x).iter().all(|v| v.is_finite()));
        }
        // pinned spec value at (0.5, 1): -4 pi^3 for a = b = 1
        let unit = hessian_boundary_data(&params, 1.0, 1.0, 1.0, 1.0, [0.0, 1.0]);
        assert_abs_diff_eq!(
            unit.h4.eval(&[0.5, 1.0]),
            -4.0 * PI.powi(3),
            epsilon = 1e-10
        );
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        let fields: Vec<(&str, TensorField)> = vec![
            ("sigma", stress()),
            ("grad_u", displacement_gradient()),
            ("sigma_prime", first_order_with_amplitude(0.7).stress),
        ];
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..20 {
            let x = solid_point(&mut rng);
            for (_, f) in &fields {
                let analytic = f.partials(&x);
                let fd = f.fd_partials(&x);
                for k in 0..2 {
                    assert!(analytic[k].sub(&fd[k]).max_abs() < 5e-5);
                }
            }
        }
    }

    #[test]
    fn directional_consistency_first_and_second_order() {
        // (p_eps - p)/eps -> p' and the centered second difference -> p''
        // with at least first-order slopes in eps on a compact subset
        let params = ExampleParams::default();
        let a = 0.9;
        // points where cos(pi(x+y)) and sin(pi(x+y)) are both O(1)
        let points = [[0.1, 0.1], [-0.4, 0.1], [0.05, -0.35]];
        let eps_list: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
        let ols_slope = |errs: &[f64]| {
            let n = errs.len() as f64;
            let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
            for (&e, &err) in eps_list.iter().zip(errs) {
                let (lx, ly): (f64, f64) = (e.ln(), err.ln());
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            (n * sxy - sx * sy) / (n * sxx - sx * sx)
        };
        for x in &points {
            let mut errs1 = Vec::new();
            let mut errs2 = Vec::new();
            for &eps in &eps_list {
                let sp_ = PerturbationSample::new(eps, a).unwrap();
                let sm = PerturbationSample::new(eps, -a).unwrap();
                let (_, pe) = perturbed_fields(&params, &sp_);
                let (_, pm) = perturbed_fields(&params, &sm);
                let d = shape_derivative_fields(&params, &sp_);
                let h = shape_hessian_fields(
                    &params,
                    &PerturbationSample::with_second(eps, a, a).unwrap(),
                );
                let p0 = pressure();
                let quotient = (pe.eval(x) - p0.eval(x)) / eps;
                errs1.push((quotient - d.pressure.eval(x)).abs());
                let second = (pe.eval(x) - 2.0 * p0.eval(x) + pm.eval(x)) / (eps * eps);
                errs2.push((second - h.pressure.eval(x)).abs());
            }
            let s1 = ols_slope(&errs1);
            let s2 = ols_slope(&errs2);
            assert!(
                s1 >= 0.9,
                "first-order slope {s1} at {x:?}, errors {errs1:?}"
            );
            assert!(
                s2 >= 1.0,
                "second-difference slope {s2} at {x:?}, errors {errs2:?}"
            );
        }
    }

    #[test]
    fn skew_orthogonality_of_stress() {
        // sigma is symmetric, so its contraction with any skew tensor vanishes
        let sigma = stress();
        let skew = Matrix::from_rows(&[&[0.0, 2.5], &[-2.5, 0.0]]);
        let x = [1.4, 0.3];
        assert_abs_diff_eq!(
            frobenius(&sigma.eval(&x), &skew).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }
}
