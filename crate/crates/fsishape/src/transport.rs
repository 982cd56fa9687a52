//! Perturbation-of-identity transport maps and their Jacobian calculus.
//!
//! A map `T(x) = x + eps * V(x)` moves the reference configuration with
//! velocity `V = kappa_ext * normal_ext`; the velocity vanishes outside a
//! cutoff ball so the map is the identity far away. The Jacobian bundle
//! collects everything the pulled-back weak forms consume: the determinant
//! and its polynomial coefficients, the adjugate expansion, the inverse,
//! and the transported metric `gamma J^-1 J^-T`.

use std::sync::Arc;

use crate::fields::{l_operator, ScalarField, TensorField, VectorField};
use crate::tensor::{kronecker, Matrix};
use crate::{Error, Result};

/// Default upper bound for the perturbation size.
pub const DEFAULT_EPS_MAX: f64 = 0.25;

/// Default cutoff radius; the velocity decays to zero over the last unit.
pub const DEFAULT_CUTOFF_RADIUS: f64 = 4.0;

/// Quintic smoothstep that is 1 on `[0, radius - 1]`, 0 on `[radius, inf)`; C^2.
fn cutoff(r: f64, radius: f64) -> f64 {
    let r1 = radius - 1.0;
    if r <= r1 {
        1.0
    } else if r >= radius {
        0.0
    } else {
        let s = r - r1;
        1.0 - (10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5))
    }
}

fn cutoff_derivative(r: f64, radius: f64) -> f64 {
    let r1 = radius - 1.0;
    if r <= r1 || r >= radius {
        0.0
    } else {
        let s = r - r1;
        -(30.0 * s.powi(2) - 60.0 * s.powi(3) + 30.0 * s.powi(4))
    }
}

/// A perturbation-of-identity map `x -> x + eps * V(x)`.
#[derive(Clone)]
pub struct TransportMap {
    velocity: Arc<VectorField>,
    kappa_ext: Option<Arc<ScalarField>>,
    normal_ext: Option<Arc<VectorField>>,
    epsilon: f64,
    cutoff_radius: f64,
    eps_max: f64,
}

impl TransportMap {
    /// Builds a map from an extended amplitude and normal field; the
    /// velocity is their product.
    pub fn new(
        kappa_ext: ScalarField,
        normal_ext: VectorField,
        epsilon: f64,
        cutoff_radius: f64,
    ) -> Result<Self> {
        let dim = normal_ext.dim();
        assert_eq!(kappa_ext.dim(), dim);
        let k = Arc::new(kappa_ext);
        let n = Arc::new(normal_ext);
        let (kf, nf) = (k.clone(), n.clone());
        let velocity = VectorField::new(dim, "velocity", move |x| {
            let kv = kf.eval(x);
            nf.eval(x).iter().map(|v| kv * v).collect()
        });
        Self::from_velocity_inner(Arc::new(velocity), Some(k), Some(n), epsilon, cutoff_radius)
    }

    /// Builds a map directly from a velocity field.
    pub fn from_velocity(velocity: VectorField, epsilon: f64, cutoff_radius: f64) -> Result<Self> {
        Self::from_velocity_inner(Arc::new(velocity), None, None, epsilon, cutoff_radius)
    }

    fn from_velocity_inner(
        velocity: Arc<VectorField>,
        kappa_ext: Option<Arc<ScalarField>>,
        normal_ext: Option<Arc<VectorField>>,
        epsilon: f64,
        cutoff_radius: f64,
    ) -> Result<Self> {
        let map = TransportMap {
            velocity,
            kappa_ext,
            normal_ext,
            epsilon,
            cutoff_radius,
            eps_max: DEFAULT_EPS_MAX,
        };
        if epsilon < 0.0 || epsilon > map.eps_max {
            return Err(Error::EpsilonTooLarge {
                eps: epsilon,
                max: map.eps_max,
            });
        }
        Ok(map)
    }

    /// Rigid diagonal translation with amplitude `a` per coordinate,
    /// smoothly cut off between `radius - 1` and `radius`. Inside the core
    /// the velocity is exactly `a * (1, .., 1)`.
    pub fn translation(dim: usize, a: f64, epsilon: f64) -> Result<Self> {
        let radius = DEFAULT_CUTOFF_RADIUS;
        let kappa = ScalarField::new(dim, "kappa-translation", move |x| {
            a * (dim as f64).sqrt() * cutoff(norm(x), radius)
        })
        .with_gradient(move |x| {
            let r = norm(x);
            let dr = cutoff_derivative(r, radius);
            x.iter()
                .map(|&xi| a * (dim as f64).sqrt() * dr * xi / r.max(1e-300))
                .collect()
        });
        let normal = VectorField::constant(dim, vec![1.0 / (dim as f64).sqrt(); dim]);
        let mut map = Self::new(kappa, normal, epsilon, radius)?;
        map.velocity = Arc::new(
            VectorField::new(dim, "velocity-translation", move |x| {
                vec![a * cutoff(norm(x), radius); dim]
            })
            .with_jacobian(move |x| {
                let r = norm(x);
                let dr = cutoff_derivative(r, radius);
                Matrix::from_fn(dim, dim, |_, j| a * dr * x[j] / r.max(1e-300))
            }),
        );
        Ok(map)
    }

    /// Dilation `V = a * x` (cut off at `radius`): each flat side of a
    /// centred square of half-width `h` moves with constant normal speed
    /// `a * h`, realizing a uniform normal offset of that square.
    pub fn dilation(dim: usize, a: f64, epsilon: f64) -> Result<Self> {
        let radius = DEFAULT_CUTOFF_RADIUS;
        let kappa = ScalarField::new(dim, "kappa-dilation", move |x| {
            let r = norm(x);
            a * r * cutoff(r, radius)
        });
        let normal_ext = crate::geometry::radial_normal_field(dim);
        let mut map = Self::new(kappa, normal_ext, epsilon, radius)?;
        map.velocity = Arc::new(
            VectorField::new(dim, "velocity-dilation", move |x| {
                let c = cutoff(norm(x), radius);
                x.iter().map(|&xi| a * xi * c).collect()
            })
            .with_jacobian(move |x| {
                let r = norm(x);
                let c = cutoff(r, radius);
                let dc = cutoff_derivative(r, radius);
                Matrix::from_fn(dim, dim, |i, j| {
                    let kron = if i == j { 1.0 } else { 0.0 };
                    a * (c * kron + dc * x[i] * x[j] / r.max(1e-300))
                })
            }),
        );
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.velocity.dim()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }

    /// Same map evaluated at a different perturbation size.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if epsilon < 0.0 || epsilon > self.eps_max {
            return Err(Error::EpsilonTooLarge {
                eps: epsilon,
                max: self.eps_max,
            });
        }
        let mut m = self.clone();
        m.epsilon = epsilon;
        Ok(m)
    }

    pub fn velocity(&self) -> &VectorField {
        &self.velocity
    }

    pub fn kappa_ext(&self) -> Option<&ScalarField> {
        self.kappa_ext.as_deref()
    }

    pub fn normal_ext(&self) -> Option<&VectorField> {
        self.normal_ext.as_deref()
    }

    /// `T(x) = x + eps V(x)`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = self.velocity.eval(x);
        x.iter()
            .zip(&v)
            .map(|(xi, vi)| xi + self.epsilon * vi)
            .collect()
    }

    /// Normal boundary speed `<V, n>` at a point.
    pub fn normal_speed(&self, x: &[f64], n: &[f64]) -> f64 {
        let v = self.velocity.eval(x);
        v.iter().zip(n).map(|(a, b)| a * b).sum()
    }
}

/// Everything derived from the transport Jacobian at one point.
#[derive(Debug, Clone)]
pub struct JacobianBundle {
    pub dim: usize,
    pub eps: f64,
    /// `J = I + eps grad(V)`.
    pub jacobian: Matrix,
    /// `det J`.
    pub det: f64,
    /// Coefficients of `det J = 1 + eps c1 + eps^2 c2 + eps^3 c3` as an
    /// exact polynomial identity (`c3 = 0` in two dimensions).
    pub det_coeffs: [f64; 3],
    /// Linear coefficient of the cofactor expansion
    /// `cof(J) = I + eps A1 + eps^2 A2`; equals `tr(W) I - W` for `W = grad(V)`.
    pub adj_linear: Matrix,
    /// Quadratic coefficient of the cofactor expansion (zero in two dimensions).
    pub adj_quadratic: Matrix,
    /// `J^-1`.
    pub inverse: Matrix,
    /// `(J^-1 - I) / eps`; converges to `(adj_linear - c1 I)^T` as `eps -> 0`.
    pub inverse_rate: Matrix,
    /// Transported metric `det(J) J^-1 J^-T`; symmetric, the identity at `eps = 0`.
    pub metric: Matrix,
}

/// Quadratic polynomial in the perturbation size; tracks cofactor entries
/// of the affine matrix `I + eps W` exactly.
#[derive(Clone, Copy)]
struct Poly2(f64, f64, f64);

impl Poly2 {
    fn mul(self, o: Poly2) -> Poly2 {
        // inputs are affine in eps, so the product is exactly quadratic
        Poly2(self.0 * o.0, self.0 * o.1 + self.1 * o.0, self.1 * o.1)
    }
    fn sub(self, o: Poly2) -> Poly2 {
        Poly2(self.0 - o.0, self.1 - o.1, self.2 - o.2)
    }
}

/// Assembles the Jacobian bundle of `map` at `x`.
///
/// Fails with `DegenerateJacobian` when the determinant is not strictly
/// positive.
pub fn jacobian_bundle(map: &TransportMap, x: &[f64]) -> Result<JacobianBundle> {
    let dim = map.dim();
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let eps = map.epsilon();
    let w = map.velocity().jacobian(x);
    let jac = Matrix::identity(dim).add(&w.scale(eps));
    let det = jac.det();
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::DegenerateJacobian {
            point: x.to_vec(),
            eps,
            det,
        });
    }

    // determinant coefficients: elementary symmetric functions of W
    let c1 = w.trace();
    let (c2, c3) = match dim {
        2 => (w.det(), 0.0),
        _ => {
            let m = |i: usize, j: usize| w[(i, j)];
            let e2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)
                + m(1, 1) * m(2, 2)
                - m(1, 2) * m(2, 1);
            (e2, w.det())
        }
    };

    let mut adj_linear;
    let mut adj_quadratic = Matrix::zeros(dim, dim);
    if dim == 2 {
        adj_linear = Matrix::from_rows(&[&[w[(1, 1)], -w[(1, 0)]], &[-w[(0, 1)], w[(0, 0)]]]);
    } else {
        // cofactor matrix of I + eps W with exact polynomial entries
        let entry = |i: usize, j: usize| {
            let kron = if i == j { 1.0 } else { 0.0 };
            Poly2(kron, w[(i, j)], 0.0)
        };
        adj_linear = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (q0, q1) = match j {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let minor = entry(r0, q0)
                    .mul(entry(r1, q1))
                    .sub(entry(r0, q1).mul(entry(r1, q0)));
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                adj_linear[(i, j)] = sign * minor.1;
                adj_quadratic[(i, j)] = sign * minor.2;
            }
        }
    }

    let inverse = jac.cofactor().transpose().scale(1.0 / det);
    let inverse_rate = if eps == 0.0 {
        adj_linear.transpose().sub(&Matrix::identity(dim).scale(c1))
    } else {
        inverse.sub(&Matrix::identity(dim)).scale(1.0 / eps)
    };
    let metric = inverse.matmul(&inverse.transpose()).scale(det);

    Ok(JacobianBundle {
        dim,
        eps,
        jacobian: jac,
        det,
        det_coeffs: [c1, c2, c3],
        adj_linear,
        adj_quadratic,
        inverse,
        inverse_rate,
        metric,
    })
}

/// Transported metric `A(eps, x) = det(J) J^-1 J^-T`.
pub fn pullback_metric(map: &TransportMap, x: &[f64]) -> Result<Matrix> {
    Ok(jacobian_bundle(map, x)?.metric)
}

/// Analytic derivative of the transported metric in the perturbation size
/// at zero: `div(V) I - grad(V) - grad(V)^T`.
pub fn pullback_metric_rate(map: &TransportMap, x: &[f64]) -> Matrix {
    let dim = map.dim();
    let w = map.velocity().jacobian(x);
    Matrix::identity(dim)
        .scale(w.trace())
        .sub(&w)
        .sub(&w.transpose())
}

/// Finite-difference quotient `(A(eps, x) - I) / eps` for cross-checking
/// the analytic rate.
pub fn pullback_metric_rate_fd(map: &TransportMap, x: &[f64], eps: f64) -> Result<Matrix> {
    let m = pullback_metric(&map.with_epsilon(eps)?, x)?;
    Ok(m.sub(&Matrix::identity(map.dim())).scale(1.0 / eps))
}

/// Kronecker-structured transported divergence
/// `det(J) * (J^-1 (x) L_{J^-1} sigma)`; reduces to `I (x) L_I sigma` at
/// `eps = 0`.
pub fn kron_divergence(map: &TransportMap, sigma: &TensorField, x: &[f64]) -> Result<Matrix> {
    let bundle = jacobian_bundle(map, x)?;
    let l = l_operator(&bundle.inverse, sigma, x);
    let l_col = Matrix::from_fn(l.len(), 1, |i, _| l[i]);
    Ok(kronecker(&bundle.inverse, &l_col).scale(bundle.det))
}

/// Reference value `I (x) L_I sigma` of the transported divergence.
pub fn kron_divergence_reference(sigma: &TensorField, x: &[f64]) -> Matrix {
    let d = sigma.dim();
    let l = l_operator(&Matrix::identity(d), sigma, x);
    let l_col = Matrix::from_fn(d, 1, |i, _| l[i]);
    kronecker(&Matrix::identity(d), &l_col)
}

/// Pullback `y -> f(T(y))` of a scalar field; the chain-rule gradient is
/// attached when both the field and the velocity carry derivatives.
pub fn pullback_scalar(field: &ScalarField, map: &TransportMap) -> ScalarField {
    let f = field.clone();
    let m = map.clone();
    let has_grad = field.has_gradient() && map.velocity().has_jacobian();
    let base = ScalarField::new(
        field.dim(),
        &format!("{}-pullback", field.label()),
        move |y| f.eval(&m.apply(y)),
    );
    if !has_grad {
        return base;
    }
    let f = field.clone();
    let m = map.clone();
    base.with_gradient(move |y| {
        let ty = m.apply(y);
        let g = f.gradient(&ty);
        let w = m.velocity().jacobian(y);
        let jac = Matrix::identity(m.dim()).add(&w.scale(m.epsilon()));
        jac.transpose().matvec(&g)
    })
}

/// Pullback of a vector field (componentwise composition with the map).
pub fn pullback_vector(field: &VectorField, map: &TransportMap) -> VectorField {
    let f = field.clone();
    let m = map.clone();
    VectorField::new(
        field.dim(),
        &format!("{}-pullback", field.label()),
        move |y| f.eval(&m.apply(y)),
    )
}

/// Pullback of a tensor field.
pub fn pullback_tensor(field: &TensorField, map: &TransportMap) -> TensorField {
    let f = field.clone();
    let m = map.clone();
    TensorField::new(
        field.dim(),
        &format!("{}-pullback", field.label()),
        move |y| f.eval(&m.apply(y)),
    )
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
