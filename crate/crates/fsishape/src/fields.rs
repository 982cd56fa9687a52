//! Evaluable scalar, vector and tensor fields over R^2 / R^3.
//!
//! Fields carry their evaluation closure plus optional analytic first
//! partials. When partials are absent, central finite differences with
//! `FD_STEP` are used; the benchmark fields always supply analytic
//! derivatives and the finite-difference path is exercised as a consistency
//! check in tests.

use std::sync::Arc;

use crate::tensor::Matrix;

/// Central finite-difference step, balancing truncation against roundoff
/// for fields with derivatives of size O(pi^3).
pub const FD_STEP: f64 = 1e-5;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;
type MatrixListFn = Arc<dyn Fn(&[f64]) -> Vec<Matrix> + Send + Sync>;

/// Real-valued field with optional analytic gradient.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    label: String,
    f: ScalarFn,
    grad: Option<VectorFn>,
}

impl ScalarField {
    pub fn new(dim: usize, label: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            dim,
            label: label.to_string(),
            f: Arc::new(f),
            grad: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        ScalarField::new(dim, "const", move |_| c).with_gradient(move |x| vec![0.0; x.len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.f)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.grad {
            Some(g) => g(x),
            None => self.fd_gradient(x),
        }
    }

    pub fn fd_gradient(&self, x: &[f64]) -> Vec<f64> {
        central_difference(x, |y| vec![self.eval(y)])
            .into_iter()
            .map(|row| row[0])
            .collect()
    }
}

/// Vector-valued field with optional analytic Jacobian, `(i, j) -> d_j f_i`.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    label: String,
    f: VectorFn,
    jacobian: Option<MatrixFn>,
}

impl VectorField {
    pub fn new(
        dim: usize,
        label: &str,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            dim,
            label: label.to_string(),
            f: Arc::new(f),
            jacobian: None,
        }
    }

    pub fn with_jacobian(mut self, j: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn constant(dim: usize, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), dim);
        let d = dim;
        VectorField::new(dim, "const", move |_| v.clone())
            .with_jacobian(move |_| Matrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.f)(x)
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Jacobian matrix with entries `d_j f_i`, analytic when available.
    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        match &self.jacobian {
            Some(j) => j(x),
            None => self.fd_jacobian(x),
        }
    }

    pub fn fd_jacobian(&self, x: &[f64]) -> Matrix {
        let cols = central_difference(x, |y| self.eval(y));
        Matrix::from_fn(self.dim, self.dim, |i, j| cols[j][i])
    }

    /// Row-wise divergence `sum_j d_j f_j`.
    pub fn divergence(&self, x: &[f64]) -> f64 {
        self.jacobian(x).trace()
    }
}

/// Matrix-valued field with optional analytic partials; `partials(x)[k] = d_k sigma`.
#[derive(Clone)]
pub struct TensorField {
    dim: usize,
    label: String,
    f: MatrixFn,
    partials: Option<MatrixListFn>,
}

impl TensorField {
    pub fn new(
        dim: usize,
        label: &str,
        f: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        TensorField {
            dim,
            label: label.to_string(),
            f: Arc::new(f),
            partials: None,
        }
    }

    pub fn with_partials(
        mut self,
        p: impl Fn(&[f64]) -> Vec<Matrix> + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some(Arc::new(p));
        self
    }

    pub fn constant(dim: usize, m: Matrix) -> Self {
        let d = dim;
        let mc = m.clone();
        TensorField::new(dim, "const", move |_| mc.clone())
            .with_partials(move |_| vec![Matrix::zeros(d, d); d])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> Matrix {
        debug_assert_eq!(x.len(), self.dim);
        (self.f)(x)
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn partials(&self, x: &[f64]) -> Vec<Matrix> {
        match &self.partials {
            Some(p) => p(x),
            None => self.fd_partials(x),
        }
    }

    pub fn fd_partials(&self, x: &[f64]) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(self.dim);
        let mut xp = x.to_vec();
        for k in 0..self.dim {
            let x0 = x[k];
            xp[k] = x0 + FD_STEP;
            let plus = self.eval(&xp);
            xp[k] = x0 - FD_STEP;
            let minus = self.eval(&xp);
            xp[k] = x0;
            out.push(plus.sub(&minus).scale(0.5 / FD_STEP));
        }
        out
    }

    /// Row-wise divergence `(div sigma)_i = sum_j d_j sigma_ij`.
    pub fn divergence(&self, x: &[f64]) -> Vec<f64> {
        let parts = self.partials(x);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| parts[j][(i, j)]).sum())
            .collect()
    }
}

/// Contracted first-order operator: row `k` of the result is
/// `sum_{i,j} a_ij d_i sigma_kj`. With `a = I` this is the row-wise
/// divergence; it is not the gradient of the tensor.
pub fn l_operator(a: &Matrix, sigma: &TensorField, x: &[f64]) -> Vec<f64> {
    let d = sigma.dim();
    assert_eq!(
        (a.rows(), a.cols()),
        (d, d),
        "operator matrix must be d x d"
    );
    let parts = sigma.partials(x);
    (0..d)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += a[(i, j)] * parts[i][(k, j)];
                }
            }
            s
        })
        .collect()
}

/// Symmetric gradient of a displacement field at a point.
pub fn strain(u: &VectorField, x: &[f64]) -> Matrix {
    u.jacobian(x).symmetric_part()
}

/// Central differences of an n-component function; returns one vector of
/// component derivatives per coordinate direction.
fn central_difference(x: &[f64], f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let x0 = x[k];
        xp[k] = x0 + FD_STEP;
        let plus = f(&xp);
        xp[k] = x0 - FD_STEP;
        let minus = f(&xp);
        xp[k] = x0;
        out.push(
            plus.iter()
                .zip(&minus)
                .map(|(p, m)| (p - m) * 0.5 / FD_STEP)
                .collect(),
        );
    }
    out
}
