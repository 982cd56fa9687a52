//! Small dense matrix algebra: Kronecker products, Frobenius contraction,
//! strain and Hooke operators.
//!
//! Everything here is sized for pointwise tensor work in two or three
//! dimensions; matrices are heap-backed but tiny (at most 9x9 after a
//! Kronecker product of two 3x3 operands).

use crate::{Error, Result};

/// Dense row-major m x n matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| s * self[(i, j)])
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    /// Matrix-vector product; `v.len()` must equal `cols`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn det(&self) -> f64 {
        assert!(self.is_square());
        match self.rows {
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            3 => {
                self[(0, 0)] * (self[(1, 1)] * self[(2, 2)] - self[(1, 2)] * self[(2, 1)])
                    - self[(0, 1)] * (self[(1, 0)] * self[(2, 2)] - self[(1, 2)] * self[(2, 0)])
                    + self[(0, 2)] * (self[(1, 0)] * self[(2, 1)] - self[(1, 1)] * self[(2, 0)])
            }
            n => panic!("determinant not implemented for dimension {n}"),
        }
    }

    /// Cofactor matrix (unsigned transpose of the adjugate): `A * cof(A)^T = det(A) * I`.
    pub fn cofactor(&self) -> Matrix {
        assert!(self.is_square());
        match self.rows {
            2 => Matrix::from_rows(&[
                &[self[(1, 1)], -self[(1, 0)]],
                &[-self[(0, 1)], self[(0, 0)]],
            ]),
            3 => Matrix::from_fn(3, 3, |i, j| {
                let (r0, r1) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (c0, c1) = match j {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let minor = self[(r0, c0)] * self[(r1, c1)] - self[(r0, c1)] * self[(r1, c0)];
                if (i + j) % 2 == 0 {
                    minor
                } else {
                    -minor
                }
            }),
            n => panic!("cofactor not implemented for dimension {n}"),
        }
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::DimensionMismatch(format!(
                "singular matrix, det = {d}"
            )));
        }
        Ok(self.cofactor().transpose().scale(1.0 / d))
    }

    pub fn symmetric_part(&self) -> Matrix {
        self.add(&self.transpose()).scale(0.5)
    }

    pub fn skew_part(&self) -> Matrix {
        self.sub(&self.transpose()).scale(0.5)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product `A (x) B`: block (i, j) equals `a_ij * B`.
///
/// Bilinear in both arguments and associative; not commutative.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            for p in 0..b.rows() {
                for q in 0..b.cols() {
                    out[(i * b.rows() + p, j * b.cols() + q)] = a[(i, j)] * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Componentwise inner product `A : B = Tr(A^T B)`.
pub fn frobenius(a: &Matrix, b: &Matrix) -> Result<f64> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "frobenius needs equal shapes, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut s = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    Ok(s)
}

/// Symmetric gradient `(grad_u + grad_u^T) / 2` of a displacement gradient.
pub fn strain_from_gradient(grad_u: &Matrix) -> Matrix {
    grad_u.symmetric_part()
}

/// Plane/volumetric Hooke operator `tau -> lambda Tr(tau) I + 2 nu tau`.
pub fn hooke(tau: &Matrix, lambda: f64, nu: f64) -> Result<Matrix> {
    if lambda <= 0.0 || nu <= 0.0 {
        return Err(Error::NonPositiveLame { lambda, nu });
    }
    assert!(tau.is_square());
    let d = tau.rows();
    Ok(Matrix::identity(d)
        .scale(lambda * tau.trace())
        .add(&tau.scale(2.0 * nu)))
}

/// Inverse Hooke operator: `hooke_inverse(hooke(tau)) == tau`.
pub fn hooke_inverse(sigma: &Matrix, lambda: f64, nu: f64) -> Result<Matrix> {
    if lambda <= 0.0 || nu <= 0.0 {
        return Err(Error::NonPositiveLame { lambda, nu });
    }
    assert!(sigma.is_square());
    let d = sigma.rows() as f64;
    let tr = sigma.trace();
    // Tr(hooke(tau)) = (d*lambda + 2 nu) Tr(tau)
    let tr_tau = tr / (d * lambda + 2.0 * nu);
    Ok(sigma
        .sub(&Matrix::identity(sigma.rows()).scale(lambda * tr_tau))
        .scale(1.0 / (2.0 * nu)))
}
