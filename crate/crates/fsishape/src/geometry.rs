//! The square benchmark geometry and its quadrature.
//!
//! The fluid occupies `[-1, 1]^2`, the solid the annulus `[-2, 2]^2` minus
//! the fluid square. The outer boundary splits into `Gamma1..Gamma4` (top,
//! right, bottom, left) and the interface into `Sigma1..Sigma4` (same
//! order). All sides are flat, so the tangential divergence of the normal
//! vanishes everywhere away from corners; the corners themselves are
//! excluded by a small radius since the tangential operators are undefined
//! there.
//!
//! Volume quadrature is per-cell tensor-product Gauss-Legendre on a uniform
//! cell partition aligned with the inner square, so the solid annulus is an
//! exact union of cells and no cut cells arise. Boundary quadrature places
//! Gauss nodes strictly inside each segment, never on endpoints.

use crate::fields::{ScalarField, VectorField};
use crate::{Error, Result};

/// One-dimensional Gauss-Legendre rule on `[-1, 1]`.
///
/// Nodes are the roots of the Legendre polynomial, found by Newton
/// iteration from the Chebyshev initial guess; exact for polynomials of
/// degree `2n - 1`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one quadrature point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        // ascending node order for reproducible output
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
        GaussLegendre {
            nodes: idx.iter().map(|&i| nodes[i]).collect(),
            weights: idx.iter().map(|&i| weights[i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * half * f(mid + half * t))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Which part of the benchmark domain an integral runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Fluid,
    Solid,
}

/// Identifiers for the eight flat boundary segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentId {
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    Sigma1,
    Sigma2,
    Sigma3,
    Sigma4,
}

impl SegmentId {
    pub const OUTER: [SegmentId; 4] = [
        SegmentId::Gamma1,
        SegmentId::Gamma2,
        SegmentId::Gamma3,
        SegmentId::Gamma4,
    ];
    pub const INTERFACE: [SegmentId; 4] = [
        SegmentId::Sigma1,
        SegmentId::Sigma2,
        SegmentId::Sigma3,
        SegmentId::Sigma4,
    ];
    pub const ALL: [SegmentId; 8] = [
        SegmentId::Gamma1,
        SegmentId::Gamma2,
        SegmentId::Gamma3,
        SegmentId::Gamma4,
        SegmentId::Sigma1,
        SegmentId::Sigma2,
        SegmentId::Sigma3,
        SegmentId::Sigma4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SegmentId::Gamma1 => "gamma1",
            SegmentId::Gamma2 => "gamma2",
            SegmentId::Gamma3 => "gamma3",
            SegmentId::Gamma4 => "gamma4",
            SegmentId::Sigma1 => "sigma1",
            SegmentId::Sigma2 => "sigma2",
            SegmentId::Sigma3 => "sigma3",
            SegmentId::Sigma4 => "sigma4",
        }
    }
}

/// A flat boundary segment with its outward unit normal.
///
/// For outer segments the normal points out of the solid; for interface
/// segments it points out of the fluid (into the solid), matching the
/// orientation convention of the coupled problem. `solid_outward_normal`
/// gives the opposite orientation on the interface.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub id: SegmentId,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub normal: [f64; 2],
}

impl Segment {
    pub fn length(&self) -> f64 {
        let dx = self.end[0] - self.start[0];
        let dy = self.end[1] - self.start[1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn tangent(&self) -> [f64; 2] {
        let l = self.length();
        [
            (self.end[0] - self.start[0]) / l,
            (self.end[1] - self.start[1]) / l,
        ]
    }

    pub fn is_interface(&self) -> bool {
        matches!(
            self.id,
            SegmentId::Sigma1 | SegmentId::Sigma2 | SegmentId::Sigma3 | SegmentId::Sigma4
        )
    }

    /// Normal pointing out of the solid region (`-normal` on the interface).
    pub fn solid_outward_normal(&self) -> [f64; 2] {
        if self.is_interface() {
            [-self.normal[0], -self.normal[1]]
        } else {
            self.normal
        }
    }

    /// Normal pointing out of the fluid; only defined on the interface.
    pub fn fluid_outward_normal(&self) -> Option<[f64; 2]> {
        self.is_interface().then_some(self.normal)
    }

    pub fn midpoint(&self) -> [f64; 2] {
        [
            0.5 * (self.start[0] + self.end[0]),
            0.5 * (self.start[1] + self.end[1]),
        ]
    }

    pub fn point_at(&self, t: f64) -> [f64; 2] {
        [
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        ]
    }

    pub fn contains(&self, x: &[f64; 2], tol: f64) -> bool {
        let t = self.tangent();
        let rel = [x[0] - self.start[0], x[1] - self.start[1]];
        let along = rel[0] * t[0] + rel[1] * t[1];
        let off = rel[0] * self.normal[0] + rel[1] * self.normal[1];
        off.abs() <= tol && (-tol..=self.length() + tol).contains(&along)
    }

    /// Distance from `x` to the nearer segment endpoint.
    pub fn corner_distance(&self, x: &[f64; 2]) -> f64 {
        let d2 = |p: &[f64; 2]| ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt();
        d2(&self.start).min(d2(&self.end))
    }
}

/// The benchmark geometry with its quadrature configuration.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    /// Half-width of the fluid square (1.0).
    pub fluid_half: f64,
    /// Half-width of the outer square (2.0).
    pub solid_half: f64,
    /// Pointwise boundary evaluations are rejected closer than this to a corner.
    pub corner_radius: f64,
    /// Cells per unit length of the volume partition.
    pub cells_per_unit: usize,
    /// Gauss points per direction per cell.
    pub points_per_cell: usize,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            fluid_half: 1.0,
            solid_half: 2.0,
            corner_radius: 1e-3,
            cells_per_unit: 16,
            points_per_cell: 5,
        }
    }
}

/// Materialized quadrature rule: explicit nodes and positive weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Volume,
    BoundarySegment,
}

impl QuadratureRule {
    pub fn apply(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(&x[..]))
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl DomainSpec {
    pub fn segment(&self, id: SegmentId) -> Segment {
        let a = self.solid_half;
        let b = self.fluid_half;
        let (start, end, normal) = match id {
            SegmentId::Gamma1 => ([-a, a], [a, a], [0.0, 1.0]),
            SegmentId::Gamma2 => ([a, -a], [a, a], [1.0, 0.0]),
            SegmentId::Gamma3 => ([-a, -a], [a, -a], [0.0, -1.0]),
            SegmentId::Gamma4 => ([-a, -a], [-a, a], [-1.0, 0.0]),
            SegmentId::Sigma1 => ([-b, b], [b, b], [0.0, 1.0]),
            SegmentId::Sigma2 => ([b, -b], [b, b], [1.0, 0.0]),
            SegmentId::Sigma3 => ([-b, -b], [b, -b], [0.0, -1.0]),
            SegmentId::Sigma4 => ([-b, -b], [-b, b], [-1.0, 0.0]),
        };
        Segment {
            id,
            start,
            end,
            normal,
        }
    }

    pub fn segments(&self, ids: &[SegmentId]) -> Vec<Segment> {
        ids.iter().map(|&id| self.segment(id)).collect()
    }

    pub fn contains(&self, region: Region, x: &[f64]) -> bool {
        let inside = |h: f64| x[0].abs() <= h && x[1].abs() <= h;
        match region {
            Region::Fluid => inside(self.fluid_half),
            Region::Solid => {
                inside(self.solid_half)
                    && !(x[0].abs() < self.fluid_half && x[1].abs() < self.fluid_half)
            }
        }
    }

    /// Cell edges of the uniform partition covering `[-solid_half, solid_half]`.
    fn cell_edges(&self) -> Vec<f64> {
        let n = (2.0 * self.solid_half) as usize * self.cells_per_unit;
        let h = 2.0 * self.solid_half / n as f64;
        (0..=n).map(|i| -self.solid_half + i as f64 * h).collect()
    }

    /// Tensor-product Gauss rule over all partition cells inside `region`.
    ///
    /// The partition is aligned with the inner square, so the solid annulus
    /// is an exact union of cells.
    pub fn volume_rule(&self, region: Region) -> QuadratureRule {
        let edges = self.cell_edges();
        let gl = GaussLegendre::new(self.points_per_cell);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for ix in 0..edges.len() - 1 {
            for iy in 0..edges.len() - 1 {
                let cx = 0.5 * (edges[ix] + edges[ix + 1]);
                let cy = 0.5 * (edges[iy] + edges[iy + 1]);
                if !self.contains(region, &[cx, cy]) {
                    continue;
                }
                let hx = 0.5 * (edges[ix + 1] - edges[ix]);
                let hy = 0.5 * (edges[iy + 1] - edges[iy]);
                for (&tx, &wx) in gl.nodes().iter().zip(gl.weights()) {
                    for (&ty, &wy) in gl.nodes().iter().zip(gl.weights()) {
                        nodes.push([cx + hx * tx, cy + hy * ty]);
                        weights.push(wx * wy * hx * hy);
                    }
                }
            }
        }
        QuadratureRule {
            nodes,
            weights,
            kind: RuleKind::Volume,
        }
    }

    /// Gauss rule along one boundary segment; nodes are interior to the
    /// segment so corner points never appear.
    pub fn boundary_rule(&self, id: SegmentId, points: usize) -> QuadratureRule {
        let seg = self.segment(id);
        let gl = GaussLegendre::new(points);
        let half = 0.5 * seg.length();
        let nodes = gl
            .nodes()
            .iter()
            .map(|&t| seg.point_at(0.5 * (t + 1.0)))
            .collect();
        let weights = gl.weights().iter().map(|&w| w * half).collect();
        QuadratureRule {
            nodes,
            weights,
            kind: RuleKind::BoundarySegment,
        }
    }

    pub fn integrate_volume(&self, region: Region, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.volume_rule(region).apply(f)
    }

    pub fn integrate_scalar_volume(&self, region: Region, f: &ScalarField) -> f64 {
        self.integrate_volume(region, |x| f.eval(x))
    }

    pub fn integrate_boundary(
        &self,
        ids: &[SegmentId],
        points: usize,
        f: impl Fn(&[f64], &Segment) -> f64,
    ) -> f64 {
        ids.iter()
            .map(|&id| {
                let seg = self.segment(id);
                self.boundary_rule(id, points).apply(|x| f(x, &seg))
            })
            .sum()
    }

    /// Rejects points inside the corner-exclusion zone of `seg`.
    pub fn check_corner(&self, seg: &Segment, x: &[f64; 2]) -> Result<()> {
        if seg.corner_distance(x) < self.corner_radius {
            return Err(Error::CornerZone {
                radius: self.corner_radius,
            });
        }
        Ok(())
    }

    /// Surface gradient `grad f - (grad f . n) n` at a segment point.
    pub fn tangential_gradient(
        &self,
        f: &ScalarField,
        x: &[f64; 2],
        seg: &Segment,
    ) -> Result<Vec<f64>> {
        if !seg.contains(x, 1e-9) {
            return Err(Error::NotOnSegment {
                x: x[0],
                y: x[1],
                segment: seg.id.name().into(),
            });
        }
        self.check_corner(seg, x)?;
        let g = f.gradient(&x[..]);
        let n = seg.normal;
        let gn = g[0] * n[0] + g[1] * n[1];
        Ok(vec![g[0] - gn * n[0], g[1] - gn * n[1]])
    }

    /// Surface divergence of the normal field. Identically zero on the flat
    /// sides of both squares.
    pub fn tangential_divergence_of_normal(&self, seg: &Segment, x: &[f64; 2]) -> Result<f64> {
        if !seg.contains(x, 1e-9) {
            return Err(Error::NotOnSegment {
                x: x[0],
                y: x[1],
                segment: seg.id.name().into(),
            });
        }
        self.check_corner(seg, x)?;
        Ok(0.0)
    }
}

/// Surface divergence `div w - n^T (grad w) n` of a vector field, for
/// geometries where an analytic normal extension is available.
pub fn tangential_divergence(w: &VectorField, x: &[f64], n: &[f64]) -> f64 {
    let j = w.jacobian(x);
    let mut ntn = 0.0;
    for i in 0..w.dim() {
        for k in 0..w.dim() {
            ntn += n[i] * j[(i, k)] * n[k];
        }
    }
    j.trace() - ntn
}

/// Radially extended unit normal field of a circle centred at the origin;
/// used as a curved-geometry self-test for the tangential operators.
pub fn radial_normal_field(dim: usize) -> VectorField {
    VectorField::new(dim, "radial-normal", move |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter().map(|v| v / r).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_monomial_exactness() {
        // n-point Gauss is exact through degree 2n - 1
        for n in 1..=12 {
            let gl = GaussLegendre::new(n);
            for deg in 0..=(2 * n - 1) {
                let val = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert_abs_diff_eq!(val, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn quadrature_weights_sum_to_measure() {
        let dom = DomainSpec::default();
        assert_abs_diff_eq!(
            dom.volume_rule(Region::Fluid).total_weight(),
            4.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            dom.volume_rule(Region::Solid).total_weight(),
            12.0,
            epsilon = 1e-12
        );
        let b = dom.boundary_rule(SegmentId::Sigma1, 16);
        assert_abs_diff_eq!(b.total_weight(), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn volume_integrals_pinned() {
        let dom = DomainSpec::default();
        assert_abs_diff_eq!(
            dom.integrate_volume(Region::Fluid, |_| 1.0),
            4.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            dom.integrate_volume(Region::Solid, |_| 1.0),
            12.0,
            epsilon = 1e-12
        );
        // separable oracle: (int_{-1}^{1} cos^2(pi t) dt)^2 = 1
        let v = dom.integrate_volume(Region::Fluid, |x| {
            ((PI * x[0]).cos() * (PI * x[1]).cos()).powi(2)
        });
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn boundary_integrals_pinned() {
        let dom = DomainSpec::default();
        let per_f = dom.integrate_boundary(&SegmentId::INTERFACE, 16, |_, _| 1.0);
        assert_abs_diff_eq!(per_f, 8.0, epsilon = 1e-12);
        let per_s = dom.integrate_boundary(&SegmentId::OUTER, 16, |_, _| 1.0);
        assert_abs_diff_eq!(per_s, 16.0, epsilon = 1e-12);
        // 1-D oracle: int_{-1}^{1} sin^2(pi x) dx = 1 on the top interface side
        let v = dom.integrate_boundary(&[SegmentId::Sigma1], 32, |x, _| (PI * x[0]).sin().powi(2));
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn interface_normals_oppose() {
        let dom = DomainSpec::default();
        for id in SegmentId::INTERFACE {
            let seg = dom.segment(id);
            let nf = seg.fluid_outward_normal().unwrap();
            let ns = seg.solid_outward_normal();
            assert_eq!([nf[0] + ns[0], nf[1] + ns[1]], [0.0, 0.0]);
            assert_abs_diff_eq!(nf[0] * nf[0] + nf[1] * nf[1], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn tangential_gradient_cases() {
        let dom = DomainSpec::default();
        let seg = dom.segment(SegmentId::Sigma1);

        let c = ScalarField::constant(2, 5.0);
        let g = dom.tangential_gradient(&c, &[0.3, 1.0], &seg).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);

        let fx = ScalarField::new(2, "x", |x| x[0]).with_gradient(|_| vec![1.0, 0.0]);
        let g = dom.tangential_gradient(&fx, &[0.3, 1.0], &seg).unwrap();
        assert_eq!(g, vec![1.0, 0.0]);

        // pressure on the top interface side at (1/4, 1): (pi sin(pi/4), 0)
        let p = ScalarField::new(2, "p", |x| (PI * x[0]).cos() * (PI * x[1]).cos()).with_gradient(
            |x| {
                vec![
                    -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                    -PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                ]
            },
        );
        let g = dom.tangential_gradient(&p, &[0.25, 1.0], &seg).unwrap();
        assert_abs_diff_eq!(g[0], PI * (PI / 4.0).sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);

        // corner exclusion
        assert!(dom
            .tangential_gradient(&p, &[1.0 - 1e-4, 1.0], &seg)
            .is_err());
        // off-segment rejection
        assert!(dom.tangential_gradient(&p, &[0.3, 0.5], &seg).is_err());
    }

    #[test]
    fn flat_sides_have_zero_normal_divergence() {
        let dom = DomainSpec::default();
        for (id, x) in [
            (SegmentId::Gamma1, [0.7, 2.0]),
            (SegmentId::Gamma3, [-1.2, -2.0]),
            (SegmentId::Sigma3, [0.1, -1.0]),
        ] {
            let seg = dom.segment(id);
            assert_eq!(dom.tangential_divergence_of_normal(&seg, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn circle_normal_divergence_is_inverse_radius() {
        // div_tangential(n) = (d - 1) / R on a circle/sphere of radius R
        let n2 = radial_normal_field(2);
        for r in [0.5, 1.0, 2.5] {
            let x = [r / 2f64.sqrt(), r / 2f64.sqrt()];
            let nx = [x[0] / r, x[1] / r];
            let div = tangential_divergence(&n2, &x, &nx);
            assert_abs_diff_eq!(div, 1.0 / r, epsilon = 1e-6);
        }
        let n3 = radial_normal_field(3);
        let r = 1.5;
        let x = [r / 3f64.sqrt(), r / 3f64.sqrt(), r / 3f64.sqrt()];
        let nx = [x[0] / r, x[1] / r, x[2] / r];
        assert_abs_diff_eq!(tangential_divergence(&n3, &x, &nx), 2.0 / r, epsilon = 1e-6);
    }

    #[test]
    fn divergence_theorem_on_both_regions() {
        let dom = DomainSpec::default();
        // smooth w = (sin(pi x) cos(y), x^2 y)
        let w = VectorField::new(2, "w", |x| {
            vec![(PI * x[0]).sin() * x[1].cos(), x[0] * x[0] * x[1]]
        })
        .with_jacobian(|x| {
            crate::tensor::Matrix::from_rows(&[
                &[
                    PI * (PI * x[0]).cos() * x[1].cos(),
                    -(PI * x[0]).sin() * x[1].sin(),
                ],
                &[2.0 * x[0] * x[1], x[0] * x[0]],
            ])
        });
        let div_w = |x: &[f64]| w.jacobian(x).trace();

        let vol_f = dom.integrate_volume(Region::Fluid, div_w);
        let flux_f = dom.integrate_boundary(&SegmentId::INTERFACE, 24, |x, seg| {
            let v = w.eval(x);
            let n = seg.fluid_outward_normal().unwrap();
            v[0] * n[0] + v[1] * n[1]
        });
        assert_abs_diff_eq!(vol_f, flux_f, epsilon = 1e-8);

        // solid annulus: outer flux minus inner (fluid-outward) flux
        let vol_s = dom.integrate_volume(Region::Solid, div_w);
        let flux_outer = dom.integrate_boundary(&SegmentId::OUTER, 24, |x, seg| {
            let v = w.eval(x);
            v[0] * seg.normal[0] + v[1] * seg.normal[1]
        });
        let flux_inner = dom.integrate_boundary(&SegmentId::INTERFACE, 24, |x, seg| {
            let v = w.eval(x);
            let n = seg.solid_outward_normal();
            v[0] * n[0] + v[1] * n[1]
        });
        assert_abs_diff_eq!(vol_s, flux_outer + flux_inner, epsilon = 1e-8);
    }
}
