//! Shape calculus for the time-harmonic solid-fluid interaction problem on
//! randomly perturbed domains.
//!
//! The crate provides:
//!
//! * small dense matrix and tensor-field algebra (Kronecker products, the
//!   contracted first-order operator `L_A`, strain and Hooke operators),
//! * the square solid/fluid benchmark geometry with tensor-product
//!   Gauss-Legendre quadrature for volume and boundary integrals,
//! * perturbation-of-identity transport maps with Jacobian determinant and
//!   adjugate expansions,
//! * closed-form benchmark fields (solution, first- and second-order shape
//!   sensitivities, boundary data) on the square geometry,
//! * residual verification of the interior and boundary identities those
//!   sensitivities satisfy,
//! * quadrature and Monte Carlo moment estimation for the random solution
//!   together with the second-order Taylor approximations of its mean and
//!   variance, and convergence-order studies for both.
//!
//! The `fsishape` binary drives all verification and moment studies and
//! writes machine-readable reports; see the crate README.

pub mod config;
pub mod example;
pub mod fields;
pub mod geometry;
pub mod moments;
pub mod report;
pub mod runner;
pub mod tensor;
pub mod transport;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported spatial dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("point ({x}, {y}) lies outside the {region} region")]
    OutOfDomain {
        x: f64,
        y: f64,
        region: &'static str,
    },

    #[error("point is within {radius} of a corner; tangential operators are undefined there")]
    CornerZone { radius: f64 },

    #[error("point ({x}, {y}) is not on boundary segment {segment}")]
    NotOnSegment { x: f64, y: f64, segment: String },

    #[error("degenerate transport Jacobian at x = {point:?} for eps = {eps} (det = {det})")]
    DegenerateJacobian { point: Vec<f64>, eps: f64, det: f64 },

    #[error("perturbation size {eps} exceeds the configured maximum {max}")]
    EpsilonTooLarge { eps: f64, max: f64 },

    #[error("Lame constants must be positive (lambda = {lambda}, nu = {nu})")]
    NonPositiveLame { lambda: f64, nu: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("convergence study needs at least 3 epsilon values, got {0}")]
    TooFewEpsilons(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
