//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by Fock-space, Bogoliubov and QFI computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} requires {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state not normalized: |psi|^2 = {norm_sq} (tolerance {tol})")]
    NotNormalized { norm_sq: f64, tol: f64 },

    #[error("matrix not antisymmetric: max |X + X^t| = {violation} exceeds {tol}")]
    NotAntisymmetric { violation: f64, tol: f64 },

    #[error(
        "imaginary residue {residue} exceeds {tol}; the supplied operator is not Hermitian"
    )]
    ImaginaryResidue { residue: f64, tol: f64 },

    #[error("Bogoliubov map invalid: max constraint violation {residual} exceeds {tol}")]
    InvalidMap { residual: f64, tol: f64 },

    #[error("U block is numerically singular (|det U| = {det_abs}); the canonical decomposition requires an invertible U")]
    SingularU { det_abs: f64 },

    #[error("matrix logarithm hit the branch cut (eigenvalue at -1); split the transformation into two half-steps and compose the generators")]
    LogBranchCut,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parameter not estimable (QFI = 0)")]
    ZeroQfi,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
