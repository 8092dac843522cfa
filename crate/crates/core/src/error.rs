use crate::scalar::Field;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("eigenvalue {eigenvalue:e} is below the positivity floor {floor:e} required by the matrix function")]
    Domain { eigenvalue: f64, floor: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix dimension {0} (need d >= 2)")]
    InvalidDimension(usize),

    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("determinant {det:e} too far from 1 for a unit-determinant point")]
    NotUnitDet { det: f64 },

    #[error("group element is singular")]
    Singular,

    #[error("group element must have unit determinant to act on unit-determinant points (|det - 1| = {deviation:e})")]
    NotUnitDetGroup { deviation: f64 },

    #[error("group element is not in the special orthogonal/unitary group (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("tangent vector violates the trace constraint (trace = {trace:e})")]
    NotTangent { trace: f64 },

    #[error("tangent vector is attached to a different base point")]
    BaseMismatch,

    #[error("degrees of freedom n = {n} must be at least d = {d}")]
    DegreesOfFreedom { n: usize, d: usize },

    #[error("radial law is not integrable for n = {n} over the {field} field")]
    NotIntegrable { n: usize, field: Field },

    #[error("operation requires d = 2, got d = {0}")]
    RequiresDim2(usize),

    #[error("Karcher iteration did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("empty input")]
    Empty,

    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("quadrature failed to reach tolerance (estimated error {error:e})")]
    Quadrature { error: f64 },
}
