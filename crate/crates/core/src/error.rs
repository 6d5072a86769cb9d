use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported Hilbert-space dimension {0} (supported: 2..=16)")]
    UnsupportedDimension(usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("no reservoir labelled `{0}`")]
    UnknownReservoir(String),

    #[error("null space is not one-dimensional (smallest |eigenvalue| {smallest:.3e}, next {next:.3e})")]
    NonUniqueNullSpace { smallest: f64, next: f64 },

    #[error("cross-check failed for {quantity}: deviation {deviation:.3e}")]
    CrossCheck { quantity: String, deviation: f64 },

    #[error("gauge condition is singular (r0 = 0 or r = 0)")]
    SingularGauge,

    #[error("Carnot limit: r0 = {0:.3e} is too close to reversible operation")]
    CarnotLimit(f64),

    #[error("spectral gap collapsed at chi = {chi:.3e} (gap {gap:.3e})")]
    GapCollapse { chi: f64, gap: f64 },

    #[error("profile residual {residual:.3e} exceeds tolerance; Q_d is not quadratic in r")]
    NotQuadratic { residual: f64 },

    #[error("every optimization start landed in an invalid region")]
    AllStartsFailed,

    #[error("numerical failure: {0}")]
    Numerical(String),
}
