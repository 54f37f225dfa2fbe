use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("time {t} lies outside the window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },

    #[error("effective coupling vanishes (J0(alpha) = 0)")]
    ZeroEffectiveCoupling,

    #[error("interatomic distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("argument outside the supported domain: {0}")]
    OutOfDomain(String),

    #[error("no integer sideband m satisfies m*omega0 = -V (V/omega0 = {ratio})")]
    ResonanceUnsatisfied { ratio: f64 },

    #[error("no root of J1 - N*J0 in ({lo}, {hi})")]
    NoRootInWindow { lo: f64, hi: f64 },

    #[error("{count} sign changes of J1 - N*J0 in ({lo}, {hi}); window must bracket exactly one")]
    MultipleRoots { lo: f64, hi: f64, count: usize },

    #[error("integrator could not meet tolerance at t = {t} (step {step:e})")]
    ToleranceNotMet { t: f64, step: f64 },

    #[error("density matrix invariant violated at t = {t}: {detail}")]
    InvariantViolated { t: f64, detail: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
