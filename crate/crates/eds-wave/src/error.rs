use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} = {value} violates {constraint}")]
    OutOfRange { field: &'static str, value: f64, constraint: &'static str },

    #[error("delta = {delta} is negative; kernels require (mu-1)^2 >= 4 nu^2")]
    NegativeDelta { delta: f64 },

    #[error("hypergeometric c = {c} is a nonpositive integer")]
    InvalidC { c: f64 },

    #[error("series did not converge: {terms} terms, best bound {bound:.3e} > tol {tol:.3e}")]
    NoConvergence { terms: usize, bound: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("cfl violation: dtau = {dtau} exceeds dz = {dz}")]
    CflViolation { dtau: f64, dz: f64 },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("point (t = {t}, x = {x}) lies outside the stored field")]
    OutOfGrid { t: f64, x: f64 },

    #[error("need at least {needed} usable records, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("mu = {mu} is outside the supported set {{0, 2}} for this operation")]
    UnsupportedMu { mu: f64 },

    #[error("config error{}: {msg}", .line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::OutOfRange { .. }
                | Error::NegativeDelta { .. }
                | Error::UnsupportedMu { .. }
                | Error::Config { .. }
                | Error::InsufficientData { .. }
        )
    }
}
