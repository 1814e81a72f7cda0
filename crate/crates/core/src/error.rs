use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported oscillator orbital n={n} l={l}")]
    UnsupportedOrbital { n: u32, l: u32 },

    #[error("unknown nucleus label `{0}` (expected He4, C12, O16 or Ca40)")]
    UnknownNucleus(String),

    #[error("invalid shell configuration: {0}")]
    InvalidShell(String),

    #[error("correlation parameter must be finite and positive, got {0}")]
    InvalidCorrelation(f64),

    #[error("invalid quadrature setup: {0}")]
    InvalidQuadrature(String),

    #[error("non-finite integrand value {value} at {location}")]
    NonFinite { value: f64, location: String },

    #[error("reference density vanishes where the compared density is {p:e} (at {location})")]
    Domain { p: f64, location: String },

    #[error("Jensen-Shannon divergence {0} does not allow distinguishability in finitely many trials")]
    Indistinguishable(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
