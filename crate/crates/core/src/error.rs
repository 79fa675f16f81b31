use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("array would hold {requested} elements, above the cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error(
        "ill-conditioned solve: relative residual {residual:e} above {tolerance:e} (condition estimate {condition:e})"
    )]
    IllConditioned {
        residual: f64,
        tolerance: f64,
        condition: f64,
    },

    #[error("every eigenvalue lies at or below the threshold {threshold:e}")]
    EmptySpectrum { threshold: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("current radiates no power (i^H Z i = {0:e})")]
    NonRadiating(f64),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Configuration and argument problems map to exit code 2, numerical
    /// failures to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Capacity { .. }
            | Error::InvalidGeometry(_)
            | Error::Config(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::DimensionMismatch { .. } => 2,
            _ => 3,
        }
    }

    /// Short kebab-case name of the variant, used in CSV status cells.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Capacity { .. } => "capacity",
            Error::InvalidGeometry(_) => "invalid-geometry",
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NoConvergence { .. } => "no-convergence",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::EmptySpectrum { .. } => "empty-spectrum",
            Error::Degenerate(_) => "degenerate",
            Error::NonRadiating(_) => "non-radiating",
            Error::Quadrature { .. } => "quadrature",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }
}
