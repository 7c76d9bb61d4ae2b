//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a formula (negative power, ω ≤ 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("singular steady-state configuration: {0}")]
    SingularSteadyState(String),

    #[error("steady state did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no drive amplitude can reach the requested coupling: {0}")]
    UnreachableTarget(String),

    #[error("linearized system is unstable: max Re(λ) = {max_real:e} rad/s")]
    Unstable { max_real: f64 },

    #[error("resolvent (-iω - M) is singular at ω = {omega:e} rad/s")]
    SingularTransfer { omega: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::UnknownPreset { .. }
            | Error::InvalidSweep(_)
            | Error::Config(_)
            | Error::UnreachableTarget(_) => 2,
            Error::SingularSteadyState(_)
            | Error::NotConverged { .. }
            | Error::Unstable { .. }
            | Error::SingularTransfer { .. }
            | Error::Numerical(_) => 3,
            Error::Consistency(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 4,
        }
    }
}
