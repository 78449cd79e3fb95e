use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target phase {gamma} rad is outside (0, 2pi)")]
    PhaseOutOfRange { gamma: f64 },

    #[error("target pulse area is unreachable: ramps alone contribute {ramp_area} rad")]
    InfeasiblePulse { ramp_area: f64 },

    #[error("integrator trace drift {drift:e} exceeds budget; reduce the step size")]
    IntegratorAccuracy { drift: f64 },

    #[error("physicality violated at t = {time:e} s: {what} = {value:e}")]
    Physicality {
        what: &'static str,
        value: f64,
        time: f64,
    },

    #[error("process inversion is singular for the chosen input states")]
    DegenerateInputs,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegratorAccuracy { .. } | Error::Physicality { .. } | Error::DegenerateInputs
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
