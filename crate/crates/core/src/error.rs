use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing link {0}")]
    MissingLink(String),

    #[error("mixing angle undefined: all couplings vanish")]
    UndefinedAngle,

    #[error("phase convention violated: imaginary residue {residue:.3e} exceeds tolerance")]
    PhaseConvention { residue: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("adiabatic elimination invalid: single-photon detuning is zero")]
    ZeroDetuning,

    #[error("negative rate {0}")]
    NegativeRate(f64),

    #[error("integration fault at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("estimate undefined: {0}")]
    Undefined(String),

    #[error("unknown oracle '{0}'")]
    UnknownOracle(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
