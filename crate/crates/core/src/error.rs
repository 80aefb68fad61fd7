use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classes, used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or inconsistent input.
    Config,
    /// A physically meaningless configuration (instability, heating, blind readout).
    Physics,
    /// A numerical procedure failed (non-convergence, singular system, non-finite state).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unstable configuration: {0}")]
    Unstable(String),

    #[error("blind quadrature at theta = {theta} rad, omega = {omega} rad/s: transduction vanishes")]
    BlindQuadrature { theta: f64, omega: f64 },

    #[error("sideband heating: anti-Stokes rate {anti_stokes} does not exceed Stokes rate {stokes}")]
    Heating { anti_stokes: f64, stokes: f64 },

    #[error("quantum cooperativity undefined: thermal decoherence rate is zero")]
    UndefinedCooperativity,

    #[error("series too short: {len} samples, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("no calibration tone above background near {omega} rad/s")]
    ToneNotFound { omega: f64 },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("singular normal equations: {0}")]
    Singular(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::MissingInput(_) | Error::SeriesTooShort { .. } => {
                ErrorKind::Config
            }
            Error::Unstable(_)
            | Error::BlindQuadrature { .. }
            | Error::Heating { .. }
            | Error::UndefinedCooperativity
            | Error::ToneNotFound { .. } => ErrorKind::Physics,
            Error::Degenerate(_) | Error::Singular(_) | Error::NonFinite(_) => ErrorKind::Numeric,
        }
    }
}
