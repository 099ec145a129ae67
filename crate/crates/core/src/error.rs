use thiserror::Error;

/// Errors raised while building or solving the model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("rate network is disconnected or singular: {0}")]
    SingularNetwork(String),

    #[error(
        "generation calibration has no sign change in [{lo:e}, {hi:e}] /ps: \
         I_XX0/I_X0 = {ratio_lo:.6e} at low end, {ratio_hi:.6e} at high end"
    )]
    CalibrationBracket {
        lo: f64,
        hi: f64,
        ratio_lo: f64,
        ratio_hi: f64,
    },

    #[error("non-finite value during {0}")]
    NonFinite(&'static str),

    #[error("population not conserved: total {total:.15} at step {step}")]
    Conservation { total: f64, step: usize },

    #[error("correlation undefined: steady-state intensity of {0} is zero")]
    UndefinedCorrelation(String),

    #[error("unknown line tag `{given}`; valid tags: {valid}")]
    UnknownLine { given: String, valid: String },

    #[error("invalid rate table: {0}")]
    RateTable(String),

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("insufficient Monte-Carlo statistics: {0}")]
    InsufficientEvents(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::InvalidParameter { .. }
            | Error::UnknownLine { .. }
            | Error::RateTable(_)
            | Error::Grid(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
