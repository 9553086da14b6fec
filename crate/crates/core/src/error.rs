use thiserror::Error;

/// Errors produced by the simulator, the equalizers and the sweep harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported resampling ratio {from} -> {to} samples/symbol")]
    UnsupportedRatio { from: usize, to: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("LMS diverged after {iterations} updates (step size {step_size}); reduce the step size")]
    StepSize { iterations: usize, step_size: f64 },

    #[error("frame index {index} needs samples [{start}, {end}) but the signal has {len}")]
    Boundary {
        index: usize,
        start: isize,
        end: isize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch} (learn rate {learn_rate})")]
    Divergence { epoch: usize, learn_rate: f64 },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::UnsupportedRatio { .. } => 2,
            Error::Io(_) | Error::Format { .. } => 3,
            Error::Divergence { .. } | Error::StepSize { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
