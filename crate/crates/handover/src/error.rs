//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("inverse kinematics failed: {0}")]
    IkFailed(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("insufficient frames: need at least {needed}, have {available}")]
    InsufficientFrames { needed: usize, available: usize },

    #[error("missing keypoint: {0}")]
    MissingKeypoint(String),

    #[error("illegal transition: event {event} in stage {stage}")]
    IllegalTransition { stage: String, event: String },

    #[error("invalid motion limits: {0}")]
    InvalidLimits(String),

    #[error("infeasible safe control: constraint row is degenerate while unsafe")]
    InfeasibleSafeControl,

    #[error("config error: {0}")]
    Config(String),

    #[error("incomplete run log")]
    IncompleteLog,

    #[error("unknown robot model: {0}")]
    UnknownModel(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-greppable class tag, used as the CLI error prefix.
    pub fn class(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::IkFailed(_) => "IkFailed",
            Error::Parse { .. } => "ParseError",
            Error::EmptyTrajectory => "EmptyTrajectory",
            Error::InsufficientFrames { .. } => "InsufficientFrames",
            Error::MissingKeypoint(_) => "MissingKeypoint",
            Error::IllegalTransition { .. } => "IllegalTransition",
            Error::InvalidLimits(_) => "InvalidLimits",
            Error::InfeasibleSafeControl => "InfeasibleSafeControl",
            Error::Config(_) => "ConfigError",
            Error::IncompleteLog => "IncompleteLog",
            Error::UnknownModel(_) => "UnknownModel",
            Error::Io { .. } => "IoError",
        }
    }
}
