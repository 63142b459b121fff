use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("input must have zero mean (mean = {mean:e}, rms = {rms:e})")]
    MeanNotZero { mean: f64, rms: f64 },

    #[error("density must have unit mean (mean = {mean})")]
    MeanNotOne { mean: f64 },

    #[error("vacuum: min density {min_density} at t = {time}")]
    Vacuum { min_density: f64, time: f64 },

    #[error("CFL violation at t = {time}: perturbation norm {norm:e} exceeds guard {bound:e}")]
    CflViolation { time: f64, norm: f64, bound: f64 },

    #[error("blow-up guard tripped at t = {time}: norm {norm:e} exceeds {bound:e}")]
    BlowupGuard { time: f64, norm: f64, bound: f64 },

    #[error("Gauss-law drift {residual:e} at t = {time}")]
    ConstraintDrift { time: f64, residual: f64 },

    #[error("limit trajectory sampled every {gap:e}, corrector needs at most {limit:e}")]
    SamplingTooCoarse { gap: f64, limit: f64 },

    #[error("sample grids are not aligned: {0}")]
    Alignment(String),

    #[error("data are not well-prepared: {0}")]
    NotWellPrepared(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("metric {metric} is not positive at eps = {eps}: {value:e}")]
    NonPositiveMetric { metric: String, eps: f64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line} (key `{key}`): {message}")]
    Parse { line: usize, key: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),

    #[error("eps = {eps}: {source}")]
    AtEps {
        eps: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_eps(self, eps: f64) -> Self {
        Error::AtEps {
            eps,
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The innermost error, skipping `AtEps` context layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtEps { source, .. } => source.root(),
            other => other,
        }
    }
}
