use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum FocpError {
    #[error("{name} = {value} is outside its admissible range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{coefficient}({time}) = {value} violates {requirement}")]
    Positivity {
        coefficient: &'static str,
        time: f64,
        value: f64,
        requirement: &'static str,
    },

    #[error("{coefficient}({time}) evaluated to a non-finite value")]
    NonFinite {
        coefficient: &'static str,
        time: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("singular system at elimination step {step}: pivot magnitude {pivot:e} below threshold {threshold:e}")]
    Singular {
        step: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("sweep iteration did not converge after {iterations} iterations (last change {last_change:e}, residual {residual:e})")]
    SweepDiverged {
        iterations: usize,
        last_change: f64,
        residual: f64,
    },

    #[error("invalid solver options: {0}")]
    Options(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: missing required key `{key}`")]
    MissingKey { path: PathBuf, key: &'static str },

    #[error("{0}")]
    Usage(String),

    /// `--help` or `--version` output; not a failure.
    #[error("{0}")]
    Help(String),

    #[error("alpha = {alpha}, n = {n}: {source}")]
    Cell {
        alpha: f64,
        n: usize,
        #[source]
        source: Box<FocpError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FocpError {
    /// Pipeline stage the error belongs to, used to prefix CLI diagnostics.
    pub fn stage(&self) -> &'static str {
        match self {
            FocpError::Usage(_) | FocpError::Help(_) => "usage",
            FocpError::Domain { .. } | FocpError::Options(_) => "validation",
            FocpError::Parse { .. } | FocpError::MissingKey { .. } => "config",
            FocpError::Positivity { .. }
            | FocpError::NonFinite { .. }
            | FocpError::Dimension { .. }
            | FocpError::Grid(_) => "assembly",
            FocpError::Singular { .. } | FocpError::SweepDiverged { .. } => "solver",
            FocpError::Cell { source, .. } => source.stage(),
            FocpError::Io(_) | FocpError::Json(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, FocpError>;
