use std::path::PathBuf;

use qevo_core::{CircuitError, EvalError, EvolutionError, IslandError, StateError};

use crate::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("record `{id}` failed validation: {message}")]
    Validation { id: String, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Island(#[from] IslandError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dataset generation stalled after {attempts} draws for record {index}")]
    GenerationStalled { index: usize, attempts: usize },
    #[error("study has no runs")]
    EmptyStudy,
    #[error("trial exceeded its wall-clock budget of {seconds} s")]
    TrialTimeout { seconds: u64 },
    #[error("run on target `{target}` (seed {seed}): {source}")]
    Run {
        target: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (config, files, arguments)
    /// rather than failures while running.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::Config(_)
            | Error::InvalidInput(_)
            | Error::Circuit(_)
            | Error::State(_) => true,
            Error::Run { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
