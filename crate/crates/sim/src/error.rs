use std::path::PathBuf;

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
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Model(#[from] sleepwake_core::Error),
    #[error("step {step}: {source}")]
    Step {
        step: u64,
        #[source]
        source: sleepwake_core::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("comparison group `{0}` has no runs")]
    EmptyGroup(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
