use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {0} has zero volume; volume-normalized weights are undefined")]
    DegenerateVolume(usize),

    #[error("mixture generation failed for component {component}: {message}")]
    Generation { component: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
