use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("phase {index}: {source}")]
    Phase {
        index: usize,
        #[source]
        source: linksched::Error,
    },
    #[error(transparent)]
    Model(#[from] linksched::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;
