use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid scenario: {0}")]
    Invalid(String),

    #[error(transparent)]
    Solver(#[from] squeezenm::Error),

    #[error("{path}: {source}")]
    InFile { path: String, source: Box<CliError> },

    #[error("{point}: {source}")]
    AtPoint { point: String, source: Box<CliError> },
}

impl CliError {
    pub(crate) fn in_file(self, path: &std::path::Path) -> Self {
        CliError::InFile { path: path.display().to_string(), source: Box::new(self) }
    }
}
