use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] embedforge_core::Error),
    #[error("{}: file not found", path.display())]
    FileMissing { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("{}: corrupt header: {reason}", path.display())]
    CorruptHeader { path: PathBuf, reason: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("budget exceeded: spent {spent:.4} of {limit:.4}")]
    BudgetExceeded { spent: f64, limit: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("journal {}: {reason}", path.display())]
    Journal { path: PathBuf, reason: String },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileMissing { path: path.to_path_buf() }
        } else {
            Error::Io { path: path.to_path_buf(), source }
        }
    }

    pub fn parse(path: &Path, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse { path: path.to_path_buf(), line, reason: reason.into() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(e) => e.kind(),
            Error::FileMissing { .. } => "FileMissing",
            Error::Io { .. } => "Io",
            Error::Parse { .. } => "Parse",
            Error::CorruptHeader { .. } => "CorruptHeader",
            Error::Transport(_) => "TransportError",
            Error::Schema(_) => "SchemaError",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::Config(_) => "Config",
            Error::Journal { .. } => "Journal",
        }
    }
}
