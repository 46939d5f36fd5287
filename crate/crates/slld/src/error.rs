use std::path::{Path, PathBuf};

/// Everything the front end can fail with. [`Error::exit_code`] maps the
/// variants onto the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}: {source}")]
    Json { origin: String, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Config { path: PathBuf, source: toml::de::Error },
    #[error(transparent)]
    Core(#[from] slld_core::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for unreadable or malformed input and bad invocations, 3 for input
    /// that parses but breaks a contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Json { .. } | Error::Config { .. } | Error::Usage(_) => 2,
            Error::Core(_) => 3,
        }
    }
}
