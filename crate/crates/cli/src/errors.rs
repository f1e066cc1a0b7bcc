use std::fmt;
use std::path::{Path, PathBuf};

/// CLI-level errors, split by exit code: validation problems exit with 1,
/// I/O problems with 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

/// Wraps a library error with the pipeline stage it came from.
pub fn stage<T>(name: &str, result: seqvpr_core::Result<T>) -> Result<T, CliError> {
    result.map_err(|e| CliError::Validation(format!("{name}: {e}")))
}

/// Wraps a library error with stage and file context.
pub fn stage_file<T>(name: &str, path: &Path, result: seqvpr_core::Result<T>) -> Result<T, CliError> {
    result.map_err(|e| CliError::Validation(format!("{name}: {}: {e}", path.display())))
}
