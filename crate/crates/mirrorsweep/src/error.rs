use std::fmt;
use std::path::Path;

/// Error carrying the process exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation (exit 2).
    Usage(String),
    /// File system failure (exit 3).
    Io(String),
    /// Well-formed request that fails parsing or validation (exit 4).
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn validation(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Validation(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage error", m),
            CliError::Io(m) => ("i/o error", m),
            CliError::Validation(m) => ("invalid input", m),
        };
        // Diagnostics are a single line.
        write!(f, "{kind}: {}", msg.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}
