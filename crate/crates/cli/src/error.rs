use std::fmt;
use std::path::Path;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const VERIFICATION_FAILED: u8 = 2;
    pub const DEGENERATE_ABORT: u8 = 3;
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable files, invalid populations.
    Usage(String),
    /// A degenerate sample under the abort policy.
    Degenerate(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Usage(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Degenerate(_) => exit::DEGENERATE_ABORT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Degenerate(msg) => write!(f, "aborted: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<attrest::Error> for CliError {
    fn from(e: attrest::Error) -> Self {
        match e {
            attrest::Error::DegenerateSample(_) | attrest::Error::AllDegenerate => {
                CliError::Degenerate(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}
