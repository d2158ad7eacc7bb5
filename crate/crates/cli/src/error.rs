use std::fmt;

/// Failure category, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, manifest, flags or data files. Exit code 2.
    Invalid(String),
    /// Everything requested failed. Exit code 1.
    Failed(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn invalid(msg: impl fmt::Display) -> CliError {
    CliError::Invalid(msg.to_string())
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failed(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.into())
    }
}

/// How a command that processes several items ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some items failed. Exit code 1.
    Partial,
}

impl Outcome {
    pub fn from_counts(failed: usize, total: usize) -> CliResult<Outcome> {
        match failed {
            0 => Ok(Outcome::Success),
            f if f == total && total > 0 => Err(CliError::Failed(anyhow::anyhow!(
                "all {total} items failed"
            ))),
            _ => Ok(Outcome::Partial),
        }
    }

    pub fn exit_code(result: &CliResult<Outcome>) -> u8 {
        match result {
            Ok(Outcome::Success) => 0,
            Ok(Outcome::Partial) | Err(CliError::Failed(_)) => 1,
            Err(CliError::Invalid(_)) => 2,
        }
    }
}
