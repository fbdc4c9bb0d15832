use thiserror::Error;

/// Failure classes of the command-line tool, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("search space of {size} partitions exceeds the cap of {cap}")]
    Infeasible { size: u128, cap: u128 },
    #[error("model fitting did not converge: {0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Infeasible { .. } => 2,
            CliError::NotConverged(_) => 3,
        }
    }
}

impl From<catcollapse::Error> for CliError {
    fn from(e: catcollapse::Error) -> Self {
        match e {
            catcollapse::Error::Infeasible { size, cap } => CliError::Infeasible { size, cap },
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
