use oamsim_core::Error as CoreError;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("acceptance thresholds not met: {}", .0.join("; "))]
    Threshold(Vec<String>),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Threshold(_) => EXIT_THRESHOLD,
            CliError::Core(e) => match e {
                // bad inputs: rejected before or while reading them
                CoreError::InvalidGrid(_)
                | CoreError::GridMismatch { .. }
                | CoreError::NegativeDistance(_)
                | CoreError::InvalidMode(_)
                | CoreError::ApertureGuard { .. }
                | CoreError::InvalidConfig(_)
                | CoreError::InvalidDataset(_)
                | CoreError::Schema { .. }
                | CoreError::Format(_)
                | CoreError::Io(_) => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}
