use thiserror::Error;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug, Error)]
pub enum CommandError {
    /// Bad flags, inconsistent inputs or unusable directory layout.
    #[error("configuration error: {0}")]
    Config(String),
    /// Unreadable or inconsistent volumes and result files.
    #[error("data error: {0}")]
    Data(String),
    /// A statistic is undefined on the given data.
    #[error("degenerate statistics: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CmdResult<T> = std::result::Result<T, CommandError>;

impl CommandError {
    pub const EXIT_OK: i32 = 0;
    pub const EXIT_CONFIG: i32 = 1;
    pub const EXIT_DATA: i32 = 2;
    pub const EXIT_DEGENERATE: i32 = 3;

    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => Self::EXIT_CONFIG,
            CommandError::Degenerate(_) => Self::EXIT_DEGENERATE,
            CommandError::Data(_) | CommandError::Io(_) | CommandError::Csv(_) | CommandError::Json(_) => Self::EXIT_DATA,
        }
    }
}

impl From<lesionmetrics::Error> for CommandError {
    fn from(e: lesionmetrics::Error) -> Self {
        use lesionmetrics::Error as E;
        if e.is_degenerate_statistics() {
            return CommandError::Degenerate(e.to_string());
        }
        match e {
            E::InvalidArgument(m) => CommandError::Config(m),
            E::Io(io) => CommandError::Io(io),
            other => CommandError::Data(other.to_string()),
        }
    }
}
