use std::process::ExitCode;

/// Process exit statuses. The numeric values are a stable contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    VerificationFailed = 1,
    ConfigError = 2,
    NumericalAbort = 3,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config, bad input file, bad flag value.
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }

    pub fn status(&self) -> Status {
        match self {
            Self::Config(_) | Self::Io { .. } => Status::ConfigError,
            Self::Numerical(_) => Status::NumericalAbort,
        }
    }
}

impl From<nlsv::Error> for CliError {
    fn from(e: nlsv::Error) -> Self {
        match e {
            nlsv::Error::Config(msg) => Self::Config(msg),
            other => Self::Numerical(other.to_string()),
        }
    }
}
