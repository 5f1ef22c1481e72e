use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] qmcforge::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("certificate failed: lhs {lhs} > rhs {rhs}")]
    CertificateFailed { lhs: f64, rhs: f64 },
}

impl CliError {
    /// 0 success, 1 failed certificate, 2 usage or precondition, 3 resource cap.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CertificateFailed { .. } => 1,
            CliError::Library(qmcforge::Error::Resource(_)) => 3,
            _ => 2,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type CliResult<T> = Result<T, CliError>;
