use backbone_core::ingest::IngestError;
use backbone_core::metrics::MetricError;
use backbone_core::removal::RemovalError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or config file; exit code 1.
    #[error("{0}")]
    Config(String),
    /// Unreadable or unusable input data; exit code 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::InvalidRatio(_) | IngestError::UnknownDelimiter(_) | IngestError::InvalidCutoff(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<RemovalError> for CliError {
    fn from(e: RemovalError) -> Self {
        match e {
            RemovalError::Metric(_) => CliError::Data(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::Data(e.to_string())
    }
}
