use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] qensemble::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 for bad input, 2 for a numerical failure inside a model.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(
                qensemble::Error::NonFinite { .. } | qensemble::Error::ResonantMember { .. } | qensemble::Error::NonNormalizable,
            ) => 2,
            _ => 1,
        }
    }
}
