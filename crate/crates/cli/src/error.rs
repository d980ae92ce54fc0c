use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest syntax: {0}")]
    Syntax(String),
    #[error("{0}")]
    Manifest(String),
    #[error("{context}: {source}")]
    Core { context: String, source: seqwarp_core::Error },
    #[error("cannot serialize report: {0}")]
    Report(#[from] serde_json::Error),
}

impl CliError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(seqwarp_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }
}
