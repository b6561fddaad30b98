use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::report::{analysis_status, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Channel(#[from] qchan::Error),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Usage(_) | CliError::Write { .. } => Status::Input,
            CliError::Channel(e) => analysis_status(e),
        }
    }
}
