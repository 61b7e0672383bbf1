use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::gateway::GatewayError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}:{line}: duplicate thread_id {thread_id:?}", path.display())]
    Duplicate {
        path: PathBuf,
        line: usize,
        thread_id: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Gateway(#[from] GatewayError),

    #[error("{stage}: {source}")]
    Data {
        stage: &'static str,
        #[source]
        source: asumm_core::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(stage: &'static str) -> impl FnOnce(asumm_core::Error) -> Self {
        move |source| Error::Data { stage, source }
    }

    /// Process exit status: 1 usage, 2 data, 3 gateway.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 1,
            Error::Gateway(_) => 3,
            Error::Data { source, .. } if is_backend(source) => 3,
            _ => 2,
        }
    }
}

fn is_backend(e: &asumm_core::Error) -> bool {
    match e {
        asumm_core::Error::Backend { .. } => true,
        asumm_core::Error::Stage { source, .. } => is_backend(source),
        _ => false,
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
