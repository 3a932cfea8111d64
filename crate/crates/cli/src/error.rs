use dlattice::amen::AmenError;
use dlattice::pointproc::SampleError;
use dlattice::tess::TessError;
use dlattice::walk::WalkError;

/// Driver failure, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration or the command line is invalid. Exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// A valid configuration was rejected while running. Exit code 3.
    #[error("runtime rejection: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        })*
    };
}

runtime_from!(AmenError, SampleError, TessError, WalkError, serde_json::Error, csv::Error);
