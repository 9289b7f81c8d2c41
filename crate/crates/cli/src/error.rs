use std::path::PathBuf;

use thiserror::Error;

pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Malformed command line (also used by clap).
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    /// Readable but invalid input: bad parameters, geometry, images.
    pub const INPUT: i32 = 4;
    pub const SOLVER: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },

    #[error(transparent)]
    Core(#[from] tnc_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use tnc_core::Error as E;
        match self {
            Self::Usage(_) => exit::USAGE,
            Self::Io { .. } => exit::IO,
            Self::Config { .. } => exit::INPUT,
            Self::Core(e) => match e {
                E::Io(_) => exit::IO,
                E::Image(tnc_core::io::ImageError::IoError(_)) => exit::IO,
                E::SolverDiverged { .. }
                | E::FixedPointStalled { .. }
                | E::DegenerateIterate(_)
                | E::NonPositiveSymbol { .. } => exit::SOLVER,
                _ => exit::INPUT,
            },
        }
    }
}
