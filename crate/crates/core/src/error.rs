use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular point at k = ({0:.6e}, {1:.6e}, {2:.6e}): {3}")]
    SingularPoint(f64, f64, f64, &'static str),

    #[error("empty sample set")]
    EmptySamples,

    #[error("mode {n:?} is not on the lattice (N = {lattice_n}): {context}")]
    ModeNotOnLattice {
        n: [i32; 3],
        lattice_n: usize,
        context: String,
    },

    #[error("state has no {0}-photon sector")]
    MissingSector(u8),

    #[error("closed form not applicable: {0}")]
    NotApplicable(String),

    #[error("oracle refused: {0}")]
    OracleTooLarge(String),

    #[error("state file {path}: {message}")]
    StateFile { path: PathBuf, message: String },

    #[error("{location}: {message}")]
    InvalidEntry { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
