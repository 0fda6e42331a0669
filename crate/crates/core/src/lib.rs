//! Photon position operator, its biorthonormal eigenkets, and one- and
//! two-photon real-space wave functions obtained by projection.

pub mod cli;
pub mod convergence;
pub mod error;
pub mod export;
pub mod fock;
pub mod lattice;
pub mod numeric;
pub mod polarization;
pub mod position_operator;
pub mod wavefunction;

pub use error::{Error, Result};
