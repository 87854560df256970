//! Computational thermodynamic formalism for nonautonomous symbolic
//! dynamical systems.
//!
//! The library works with one-sided sequence spaces whose alphabet size may
//! change from level to level, the shift maps between them, potential
//! sequences, and product (Bernoulli) measures with level-dependent
//! probability vectors.  On top of these it provides finite-window
//! estimators for capacity pressures, exact antichain optimization of
//! cover/packing weights over the cylinder tree, equilibrium-state
//! construction, and symbolic coding of expanding interval maps.
//!
//! Everything is evaluated at "desk scale": estimators report windows,
//! brackets, and truncation depths instead of claiming limits.

pub mod bernoulli;
pub mod expansive;
pub mod potentials;
pub mod pressure;
pub mod seqspace;

mod util;

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("empty word")]
    EmptyWord,
    #[error("prefix resolvable only to depth {have}, needed {needed}")]
    InsufficientDepth { needed: usize, have: usize },
    #[error("invalid alphabet sequence: {0}")]
    InvalidAlphabet(String),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid probability vectors: {0}")]
    InvalidMeasure(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("depth bound exceeded: {0}")]
    DepthBound(String),
    #[error("undetermined: {0}")]
    Undetermined(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
