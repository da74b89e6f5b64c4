//! Random pure states of two harmonically trapped gases at fixed particle
//! numbers and energies: sector bases, uniformly distributed states, their
//! bipartite correlations and CHSH statistics.

pub mod chsh;
pub mod error;
pub mod fock;
pub mod hilbert;
pub mod montecarlo;
pub mod observables;

pub use error::{Error, Result};
