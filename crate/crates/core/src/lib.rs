//! Large-time analysis of quantum Markov semigroups on truncated Hilbert spaces.

pub mod classical;
pub mod error;
pub mod lindblad;
pub mod models;
pub mod numerics;
pub mod operators;
pub mod random;
pub mod semigroup;
pub mod spectral;
pub mod structure;

pub use error::{Error, ErrorCategory, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
