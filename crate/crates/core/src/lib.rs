//! Periodically driven two-site impurities in open fermion chains.
//!
//! The crate covers single-particle Hamiltonians and drive protocols
//! ([`model`]), Gaussian-state evolution and entanglement ([`gaussian`]),
//! exact Floquet analytics for the harmonic drive ([`floquet_analytics`]),
//! small-size many-body Floquet spectra ([`manybody_ed`]) and the phase
//! classifiers built on top of them ([`diagnostics`]).

pub mod error;
pub mod linalg;
pub mod model;
pub mod gaussian;
pub mod floquet_analytics;
pub mod manybody_ed;
pub mod diagnostics;
pub mod checks;

pub use error::{Error, Result};
pub use model::{ChainParams, DriveFamily, DriveSpec, ImpurityBlock};
