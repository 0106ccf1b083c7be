//! Qudit SNAP-Displacement circuits and barren-plateau analysis.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigendecomposition and the
//!   unitary exponential.
//! - [`gates`]: truncated ladder operators, displacement and SNAP gates,
//!   blocks, the block ansatz and the W_A/W_B block partition.
//! - [`cost`]: state/observable and gate cost functions with exact phase
//!   gradients.
//! - [`haar`]: Haar sampling, Weingarten moments, trace-integral closed forms
//!   with exhaustive-summation oracles, frame potentials.
//! - [`analytic`]: closed-form gradient-variance predictions.
//! - [`experiments`]: seeded, thread-count-independent Monte Carlo sweeps.

pub mod analytic;
pub mod cost;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod haar;
pub mod linalg;

pub use error::{Error, Result};
pub use linalg::{Complex, ComplexMatrix};
