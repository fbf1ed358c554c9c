//! Numerical verification of entropy inequality chains on finite-dimensional
//! quantum states.
//!
//! The crate computes von Neumann and Umegaki relative entropies, Renyi
//! relative entropies, conditional mutual information, and the lifted
//! `exp(log a + log b - log c)` operators they bound, then checks every link
//! of the corresponding inequality chains on constructed and randomly sampled
//! states. It also analyzes Markov operators (trace criterion, Petz-type
//! reconstructions, Ruskai log residual) and ships a CLI for batch
//! Monte-Carlo runs with machine-readable reports.

pub mod chains;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod report;
pub mod states;

pub use error::{Error, Result};

/// Conversion factor from nats to bits, for display only; every internal
/// quantity is in nats.
pub const NATS_TO_BITS: f64 = std::f64::consts::LOG2_E;
