//! Online convex optimization learners that adapt to the cumulative
//! squared gradient norm at the comparator, together with the offline
//! machinery needed to audit them: hindsight oracles, problem-dependent
//! statistics, bandit (two-point) variants, Moreau-envelope surrogates,
//! stochastic online-to-batch conversion and an experiment harness.
//!
//! The crate is organized around a small loss library ([`LossFn`]),
//! exact-projection feasible sets ([`ConstraintSet`]) and per-round
//! traces ([`RegretLedger`]). Algorithms are value-object state machines
//! advanced one gradient at a time; the harness wires them to generated
//! instances and checks every closed-form regret bound against measured
//! regret.

pub mod algorithms;
pub mod bandit;
pub mod bounds;
pub mod harness;
pub mod hindsight;
pub mod loss;
pub mod rng;
pub mod set;
pub mod stochastic;
pub mod surrogate;
pub mod vector;

pub use loss::{max_smoothness, LossFn};
pub use set::ConstraintSet;
pub use vector::Vector;

use thiserror::Error;

/// Errors from constructing core types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("vectors must have at least one entry")]
    EmptyVector,
    #[error("non-finite entry {0} rejected")]
    NonFiniteEntry(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid constraint set: {0}")]
    InvalidSet(String),
    #[error("invalid loss: {0}")]
    InvalidLoss(String),
}
