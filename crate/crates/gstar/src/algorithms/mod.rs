//! Full-information online learners.
//!
//! Each learner is a value-object state advanced one observed gradient
//! at a time; the caller owns the play/observe loop, so the same states
//! drive full-information runs, online-to-batch conversion and the
//! expert pool of the dynamic-regret meta algorithm.

mod adaftrl;
mod adagrad;
mod adversary;
mod ogd;
mod sword;

pub use adaftrl::{AdaFtrlState, AlgoError};
pub use adagrad::AdaGradNormState;
pub use adversary::lower_bound_adversary;
pub use ogd::OgdState;
pub use sword::{DeltaMode, SwordConfig, SwordState};
