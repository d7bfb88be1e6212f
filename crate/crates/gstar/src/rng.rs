//! Reproducible randomness.
//!
//! Runs are keyed by an experiment seed; per-round generators use the
//! ChaCha stream facility as a counter-based split keyed by
//! (seed, round), so traces are bit-reproducible and rounds could be
//! generated independently.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for a whole run.
pub fn run_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for round `t` of the run keyed by `seed`.
pub fn round_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t.wrapping_add(1));
    rng
}
