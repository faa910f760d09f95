//! Seeded random streams.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, stream)`.
//! ChaCha is counter based, so a trial's draws do not depend on how many
//! other trials ran before it or on which thread ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` at grid position `cell` of a sweep.
pub fn sweep_stream(cell: usize, trial: usize) -> u64 {
    ((cell as u64) << 32) | trial as u64
}
