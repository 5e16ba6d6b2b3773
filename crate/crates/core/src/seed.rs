//! Per-trial random streams.
//!
//! A trial seed is `master_seed + trial_index`. Every trial seed fans out into
//! independent ChaCha streams, one per source of randomness, so that baselines
//! evaluated on the same seed see identical physics. Stream ids are stable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 0,
    Shadowing = 1,
    Fading = 2,
    PilotNoise = 3,
    Baseline = 4,
}

pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    master_seed.wrapping_add(trial_index)
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
