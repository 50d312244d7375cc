//! Seeded random streams.
//!
//! Every randomized routine takes a `u64` seed and derives independent
//! ChaCha streams from it, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for `(seed, stream)`. Distinct streams are independent.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for a pair of small indices (fact id, trial, restart, ...).
pub fn pair(a: u64, b: u64) -> u64 {
    (a << 40) ^ b
}
