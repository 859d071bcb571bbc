//! Random number streams.
//!
//! The generator is ChaCha8 seeded with `seed_from_u64(seed)`. Independent
//! runs sharing a seed (e.g. Monte-Carlo replications) are separated by the
//! ChaCha stream id: replication `i` uses stream `i`. Normal variates come
//! from `rand_distr::StandardNormal` (ziggurat) and are scaled by the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

/// Generator for child `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from `N(0, std_dev^2)`.
pub fn normal(rng: &mut SimRng, std_dev: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * std_dev
}
