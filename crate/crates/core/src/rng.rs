//! Seeded random-number substreams.
//!
//! Every stochastic operation takes an explicit generator. Substreams are
//! derived from a parent seed plus a path of integer tags, never from the
//! order in which work happens to execute, so results do not depend on the
//! thread schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

// Stream tags used inside a single run.
pub const TAG_TRUTH_INIT: u64 = 1;
pub const TAG_TRUTH_MOTION: u64 = 2;
pub const TAG_MEASUREMENT: u64 = 3;
pub const TAG_FILTER: u64 = 4;
pub const TAG_PLANNER: u64 = 5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a tag path into a parent seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, tags: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, tags))
}
