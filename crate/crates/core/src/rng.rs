//! Seeded random streams.
//!
//! Every episode draws from independent ChaCha streams keyed by the episode
//! seed, so that replacing one consumer (e.g. a scripted evader in place of a
//! sampled one) does not perturb the draws seen by the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream used for spawning the evader.
pub const STREAM_SPAWN: u64 = 0;
/// Stream used for detection noise.
pub const STREAM_SENSOR: u64 = 1;
/// Stream owned by the evader policy.
pub const STREAM_EVADER: u64 = 2;

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
