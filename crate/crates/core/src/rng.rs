//! Seeded, splittable random streams.
//!
//! Every parallel unit of work (a trial, a chunk of a pool) gets its own
//! ChaCha stream derived from the user seed and a fixed unit index, so results
//! never depend on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), one stream per work unit";

/// Generator for work unit `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
