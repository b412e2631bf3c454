//! Seeded random streams.
//!
//! Every randomized operation takes an explicit generator. Parallel workers
//! derive independent streams from one master seed by index, so results do
//! not depend on scheduling.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

/// Generator for `seed` on stream 0.
pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Independent generator for worker or item `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for a two-level key, e.g. (category index, slot).
pub fn stream_id(major: u64, minor: u64) -> u64 {
    (major << 40) ^ minor
}
