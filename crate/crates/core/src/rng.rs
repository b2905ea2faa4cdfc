//! Seeded generators. Every stochastic routine takes its generator from here
//! so runs are reproducible from a single `u64`.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SeededRng;

/// Generator for the master seed.
pub fn seeded(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Independent stream derived from `seed`, e.g. one per epoch or per metric.
pub fn stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = SeededRng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_add(1));
    rng
}
