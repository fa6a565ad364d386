//! Named, splittable random streams.
//!
//! A run owns a single master seed. Every consumer of randomness asks for a
//! stream by label plus a list of indices (generation, child index, bin index,
//! ...). Streams are derived by hashing, so the order in which parallel workers
//! request them has no influence on the values they produce.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives independent streams from a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    master: u64,
}

impl Streams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Seed for the stream identified by `label` and `indices`.
    pub fn seed_for(&self, label: &str, indices: &[u64]) -> u64 {
        let mut h = splitmix64(self.master);
        for b in label.bytes() {
            h = splitmix64(h ^ u64::from(b));
        }
        // separates the label from the indices
        h = splitmix64(h ^ 0xFF);
        for &i in indices {
            h = splitmix64(h ^ i);
        }
        h
    }

    pub fn stream(&self, label: &str, indices: &[u64]) -> StreamRng {
        StreamRng::seed_from_u64(self.seed_for(label, indices))
    }
}

/// A stream seeded directly, used by standalone tools such as the maze generator CLI.
pub fn seeded(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
