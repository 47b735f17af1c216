//! Named random streams split from a single master seed.
//!
//! Every stochastic component takes its own [`ChaCha8Rng`] derived from the
//! master seed and a path of stream labels, so adding a consumer never shifts
//! the random numbers seen by another one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Derive a child seed from `seed` and a textual stream label.
pub fn derive(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ splitmix64(fnv1a(label)))
}

/// Derive a child seed from `seed` and a sequence of integer indices.
pub fn derive_indexed(seed: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(seed), |acc, &i| splitmix64(acc ^ splitmix64(i.wrapping_add(1))))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named streams used by the search and pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    pub master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn init(&self) -> u64 {
        derive(self.master, "init")
    }

    pub fn exploration(&self) -> u64 {
        derive(self.master, "exploration")
    }

    pub fn twirling(&self) -> u64 {
        derive(self.master, "twirling")
    }

    pub fn shots(&self) -> u64 {
        derive(self.master, "shots")
    }

    pub fn synthesis(&self) -> u64 {
        derive(self.master, "synthesis")
    }

    pub fn replay(&self) -> u64 {
        derive(self.master, "replay")
    }

    pub fn named(&self, label: &str) -> u64 {
        derive(self.master, label)
    }
}
