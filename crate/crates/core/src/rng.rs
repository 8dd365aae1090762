//! Counter-derived random streams.
//!
//! Every random draw in an experiment comes from a stream keyed by
//! `(seed, n, replicate, purpose)`, so replicates are independent of each
//! other and of the order in which worker threads pick them up.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Inputs,
    Noise,
    Trial,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Inputs => 0x1,
            Purpose::Noise => 0x2,
            Purpose::Trial => 0x3,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit ChaCha key from the four coordinates.
pub fn stream(seed: u64, n: u64, replicate: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = splitmix64(seed);
    for (chunk, word) in key.chunks_exact_mut(8).zip([n, replicate, purpose.tag(), 0]) {
        h = splitmix64(h ^ word);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
