//! Seeded random streams.
//!
//! Every trial derives its streams from `(base_seed, salt, trial_index,
//! stream)` through a SplitMix64 mix, so a trial's randomness never depends
//! on which thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Named sub-streams of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    Truth = 1,
    Derive = 2,
    Query = 3,
    Training = 4,
    Evaluation = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix any number of words into one seed.
pub fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0x6A09_E667_F3BC_C908, |acc, &w| {
        splitmix64(acc ^ splitmix64(w))
    })
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_stream(base_seed: u64, salt: u64, trial_index: u64, sub: Substream) -> Stream {
    stream(mix(&[base_seed, salt, trial_index, sub as u64]))
}

/// 64-bit FNV-1a, used to fingerprint experiment specs.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
