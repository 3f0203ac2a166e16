//! Seed plumbing. Every random draw in the crate flows from a `u64` seed
//! through [`rng_from`], so a run is reproducible from its config snapshot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DpiRng = ChaCha8Rng;

pub fn rng_from(seed: u64) -> DpiRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of repetition `rep` under `base`.
pub fn repetition_seed(base: u64, rep: u64) -> u64 {
    base ^ rep
}

/// Derives an independent child seed for a named stream (splitmix64 finalizer).
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    let mut z = parent
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tags used with [`derive_seed`].
pub mod stream {
    pub const UNDERSAMPLE: u64 = 1;
    pub const FOLDS: u64 = 2;
    pub const WINDOWS: u64 = 3;
    pub const NULL_FEATURES: u64 = 4;
    pub const SUBJECT: u64 = 5;
    pub const DAY: u64 = 6;
    pub const LAB: u64 = 7;
    pub const CALIBRATION: u64 = 8;
}
