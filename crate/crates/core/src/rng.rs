//! Seeded random streams. Every parallel work item draws from a stream keyed
//! by `(key, index)`, so results do not depend on how work is scheduled.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type WalkRng = Xoshiro256PlusPlus;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key for sub-stream `index` below `key`.
pub fn derive(key: u64, index: u64) -> u64 {
    mix64(mix64(key) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn stream(key: u64, index: u64) -> WalkRng {
    WalkRng::seed_from_u64(derive(key, index))
}
