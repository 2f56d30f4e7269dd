//! Seeded randomness shared by every component.
//!
//! All generators are [`ChaCha8Rng`] instances seeded through
//! `SeedableRng::seed_from_u64`. Mine placement does not go through `rand`'s
//! sampling helpers (whose algorithms may change between releases); it uses
//! the explicit Fisher-Yates shuffle below, so a board is a pure function of
//! its seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type GameRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GameRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; used to derive independent child seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of integers into one seed. Order matters.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Uniform integer in `0..bound` by rejection on the top of the u64 range.
pub fn bounded(rng: &mut impl RngCore, bound: u64) -> u64 {
    assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// In-place Fisher-Yates: for i from len-1 down to 1, swap i with `bounded(i+1)`.
pub fn shuffle<T>(items: &mut [T], rng: &mut impl RngCore) {
    for i in (1..items.len()).rev() {
        let j = bounded(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}
