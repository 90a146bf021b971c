//! Deterministic seed derivation.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` (a counter-based
//! stream cipher generator, identical on every platform) seeded from a root
//! seed mixed with the coordinates of the draw. Two draws with different
//! coordinates never share a stream, and parallel evaluation order is irrelevant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a root seed with integer coordinates into a child seed.
pub fn derive_seed(root: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(root), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

/// Stable 64-bit FNV-1a hash, used to turn scenario ids into seed coordinates.
pub fn stable_hash(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn generator(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
