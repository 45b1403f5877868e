//! Seeded generators and child-seed derivation.
//!
//! Every stochastic routine takes an owned or borrowed [`LabRng`]. Sweeps derive
//! child seeds from `(master_seed, purpose, index)` so that each cell is
//! reproducible on its own and cells can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Child seed for `(master, tag, index)`.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(tag.as_bytes())).wrapping_add(splitmix64(index)))
}

/// Stable 64-bit fingerprint of a float slice (used for transform ids).
pub fn fingerprint(values: &[f64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        h = (h ^ v.to_bits()).wrapping_mul(0x0000_0100_0000_01B3);
        h = splitmix64(h);
    }
    h
}
