//! Seeded, splittable random number generation.
//!
//! All randomness in the crate flows through [`SplitMix64`], a 64-bit
//! counter-based generator, so that every run is reproducible from a single
//! seed. Independent streams (per replication, per outer iteration, per
//! grid cell) are derived by hashing the parent seed with a string label
//! via [`derive_seed`]; the derivation is stable across platforms and
//! releases because it uses no std hasher.

use rand::RngCore;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64: the state advances by a fixed increment and each output is a
/// mix of the counter, so streams never short-cycle regardless of seed.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }
}

impl RngCore for SplitMix64 {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        rand::rand_core::impls::fill_bytes_via_next(self, dest)
    }
}

/// Derives an independent child seed from `(seed, label)`.
///
/// FNV-1a over the label bytes, folded into the parent seed and finalized
/// with the SplitMix64 mixer.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in label.as_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix64(seed ^ h)
}

/// Derives a child seed for the `index`-th member of a labeled family of
/// streams (replications, outer iterations, grid cells).
pub fn derive_seed_indexed(seed: u64, label: &str, index: u64) -> u64 {
    mix64(derive_seed(seed, label).wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
}

/// Draws `k` distinct indices from `0..n` by a partial Fisher–Yates
/// shuffle. The result order is the shuffle order (not sorted).
pub fn sample_without_replacement(rng: &mut SplitMix64, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} distinct indices from 0..{n}");
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}
