//! Seed derivation and the complex Gaussian draw shared by scenario building
//! and the dual-descent multiplier initialization.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a single
//! `u64`, and derived seeds are produced by hashing the parent seed together
//! with integer tags. Identical inputs therefore give bit-identical draws on
//! every platform.

use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// SplitMix64 finalizer; full-period bijection on u64.
fn mix(mut state: u64) -> u64 {
    state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministically derives an independent seed from `base` and `tags`.
///
/// Used to give each Monte Carlo sample and each solver invocation its own
/// stream without correlating them.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut acc = mix(base);
    for &t in tags {
        acc = mix(acc ^ t);
    }
    acc
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly symmetric complex Gaussian with unit expected power:
/// independent real and imaginary parts of variance 1/2.
pub fn standard_complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}
