//! Seeded randomness.
//!
//! All randomness flows from 64-bit seeds into ChaCha8 streams. Sub-seeds
//! for trials and components are derived with the SplitMix64 finalizer, so
//! a trial's stream depends only on `(base_seed, path)` and never on
//! scheduling.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Real;

pub type CsdRng = ChaCha8Rng;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_add(0x6A09_E667_F3BC_C909)))
}

pub fn rng_from(seed: u64) -> CsdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let g: f64 = rng.sample(StandardNormal);
    T::of(g)
}

/// Standard complex normal: `E|g|² = 1`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::of(re * s), T::of(im * s))
}

pub fn complex_gaussian_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex<T>> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// `count` seeded standard complex normal vectors of length `n`.
pub fn complex_test_vectors<T: Real>(n: usize, count: usize, seed: u64) -> Vec<Vec<Complex<T>>> {
    let mut rng = rng_from(seed);
    (0..count).map(|_| complex_gaussian_vector(&mut rng, n)).collect()
}

/// Standard basis vectors `e_0, …, e_{n−1}`.
pub fn standard_basis<T: Real>(n: usize) -> Vec<Vec<Complex<T>>> {
    (0..n)
        .map(|k| {
            let mut e = vec![Complex::new(T::zero(), T::zero()); n];
            e[k] = Complex::new(T::one(), T::zero());
            e
        })
        .collect()
}
