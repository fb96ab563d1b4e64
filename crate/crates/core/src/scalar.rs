//! Scalar abstraction shared by the numeric modules.
//!
//! Everything numeric in this crate is generic over [`Real`], implemented for
//! `f32` and `f64`. Complex data uses `num_complex::Complex<T>`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Real floating-point scalar.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    fn of_usize(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges another partial sum; used to combine per-thread partials.
    pub fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.add(other.carry);
        self
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a real sequence.
pub fn csum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

/// Compensated sum of a complex sequence (real and imaginary parts separately).
pub fn csum_complex<T: Real, I: IntoIterator<Item = Complex<T>>>(iter: I) -> Complex<T> {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for z in iter {
        re.add(z.re);
        im.add(z.im);
    }
    Complex::new(re.value(), im.value())
}

/// `⟨a, z⟩ = Σ conj(aᵢ) zᵢ`, compensated.
pub fn inner<T: Real>(a: &[Complex<T>], z: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), z.len());
    csum_complex(a.iter().zip(z).map(|(a, z)| a.conj() * z))
}

/// Plain (uncompensated) inner product for the solver hot loops.
#[inline]
pub fn dot_conj<T: Real>(a: &[Complex<T>], z: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, z) in a.iter().zip(z) {
        acc += a.conj() * z;
    }
    acc
}

pub fn norm2<T: Real>(v: &[Complex<T>]) -> T {
    let mut scale = T::zero();
    for z in v {
        scale = scale.max(z.re.abs()).max(z.im.abs());
    }
    if scale == T::zero() {
        return T::zero();
    }
    let mut acc = T::zero();
    for z in v {
        let (re, im) = (z.re / scale, z.im / scale);
        acc += re * re + im * im;
    }
    scale * acc.sqrt()
}

pub fn norm1<T: Real>(v: &[Complex<T>]) -> T {
    csum(v.iter().map(|z| z.norm()))
}

pub fn norm_inf<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// `‖v‖₄⁴ = Σ|vᵢ|⁴`.
pub fn norm4_pow4<T: Real>(v: &[Complex<T>]) -> T {
    csum(v.iter().map(|z| {
        let m = z.norm_sqr();
        m * m
    }))
}

/// `‖v‖₂² = Σ|vᵢ|²`, compensated.
pub fn norm2_sqr<T: Real>(v: &[Complex<T>]) -> T {
    csum(v.iter().map(|z| z.norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_digits() {
        let xs = [1.0e16, 1.0, -1.0e16, 1.0];
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 1.0);
        assert_eq!(csum(xs), 2.0);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let whole = csum(xs.iter().copied());
        let (a, b) = xs.split_at(377);
        let merged = a
            .iter()
            .copied()
            .collect::<CompensatedSum<f64>>()
            .merge(b.iter().copied().collect());
        assert!((merged.value() - whole).abs() <= 1e-15);
    }

    #[test]
    fn norms_on_small_vector() {
        let v = [Complex::new(3.0_f64, 4.0), Complex::new(0.0, 0.0)];
        assert_eq!(norm2(&v), 5.0);
        assert_eq!(norm1(&v), 5.0);
        assert_eq!(norm_inf(&v), 5.0);
        assert_eq!(norm4_pow4(&v), 625.0);
        let w = [Complex::new(1.0f32, 0.0); 4];
        assert_eq!(norm2(&w), 2.0);
    }
}
