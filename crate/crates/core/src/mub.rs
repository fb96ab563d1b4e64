//! Alltop time-frequency shifts and maximal sets of mutually unbiased bases.
//!
//! For a prime `n ≥ 5`, vector `(α, λ)` has entries
//! `ω^{(k+α)^3 + λ(k+α)}`, `k = 0..n`, `ω = exp(2πi/n)`. Entries have unit
//! modulus, so every vector has norm `√n`. For fixed `α` the `n` vectors,
//! scaled by `1/√n`, form an orthonormal basis; the `n` bases together with
//! the standard basis are pairwise unbiased.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{complex_test_vectors, standard_basis};
use crate::scalar::{csum, inner, norm2_sqr, Real};

/// Seed for the default random probes of [`verify_2design`].
pub const DESIGN_PROBE_SEED: u64 = 0x2DE5_1600;
pub const DESIGN_RANDOM_PROBES: usize = 100;

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_dimension(n: usize) -> Result<()> {
    if !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if n < 5 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok(())
}

/// The `n²` Alltop vectors, entries generated on demand from a root table.
#[derive(Debug, Clone)]
pub struct AlltopFamily<T> {
    n: usize,
    roots: Vec<Complex<T>>,
}

impl<T: Real> AlltopFamily<T> {
    pub fn new(n: usize) -> Result<Self> {
        check_dimension(n)?;
        let roots = (0..n)
            .map(|e| {
                let theta = 2.0 * std::f64::consts::PI * e as f64 / n as f64;
                Complex::new(T::of(theta.cos()), T::of(theta.sin()))
            })
            .collect();
        Ok(Self { n, roots })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Phase exponent of entry `k` of vector `(α, λ)`, reduced mod `n`.
    pub fn exponent(&self, alpha: usize, lambda: usize, k: usize) -> usize {
        let n = self.n as u64;
        let j = (k as u64 + alpha as u64) % n;
        ((j * j % n * j + lambda as u64 * j) % n) as usize
    }

    /// Vector `(α, λ)` with norm `√n`.
    pub fn vector(&self, alpha: usize, lambda: usize) -> Vec<Complex<T>> {
        assert!(alpha < self.n && lambda < self.n, "index out of range");
        (0..self.n)
            .map(|k| self.roots[self.exponent(alpha, lambda, k)])
            .collect()
    }

    /// Vector number `i = α·n + λ`.
    pub fn vector_at(&self, i: usize) -> Vec<Complex<T>> {
        self.vector(i / self.n, i % self.n)
    }

    /// Orthonormal bases (entries scaled by `1/√n`), optionally followed by
    /// the standard basis.
    pub fn to_mub_family(&self, include_standard: bool) -> MubFamily<T> {
        let scale = T::one() / T::of_usize(self.n).sqrt();
        let mut bases: Vec<Vec<Vec<Complex<T>>>> = (0..self.n)
            .map(|alpha| {
                (0..self.n)
                    .map(|lambda| self.vector(alpha, lambda).into_iter().map(|z| z * scale).collect())
                    .collect()
            })
            .collect();
        if include_standard {
            bases.push(standard_basis(self.n));
        }
        MubFamily {
            n: self.n,
            bases,
            includes_standard: include_standard,
        }
    }
}

pub fn build_alltop_family<T: Real>(n: usize) -> Result<AlltopFamily<T>> {
    AlltopFamily::new(n)
}

pub fn alltop_vector<T: Real>(n: usize, alpha: usize, lambda: usize) -> Result<Vec<Complex<T>>> {
    let fam = AlltopFamily::new(n)?;
    if alpha >= n || lambda >= n {
        return Err(Error::Dimension(format!("(α, λ) = ({alpha}, {lambda}) outside [{n}]²")));
    }
    Ok(fam.vector(alpha, lambda))
}

/// A collection of orthonormal bases of `C^n`.
#[derive(Debug, Clone)]
pub struct MubFamily<T> {
    n: usize,
    bases: Vec<Vec<Vec<Complex<T>>>>,
    includes_standard: bool,
}

impl<T: Real> MubFamily<T> {
    pub fn new(n: usize, bases: Vec<Vec<Vec<Complex<T>>>>, includes_standard: bool) -> Result<Self> {
        for b in &bases {
            if b.len() != n || b.iter().any(|v| v.len() != n) {
                return Err(Error::Dimension(format!("every basis needs {n} vectors of length {n}")));
            }
        }
        Ok(Self {
            n,
            bases,
            includes_standard,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn bases(&self) -> &[Vec<Vec<Complex<T>>>] {
        &self.bases
    }

    pub fn includes_standard(&self) -> bool {
        self.includes_standard
    }

    /// Worst deviation of any Gram matrix entry from the identity, per basis.
    pub fn orthonormality_deviation(&self) -> T {
        self.bases
            .iter()
            .map(|b| {
                let mut worst = T::zero();
                for (i, u) in b.iter().enumerate() {
                    for (j, v) in b.iter().enumerate() {
                        let target = if i == j { T::one() } else { T::zero() };
                        let g = inner(u, v);
                        worst = worst.max((g - Complex::new(target, T::zero())).norm());
                    }
                }
                worst
            })
            .fold(T::zero(), T::max)
    }
}

/// The `n = 2` maximal set: standard basis, `{(1,1),(1,−1)}/√2`, `{(1,i),(1,−i)}/√2`.
pub fn mmub_n2_fixture<T: Real>() -> MubFamily<T> {
    let h = T::one() / T::of(2.0).sqrt();
    let c = |re: f64, im: f64| Complex::new(T::of(re) * h, T::of(im) * h);
    let bases = vec![
        standard_basis(2),
        vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-1.0, 0.0)]],
        vec![vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(1.0, 0.0), c(0.0, -1.0)]],
    ];
    MubFamily {
        n: 2,
        bases,
        includes_standard: true,
    }
}

/// Largest `| |⟨b, c⟩|² − 1/n |` over vectors from distinct bases.
pub fn verify_unbiased<T: Real>(family: &MubFamily<T>) -> T {
    let target = T::one() / T::of_usize(family.n);
    let bases = &family.bases;
    (0..bases.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = T::zero();
            for other in &bases[i + 1..] {
                for u in &bases[i] {
                    for v in other {
                        worst = worst.max((inner(u, v).norm_sqr() - target).abs());
                    }
                }
            }
            worst
        })
        .reduce(T::zero, T::max)
}

/// Exact `(1/N) Σ_i |⟨z, w_i⟩|^{2k}` over all family vectors rescaled to norm `√n`.
pub fn design_moment<T: Real>(family: &MubFamily<T>, z: &[Complex<T>], k: u32) -> T {
    let scale = T::of_usize(family.n).sqrt();
    let count = family.bases.iter().map(Vec::len).sum::<usize>();
    let terms = family
        .bases
        .iter()
        .flatten()
        .map(|w| (inner(w, z) * scale).norm_sqr().powi(k as i32));
    csum(terms) / T::of_usize(count)
}

/// Closed form `n^k C(n+k−1, k)^{-1} ‖z‖^{2k}`.
pub fn design_closed_form<T: Real>(n: usize, k: u32, z: &[Complex<T>]) -> T {
    let mut binom = 1.0f64;
    for i in 0..k as usize {
        binom = binom * (n + i) as f64 / (i + 1) as f64;
    }
    let nk = (n as f64).powi(k as i32);
    T::of(nk / binom) * norm2_sqr(z).powi(k as i32)
}

#[derive(Debug, Clone)]
pub struct DesignMomentReport<T> {
    pub k: u32,
    /// Largest `|moment − closed form| / closed form` over the probes.
    pub max_relative_deviation: T,
    pub test_vectors: usize,
}

/// Moment check for `k = 1, 2`. Probes default to the standard basis plus
/// [`DESIGN_RANDOM_PROBES`] seeded complex Gaussian vectors.
pub fn verify_2design<T: Real>(
    family: &MubFamily<T>,
    probes: Option<&[Vec<Complex<T>>]>,
) -> Result<Vec<DesignMomentReport<T>>> {
    let n = family.n;
    if family.bases.len() < n + 1 {
        return Err(Error::IncompleteFamily {
            found: family.bases.len(),
            needed: n + 1,
        });
    }
    let default_probes;
    let probes = match probes {
        Some(p) => p,
        None => {
            let mut p = standard_basis(n);
            p.extend(complex_test_vectors(n, DESIGN_RANDOM_PROBES, DESIGN_PROBE_SEED));
            default_probes = p;
            &default_probes
        }
    };
    Ok([1u32, 2]
        .into_iter()
        .map(|k| {
            let worst = probes
                .par_iter()
                .map(|z| {
                    let exact = design_moment(family, z, k);
                    let closed = design_closed_form(n, k, z);
                    ((exact - closed) / closed).abs()
                })
                .reduce(T::zero, T::max);
            DesignMomentReport {
                k,
                max_relative_deviation: worst,
                test_vectors: probes.len(),
            }
        })
        .collect())
}
