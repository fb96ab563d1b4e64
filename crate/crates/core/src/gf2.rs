//! Arithmetic in GF(2^r) and linear algebra over F2.
//!
//! Field elements are plain `u32` coefficient masks: bit `i` is the
//! coefficient of `x^i`. Addition is XOR.

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 16;

/// Default modulus for each degree 1..=16. All are primitive, so `x`
/// generates the multiplicative group.
const DEFAULT_MODULI: [u32; 17] = [
    0, 0b11, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

fn degree_of(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of carry-less division `a mod b`.
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree_of(b).expect("nonzero divisor");
    while let Some(da) = degree_of(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// GF(2^r) context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gf2Field {
    degree: u32,
    modulus: u32,
}

impl Gf2Field {
    /// Creates GF(2^r) with the given modulus, rejecting reducible ones.
    pub fn new(degree: u32, modulus: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::DegreeOutOfRange(degree));
        }
        if degree_of(modulus) != Some(degree) {
            return Err(Error::ModulusDegree { modulus, degree });
        }
        // Any reducible polynomial has a factor of degree <= r/2.
        for d in 1..=degree / 2 {
            for low in 0..(1u32 << d) {
                let factor = (1u32 << d) | low;
                if poly_rem(modulus, factor) == 0 {
                    return Err(Error::ReducibleModulus { modulus, factor });
                }
            }
        }
        Ok(Self { degree, modulus })
    }

    /// GF(2^r) with the fixed default modulus for `degree`.
    pub fn with_default_modulus(degree: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::DegreeOutOfRange(degree));
        }
        Self::new(degree, DEFAULT_MODULI[degree as usize])
    }

    pub fn default_modulus(degree: u32) -> Option<u32> {
        (1..=MAX_DEGREE)
            .contains(&degree)
            .then(|| DEFAULT_MODULI[degree as usize])
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements, `2^r`.
    pub fn order(&self) -> u32 {
        1 << self.degree
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.order()
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!(self.contains(a) && self.contains(b));
        let mut acc = 0u32;
        let mut a = a;
        let mut b = b;
        let top = 1u32 << self.degree;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^r - 2)`; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.pow(a, u64::from(self.order()) - 2))
    }

    /// The element `x`, a generator when the modulus is primitive.
    pub fn generator(&self) -> u32 {
        if self.degree == 1 {
            1
        } else {
            0b10
        }
    }
}

/// Dense bit matrix over F2, row-major, 64 columns per word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds from rows of 0/1 bytes. Nonzero bytes count as 1.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b != 0);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.bits[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Column `c` packed into a `u64` (bit `i` = row `i`). Requires `rows <= 64`.
    pub fn column_mask(&self, c: usize) -> u64 {
        assert!(self.rows <= 64, "column masks need at most 64 rows");
        (0..self.rows).fold(0, |m, r| m | (u64::from(self.get(r, c)) << r))
    }

    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| u8::from(self.get(r, c))).collect()
    }

    /// Nonzero rows of the reduced row echelon form: a basis of the row space.
    pub fn row_basis(&self) -> F2Matrix {
        let mut bits = self.bits.clone();
        let w = self.words;
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (word, bit) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (rank..self.rows).find(|&r| bits[r * w + word] & bit != 0) else {
                continue;
            };
            if p != rank {
                for k in 0..w {
                    bits.swap(p * w + k, rank * w + k);
                }
            }
            for r in 0..self.rows {
                if r != rank && bits[r * w + word] & bit != 0 {
                    for k in 0..w {
                        let v = bits[rank * w + k];
                        bits[r * w + k] ^= v;
                    }
                }
            }
            rank += 1;
        }
        bits.truncate(rank * w);
        F2Matrix {
            rows: rank,
            cols: self.cols,
            words: w,
            bits,
        }
    }

    /// Rank by Gaussian elimination on a private copy.
    pub fn rank(&self) -> usize {
        let mut bits = self.bits.clone();
        let w = self.words;
        let mut rank = 0;
        for c in 0..self.cols {
            let (word, bit) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (rank..self.rows).find(|&r| bits[r * w + word] & bit != 0) else {
                continue;
            };
            if p != rank {
                for k in 0..w {
                    bits.swap(p * w + k, rank * w + k);
                }
            }
            for r in 0..self.rows {
                if r != rank && bits[r * w + word] & bit != 0 {
                    for k in 0..w {
                        let v = bits[rank * w + k];
                        bits[r * w + k] ^= v;
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

pub fn f2_rank(m: &F2Matrix) -> usize {
    m.rank()
}

/// Rank of a set of vectors packed as `u64` masks.
pub fn rank_of_masks(vectors: &[u64]) -> usize {
    // XOR basis keyed by leading bit.
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &v in vectors {
        let mut v = v;
        while v != 0 {
            let lead = 63 - v.leading_zeros() as usize;
            if basis[lead] == 0 {
                basis[lead] = v;
                rank += 1;
                break;
            }
            v ^= basis[lead];
        }
    }
    rank
}
