//! Binary strength-4 orthogonal arrays: constructions, strength verification,
//! the Rao bound and the sign mapping used for measurement rows.

mod combin;
mod file;
mod verify;

pub use combin::binomial;
pub use file::{read_array, write_array};
pub use verify::{
    measured_linear_strength, verify_linear, verify_strength, StrengthReport, VerifyMethod, VerifyOptions,
    Witness, DEFAULT_BUDGET, DEFAULT_SAMPLES,
};

use crate::error::{Error, Result};
use crate::gf2::{F2Matrix, Gf2Field};
use crate::scalar::Real;

/// Largest run count a linear spec will materialize.
pub const MAX_MATERIALIZED_RUNS: usize = 1 << 24;

/// An `M × k` table over symbols `0..s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    runs: usize,
    factors: usize,
    levels: usize,
    claimed_strength: usize,
    index: usize,
    entries: Vec<u8>,
    provenance: Vec<String>,
    linear: Option<LinearArraySpec>,
}

impl OrthogonalArray {
    /// Wraps a symbol table. `entries` is row-major with `runs * factors` cells.
    pub fn new(
        runs: usize,
        factors: usize,
        levels: usize,
        claimed_strength: usize,
        entries: Vec<u8>,
    ) -> Result<Self> {
        if !(2..=256).contains(&levels) {
            return Err(Error::InvalidArray(format!("levels {levels} outside 2..=256")));
        }
        if entries.len() != runs * factors {
            return Err(Error::InvalidArray(format!(
                "{} cells for a {runs}x{factors} array",
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|&e| usize::from(e) >= levels) {
            return Err(Error::InvalidArray(format!(
                "symbol {} at row {} column {} is not below {levels}",
                entries[pos],
                pos / factors.max(1),
                pos % factors.max(1)
            )));
        }
        if claimed_strength > factors {
            return Err(Error::InvalidArray(format!(
                "strength {claimed_strength} exceeds {factors} factors"
            )));
        }
        let cells = levels.checked_pow(claimed_strength as u32).unwrap_or(usize::MAX);
        if !runs.is_multiple_of(cells) {
            return Err(Error::InvalidArray(format!(
                "{runs} runs is not a multiple of {levels}^{claimed_strength}"
            )));
        }
        Ok(Self {
            runs,
            factors,
            levels,
            claimed_strength,
            index: runs / cells,
            entries,
            provenance: Vec::new(),
            linear: None,
        })
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn claimed_strength(&self) -> usize {
        self.claimed_strength
    }

    /// λ = M / s^t.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.factors..(i + 1) * self.factors]
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.factors + j]
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn linear_spec(&self) -> Option<&LinearArraySpec> {
        self.linear.as_ref()
    }

    pub fn with_provenance(mut self, line: impl Into<String>) -> Self {
        self.provenance.push(line.into());
        self
    }

    /// Replaces the claimed strength (and index) after verification.
    pub fn with_claimed_strength(mut self, t: usize) -> Result<Self> {
        let cells = self.levels.checked_pow(t as u32).unwrap_or(usize::MAX);
        if t > self.factors || !self.runs.is_multiple_of(cells) {
            return Err(Error::InvalidArray(format!(
                "strength {t} incompatible with {} runs and {} factors",
                self.runs, self.factors
            )));
        }
        self.claimed_strength = t;
        self.index = self.runs / cells;
        Ok(self)
    }

    /// Copy with one row removed; the claimed strength and index are kept.
    pub fn without_row(&self, i: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.drain(i * self.factors..(i + 1) * self.factors);
        Self {
            runs: self.runs - 1,
            entries,
            linear: None,
            provenance: self.provenance.clone(),
            ..*self
        }
    }

    /// The first `n` columns. Strength is preserved by column deletion.
    pub fn restrict_columns(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.factors {
            return Err(Error::InvalidArray(format!(
                "cannot keep {n} of {} columns",
                self.factors
            )));
        }
        let mut entries = Vec::with_capacity(self.runs * n);
        for i in 0..self.runs {
            entries.extend_from_slice(&self.row(i)[..n]);
        }
        let mut out = Self::new(
            self.runs,
            n,
            self.levels,
            self.claimed_strength.min(n),
            entries,
        )?;
        out.provenance = self.provenance.clone();
        out.provenance
            .push(format!("restricted to the first {n} of {} columns", self.factors));
        Ok(out)
    }

    fn attach_linear(mut self, spec: LinearArraySpec) -> Self {
        self.linear = Some(spec);
        self
    }
}

/// A linear binary array given by its generator matrix: the runs are the
/// codewords `xG` for all `x ∈ F2^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearArraySpec {
    generator: F2Matrix,
    columns: Vec<u64>,
}

impl LinearArraySpec {
    /// Validates a `d × k` generator: full row rank, columns nonzero and distinct.
    pub fn new(generator: F2Matrix) -> Result<Self> {
        let d = generator.rows();
        if d == 0 || d > 64 {
            return Err(Error::InvalidArray(format!("generator has {d} rows")));
        }
        if generator.rank() != d {
            return Err(Error::InvalidArray("generator rows are dependent".into()));
        }
        let columns: Vec<u64> = (0..generator.cols()).map(|c| generator.column_mask(c)).collect();
        if let Some(c) = columns.iter().position(|&m| m == 0) {
            return Err(Error::InvalidArray(format!("generator column {c} is zero")));
        }
        let mut sorted = columns.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArray("generator has repeated columns".into()));
        }
        Ok(Self { generator, columns })
    }

    /// Recovers a generator from an array whose rows form an F2 subspace.
    pub fn from_array(array: &OrthogonalArray) -> Result<Self> {
        if array.levels() != 2 {
            return Err(Error::SeedNotLinear(format!("{} levels", array.levels())));
        }
        let rows: Vec<Vec<u8>> = (0..array.runs()).map(|i| array.row(i).to_vec()).collect();
        let mut distinct = rows.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != rows.len() {
            return Err(Error::SeedNotLinear("repeated runs".into()));
        }
        let basis = F2Matrix::from_rows(&rows).row_basis();
        let d = basis.rows();
        if d >= usize::BITS as usize || rows.len() != 1usize << d {
            return Err(Error::SeedNotLinear(format!(
                "{} runs span a space of dimension {d}",
                rows.len()
            )));
        }
        Self::new(basis).map_err(|e| Error::SeedNotLinear(e.to_string()))
    }

    pub fn generator(&self) -> &F2Matrix {
        &self.generator
    }

    /// Generator columns packed as masks (bit `i` = generator row `i`).
    pub fn column_masks(&self) -> &[u64] {
        &self.columns
    }

    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }

    pub fn factors(&self) -> usize {
        self.columns.len()
    }

    /// Codeword for message `x` (bit `i` of `x` multiplies generator row `i`).
    pub fn codeword(&self, x: u64) -> Vec<u8> {
        self.columns
            .iter()
            .map(|&c| ((x & c).count_ones() & 1) as u8)
            .collect()
    }

    /// All `2^d` codewords in lexicographic row order.
    pub fn to_array(&self, claimed_strength: usize) -> Result<OrthogonalArray> {
        let d = self.dimension();
        if d > MAX_MATERIALIZED_RUNS.trailing_zeros() as usize {
            return Err(Error::InvalidArray(format!(
                "2^{d} runs exceed the materialization limit"
            )));
        }
        let k = self.factors();
        let mut rows: Vec<Vec<u8>> = (0..1u64 << d).map(|x| self.codeword(x)).collect();
        rows.sort_unstable();
        let entries: Vec<u8> = rows.into_iter().flatten().collect();
        Ok(OrthogonalArray::new(1 << d, k, 2, claimed_strength, entries)?.attach_linear(self.clone()))
    }
}

/// The 16×5 array: `{0,1}^4` in lexicographic order plus a parity column.
pub fn build_parity_seed() -> OrthogonalArray {
    let mut generator = F2Matrix::zeros(4, 5);
    // Row i of the generator is the unit message bit feeding column 3-i, so
    // that counting x upward enumerates the first four columns lexicographically.
    for i in 0..4 {
        generator.set(i, 3 - i, true);
        generator.set(i, 4, true);
    }
    let spec = LinearArraySpec::new(generator).expect("parity generator is valid");
    let entries: Vec<u8> = (0..16u64).flat_map(|x| spec.codeword(x)).collect();
    OrthogonalArray::new(16, 5, 2, 4, entries)
        .expect("parity seed is well formed")
        .attach_linear(spec)
        .with_provenance("construction: parity16")
}

/// Dual of the double-error-correcting BCH code of length `2^r - 1`:
/// column `i` of the generator stacks the bits of `α^i` and `α^{3i}`.
pub fn bch_generator(r: u32) -> Result<LinearArraySpec> {
    if !(3..=8).contains(&r) {
        return Err(Error::DegreeOutOfRange(r));
    }
    let field = Gf2Field::with_default_modulus(r)?;
    let alpha = field.generator();
    let k = (1usize << r) - 1;
    let rr = r as usize;
    let mut generator = F2Matrix::zeros(2 * rr, k);
    for i in 1..=k {
        let a = field.pow(alpha, i as u64);
        let b = field.pow(alpha, 3 * i as u64);
        for bit in 0..rr {
            generator.set(bit, i - 1, (a >> bit) & 1 == 1);
            generator.set(rr + bit, i - 1, (b >> bit) & 1 == 1);
        }
    }
    LinearArraySpec::new(generator)
}

/// `OA(2^{2r}, 2^r − 1, 2, 4)` from the BCH dual generator.
pub fn build_bch_array(r: u32) -> Result<OrthogonalArray> {
    let spec = bch_generator(r)?;
    let field = Gf2Field::with_default_modulus(r)?;
    Ok(spec.to_array(4)?.with_provenance(format!(
        "construction: bch:{r} (alpha = x mod {:#x})",
        field.modulus()
    )))
}

/// Result of [`expand_squared`]: the candidate array, whose claimed strength
/// is the largest strength verified exhaustively, and every report produced.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub array: OrthogonalArray,
    pub reports: Vec<StrengthReport>,
}

/// Squared expansion of a linear seed with generator `G` (`d × k`): the new
/// `2d × (k² + 2k)` generator has columns `[g_u; g_v]` for all ordered pairs,
/// then `[g_u; 0]`, then `[0; g_v]`. Strength is measured, never assumed.
pub fn expand_squared(seed: &LinearArraySpec, opts: &VerifyOptions) -> Result<Expansion> {
    let d = seed.dimension();
    if 2 * d > 64 {
        return Err(Error::SeedNotLinear(format!("seed dimension {d} too large to square")));
    }
    let g = seed.column_masks();
    let k = g.len();
    let mut masks = Vec::with_capacity(k * k + 2 * k);
    for &gu in g {
        for &gv in g {
            masks.push(gu | (gv << d));
        }
    }
    masks.extend(g.iter().copied());
    masks.extend(g.iter().map(|&gv| gv << d));
    let mut generator = F2Matrix::zeros(2 * d, masks.len());
    for (c, &m) in masks.iter().enumerate() {
        for bit in 0..2 * d {
            generator.set(bit, c, (m >> bit) & 1 == 1);
        }
    }
    let spec = LinearArraySpec::new(generator)?;
    let (strength, reports) = measured_linear_strength(&spec, 4, opts)?;
    if strength == 0 {
        return Err(Error::StrengthUnverifiable {
            strength: 2,
            reason: "no strength could be verified exhaustively".into(),
        });
    }
    let array = spec
        .to_array(strength)?
        .with_provenance(format!(
            "construction: squared expansion of a {}-run, {k}-factor linear seed",
            1u64 << d
        ))
        .with_provenance(format!("verified strength: {strength} (strength 4 not assumed)"));
    Ok(Expansion { array, reports })
}

/// Rao's lower bound for binary strength-4 arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaoCheck {
    /// `1 + k + k(k−1)/2`.
    pub bound: u128,
    pub runs: u128,
    pub feasible: bool,
    /// Runs equal the bound.
    pub tight: bool,
}

pub fn rao_check(factors: usize, levels: usize, strength: usize, runs: usize) -> Result<RaoCheck> {
    if strength != 4 || levels != 2 {
        return Err(Error::UnsupportedParameters(format!(
            "Rao check implemented for s = 2, t = 4 (got s = {levels}, t = {strength})"
        )));
    }
    let k = factors as u128;
    let bound = 1 + k + k * k.saturating_sub(1) / 2;
    let runs = runs as u128;
    Ok(RaoCheck {
        bound,
        runs,
        feasible: runs >= bound,
        tight: runs == bound,
    })
}

/// Maps symbols to centered reals: binary `b ↦ (−1)^b`, otherwise
/// `b ↦ b − (s−1)/2`. Row-major `M × k`.
pub fn rows_to_signs<T: Real>(array: &OrthogonalArray) -> Vec<T> {
    let table = symbol_values::<T>(array.levels());
    array.entries().iter().map(|&b| table[usize::from(b)]).collect()
}

pub(crate) fn symbol_values<T: Real>(levels: usize) -> Vec<T> {
    if levels == 2 {
        vec![T::one(), -T::one()]
    } else {
        let shift = T::of_usize(levels - 1) / T::of(2.0);
        (0..levels).map(|b| T::of_usize(b) - shift).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_seed_layout() {
        let oa = build_parity_seed();
        assert_eq!(
            (oa.runs(), oa.factors(), oa.levels(), oa.claimed_strength(), oa.index()),
            (16, 5, 2, 4, 1)
        );
        assert_eq!(oa.row(0), &[0, 0, 0, 0, 0]);
        assert_eq!(oa.row(1), &[0, 0, 0, 1, 1]);
        assert_eq!(oa.row(15), &[1, 1, 1, 1, 0]);
        for i in 0..16 {
            let row = oa.row(i);
            let lex: Vec<u8> = (0..4).map(|b| ((i >> (3 - b)) & 1) as u8).collect();
            assert_eq!(&row[..4], lex.as_slice());
            assert_eq!(row[4], row[..4].iter().sum::<u8>() % 2);
        }
        let recovered = LinearArraySpec::from_array(&oa).unwrap();
        assert_eq!(recovered.dimension(), 4);
    }

    #[test]
    fn bch_shapes() {
        for r in 3..=5 {
            let oa = build_bch_array(r).unwrap();
            assert_eq!(oa.runs(), 1 << (2 * r));
            assert_eq!(oa.factors(), (1 << r) - 1);
            assert_eq!(oa.index(), 1 << (2 * r - 4));
        }
        assert!(matches!(build_bch_array(2), Err(Error::DegreeOutOfRange(2))));
        assert!(matches!(build_bch_array(9), Err(Error::DegreeOutOfRange(9))));
    }

    #[test]
    fn bch_rows_are_sorted_and_distinct() {
        let oa = build_bch_array(3).unwrap();
        for i in 1..oa.runs() {
            assert!(oa.row(i - 1) < oa.row(i));
        }
        assert!(oa.row(0).iter().all(|&b| b == 0));
    }

    #[test]
    fn rao_values() {
        let seed = rao_check(5, 2, 4, 16).unwrap();
        assert_eq!(seed.bound, 16);
        assert!(seed.feasible && seed.tight);
        let exp = rao_check(35, 2, 4, 256).unwrap();
        assert_eq!(exp.bound, 631);
        assert!(!exp.feasible);
        let big = rao_check(255, 2, 4, 65536).unwrap();
        assert_eq!(big.bound, 32641);
        assert!(big.feasible);
        assert_eq!(rao_check(15, 2, 4, 256).unwrap().bound, 121);
        assert!(matches!(rao_check(5, 2, 3, 16), Err(Error::UnsupportedParameters(_))));
        assert!(matches!(rao_check(5, 3, 4, 81), Err(Error::UnsupportedParameters(_))));
    }

    #[test]
    fn sign_mapping() {
        let oa = OrthogonalArray::new(2, 3, 2, 1, vec![0, 1, 0, 0, 0, 0]).unwrap();
        let s: Vec<f64> = rows_to_signs(&oa);
        assert_eq!(&s[..3], &[1.0, -1.0, 1.0]);
        assert_eq!(&s[3..], &[1.0, 1.0, 1.0]);
        let t = OrthogonalArray::new(3, 3, 3, 1, vec![0, 1, 2, 1, 2, 0, 2, 0, 1]).unwrap();
        let s: Vec<f64> = rows_to_signs(&t);
        assert_eq!(&s[..3], &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn parity_second_moment_is_identity() {
        let oa = build_parity_seed();
        let s: Vec<f64> = rows_to_signs(&oa);
        for i in 0..5 {
            for j in 0..5 {
                let m: f64 = (0..16).map(|r| s[r * 5 + i] * s[r * 5 + j]).sum::<f64>() / 16.0;
                assert_eq!(m, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn invalid_arrays_rejected() {
        assert!(OrthogonalArray::new(2, 2, 2, 1, vec![0, 2, 0, 0]).is_err());
        assert!(OrthogonalArray::new(2, 2, 2, 1, vec![0, 1, 0]).is_err());
        assert!(OrthogonalArray::new(3, 2, 2, 1, vec![0; 6]).is_err());
        assert!(OrthogonalArray::new(4, 2, 2, 3, vec![0; 8]).is_err());
    }

    #[test]
    fn non_linear_seed_rejected() {
        let oa = build_parity_seed().without_row(3);
        assert!(matches!(LinearArraySpec::from_array(&oa), Err(Error::SeedNotLinear(_))));
        let dup = OrthogonalArray::new(2, 2, 2, 0, vec![0, 0, 0, 0]).unwrap();
        assert!(matches!(LinearArraySpec::from_array(&dup), Err(Error::SeedNotLinear(_))));
    }

    #[test]
    fn expansion_of_parity_seed() {
        let seed = LinearArraySpec::from_array(&build_parity_seed()).unwrap();
        let exp = expand_squared(&seed, &VerifyOptions::default()).unwrap();
        assert_eq!(exp.array.runs(), 256);
        assert_eq!(exp.array.factors(), 35);
        // [g_u; g_v] + [g_u; 0] + [0; g_v] = 0, so strength 3 fails.
        assert_eq!(exp.array.claimed_strength(), 2);
        let last = exp.reports.last().unwrap();
        assert_eq!(last.tested_strength, 3);
        assert!(!last.passed);
        assert!(last.witness.is_some());
        assert_eq!(exp.reports[0].tested_strength, 2);
        assert!(exp.reports[0].passed);
        assert!(!rao_check(35, 2, 4, 256).unwrap().feasible);
    }

    #[test]
    fn restrict_keeps_strength() {
        let oa = build_bch_array(4).unwrap().restrict_columns(10).unwrap();
        assert_eq!(oa.factors(), 10);
        assert_eq!(oa.claimed_strength(), 4);
        let rep = verify_strength(&oa, 4, &VerifyOptions::default()).unwrap();
        assert!(rep.passed);
    }
}
