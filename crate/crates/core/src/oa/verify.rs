//! Strength verification.
//!
//! Three methods: exhaustive tuple counting over every t-column subset,
//! the linear-rank test (every t generator columns independent), and a
//! sampled variant of either that can only refute strength.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::combin::{binomial, next_subset, unrank};
use super::{LinearArraySpec, OrthogonalArray};
use crate::error::{Error, Result};
use crate::gf2::rank_of_masks;

/// Cell-visit budget for exhaustive checks.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;
/// Number of random subsets drawn by the sampled method.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Subsets handled per parallel work item.
const CHUNK: u128 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMethod {
    Exhaustive,
    LinearRank,
    Sampled,
}

impl VerifyMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::LinearRank => "linear-rank",
            Self::Sampled => "sampled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub method: VerifyMethod,
    pub budget: u128,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            method: VerifyMethod::Exhaustive,
            budget: DEFAULT_BUDGET,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

impl VerifyOptions {
    pub fn with_method(method: VerifyMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// A column subset and a tuple whose multiplicity is wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub columns: Vec<usize>,
    pub tuple: Vec<u8>,
    pub count: usize,
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrengthReport {
    pub tested_strength: usize,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub method: VerifyMethod,
    /// Column subsets examined.
    pub subsets_checked: u128,
    /// For sampled runs: the sample count behind a "no violation found".
    pub samples: Option<usize>,
}

impl StrengthReport {
    fn from_witness(
        t: usize,
        method: VerifyMethod,
        witness: Option<Witness>,
        checked: u128,
        samples: Option<usize>,
    ) -> Self {
        Self {
            tested_strength: t,
            passed: witness.is_none(),
            witness,
            method,
            subsets_checked: checked,
            samples,
        }
    }

    /// `key = value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("tested_strength = {}\n", self.tested_strength));
        out.push_str(&format!("method = {}\n", self.method.name()));
        out.push_str(&format!("passed = {}\n", self.passed));
        out.push_str(&format!("subsets_checked = {}\n", self.subsets_checked));
        if let Some(n) = self.samples {
            out.push_str(&format!("samples = {n}\n"));
            if self.passed {
                out.push_str(&format!("note = no violation found in {n} samples\n"));
            }
        }
        if let Some(w) = &self.witness {
            let join = |v: &[String]| v.join(" ");
            out.push_str(&format!(
                "witness_columns = {}\n",
                join(&w.columns.iter().map(ToString::to_string).collect::<Vec<_>>())
            ));
            out.push_str(&format!(
                "witness_tuple = {}\n",
                join(&w.tuple.iter().map(ToString::to_string).collect::<Vec<_>>())
            ));
            out.push_str(&format!("witness_count = {}\n", w.count));
            out.push_str(&format!("witness_expected = {}\n", w.expected));
        }
        out
    }
}

/// Checks strength `t` with the method in `opts`.
pub fn verify_strength(array: &OrthogonalArray, t: usize, opts: &VerifyOptions) -> Result<StrengthReport> {
    let k = array.factors();
    if t == 0 || t > k {
        return Err(Error::InvalidArray(format!("strength {t} not in 1..={k}")));
    }
    match opts.method {
        VerifyMethod::Exhaustive => {
            let subsets = binomial(k as u64, t as u64);
            let needed = subsets * array.runs() as u128;
            if needed > opts.budget {
                return Err(Error::BudgetExceeded {
                    needed,
                    budget: opts.budget,
                });
            }
            let w = first_failure(k, t, subsets, |cols| tuple_failure(array, cols));
            Ok(StrengthReport::from_witness(t, opts.method, w, subsets, None))
        }
        VerifyMethod::LinearRank => {
            let spec = array.linear_spec().ok_or_else(|| {
                Error::UnsupportedParameters("linear-rank test needs a generator matrix".into())
            })?;
            linear_rank(spec, t, opts)
        }
        VerifyMethod::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let subsets: Vec<Vec<usize>> = (0..opts.samples).map(|_| random_subset(&mut rng, k, t)).collect();
            let w = subsets.par_iter().find_map_first(|cols| match array.linear_spec() {
                Some(spec) => rank_failure(spec, cols, array.runs()),
                None => tuple_failure(array, cols),
            });
            Ok(StrengthReport::from_witness(
                t,
                opts.method,
                w,
                opts.samples as u128,
                Some(opts.samples),
            ))
        }
    }
}

/// Linear-rank test directly on a generator: exhaustive within budget
/// (cost `C(k,t)·t`), otherwise an error unless `opts.method` is sampled.
pub fn verify_linear(spec: &LinearArraySpec, t: usize, opts: &VerifyOptions) -> Result<StrengthReport> {
    linear_rank(spec, t, opts)
}

fn linear_rank(spec: &LinearArraySpec, t: usize, opts: &VerifyOptions) -> Result<StrengthReport> {
    let k = spec.factors();
    if t == 0 || t > k {
        return Err(Error::InvalidArray(format!("strength {t} not in 1..={k}")));
    }
    let runs = 1usize.checked_shl(spec.dimension() as u32).unwrap_or(0);
    if opts.method == VerifyMethod::Sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let subsets: Vec<Vec<usize>> = (0..opts.samples).map(|_| random_subset(&mut rng, k, t)).collect();
        let w = subsets.par_iter().find_map_first(|cols| rank_failure(spec, cols, runs));
        return Ok(StrengthReport::from_witness(
            t,
            VerifyMethod::Sampled,
            w,
            opts.samples as u128,
            Some(opts.samples),
        ));
    }
    let subsets = binomial(k as u64, t as u64);
    let needed = subsets * t as u128;
    if needed > opts.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: opts.budget,
        });
    }
    let w = first_failure(k, t, subsets, |cols| rank_failure(spec, cols, runs));
    Ok(StrengthReport::from_witness(t, VerifyMethod::LinearRank, w, subsets, None))
}

/// Largest strength `t ≤ max_t` passing the exhaustive linear-rank test,
/// with the report of every strength attempted. Stops at the first failure
/// or at the first strength that only a sampled run could examine.
pub fn measured_linear_strength(
    spec: &LinearArraySpec,
    max_t: usize,
    opts: &VerifyOptions,
) -> Result<(usize, Vec<StrengthReport>)> {
    let mut reports = Vec::new();
    let mut verified = 0;
    for t in 1..=max_t.min(spec.factors()) {
        let exhaustive = VerifyOptions {
            method: VerifyMethod::LinearRank,
            ..opts.clone()
        };
        match linear_rank(spec, t, &exhaustive) {
            Ok(rep) => {
                let passed = rep.passed;
                if t >= 2 {
                    reports.push(rep);
                }
                if !passed {
                    break;
                }
                verified = t;
            }
            Err(Error::BudgetExceeded { .. }) => {
                let sampled = VerifyOptions {
                    method: VerifyMethod::Sampled,
                    ..opts.clone()
                };
                reports.push(linear_rank(spec, t, &sampled)?);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((verified, reports))
}

/// Lexicographically first failing subset, scanning chunks in parallel.
fn first_failure<F>(k: usize, t: usize, subsets: u128, check: F) -> Option<Witness>
where
    F: Fn(&[usize]) -> Option<Witness> + Sync,
{
    let chunks = subsets.div_ceil(CHUNK);
    let chunks = u64::try_from(chunks).expect("chunk count fits in u64");
    (0..chunks).into_par_iter().find_map_first(|c| {
        let start = u128::from(c) * CHUNK;
        let end = (start + CHUNK).min(subsets);
        let mut cols = unrank(start, k, t);
        for i in start..end {
            if let Some(w) = check(&cols) {
                return Some(w);
            }
            if i + 1 < end {
                next_subset(&mut cols, k);
            }
        }
        None
    })
}

fn tuple_failure(array: &OrthogonalArray, cols: &[usize]) -> Option<Witness> {
    let s = array.levels();
    let t = cols.len();
    let cells = s.pow(t as u32);
    let mut counts = vec![0usize; cells];
    for i in 0..array.runs() {
        let row = array.row(i);
        let idx = cols.iter().fold(0usize, |acc, &c| acc * s + usize::from(row[c]));
        counts[idx] += 1;
    }
    // Nearest multiplicity, so a single missing row points at its own tuple.
    let expected = (array.runs() + cells / 2) / cells;
    let bad = counts.iter().position(|&c| c != expected)?;
    let mut tuple = vec![0u8; t];
    let mut rest = bad;
    for slot in (0..t).rev() {
        tuple[slot] = (rest % s) as u8;
        rest /= s;
    }
    Some(Witness {
        columns: cols.to_vec(),
        tuple,
        count: counts[bad],
        expected,
    })
}

/// A dependent column subset leaves some tuple unrealized: if `Σ_{c∈D} g_c = 0`
/// every codeword has even weight on `D`, so the indicator of `D`'s first
/// column never occurs.
fn rank_failure(spec: &LinearArraySpec, cols: &[usize], runs: usize) -> Option<Witness> {
    let masks: Vec<u64> = cols.iter().map(|&c| spec.column_masks()[c]).collect();
    if rank_of_masks(&masks) == cols.len() {
        return None;
    }
    let t = cols.len();
    let dependent = (1u32..1 << t)
        .filter(|sub| {
            (0..t)
                .filter(|&i| sub >> i & 1 == 1)
                .fold(0u64, |acc, i| acc ^ masks[i])
                == 0
        })
        .min_by_key(|sub| (sub.count_ones(), sub.reverse_bits()))
        .expect("rank deficit implies a dependency");
    let first = dependent.trailing_zeros() as usize;
    let mut tuple = vec![0u8; t];
    tuple[first] = 1;
    Some(Witness {
        columns: cols.to_vec(),
        tuple,
        count: 0,
        expected: runs >> t,
    })
}

fn random_subset(rng: &mut ChaCha8Rng, k: usize, t: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::with_capacity(t);
    while picked.len() < t {
        let c = rng.random_range(0..k);
        if !picked.contains(&c) {
            picked.push(c);
        }
    }
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::super::{build_bch_array, build_parity_seed, OrthogonalArray};
    use super::*;

    fn full_factorial(k: usize) -> OrthogonalArray {
        let entries = (0..1usize << k)
            .flat_map(|x| (0..k).map(move |b| ((x >> (k - 1 - b)) & 1) as u8))
            .collect();
        OrthogonalArray::new(1 << k, k, 2, k, entries).unwrap()
    }

    #[test]
    fn full_factorial_passes() {
        let rep = verify_strength(&full_factorial(4), 4, &VerifyOptions::default()).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.subsets_checked, 1);
    }

    #[test]
    fn parity_seed_and_monotonicity() {
        let oa = build_parity_seed();
        for t in 1..=4 {
            for method in [VerifyMethod::Exhaustive, VerifyMethod::LinearRank] {
                let rep = verify_strength(&oa, t, &VerifyOptions::with_method(method)).unwrap();
                assert!(rep.passed, "t={t} {method:?}");
                assert!(rep.witness.is_none());
            }
        }
        let rep = verify_strength(&oa, 4, &VerifyOptions::default()).unwrap();
        assert_eq!(rep.subsets_checked, 5);
        // All five columns: the parity relation makes half the tuples vanish.
        let rep = verify_strength(&oa, 5, &VerifyOptions::default()).unwrap();
        assert!(!rep.passed);
        let lin = verify_strength(&oa, 5, &VerifyOptions::with_method(VerifyMethod::LinearRank)).unwrap();
        assert!(!lin.passed);
        assert_eq!(lin.witness.as_ref().unwrap().count, 0);
    }

    #[test]
    fn deleted_row_fails_with_witness() {
        let oa = build_parity_seed();
        for i in 0..16 {
            let broken = oa.without_row(i);
            let rep = verify_strength(&broken, 4, &VerifyOptions::default()).unwrap();
            assert!(!rep.passed);
            let w = rep.witness.unwrap();
            assert_eq!(w.columns, vec![0, 1, 2, 3]);
        }
        // Row 5 = (0,1,0,1,0): its prefix is the tuple that went missing.
        let w = verify_strength(&oa.without_row(5), 4, &VerifyOptions::default())
            .unwrap()
            .witness
            .unwrap();
        assert_eq!(w.tuple, vec![0, 1, 0, 1]);
        assert_eq!((w.count, w.expected), (0, 1));
    }

    #[test]
    fn linear_and_exhaustive_agree() {
        for oa in [build_parity_seed(), build_bch_array(3).unwrap(), build_bch_array(4).unwrap()] {
            for t in 1..=5.min(oa.factors()) {
                let a = verify_strength(&oa, t, &VerifyOptions::default()).unwrap();
                let b = verify_strength(&oa, t, &VerifyOptions::with_method(VerifyMethod::LinearRank))
                    .unwrap();
                assert_eq!(a.passed, b.passed, "t={t}, k={}", oa.factors());
                assert_eq!(a.witness.map(|w| w.columns), b.witness.as_ref().map(|w| w.columns.clone()));
                if let Some(w) = b.witness {
                    // The rank witness tuple really is missing.
                    let hits = (0..oa.runs())
                        .filter(|&i| w.columns.iter().zip(&w.tuple).all(|(&c, &v)| oa.get(i, c) == v))
                        .count();
                    assert_eq!(hits, 0);
                }
            }
        }
    }

    #[test]
    fn bch_strength_four_exact() {
        // At r = 4 the code has minimum distance exactly 5, so strength is
        // exactly 4. (At r = 3 it degenerates to the repetition code.)
        let oa = build_bch_array(4).unwrap();
        assert!(verify_strength(&oa, 4, &VerifyOptions::default()).unwrap().passed);
        assert!(!verify_strength(&oa, 5, &VerifyOptions::default()).unwrap().passed);
        let r5 = build_bch_array(5).unwrap();
        let rep = verify_strength(&r5, 4, &VerifyOptions::with_method(VerifyMethod::LinearRank)).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.subsets_checked, 31465);
    }

    #[test]
    fn budget_is_enforced() {
        let oa = build_bch_array(5).unwrap();
        let opts = VerifyOptions {
            budget: 1000,
            ..VerifyOptions::default()
        };
        assert!(matches!(
            verify_strength(&oa, 4, &opts),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sampled_reports_sample_count_and_refutes() {
        let oa = build_bch_array(4).unwrap();
        let opts = VerifyOptions {
            method: VerifyMethod::Sampled,
            samples: 500,
            ..VerifyOptions::default()
        };
        let rep = verify_strength(&oa, 4, &opts).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.samples, Some(500));
        let bad = verify_strength(&build_parity_seed().without_row(0), 4, &opts).unwrap();
        assert!(!bad.passed);
        assert!(rep.to_key_values().contains("no violation found in 500 samples"));
    }
}
