//! Phase-transition sweeps and random-bit accounting.
//!
//! Every trial owns the seed `derive_seed(derive_seed(base, s), trial)`;
//! its matrix, signal and noise use child streams 0, 1 and 2. Trials run in
//! parallel and are reported in `(s, trial)` order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{fmt_float, sample_matrix, EnsembleKind, MeasurementEnsemble};
use crate::error::{Error, Result};
use crate::oa::{build_bch_array, build_parity_seed, expand_squared, read_array, LinearArraySpec, OrthogonalArray, VerifyOptions};
use crate::rng::{complex_gaussian, derive_seed, gaussian, rng_from};
use crate::scalar::norm2;
use crate::solver::{bpdn, nmse, SolverOptions, SparseSignal};

/// NMSE at or below which a trial counts as exact recovery.
pub const SUCCESS_NMSE: f64 = 1e-8;

pub const CSV_HEADER: &str = "s,trial,seed,nmse,success,iters,bits";
pub const SUMMARY_HEADER: &str = "s,trials,mean_nmse,success_rate,errors";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalModel {
    RealGaussian,
    ComplexGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol_feas")]
    pub tol_feas: f64,
    #[serde(default = "default_tol_change")]
    pub tol_change: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol_feas() -> f64 {
    1e-7
}
fn default_tol_change() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    50_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_feas: default_tol_feas(),
            tol_change: default_tol_change(),
            max_iter: default_max_iter(),
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions<f64> {
        SolverOptions {
            tol_feas: self.tol_feas,
            tol_change: self.tol_change,
            max_iter: self.max_iter,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(with = "kind_serde")]
    pub kind: EnsembleKind,
    /// OA construction (`parity16`, `bch:<r>`, `expand:<seedfile>`, or an
    /// array file path); defaults to the smallest array with `n` columns.
    #[serde(default)]
    pub construction: Option<String>,
    pub n: usize,
    pub m: usize,
    pub sparsity_grid: Vec<usize>,
    pub trials: usize,
    /// Noise norm; `0` means noiseless basis pursuit.
    #[serde(default)]
    pub eta: f64,
    pub signal_model: SignalModel,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
}

mod kind_serde {
    use super::EnsembleKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &EnsembleKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(k.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<EnsembleKind, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Self::from_json(&std::fs::read_to_string(path)?)?;
        // Relative array paths resolve against the config's directory.
        if let (Some(cons), Some(dir)) = (c.construction.as_mut(), path.parent()) {
            *cons = resolve_construction(cons, dir);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config("n and m must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sparsity_grid.is_empty() {
            return Err(Error::Config("sparsity_grid is empty".into()));
        }
        if let Some(&s) = self.sparsity_grid.iter().find(|&&s| s > self.n) {
            return Err(Error::SparsityTooLarge { s, n: self.n });
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::Config(format!("eta = {} must be finite and >= 0", self.eta)));
        }
        if self.solver.max_iter == 0 {
            return Err(Error::Config("solver.max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

fn resolve_construction(cons: &str, dir: &Path) -> String {
    let rel = |p: &str| -> String {
        let path = Path::new(p);
        if path.is_relative() && !dir.as_os_str().is_empty() {
            dir.join(path).to_string_lossy().into_owned()
        } else {
            p.to_string()
        }
    };
    match cons.split_once(':') {
        Some(("expand", p)) => format!("expand:{}", rel(p)),
        Some(("file", p)) => format!("file:{}", rel(p)),
        _ => cons.to_string(),
    }
}

/// Builds a binary array from a construction string: `parity16`,
/// `bch:<r>`, `expand:<seedfile>` or `file:<arrayfile>`.
pub fn build_array(construction: &str, opts: &VerifyOptions) -> Result<OrthogonalArray> {
    match construction.split_once(':') {
        None if construction == "parity16" => Ok(build_parity_seed()),
        Some(("bch", r)) => {
            let r: u32 = r
                .parse()
                .map_err(|_| Error::Config(format!("bad BCH degree `{r}`")))?;
            build_bch_array(r)
        }
        Some(("expand", path)) => {
            let seed = read_array_file(Path::new(path))?;
            let spec = LinearArraySpec::from_array(&seed)?;
            Ok(expand_squared(&spec, opts)?.array)
        }
        Some(("file", path)) => read_array_file(Path::new(path)),
        _ => Err(Error::Config(format!("unknown construction `{construction}`"))),
    }
}

fn read_array_file(path: &Path) -> Result<OrthogonalArray> {
    read_array(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Smallest built-in array with at least `n` columns.
pub fn default_oa_construction(n: usize) -> Result<String> {
    if n <= 5 {
        return Ok("parity16".into());
    }
    (3..=8u32)
        .find(|&r| (1usize << r) > n)
        .map(|r| format!("bch:{r}"))
        .ok_or_else(|| Error::UnsupportedParameters(format!("no built-in sign array with {n} columns")))
}

/// The ensemble a config samples from (OA arrays cut to their first `n`
/// columns).
pub fn build_ensemble(config: &ExperimentConfig) -> Result<MeasurementEnsemble<f64>> {
    let n = config.n;
    match config.kind {
        EnsembleKind::OaSigns => {
            let cons = match &config.construction {
                Some(c) => c.clone(),
                None => default_oa_construction(n)?,
            };
            let array = build_array(&cons, &VerifyOptions::default())?;
            if array.factors() < n {
                return Err(Error::UnsupportedParameters(format!(
                    "`{cons}` has {} columns, need {n}",
                    array.factors()
                )));
            }
            MeasurementEnsemble::oa_signs(array.restrict_columns(n)?)
        }
        EnsembleKind::Alltop => MeasurementEnsemble::alltop(n),
        EnsembleKind::FourierRows => MeasurementEnsemble::fourier(n),
        kind => MeasurementEnsemble::generic(kind, n),
    }
}

/// Support: the first `s` entries of a seeded uniform permutation of
/// `0..n`; values i.i.d. standard (real or complex) normal.
pub fn gen_signal(n: usize, s: usize, model: SignalModel, seed: u64) -> Result<SparseSignal<f64>> {
    if s > n {
        return Err(Error::SparsityTooLarge { s, n });
    }
    let mut rng = rng_from(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm.truncate(s);
    let values = (0..s)
        .map(|_| match model {
            SignalModel::RealGaussian => Complex::new(gaussian(&mut rng), 0.0),
            SignalModel::ComplexGaussian => complex_gaussian(&mut rng),
        })
        .collect();
    SparseSignal::new(n, perm, values)
}

/// Seeded Gaussian vector rescaled to norm exactly `eta` (real when `real`).
pub fn noise_vector(m: usize, eta: f64, real: bool, seed: u64) -> Vec<Complex<f64>> {
    if eta == 0.0 || m == 0 {
        return vec![Complex::new(0.0, 0.0); m];
    }
    let mut rng = rng_from(seed);
    let mut e: Vec<Complex<f64>> = (0..m)
        .map(|_| {
            if real {
                Complex::new(gaussian(&mut rng), 0.0)
            } else {
                complex_gaussian(&mut rng)
            }
        })
        .collect();
    let norm = norm2(&e);
    e.iter_mut().for_each(|v| *v *= eta / norm);
    e
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub s: usize,
    pub trial: usize,
    pub seed: u64,
    /// `None` when the trial failed with an error.
    pub nmse: Option<f64>,
    pub success: bool,
    pub iterations: usize,
    /// `None` for unbounded (Gaussian) rows.
    pub bits: Option<u64>,
    pub error: Option<String>,
}

pub fn trial_seed(base: u64, s: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(base, s as u64), trial as u64)
}

/// One trial on a prepared ensemble.
pub fn run_trial(config: &ExperimentConfig, ens: &MeasurementEnsemble<f64>, s: usize, trial: usize) -> TrialRecord {
    let seed = trial_seed(config.seed, s, trial);
    let bits = ens.bits_per_row().map(|b| b * config.m as u64);
    let mut rec = TrialRecord {
        s,
        trial,
        seed,
        nmse: None,
        success: false,
        iterations: 0,
        bits,
        error: None,
    };
    let outcome = (|| -> Result<(f64, usize)> {
        let sample = sample_matrix(ens, config.m, derive_seed(seed, 0))?;
        let x = gen_signal(config.n, s, config.signal_model, derive_seed(seed, 1))?.to_dense();
        let mut y = sample.a.mul_vec(&x);
        let real = sample.a.is_real() && config.signal_model == SignalModel::RealGaussian;
        let e = noise_vector(config.m, config.eta, real, derive_seed(seed, 2));
        y.iter_mut().zip(&e).for_each(|(a, b)| *a += b);
        let r = bpdn(&sample.a, &y, config.eta, &config.solver.options())?;
        Ok((nmse(&x, &r.z_sharp)?, r.iterations))
    })();
    match outcome {
        Ok((err, iters)) => {
            rec.nmse = Some(err);
            rec.success = err <= SUCCESS_NMSE;
            rec.iterations = iters;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub s: usize,
    pub trials: usize,
    /// Mean over trials without errors; `None` if every trial failed.
    pub mean_nmse: Option<f64>,
    pub success_rate: f64,
    pub errors: usize,
}

#[derive(Debug, Clone)]
pub struct PhaseTransition {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

pub fn run_phase_transition(config: &ExperimentConfig) -> Result<PhaseTransition> {
    config.validate()?;
    let ens = build_ensemble(config)?;
    let work: Vec<(usize, usize)> = config
        .sparsity_grid
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let mut records: Vec<TrialRecord> = work.par_iter().map(|&(s, t)| run_trial(config, &ens, s, t)).collect();
    records.sort_by_key(|r| (r.s, r.trial));
    let summary = summarize(&records);
    Ok(PhaseTransition { records, summary })
}

pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    records
        .chunk_by(|a, b| a.s == b.s)
        .map(|group| {
            let ok: Vec<f64> = group.iter().filter_map(|r| r.nmse).collect();
            let mean = (!ok.is_empty()).then(|| crate::scalar::csum(ok.iter().copied()) / ok.len() as f64);
            SummaryRow {
                s: group[0].s,
                trials: group.len(),
                mean_nmse: mean,
                success_rate: group.iter().filter(|r| r.success).count() as f64 / group.len() as f64,
                errors: group.iter().filter(|r| r.error.is_some()).count(),
            }
        })
        .collect()
}

fn opt_float(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), fmt_float)
}

fn opt_bits(v: Option<u64>) -> String {
    v.map_or_else(|| "inf".to_string(), |b| b.to_string())
}

pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.s,
            r.trial,
            r.seed,
            opt_float(r.nmse),
            u8::from(r.success),
            r.iterations,
            opt_bits(r.bits)
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.s,
            r.trials,
            opt_float(r.mean_nmse),
            fmt_float(r.success_rate),
            r.errors
        );
    }
    out
}

/// `foo.csv` → `foo.summary.csv`.
pub fn summary_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.summary.csv"))
}

/// One row of a bit-accounting table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    pub kind: EnsembleKind,
    pub n: usize,
    pub m: usize,
    /// Population size `M` (finite kinds).
    pub population: Option<u128>,
    pub bits_per_row: Option<u64>,
    /// `m · bits_per_row`; `None` when unbounded.
    pub bits: Option<u64>,
}

/// `M` for a finite kind at dimension `n` (OA signs use the default
/// construction unless one is given).
pub fn population_size(kind: EnsembleKind, n: usize, construction: Option<&str>) -> Result<Option<u128>> {
    Ok(match kind {
        EnsembleKind::Alltop => Some((n as u128) * (n as u128)),
        EnsembleKind::FourierRows => Some(n as u128),
        EnsembleKind::OaSigns => {
            let cons = match construction {
                Some(c) => c.to_string(),
                None => default_oa_construction(n)?,
            };
            let runs = match cons.split_once(':') {
                Some(("bch", r)) => {
                    let r: u32 = r.parse().map_err(|_| Error::Config(format!("bad BCH degree `{r}`")))?;
                    1u128 << (2 * r)
                }
                None if cons == "parity16" => 16,
                _ => build_array(&cons, &VerifyOptions::default())?.runs() as u128,
            };
            Some(runs)
        }
        _ => None,
    })
}

pub fn bit_row(kind: EnsembleKind, n: usize, m: usize, construction: Option<&str>) -> Result<BitRow> {
    let population = population_size(kind, n, construction)?;
    let bits_per_row = match (population, kind) {
        (Some(p), _) => Some(ceil_log2_u128(p)),
        (None, EnsembleKind::Bernoulli) => Some(n as u64),
        (None, _) => None,
    };
    Ok(BitRow {
        kind,
        n,
        m,
        population,
        bits_per_row,
        bits: bits_per_row.map(|b| b * m as u64),
    })
}

fn ceil_log2_u128(p: u128) -> u64 {
    if p <= 1 {
        0
    } else {
        u64::from(128 - (p - 1).leading_zeros())
    }
}

/// Bit accounting for `(kind, n, m)` queries.
pub fn bit_table(queries: &[(EnsembleKind, usize, usize)]) -> Result<Vec<BitRow>> {
    queries.iter().map(|&(k, n, m)| bit_row(k, n, m, None)).collect()
}

pub fn bit_table_csv(rows: &[BitRow]) -> String {
    let mut out = String::from("kind,n,m,population,bits_per_row,bits\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.kind,
            r.n,
            r.m,
            r.population.map_or_else(|| "inf".to_string(), |p| p.to_string()),
            opt_bits(r.bits_per_row),
            opt_bits(r.bits)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::bits_for_population;

    fn config(kind: EnsembleKind, n: usize, m: usize) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            construction: None,
            n,
            m,
            sparsity_grid: vec![1, 2],
            trials: 3,
            eta: 0.0,
            signal_model: SignalModel::RealGaussian,
            seed: 7,
            solver: SolverConfig::default(),
        }
    }

    #[test]
    fn signal_shapes() {
        let z = gen_signal(10, 0, SignalModel::RealGaussian, 1).unwrap();
        assert!(z.to_dense().iter().all(|c| c.norm() == 0.0));
        let full = gen_signal(10, 10, SignalModel::ComplexGaussian, 1).unwrap();
        let mut sup = full.support.clone();
        sup.sort_unstable();
        assert_eq!(sup, (0..10).collect::<Vec<_>>());
        assert_eq!(
            gen_signal(10, 4, SignalModel::RealGaussian, 9).unwrap(),
            gen_signal(10, 4, SignalModel::RealGaussian, 9).unwrap()
        );
        assert!(matches!(
            gen_signal(3, 4, SignalModel::RealGaussian, 1),
            Err(Error::SparsityTooLarge { s: 4, n: 3 })
        ));
    }

    #[test]
    fn noise_has_exact_norm() {
        let e = noise_vector(20, 0.125, false, 4);
        assert!((norm2(&e) - 0.125).abs() < 1e-15);
        assert!(noise_vector(5, 1.0, true, 4).iter().all(|c| c.im == 0.0));
    }

    #[test]
    fn sweep_cardinality_and_determinism() {
        let c = config(EnsembleKind::OaSigns, 15, 10);
        let a = run_phase_transition(&c).unwrap();
        assert_eq!(a.records.len(), 6);
        assert_eq!(a.summary.len(), 2);
        let b = run_phase_transition(&c).unwrap();
        assert_eq!(records_csv(&a.records), records_csv(&b.records));
        assert!(records_csv(&a.records).starts_with("s,trial,seed,nmse,success,iters,bits\n"));
        for r in &a.records {
            assert_eq!(r.bits, Some(8 * 10));
        }
    }

    #[test]
    fn config_json() {
        let text = r#"{"kind":"alltop","n":7,"m":5,"sparsity_grid":[1],"trials":2,
            "signal_model":"complex-gaussian","seed":3,"solver":{"max_iter":100}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.kind, EnsembleKind::Alltop);
        assert_eq!(c.eta, 0.0);
        assert_eq!(c.solver.max_iter, 100);
        assert_eq!(c.solver.tol_feas, 1e-7);
        assert!(ExperimentConfig::from_json(&text.replace("\"n\":7", "\"n\":0")).is_err());
        assert!(ExperimentConfig::from_json(&text.replace("alltop", "nope")).is_err());
        assert!(ExperimentConfig::from_json(&text.replace("[1]", "[8]")).is_err());
    }

    #[test]
    fn bit_rows() {
        let rows = bit_table(&[
            (EnsembleKind::Alltop, 1021, 255),
            (EnsembleKind::Bernoulli, 1021, 255),
            (EnsembleKind::GaussianComplex, 1021, 255),
            (EnsembleKind::Alltop, 1021, 0),
            (EnsembleKind::OaSigns, 255, 64),
        ])
        .unwrap();
        assert_eq!(rows[0].bits, Some(5100));
        assert_eq!(rows[1].bits, Some(260_355));
        assert_eq!(rows[2].bits, None);
        assert_eq!(rows[3].bits, Some(0));
        assert_eq!(rows[4].bits, Some(64 * 16));
        assert_eq!(ceil_log2_u128(1021 * 1021), bits_for_population(1021 * 1021));
        let csv = bit_table_csv(&rows);
        assert!(csv.contains("alltop,1021,255,1042441,20,5100\n"));
        assert!(csv.contains("gaussian-complex,1021,255,inf,inf,inf\n"));
    }

    #[test]
    fn summary_file_name() {
        assert_eq!(summary_path(Path::new("out/run.csv")), PathBuf::from("out/run.summary.csv"));
    }
}
