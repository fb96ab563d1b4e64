use std::fs;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use csd_core::bench::{
    bit_row, bit_table_csv, build_array, records_csv, run_phase_transition, summary_csv, summary_path,
    ExperimentConfig,
};
use csd_core::ensemble::{
    check_moments, estimate_q, estimate_w, pz_lower, small_ball_probes, EnsembleKind, KeyValues, SmallBallReport,
};
use csd_core::io::{load_matrix, load_vector, meta_path, read_key_values, save_matrix, save_vector, write_key_values};
use csd_core::linalg::CMatrix;
use csd_core::mub::{build_alltop_family, verify_2design, MubFamily};
use csd_core::oa::{
    rao_check, read_array, verify_linear, verify_strength, write_array, LinearArraySpec, OrthogonalArray,
    VerifyMethod, VerifyOptions,
};
use csd_core::rng::{complex_test_vectors, derive_seed, standard_basis};
use csd_core::solver::{bpdn, SolverOptions};
use csd_core::{Ensemble, Error, Result};

#[derive(Parser)]
#[command(name = "csd", version, about = "Derandomized compressed sensing toolkit")]
struct Cli {
    /// Base seed for every randomized step (default 0; `bench` defaults to
    /// the config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an orthogonal array and write it in text form.
    GenOa {
        /// `parity16`, `bch:<r>` or `expand:<seedfile>`.
        #[arg(long)]
        construction: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the Alltop family of prime dimension `n` as a matrix file.
    GenMub {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Append the standard basis (all `n + 1` bases).
        #[arg(long)]
        include_standard: bool,
    },
    /// Check the strength of an array file.
    Verify {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        strength: usize,
        #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
        method: Method,
        /// Subsets drawn by the sampled method.
        #[arg(long, default_value_t = csd_core::oa::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact moment and small-ball diagnostics of a row population.
    Moments(MomentsArgs),
    /// Solve basis pursuit (or BPDN with `--eta`).
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        /// Feasibility tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 50_000)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a phase-transition sweep from a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Per-trial CSV; the summary goes next to it as `<stem>.summary.csv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Random-bit table for one or more ensemble kinds.
    Bits {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Kinds to tabulate (default: all).
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exhaustive,
    Linear,
    Sampled,
}

#[derive(Args)]
struct MomentsArgs {
    /// Array file, matrix file, or a kind (`alltop`, `oa-signs`, `fourier-rows`).
    #[arg(long)]
    family: String,
    /// Dimension when `--family` names a kind.
    #[arg(long)]
    n: Option<usize>,
    /// Array construction for `oa-signs`.
    #[arg(long)]
    construction: Option<String>,
    /// Random complex test vectors (the standard basis is always included).
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Sparsity for the small-ball estimates; omitted skips them.
    #[arg(long)]
    s: Option<usize>,
    /// Rows per draw for the W estimate (default `10·s`).
    #[arg(long)]
    m: Option<usize>,
    /// Base level ξ₀; Q is evaluated at `2^{3/2}·ξ₀`.
    #[arg(long, default_value_t = 0.25)]
    xi: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("CSD_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("CSD_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::GenOa { construction, out } => gen_oa(&construction, &out, seed),
        Command::GenMub { n, out, include_standard } => gen_mub(n, &out, include_standard),
        Command::Verify {
            file,
            strength,
            method,
            samples,
            out,
        } => verify(&file, strength, method, samples, seed, out.as_deref()),
        Command::Moments(args) => moments(&args, seed),
        Command::Recover {
            matrix,
            y,
            eta,
            tol,
            max_iter,
            out,
        } => recover(&matrix, &y, eta, tol, max_iter, &out),
        Command::Bench { config, out } => bench(&config, &out, cli.seed),
        Command::Bits { n, m, kinds, out } => bits(n, m, &kinds, out.as_deref()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_array(path: &Path) -> Result<OrthogonalArray> {
    read_array(BufReader::new(fs::File::open(path)?))
}

fn gen_oa(construction: &str, out: &Path, seed: u64) -> Result<ExitCode> {
    let opts = VerifyOptions { seed, ..VerifyOptions::default() };
    let mut array = build_array(construction, &opts)?;
    if construction.starts_with("expand:") {
        // Record the strength-4 run bound next to the measured strength.
        let rao = rao_check(array.factors(), 2, 4, array.runs())?;
        array = array.with_provenance(format!(
            "rao bound for strength 4: {} runs needed, {} present ({})",
            rao.bound,
            rao.runs,
            if rao.feasible { "feasible" } else { "infeasible" }
        ));
    }
    let file = fs::File::create(out)?;
    write_array(&array, std::io::BufWriter::new(file))?;
    println!(
        "wrote OA({}, {}, {}, {}) to {}",
        array.runs(),
        array.factors(),
        array.levels(),
        array.claimed_strength(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn gen_mub(n: usize, out: &Path, include_standard: bool) -> Result<ExitCode> {
    let family = build_alltop_family::<f64>(n)?;
    let mut data = Vec::with_capacity((family.len() + n) * n);
    for i in 0..family.len() {
        data.extend(family.vector_at(i));
    }
    let scale = (n as f64).sqrt();
    if include_standard {
        for e in standard_basis::<f64>(n) {
            data.extend(e.into_iter().map(|c| c * scale));
        }
    }
    let rows = data.len() / n;
    save_matrix(&CMatrix::from_vec(rows, n, data), out)?;
    let mut meta = KeyValues::default();
    meta.push("construction", if include_standard { "alltop+standard" } else { "alltop" });
    meta.push("n", n);
    meta.push("alpha-range", format!("0..{}", n - 1));
    meta.push("normalization", "sqrt-n");
    write_key_values(&meta, &meta_path(out))?;
    println!("wrote {rows} vectors of dimension {n} to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn verify(
    file: &Path,
    strength: usize,
    method: Method,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let array = load_array(file)?;
    let method = match method {
        Method::Exhaustive => VerifyMethod::Exhaustive,
        Method::Linear => VerifyMethod::LinearRank,
        Method::Sampled => VerifyMethod::Sampled,
    };
    let opts = VerifyOptions {
        method,
        samples,
        seed,
        ..VerifyOptions::default()
    };
    let report = match method {
        VerifyMethod::LinearRank => verify_linear(&LinearArraySpec::from_array(&array)?, strength, &opts)?,
        _ => verify_strength(&array, strength, &opts)?,
    };
    let mut text = format!(
        "array = OA({}, {}, {}, {})\n",
        array.runs(),
        array.factors(),
        array.levels(),
        array.claimed_strength()
    );
    text.push_str(&report.to_key_values());
    emit(&text, out)?;
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

/// What `--family` resolved to.
enum Family {
    Rows(Ensemble),
    /// Alltop plus the standard basis: checked as a design, not a row law.
    Design(MubFamily<f64>),
}

fn is_matrix_file(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 4];
    let mut f = fs::File::open(path)?;
    Ok(f.read(&mut magic)? == 4 && &magic == csd_core::io::MAGIC)
}

fn resolve_family(args: &MomentsArgs) -> Result<Family> {
    let path = Path::new(&args.family);
    if let Ok(kind) = args.family.parse::<EnsembleKind>() {
        let n = args
            .n
            .ok_or_else(|| Error::Config(format!("--n is required for --family {kind}")))?;
        return Ok(Family::Rows(match kind {
            EnsembleKind::Alltop => Ensemble::alltop(n)?,
            EnsembleKind::FourierRows => Ensemble::fourier(n)?,
            EnsembleKind::OaSigns => {
                let cons = match &args.construction {
                    Some(c) => c.clone(),
                    None => csd_core::bench::default_oa_construction(n)?,
                };
                let array = build_array(&cons, &VerifyOptions::default())?;
                Ensemble::oa_signs(array.restrict_columns(n.min(array.factors()))?)?
            }
            other => return Err(Error::UnsupportedKind(format!("{other} has no finite population"))),
        }));
    }
    if !path.exists() {
        return Err(Error::Config(format!("`{}` is neither a kind nor a file", args.family)));
    }
    if !is_matrix_file(path)? {
        return Ok(Family::Rows(Ensemble::oa_signs(load_array(path)?)?));
    }
    let rows: CMatrix<f64> = load_matrix(path)?;
    let meta = read_key_values(&meta_path(path)).unwrap_or_default();
    let n = rows.cols();
    let rows = match meta.get("normalization") {
        Some("unit") => rows.scaled((n as f64).sqrt()),
        _ => rows,
    };
    match meta.get("construction") {
        Some("alltop+standard") => {
            let scale = 1.0 / (n as f64).sqrt();
            let bases = (0..rows.rows() / n)
                .map(|b| (0..n).map(|i| rows.row(b * n + i).iter().map(|c| c * scale).collect()).collect())
                .collect();
            Ok(Family::Design(MubFamily::new(n, bases, true)?))
        }
        Some("alltop") => Ok(Family::Rows(Ensemble::from_rows(EnsembleKind::Alltop, rows)?)),
        _ => Ok(Family::Rows(Ensemble::from_rows(EnsembleKind::FourierRows, rows)?)),
    }
}

fn moments(args: &MomentsArgs, seed: u64) -> Result<ExitCode> {
    let family = resolve_family(args)?;
    let ens = match family {
        Family::Design(f) => {
            let mut text = String::new();
            for r in verify_2design(&f, None)? {
                text.push_str(&format!("design.k{}.max_relative_deviation = {:?}\n", r.k, r.max_relative_deviation));
                text.push_str(&format!("design.k{}.test_vectors = {}\n", r.k, r.test_vectors));
            }
            emit(&text, args.out.as_deref())?;
            return Ok(ExitCode::SUCCESS);
        }
        Family::Rows(e) => e,
    };
    let n = ens.dimension();
    let mut zs = standard_basis(n);
    zs.extend(complex_test_vectors(n, args.trials, derive_seed(seed, 0)));
    let report = check_moments(&ens, &zs)?;
    let mut text = report.to_key_values().to_string();
    if let Some(s) = args.s {
        let m = args.m.unwrap_or(10 * s);
        let w = estimate_w(&ens, m, s, args.trials.max(1), derive_seed(seed, 1))?;
        let probes = small_ball_probes(n, s, args.trials, derive_seed(seed, 2));
        let q = estimate_q(&ens, 2f64.powf(1.5) * args.xi, &probes)?;
        let c4 = match ens.kind() {
            EnsembleKind::Alltop => 2.0,
            _ => 4.0,
        };
        let sb = SmallBallReport {
            kind: ens.kind(),
            n,
            w: Some(w),
            q: Some(q),
            pz_lower: Some(pz_lower(c4, args.xi)?),
        };
        for (k, v) in sb.to_key_values().0.into_iter().skip(2) {
            text.push_str(&format!("{k} = {v}\n"));
        }
    }
    emit(&text, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn recover(matrix: &Path, y: &Path, eta: f64, tol: f64, max_iter: usize, out: &Path) -> Result<ExitCode> {
    let a: CMatrix<f64> = load_matrix(matrix)?;
    let y = load_vector::<f64>(y)?;
    let opts = SolverOptions {
        tol_feas: tol,
        max_iter,
        ..SolverOptions::default()
    };
    let r = bpdn(&a, &y, eta, &opts)?;
    save_vector(&r.z_sharp, out)?;
    let mut kv = KeyValues::default();
    kv.push("objective", format!("{:?}", r.objective));
    kv.push("feasibility_residual", format!("{:?}", r.feasibility_residual));
    kv.push("iterations", r.iterations);
    kv.push("converged", r.converged);
    print!("{kv}");
    if r.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: {}", Error::MaxIterExceeded(r.iterations));
        Ok(ExitCode::from(4))
    }
}

fn bench(config: &Path, out: &Path, seed: Option<u64>) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let pt = run_phase_transition(&cfg)?;
    fs::write(out, records_csv(&pt.records))?;
    fs::write(summary_path(out), summary_csv(&pt.summary))?;
    let errors = pt.records.iter().filter(|r| r.error.is_some()).count();
    println!("{} trials, {errors} errors", pt.records.len());
    Ok(ExitCode::SUCCESS)
}

fn bits(n: usize, m: usize, kinds: &[String], out: Option<&Path>) -> Result<ExitCode> {
    let kinds: Vec<EnsembleKind> = if kinds.is_empty() {
        let mut k = vec![EnsembleKind::Alltop, EnsembleKind::Bernoulli, EnsembleKind::GaussianComplex];
        if csd_core::bench::default_oa_construction(n).is_ok() {
            k.insert(0, EnsembleKind::OaSigns);
        }
        k
    } else {
        kinds.iter().map(|k| k.parse()).collect::<Result<_>>()?
    };
    let rows = kinds
        .into_iter()
        .map(|k| bit_row(k, n, m, None))
        .collect::<Result<Vec<_>>>()?;
    emit(&bit_table_csv(&rows), out)?;
    Ok(ExitCode::SUCCESS)
}
