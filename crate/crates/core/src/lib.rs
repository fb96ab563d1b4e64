//! Derandomized compressed sensing: binary orthogonal arrays and Alltop
//! mutually unbiased bases as measurement-row populations, an ℓ1 recovery
//! solver, moment and small-ball diagnostics, and a seeded benchmark
//! harness.
//!
//! Numeric code is generic over [`scalar::Real`]; the aliases below fix the
//! scalar to `f64`.

pub mod bench;
pub mod ensemble;
pub mod error;
pub mod gf2;
pub mod io;
pub mod linalg;
pub mod mub;
pub mod oa;
pub mod rng;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type Ensemble = ensemble::MeasurementEnsemble<f64>;
pub type Sample = ensemble::SampledMatrix<f64>;
pub type Moments = ensemble::MomentReport<f64>;
pub type Alltop = mub::AlltopFamily<f64>;
pub type Mubs = mub::MubFamily<f64>;
pub type Options = solver::SolverOptions<f64>;
pub type Solution = solver::SolverResult<f64>;
pub type Signal = solver::SparseSignal<f64>;
