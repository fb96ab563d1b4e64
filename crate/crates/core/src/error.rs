use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // finite fields
    #[error("field degree {0} outside 1..=16")]
    DegreeOutOfRange(u32),
    #[error("modulus {modulus:#b} does not have degree {degree}")]
    ModulusDegree { modulus: u32, degree: u32 },
    #[error("modulus {modulus:#b} is reducible (divisible by {factor:#b})")]
    ReducibleModulus { modulus: u32, factor: u32 },

    // orthogonal arrays
    #[error("invalid orthogonal array: {0}")]
    InvalidArray(String),
    #[error("seed array is not linear over F2: {0}")]
    SeedNotLinear(String),
    #[error("strength {strength} cannot be verified: {reason}")]
    StrengthUnverifiable { strength: usize, reason: String },
    #[error("exhaustive verification needs {needed} cell visits, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),

    // designs
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("dimension {0} is below the minimum of 5")]
    DimensionTooSmall(usize),
    #[error("family has {found} bases, {needed} required")]
    IncompleteFamily { found: usize, needed: usize },

    // ensembles
    #[error("ensemble population is empty")]
    EmptyPopulation,
    #[error("operation requires a finite population")]
    InfinitePopulation,
    #[error("operation not supported for ensemble kind {0}")]
    UnsupportedKind(String),
    #[error("m = {m} is below log(2n) = {bound:.3}")]
    PreconditionM { m: usize, bound: f64 },
    #[error("xi = {0} outside (0, 1/sqrt(8)]")]
    XiOutOfRange(f64),

    // solver
    #[error("no convergence after {0} iterations")]
    MaxIterExceeded(usize),
    #[error("linear system is inconsistent (residual {0:e})")]
    InfeasibleSystem(f64),
    #[error("oracle limited to n <= 10, got {0}")]
    TooLarge(usize),
    #[error("reference signal is zero")]
    ZeroReference,
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    // bench
    #[error("sparsity {s} exceeds dimension {n}")]
    SparsityTooLarge { s: usize, n: usize },
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
