use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("factor count {0} outside supported range 1..={max}", max = crate::subsetcalc::MAX_FACTORS)]
    TooManyFactors(usize),
    #[error("pattern entry {value} at position {position} is not 0 or 1")]
    NonBinaryPattern { position: usize, value: u8 },
    #[error("pattern length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("pattern w is not below v in the componentwise order")]
    NotBelow,
    #[error("alternating binomial sum requires m < n (got n = {n}, m = {m})")]
    PascalDomain { n: usize, m: usize },
    #[error("invalid factor split: {0}")]
    InvalidSplit(String),
    #[error("order {order} invalid for {kind}: must lie in {lo}..={hi}")]
    OrderInvalid { kind: &'static str, order: usize, lo: usize, hi: usize },
    #[error("synergy index undefined: requires OR(1,vK) > OR(0,vK) and predicted OR > OR(0,vK)")]
    SiUndefined,
    #[error("{kind} value {value} outside the open range of its transform")]
    RangeError { kind: &'static str, value: f64 },
    #[error("non-finite structural parameter at coordinate {0}")]
    NonFiniteParameter(usize),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dataset has no {0}")]
    EmptyClass(&'static str),
    #[error("too few records: {n} < {needed} required for {params} parameters")]
    InsufficientData { n: usize, needed: usize, params: usize },
    #[error("singular design: {0}")]
    SingularDesign(String),
    #[error("separation suspected: {0}")]
    SeparationSuspected(String),
    #[error("no convergence after {iterations} iterations (score max-norm {gradient_norm:e})")]
    NoConvergence { iterations: usize, gradient_norm: f64 },
    #[error("negative delta-method variance {0:e}")]
    NegativeVariance(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("bootstrap needs at least {min} replicates, got {got}")]
    TooFewReplicates { min: usize, got: usize },
    #[error("{failed} of {total} bootstrap replicates failed (limit 10%)")]
    TooManyFailedReplicates { failed: usize, total: usize },
    #[error("invalid simulation design: {0}")]
    InvalidDesign(String),
    #[error("unreachable prevalence: expected acceptance rate {rate:e} for {class} below 1e-6")]
    UnreachablePrevalence { class: &'static str, rate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
