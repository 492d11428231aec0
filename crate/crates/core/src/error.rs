use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("characteristic polynomial has no repeated integer root")]
    NoDoubleRoot,
    #[error("|alpha| = |beta| (alpha = {alpha}, beta = {beta})")]
    DegenerateRatio { alpha: i64, beta: i64 },
    #[error("coprimality violated: {0}")]
    NotCoprime(String),
    #[error("a characteristic root is zero")]
    ZeroRoot,
    #[error("linear coefficient a of p(n) = a*n + c vanishes")]
    ZeroLinearCoefficient,
    #[error("Y = {0} < 3")]
    SmallHeight(i64),
    #[error("valuation of zero is undefined")]
    ZeroArgument,
    #[error("{0} is not an odd prime")]
    EvenPrime(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("seed n0 = {n0} does not satisfy p | n0*2^n0 + 1 - t")]
    BadSeed { n0: u64 },
    #[error("stage {stage} certificate failed at n = {representative} (implementation bug)")]
    InternalCertificateFailure { stage: u32, representative: BigUint },
    #[error("n = {n} is an exact root of n*2^n + 1 - t; the valuation is unbounded")]
    ExactRoot { n: u64 },
    #[error("empty search box")]
    EmptyBox,
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
