use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid (p,q) pair p={p}, q={q}: requires 0<q<p≤1")]
    InvalidPq { p: f64, q: f64 },

    #[error("invalid Stancu parameters alpha={alpha}, beta={beta}: requires 0≤alpha≤beta")]
    InvalidStancu { alpha: f64, beta: f64 },

    #[error("invalid degree n={0}: requires n≥1")]
    InvalidDegree(u32),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("point x={0} outside the unit interval: requires x ∈ [0,1]")]
    OutsideUnitInterval(f64),

    #[error("(p,q)-factorial order {k} exceeds cap {cap}")]
    FactorialCap { k: usize, cap: usize },

    #[error("unsupported moment (i,j)=({0},{1}): requires i+j≤2")]
    UnsupportedMoment(u32, u32),

    #[error("axis index {0} invalid: requires 1 or 2")]
    InvalidAxis(u8),

    #[error("central moment {value:e} is negative beyond rounding tolerance")]
    NegativeCentralMoment { value: f64 },

    #[error("test function `{0}` has no exact total-modulus metadata")]
    MissingModulus(String),

    #[error("test function `{function}` violates Lip_M(γ1,γ2) at t=({t1},{t2}), x=({x1},{x2})")]
    LipschitzViolation {
        function: String,
        t1: f64,
        t2: f64,
        x1: f64,
        x2: f64,
    },

    #[error("invalid Lipschitz class M={m}, γ1={gamma1}, γ2={gamma2}: requires M>0 and γ ∈ (0,1]")]
    InvalidLipschitzSpec { m: f64, gamma1: f64, gamma2: f64 },

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("candidate `{0}` has no C_B² norm metadata")]
    MissingNorm(String),

    #[error("negative delta {0}: requires delta ≥ 0")]
    NegativeDelta(f64),

    #[error("grid resolution {0} too small: requires at least 2 points")]
    GridTooSmall(usize),

    #[error("invalid sequence family: {0}")]
    InvalidSequence(String),

    #[error("n list must be non-empty and strictly increasing")]
    InvalidNList,

    #[error("empirical order needs at least 3 rows with positive errors: {0}")]
    DegenerateOrder(String),

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
