//! (p,q)-arithmetic: integers, factorials, binomial coefficients and the
//! product `∏_{j<m} (p^j − q^j x)` that appears in the basis weights.
//!
//! Every quantity has a log-space companion. The direct forms overflow or
//! underflow long before the degrees used in convergence sweeps.
//!
//! `[k]_{p,q}` is evaluated as `p^k (1 − r^k) / (p − q)` with `r = q/p` and
//! `1 − r^k = −expm1(k ln r)`, which avoids the cancellation in
//! `p^k − q^k` when `p` and `q` are close.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order accepted by [`pq_factorial`] unless a cap is passed explicitly.
pub const DEFAULT_FACTORIAL_CAP: usize = 10_000;

/// Deformation parameters with `0 < q < p ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPq", into = "RawPq")]
pub struct PqPair {
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPq {
    p: f64,
    q: f64,
}

impl TryFrom<RawPq> for PqPair {
    type Error = Error;
    fn try_from(raw: RawPq) -> Result<Self> {
        PqPair::new(raw.p, raw.q)
    }
}

impl From<PqPair> for RawPq {
    fn from(pq: PqPair) -> Self {
        RawPq { p: pq.p, q: pq.q }
    }
}

impl PqPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        // NaN fails every comparison, so it is rejected here as well.
        if q > 0.0 && q < p && p <= 1.0 {
            Ok(Self { p, q })
        } else {
            Err(Error::InvalidPq { p, q })
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub(crate) fn ln_ratio(&self) -> f64 {
        (self.q / self.p).ln()
    }
}

/// `[k]_{p,q} = (p^k − q^k)/(p − q)`, with `[0]_{p,q} = 0`.
pub fn pq_integer(k: usize, pq: PqPair) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    let one_minus_rk = -(kf * pq.ln_ratio()).exp_m1();
    pq.p.powf(kf) * one_minus_rk / (pq.p - pq.q)
}

/// `ln [k]_{p,q}` for `k ≥ 1`; `-inf` for `k = 0`.
pub fn ln_pq_integer(k: usize, pq: PqPair) -> f64 {
    if k == 0 {
        return f64::NEG_INFINITY;
    }
    let kf = k as f64;
    kf * pq.p.ln() + (-(kf * pq.ln_ratio()).exp_m1()).ln() - (pq.p - pq.q).ln()
}

/// `[k]_{p,q}! = [1][2]…[k]`, `[0]! = 1`, subject to [`DEFAULT_FACTORIAL_CAP`].
pub fn pq_factorial(k: usize, pq: PqPair) -> Result<f64> {
    pq_factorial_capped(k, pq, DEFAULT_FACTORIAL_CAP)
}

pub fn pq_factorial_capped(k: usize, pq: PqPair, cap: usize) -> Result<f64> {
    if k > cap {
        return Err(Error::FactorialCap { k, cap });
    }
    Ok((1..=k).map(|j| pq_integer(j, pq)).product())
}

/// Table of `ln [j]_{p,q}!` for `j = 0..=n`.
pub fn ln_pq_factorials(n: usize, pq: PqPair) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(acc);
    for j in 1..=n {
        acc += ln_pq_integer(j, pq);
        table.push(acc);
    }
    table
}

/// `C(n,k)_{p,q} = [n]! / ([k]! [n−k]!)`.
///
/// Evaluated as `∏_{i=1}^{k'} [n−k'+i]/[i]` with `k' = min(k, n−k)`, which
/// equals the factorial ratio but does not overflow for moderate `n`.
pub fn pq_binomial(n: usize, k: usize, pq: PqPair) -> Result<f64> {
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    let k = k.min(n - k);
    Ok((1..=k).map(|i| pq_integer(n - k + i, pq) / pq_integer(i, pq)).product())
}

pub fn ln_pq_binomial(n: usize, k: usize, pq: PqPair) -> Result<f64> {
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    let k = k.min(n - k);
    Ok((1..=k)
        .map(|i| ln_pq_integer(n - k + i, pq) - ln_pq_integer(i, pq))
        .sum())
}

/// `∏_{j=0}^{m−1} (p^j − q^j x)`; empty product is 1.
pub fn rising_product(m: usize, x: f64, pq: PqPair) -> f64 {
    let mut pj = 1.0;
    let mut qj = 1.0;
    let mut acc = 1.0;
    for _ in 0..m {
        acc *= pj - qj * x;
        pj *= pq.p;
        qj *= pq.q;
    }
    acc
}

/// A non-negative real stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMagnitude {
    /// 0 when the value is exactly zero, +1 otherwise.
    pub sign: i8,
    /// Meaningless when `sign == 0`.
    pub ln_abs: f64,
}

impl LogMagnitude {
    pub const ZERO: Self = Self {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.ln_abs.exp()
        }
    }
}

/// `ln (p^j − q^j x) = j ln p + ln(1 − r^j x)` for `j ≥ 1`.
fn ln_rising_factor(j: usize, x: f64, ln_p: f64, ln_r: f64) -> f64 {
    let jf = j as f64;
    jf * ln_p + (-(jf * ln_r).exp() * x).ln_1p()
}

/// Log-space [`rising_product`] for `x ∈ [0,1]`.
pub fn log_rising_product(m: usize, x: f64, pq: PqPair) -> LogMagnitude {
    debug_assert!((0.0..=1.0).contains(&x));
    if m == 0 {
        return LogMagnitude { sign: 1, ln_abs: 0.0 };
    }
    if x >= 1.0 {
        return LogMagnitude::ZERO;
    }
    let ln_p = pq.p.ln();
    let ln_r = pq.ln_ratio();
    let mut acc = (-x).ln_1p();
    for j in 1..m {
        acc += ln_rising_factor(j, x, ln_p, ln_r);
    }
    LogMagnitude { sign: 1, ln_abs: acc }
}
