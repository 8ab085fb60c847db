//! The univariate Schurer-Stancu basis and the bivariate tensor-product
//! operator
//!
//! ```text
//! S(f; x1, x2) = Σ_{ν1=0}^{n1+l1} Σ_{ν2=0}^{n2+l2} s1_{ν1}(x1) s2_{ν2}(x2) f(node1(ν1), node2(ν2))
//! s_ν(x)  = p^{-N(N-1)/2} C(N,ν)_{p,q} p^{ν(ν-1)/2} x^ν ∏_{j<N-ν} (p^j − q^j x),   N = n + l
//! node(ν) = (p^{N-ν} [ν] + α) / ([n] + β)
//! ```
//!
//! The node exponent `N − ν` is the one under which the operator reproduces
//! the first moment `([n+l]x + α)/([n] + β)`. The literal exponent `n − ν`
//! is available through [`NodeExponent::PaperLiteral`]; it scales the
//! `α`-free part of every node by `p^{-l}`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pq_core::{pq_binomial, pq_integer, rising_product, PqPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeExponent {
    /// `p^{n+l−ν}`
    #[default]
    Canonical,
    /// `p^{n−ν}`
    PaperLiteral,
}

impl FromStr for NodeExponent {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "canonical" => Ok(Self::Canonical),
            "paper-literal" => Ok(Self::PaperLiteral),
            other => Err(format!(
                "unknown node exponent `{other}` (expected canonical or paper-literal)"
            )),
        }
    }
}

impl fmt::Display for NodeExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Canonical => "canonical",
            Self::PaperLiteral => "paper-literal",
        })
    }
}

/// Parameters of one axis: degree `n`, Schurer shift `l`, deformation
/// `(p,q)` and Stancu shift `0 ≤ α ≤ β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisConfig {
    n: u32,
    l: u32,
    pq: PqPair,
    alpha: f64,
    beta: f64,
    #[serde(default)]
    node_exponent: NodeExponent,
}

impl AxisConfig {
    pub fn new(n: u32, l: u32, pq: PqPair, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDegree(n));
        }
        if !(alpha >= 0.0 && alpha <= beta && beta.is_finite()) {
            return Err(Error::InvalidStancu { alpha, beta });
        }
        Ok(Self {
            n,
            l,
            pq,
            alpha,
            beta,
            node_exponent: NodeExponent::Canonical,
        })
    }

    pub fn with_node_exponent(mut self, node_exponent: NodeExponent) -> Self {
        self.node_exponent = node_exponent;
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn pq(&self) -> PqPair {
        self.pq
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn node_exponent(&self) -> NodeExponent {
        self.node_exponent
    }

    /// Number of basis functions minus one, `n + l`.
    pub fn degree(&self) -> usize {
        (self.n + self.l) as usize
    }

    /// Right end of the sampling interval `[0, l+1]`.
    pub fn domain_end(&self) -> f64 {
        f64::from(self.l) + 1.0
    }

    /// `[n]_{p,q} + β`
    pub fn denominator(&self) -> f64 {
        pq_integer(self.n as usize, self.pq) + self.beta
    }

    fn check_index(&self, nu: usize) -> Result<()> {
        if nu > self.degree() {
            Err(Error::IndexOutOfRange {
                index: nu,
                max: self.degree(),
            })
        } else {
            Ok(())
        }
    }

    fn node_unchecked(&self, nu: usize) -> f64 {
        // p^{N-ν}[ν] = p^N (1 − r^ν)/(p − q), monotone in ν after rounding
        let top = match self.node_exponent {
            NodeExponent::Canonical => self.degree() as f64,
            NodeExponent::PaperLiteral => f64::from(self.n),
        };
        let (p, q) = (self.pq.p(), self.pq.q());
        let scale = p.powf(top) / (p - q);
        let rise = -(nu as f64 * self.pq.ln_ratio()).exp_m1();
        (scale * rise + self.alpha) / self.denominator()
    }

    pub fn node(&self, nu: usize) -> Result<f64> {
        self.check_index(nu)?;
        Ok(self.node_unchecked(nu))
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.degree()).map(|nu| self.node_unchecked(nu)).collect()
    }

    /// Basis weight `s_ν(x)` as computed by [`Self::weights`].
    pub fn basis_weight(&self, nu: usize, x: f64) -> Result<f64> {
        self.check_index(nu)?;
        Ok(self.weights(x)?[nu])
    }

    /// Basis weight from the product formula in plain double precision.
    ///
    /// Accurate while `C(N,ν)_{p,q}` and `p^{-N(N-1)/2}` stay representable
    /// (roughly `N ≤ 150` for moderate `p`); use [`Self::weights`] beyond that.
    pub fn basis_weight_direct(&self, nu: usize, x: f64) -> Result<f64> {
        self.check_index(nu)?;
        check_unit(x)?;
        let big_n = self.degree();
        let p = self.pq.p();
        let tri = |k: usize| (k * k.saturating_sub(1) / 2) as f64;
        Ok(pq_binomial(big_n, nu, self.pq)?
            * p.powf(tri(nu) - tri(big_n))
            * x.powi(nu as i32)
            * rising_product(big_n - nu, x, self.pq))
    }

    /// All `N + 1` basis weights at `x`.
    ///
    /// With `r = q/p` every power of `p` cancels and
    /// `s_ν(x) = C(N,ν)_r x^ν ∏_{j<N-ν}(1 - r^j x)`, so the weights follow from
    /// `s_0` by the ratio `s_{ν+1}/s_ν = ([N-ν]_r/[ν+1]_r) x/(1 - r^{N-ν-1} x)`.
    /// The running product carries a separate binary exponent and never
    /// under- or overflows; the relative error grows like `ν·ε`.
    pub fn weights(&self, x: f64) -> Result<Vec<f64>> {
        check_unit(x)?;
        let big_n = self.degree();
        let mut out = vec![0.0; big_n + 1];
        if x == 0.0 {
            out[0] = 1.0;
            return Ok(out);
        }
        if x == 1.0 {
            out[big_n] = 1.0;
            return Ok(out);
        }
        let ln_r = self.pq.ln_ratio();
        let ln_x = x.ln();
        // 1 - r^k x
        let gap = |k: usize| -(k as f64 * ln_r + ln_x).exp_m1();
        let mut acc = Scaled::ONE;
        for j in 0..big_n {
            acc.mul(gap(j));
        }
        out[0] = acc.value();
        for nu in 0..big_n {
            let binom_ratio = (((big_n - nu) as f64) * ln_r).exp_m1() / (((nu + 1) as f64) * ln_r).exp_m1();
            acc.mul(binom_ratio * x / gap(big_n - nu - 1));
            out[nu + 1] = acc.value();
        }
        Ok(out)
    }

    /// `Σ_ν s_ν(x) f(node(ν))`
    pub fn apply_univariate<F: Fn(f64) -> f64>(&self, f: F, x: f64) -> Result<f64> {
        let weights = self.weights(x)?;
        Ok(weights.iter().zip(self.nodes()).map(|(w, t)| w * f(t)).sum())
    }
}

pub(crate) fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutsideUnitInterval(x))
    }
}

/// `m · 2^e` with `m` kept near 1.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    m: f64,
    e: i32,
}

impl Scaled {
    const ONE: Self = Self { m: 1.0, e: 0 };
    const LIMIT: i32 = 400;

    fn mul(&mut self, factor: f64) {
        self.m *= factor;
        if self.m == 0.0 || !self.m.is_finite() {
            return;
        }
        let k = self.m.abs().log2().floor() as i32;
        if k.abs() > Self::LIMIT {
            self.m *= 2f64.powi(-k);
            self.e += k;
        }
    }

    fn value(&self) -> f64 {
        let half = self.e / 2;
        self.m * 2f64.powi(half) * 2f64.powi(self.e - half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateOperator {
    pub axis1: AxisConfig,
    pub axis2: AxisConfig,
}

impl BivariateOperator {
    pub fn new(axis1: AxisConfig, axis2: AxisConfig) -> Self {
        Self { axis1, axis2 }
    }

    /// Same parameters on both axes.
    pub fn symmetric(axis: AxisConfig) -> Self {
        Self::new(axis, axis)
    }

    pub fn axis(&self, index: u8) -> Result<&AxisConfig> {
        match index {
            1 => Ok(&self.axis1),
            2 => Ok(&self.axis2),
            other => Err(Error::InvalidAxis(other)),
        }
    }

    pub fn with_node_exponent(self, node_exponent: NodeExponent) -> Self {
        Self::new(
            self.axis1.with_node_exponent(node_exponent),
            self.axis2.with_node_exponent(node_exponent),
        )
    }

    /// `(l1 + 1, l2 + 1)`: the sampling rectangle is `[0, l1+1] × [0, l2+1]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.axis1.domain_end(), self.axis2.domain_end())
    }

    pub fn apply<F: Fn(f64, f64) -> f64 + Sync>(&self, f: F, x1: f64, x2: f64) -> Result<f64> {
        Ok(TensorGrid::new(self, &[x1], &[x2])?.apply(f)[0][0])
    }

    pub fn reduce(&self, target: Reduction) -> Self {
        let map = |axis: &AxisConfig| {
            let mut out = *axis;
            match target {
                Reduction::QSchurerStancu => {
                    out.pq = PqPair::new(1.0, axis.pq.q()).expect("q < 1 always holds");
                }
                Reduction::PqBernsteinSchurer => {
                    out.alpha = 0.0;
                    out.beta = 0.0;
                }
                Reduction::PqBernstein => {
                    out.l = 0;
                    out.alpha = 0.0;
                    out.beta = 0.0;
                }
            }
            out
        };
        Self::new(map(&self.axis1), map(&self.axis2))
    }
}

/// `S(f; x1, x2)`.
pub fn apply_bivariate<F: Fn(f64, f64) -> f64 + Sync>(op: &BivariateOperator, f: F, x1: f64, x2: f64) -> Result<f64> {
    op.apply(f, x1, x2)
}

/// Special cases of the operator obtained by freezing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// `p1 = p2 = 1`
    QSchurerStancu,
    /// `α = β = 0`
    PqBernsteinSchurer,
    /// `l = 0`, `α = β = 0`
    PqBernstein,
}

/// Operator weights precomputed at a rectangular set of points.
///
/// Evaluating `f` costs one sample per node pair plus two contractions, so a
/// whole grid is about as cheap as a handful of single points.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    nodes1: Vec<f64>,
    nodes2: Vec<f64>,
    weights1: Vec<Vec<f64>>,
    weights2: Vec<Vec<f64>>,
}

impl TensorGrid {
    pub fn new(op: &BivariateOperator, xs1: &[f64], xs2: &[f64]) -> Result<Self> {
        Ok(Self {
            nodes1: op.axis1.nodes(),
            nodes2: op.axis2.nodes(),
            weights1: xs1.iter().map(|&x| op.axis1.weights(x)).collect::<Result<_>>()?,
            weights2: xs2.iter().map(|&x| op.axis2.weights(x)).collect::<Result<_>>()?,
        })
    }

    pub fn nodes1(&self) -> &[f64] {
        &self.nodes1
    }

    pub fn nodes2(&self) -> &[f64] {
        &self.nodes2
    }

    /// `out[a][b] = S(f; xs1[a], xs2[b])`.
    pub fn apply<F: Fn(f64, f64) -> f64 + Sync>(&self, f: F) -> Vec<Vec<f64>> {
        let samples: Vec<Vec<f64>> = self
            .nodes1
            .par_iter()
            .map(|&t1| self.nodes2.iter().map(|&t2| f(t1, t2)).collect())
            .collect();
        self.weights1
            .par_iter()
            .map(|w1| {
                let mut row = vec![0.0; self.nodes2.len()];
                for (wi, sample_row) in w1.iter().zip(&samples) {
                    if *wi == 0.0 {
                        continue;
                    }
                    for (acc, s) in row.iter_mut().zip(sample_row) {
                        *acc += wi * s;
                    }
                }
                self.weights2
                    .iter()
                    .map(|w2| w2.iter().zip(&row).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect()
    }
}

/// `k` equally spaced points covering `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::GridTooSmall(k));
    }
    let step = (hi - lo) / (k - 1) as f64;
    Ok((0..k)
        .map(|i| if i == k - 1 { hi } else { lo + i as f64 * step })
        .collect())
}
