//! Parameter sequences `(p_n, q_n)`, Korovkin test-function tables and
//! empirical convergence orders.
//!
//! Uniform convergence on `{e00, e10, e01, e20 + e02}` implies uniform
//! convergence for every continuous `f`, so [`korovkin_suite`] reports exactly
//! those four sup-errors.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::modulus_bound;
use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::operator::{uniform_grid, AxisConfig, BivariateOperator, NodeExponent, TensorGrid};
use crate::pq_core::PqPair;

/// Default grid resolution per axis for sup-errors.
pub const DEFAULT_GRID: usize = 41;

/// `n` at which declared limits of `p_n^n`, `q_n^n` are checked.
pub const LIMIT_CHECK_N: u32 = 1_000_000;
pub const LIMIT_CHECK_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Family {
    /// `p_n = 1 − c_p/n`, `q_n = 1 − c_q/n` with `0 ≤ c_p < c_q`.
    OneMinusCOverN { c_p: f64, c_q: f64 },
    /// Explicit `n → (p_n, q_n)` table.
    Tabulated { table: BTreeMap<u32, (f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub family: Family,
    /// Declared limit of `p_n^n`.
    pub a: f64,
    /// Declared limit of `q_n^n`.
    pub b: f64,
}

impl SequenceSpec {
    /// `1 − c/n` family with the limits `e^{−c_p}`, `e^{−c_q}`.
    pub fn one_minus_c_over_n(c_p: f64, c_q: f64) -> Result<Self> {
        Self::new(Family::OneMinusCOverN { c_p, c_q }, (-c_p).exp(), (-c_q).exp())
    }

    /// `p_n = 1 − 1/(2n)`, `q_n = 1 − 1/n`.
    pub fn default_family() -> Self {
        Self::one_minus_c_over_n(0.5, 1.0).expect("default family is valid")
    }

    pub fn new(family: Family, a: f64, b: f64) -> Result<Self> {
        let spec = Self { family, a, b };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match &self.family {
            Family::OneMinusCOverN { c_p, c_q } => {
                if !(*c_p >= 0.0 && c_p < c_q && c_q.is_finite()) {
                    return Err(Error::InvalidSequence(format!(
                        "requires 0 ≤ c_p < c_q, got c_p={c_p}, c_q={c_q}"
                    )));
                }
                self.check_limits(LIMIT_CHECK_N)
            }
            Family::Tabulated { table } => {
                if table.is_empty() {
                    return Err(Error::InvalidSequence("empty table".into()));
                }
                for (&n, &(p, q)) in table {
                    if n == 0 {
                        return Err(Error::InvalidSequence("table entry with n = 0".into()));
                    }
                    PqPair::new(p, q).map_err(|e| Error::InvalidSequence(format!("n={n}: {e}")))?;
                }
                if table.contains_key(&LIMIT_CHECK_N) {
                    self.check_limits(LIMIT_CHECK_N)?;
                }
                Ok(())
            }
        }
    }

    fn check_limits(&self, n: u32) -> Result<()> {
        let pq = self.pq_at(n)?;
        let nf = f64::from(n);
        let (pn, qn) = (pq.p().powf(nf), pq.q().powf(nf));
        if (pn - self.a).abs() > LIMIT_CHECK_TOLERANCE || (qn - self.b).abs() > LIMIT_CHECK_TOLERANCE {
            return Err(Error::InvalidSequence(format!(
                "at n={n}: p_n^n={pn}, q_n^n={qn} differ from declared a={}, b={} by more than {LIMIT_CHECK_TOLERANCE}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn pq_at(&self, n: u32) -> Result<PqPair> {
        match &self.family {
            Family::OneMinusCOverN { c_p, c_q } => {
                let nf = f64::from(n);
                PqPair::new(1.0 - c_p / nf, 1.0 - c_q / nf)
                    .map_err(|e| Error::InvalidSequence(format!("n={n}: {e} (needs n > c_q)")))
            }
            Family::Tabulated { table } => {
                let &(p, q) = table
                    .get(&n)
                    .ok_or_else(|| Error::InvalidSequence(format!("no table entry for n={n}")))?;
                PqPair::new(p, q).map_err(|e| Error::InvalidSequence(format!("n={n}: {e}")))
            }
        }
    }
}

/// Parameters held fixed while `n` (and with it `p_n`, `q_n`) varies. Both
/// axes use the same `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub l1: u32,
    pub l2: u32,
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub node_exponent: NodeExponent,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            l1: 0,
            l2: 0,
            alpha1: 0.0,
            beta1: 0.0,
            alpha2: 0.0,
            beta2: 0.0,
            node_exponent: NodeExponent::Canonical,
        }
    }
}

impl FixedParams {
    pub fn uniform(l: u32, alpha: f64, beta: f64) -> Self {
        Self {
            l1: l,
            l2: l,
            alpha1: alpha,
            beta1: beta,
            alpha2: alpha,
            beta2: beta,
            node_exponent: NodeExponent::Canonical,
        }
    }

    pub fn operator(&self, n: u32, pq: PqPair) -> Result<BivariateOperator> {
        Ok(BivariateOperator::new(
            AxisConfig::new(n, self.l1, pq, self.alpha1, self.beta1)?,
            AxisConfig::new(n, self.l2, pq, self.alpha2, self.beta2)?,
        )
        .with_node_exponent(self.node_exponent))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KorovkinRow {
    pub n: u32,
    pub p_n: f64,
    pub q_n: f64,
    pub e00: f64,
    pub e10: f64,
    pub e01: f64,
    pub e20_e02: f64,
}

fn check_n_list(n_list: &[u32]) -> Result<()> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        Err(Error::InvalidNList)
    } else {
        Ok(())
    }
}

fn sup_error<F: Fn(f64, f64) -> f64 + Sync>(grid: &TensorGrid, xs: &[f64], f: F) -> (f64, (f64, f64)) {
    let values = grid.apply(&f);
    let mut worst = (0.0, (xs[0], xs[0]));
    for (row, &x1) in values.iter().zip(xs) {
        for (s, &x2) in row.iter().zip(xs) {
            let err = (s - f(x1, x2)).abs();
            if err > worst.0 {
                worst = (err, (x1, x2));
            }
        }
    }
    worst
}

/// Sup-errors over a `k × k` grid of `[0,1]²` for the four Korovkin test
/// functions, one row per `n`.
pub fn korovkin_suite(spec: &SequenceSpec, fixed: &FixedParams, n_list: &[u32], k: usize) -> Result<Vec<KorovkinRow>> {
    check_n_list(n_list)?;
    let xs = uniform_grid(0.0, 1.0, k)?;
    n_list
        .par_iter()
        .map(|&n| {
            let pq = spec.pq_at(n)?;
            let op = fixed.operator(n, pq)?;
            let grid = TensorGrid::new(&op, &xs, &xs)?;
            Ok(KorovkinRow {
                n,
                p_n: pq.p(),
                q_n: pq.q(),
                e00: sup_error(&grid, &xs, |_, _| 1.0).0,
                e10: sup_error(&grid, &xs, |t1, _| t1).0,
                e01: sup_error(&grid, &xs, |_, t2| t2).0,
                e20_e02: sup_error(&grid, &xs, |t1, t2| t1 * t1 + t2 * t2).0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub p_n: f64,
    pub q_n: f64,
    pub sup_error: f64,
    pub worst_point: (f64, f64),
    /// `4 ω_total(f; δ1, δ2)` at the worst point.
    pub bound: Option<f64>,
    /// `sup_error / bound`
    pub ratio: Option<f64>,
}

/// Sup-error of `S f − f` on a `k × k` grid, with the modulus bound at the
/// worst point when `f` carries an exact modulus.
pub fn convergence_table(
    spec: &SequenceSpec,
    fixed: &FixedParams,
    f: &TestFunction,
    n_list: &[u32],
    k: usize,
) -> Result<Vec<ConvergenceRow>> {
    check_n_list(n_list)?;
    let xs = uniform_grid(0.0, 1.0, k)?;
    n_list
        .par_iter()
        .map(|&n| {
            let pq = spec.pq_at(n)?;
            let op = fixed.operator(n, pq)?;
            let grid = TensorGrid::new(&op, &xs, &xs)?;
            let (sup, (x1, x2)) = sup_error(&grid, &xs, |a, b| f.eval(a, b));
            let bound = if f.has_exact_modulus() {
                Some(modulus_bound(&op, f, x1, x2)?.rhs)
            } else {
                None
            };
            let ratio = bound.map(|b| {
                if b > 0.0 {
                    sup / b
                } else if sup == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            });
            Ok(ConvergenceRow {
                n,
                p_n: pq.p(),
                q_n: pq.q(),
                sup_error: sup,
                worst_point: (x1, x2),
                bound,
                ratio,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    /// Least-squares slope of `ln err` against `ln n`.
    Slope(f64),
    /// Every error is exactly zero.
    Exact,
}

impl Order {
    pub fn slope(&self) -> Option<f64> {
        match self {
            Order::Slope(s) => Some(*s),
            Order::Exact => None,
        }
    }
}

pub fn empirical_order(rows: &[(u32, f64)]) -> Result<Order> {
    if rows.len() < 3 {
        return Err(Error::DegenerateOrder(format!("{} rows", rows.len())));
    }
    if rows.iter().all(|&(_, e)| e == 0.0) {
        return Ok(Order::Exact);
    }
    if let Some(&(n, e)) = rows.iter().find(|&&(n, e)| !(e > 0.0) || n == 0) {
        return Err(Error::DegenerateOrder(format!("row n={n} has error {e}")));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(n, e)| (f64::from(n).ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateOrder("all n equal".into()));
    }
    Ok(Order::Slope(sxy / sxx))
}

impl KorovkinRow {
    /// Column by its table name, `0` for unknown names.
    pub fn column(&self, name: &str) -> f64 {
        match name {
            "e00" => self.e00,
            "e10" => self.e10,
            "e01" => self.e01,
            "e20+e02" => self.e20_e02,
            _ => 0.0,
        }
    }
}

/// Empirical orders for every Korovkin column, keyed by column name.
pub fn korovkin_orders(rows: &[KorovkinRow]) -> BTreeMap<String, Option<Order>> {
    let column = |get: fn(&KorovkinRow) -> f64| -> Option<Order> {
        empirical_order(&rows.iter().map(|r| (r.n, get(r))).collect::<Vec<_>>()).ok()
    };
    BTreeMap::from([
        ("e00".to_owned(), column(|r| r.e00)),
        ("e10".to_owned(), column(|r| r.e10)),
        ("e01".to_owned(), column(|r| r.e01)),
        ("e20+e02".to_owned(), column(|r| r.e20_e02)),
    ])
}
