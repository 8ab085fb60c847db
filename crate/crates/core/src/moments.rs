//! Closed-form moments of the operator on the test functions
//! `e_ij(t1,t2) = t1^i t2^j` (`i + j ≤ 2`), the second central moments, and
//! a brute-force summation oracle that arbitrates between them.
//!
//! Per axis, with `N = n + l` and `D = [n] + β`:
//!
//! ```text
//! S(t)   = ([N] x + α) / D
//! S(t²)  = ([N](p^{N−1} + 2α) x + q [N][N−1] x² + α²) / D²
//! S((t−x)²) = (q[N][N−1] − 2[N]D + D²)/D² · x² + ([N](p^{N−1} + 2α) − 2αD)/D² · x + α²/D²
//! ```
//!
//! The bivariate moments are products of these because the operator is a
//! tensor product.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{check_unit, AxisConfig, BivariateOperator};
use crate::pq_core::{pq_integer, PqPair};
use crate::summation::CompensatedSum;

/// Negative central moments down to this value are rounding noise and clamp to 0.
pub const CENTRAL_MOMENT_CLAMP: f64 = 1e-13;

/// Default closed-vs-oracle tolerance, relative to `max(1, |oracle|)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Above this degree the oracle switches from the product formula to log-space weights.
const DIRECT_WEIGHT_LIMIT: usize = 150;

fn first_axis(axis: &AxisConfig, x: f64) -> f64 {
    let big_n = pq_integer(axis.degree(), axis.pq());
    (big_n * x + axis.alpha()) / axis.denominator()
}

fn second_axis(axis: &AxisConfig, x: f64) -> f64 {
    let pq = axis.pq();
    let degree = axis.degree();
    let big_n = pq_integer(degree, pq);
    let big_n1 = pq_integer(degree - 1, pq);
    let d = axis.denominator();
    let alpha = axis.alpha();
    let p_pow = pq.p().powi(degree as i32 - 1);
    (big_n * (p_pow + 2.0 * alpha) * x + pq.q() * big_n * big_n1 * x * x + alpha * alpha) / (d * d)
}

fn central_axis(axis: &AxisConfig, x: f64) -> f64 {
    let pq = axis.pq();
    let degree = axis.degree();
    let big_n = pq_integer(degree, pq);
    let big_n1 = pq_integer(degree - 1, pq);
    let d = axis.denominator();
    let d2 = d * d;
    let alpha = axis.alpha();
    let p_pow = pq.p().powi(degree as i32 - 1);
    let quad = (big_n * big_n1 * pq.q() - 2.0 * big_n * d + d2) / d2;
    let lin = (big_n * (p_pow + 2.0 * alpha) - 2.0 * alpha * d) / d2;
    quad * x * x + lin * x + alpha * alpha / d2
}

/// `([n1+l1]x1 + α1)/([n1]+β1), ([n2+l2]x2 + α2)/([n2]+β2)`: the image of
/// the coordinate functions.
pub fn first_moment_point(op: &BivariateOperator, x1: f64, x2: f64) -> (f64, f64) {
    (first_axis(&op.axis1, x1), first_axis(&op.axis2, x2))
}

/// Closed form of `S(e_ij; x1, x2)` for the six pairs with `i + j ≤ 2`.
pub fn moment_closed(op: &BivariateOperator, i: u32, j: u32, x1: f64, x2: f64) -> Result<f64> {
    check_unit(x1)?;
    check_unit(x2)?;
    let (a1, a2) = (&op.axis1, &op.axis2);
    Ok(match (i, j) {
        (0, 0) => 1.0,
        (1, 0) => first_axis(a1, x1),
        (0, 1) => first_axis(a2, x2),
        (1, 1) => first_axis(a1, x1) * first_axis(a2, x2),
        (2, 0) => second_axis(a1, x1),
        (0, 2) => second_axis(a2, x2),
        _ => return Err(Error::UnsupportedMoment(i, j)),
    })
}

/// Closed form of `S((t_i − x_i)²; x1, x2)` for `axis ∈ {1, 2}`.
pub fn central_moment_closed(op: &BivariateOperator, axis: u8, x1: f64, x2: f64) -> Result<f64> {
    check_unit(x1)?;
    check_unit(x2)?;
    let config = op.axis(axis)?;
    Ok(central_axis(config, if axis == 1 { x1 } else { x2 }))
}

/// `δ(x) = sqrt(S((t − x)²))` on one axis. The central moment does not
/// depend on the other coordinate.
pub fn delta(op: &BivariateOperator, axis: u8, x: f64) -> Result<f64> {
    check_unit(x)?;
    let value = central_axis(op.axis(axis)?, x);
    if value >= 0.0 {
        Ok(value.sqrt())
    } else if value >= -CENTRAL_MOMENT_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeCentralMoment { value })
    }
}

fn oracle_weights(axis: &AxisConfig, x: f64) -> Result<Vec<f64>> {
    if axis.degree() <= DIRECT_WEIGHT_LIMIT {
        let direct: Vec<f64> = (0..=axis.degree())
            .map(|nu| axis.basis_weight_direct(nu, x))
            .collect::<Result<_>>()?;
        if direct.iter().all(|w| w.is_finite()) {
            return Ok(direct);
        }
    }
    axis.weights(x)
}

/// Direct double summation of the operator with compensated accumulation.
///
/// Weights come from the product formula term by term (log space only for
/// very large degrees), independent of the grid machinery in
/// [`crate::operator::TensorGrid`].
pub fn moment_oracle<G: Fn(f64, f64) -> f64>(op: &BivariateOperator, g: G, x1: f64, x2: f64) -> Result<f64> {
    check_unit(x1)?;
    check_unit(x2)?;
    let w1 = oracle_weights(&op.axis1, x1)?;
    let w2 = oracle_weights(&op.axis2, x2)?;
    let nodes1 = op.axis1.nodes();
    let nodes2 = op.axis2.nodes();
    let mut acc = CompensatedSum::new();
    for (a, t1) in w1.iter().zip(&nodes1) {
        for (b, t2) in w2.iter().zip(&nodes2) {
            acc.add(a * b * g(*t1, *t2));
        }
    }
    Ok(acc.total())
}

/// `(closed − α/D)/(measured − α/D)` for the first moment on one axis, where
/// `measured` sums over the operator's own nodes. Equals 1 for canonical
/// nodes and `p^l` for paper-literal ones. `None` at `x = 0`.
pub fn first_moment_ratio(op: &BivariateOperator, axis: u8, x: f64) -> Result<Option<f64>> {
    check_unit(x)?;
    let config = op.axis(axis)?;
    let offset = config.alpha() / config.denominator();
    let closed = first_axis(config, x) - offset;
    let measured = moment_oracle(&BivariateOperator::symmetric(*config), |t, _| t, x, 0.0)? - offset;
    if closed == 0.0 || measured == 0.0 {
        return Ok(None);
    }
    Ok(Some(closed / measured))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub name: String,
    pub closed: f64,
    pub oracle: f64,
    pub absdiff: f64,
}

impl MomentEntry {
    fn new(name: &str, closed: f64, oracle: f64) -> Self {
        Self {
            name: name.to_owned(),
            closed,
            oracle,
            absdiff: (closed - oracle).abs(),
        }
    }

    /// `|closed − oracle| / max(1, |oracle|)`
    pub fn scaled_diff(&self) -> f64 {
        self.absdiff / self.oracle.abs().max(1.0)
    }
}

/// Closed forms against the oracle for the six moments and two central
/// moments at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub params: BivariateOperator,
    pub point: (f64, f64),
    pub entries: Vec<MomentEntry>,
}

impl MomentReport {
    pub fn compute(op: &BivariateOperator, x1: f64, x2: f64) -> Result<Self> {
        const TEST_FUNCTIONS: [(&str, u32, u32); 6] = [
            ("e00", 0, 0),
            ("e10", 1, 0),
            ("e01", 0, 1),
            ("e11", 1, 1),
            ("e20", 2, 0),
            ("e02", 0, 2),
        ];
        let mut entries = Vec::with_capacity(8);
        for (name, i, j) in TEST_FUNCTIONS {
            let closed = moment_closed(op, i, j, x1, x2)?;
            let oracle = moment_oracle(op, |t1, t2| t1.powi(i as i32) * t2.powi(j as i32), x1, x2)?;
            entries.push(MomentEntry::new(name, closed, oracle));
        }
        let c1 = moment_oracle(op, |t1, _| (t1 - x1).powi(2), x1, x2)?;
        entries.push(MomentEntry::new("c1", central_moment_closed(op, 1, x1, x2)?, c1));
        let c2 = moment_oracle(op, |_, t2| (t2 - x2).powi(2), x1, x2)?;
        entries.push(MomentEntry::new("c2", central_moment_closed(op, 2, x1, x2)?, c2));
        Ok(Self {
            params: *op,
            point: (x1, x2),
            entries,
        })
    }

    pub fn worst(&self) -> Option<&MomentEntry> {
        self.entries
            .iter()
            .max_by(|a, b| a.scaled_diff().total_cmp(&b.scaled_diff()))
    }

    pub fn offenders(&self, tolerance: f64) -> impl Iterator<Item = &MomentEntry> {
        self.entries.iter().filter(move |e| !(e.scaled_diff() <= tolerance))
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.offenders(tolerance).next().is_none()
    }
}

/// Parameter grid for the moment checks. Both axes share each configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSweep {
    pub degrees: Vec<u32>,
    pub shifts: Vec<u32>,
    pub pq_pairs: Vec<(f64, f64)>,
    pub stancu: Vec<(f64, f64)>,
    pub points_per_axis: usize,
}

impl Default for MomentSweep {
    fn default() -> Self {
        Self {
            degrees: vec![1, 2, 5, 10, 25],
            shifts: vec![0, 1, 3],
            pq_pairs: vec![(1.0, 0.5), (0.9, 0.6), (0.99, 0.95)],
            stancu: vec![(0.0, 0.0), (1.0, 2.0), (0.5, 0.5)],
            points_per_axis: 11,
        }
    }
}

impl MomentSweep {
    /// Every configuration in a fixed order: degree, shift, `(p,q)`, `(α,β)`.
    pub fn operators(&self) -> Result<Vec<BivariateOperator>> {
        let mut out = Vec::new();
        for &n in &self.degrees {
            for &l in &self.shifts {
                for &(p, q) in &self.pq_pairs {
                    for &(alpha, beta) in &self.stancu {
                        let axis = AxisConfig::new(n, l, PqPair::new(p, q)?, alpha, beta)?;
                        out.push(BivariateOperator::symmetric(axis));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        crate::operator::uniform_grid(0.0, 1.0, self.points_per_axis)
    }

    /// One report per (configuration, x1, x2), in deterministic order.
    pub fn run(&self, operators: &[BivariateOperator]) -> Result<Vec<MomentReport>> {
        let points = self.points()?;
        let per_op: Vec<Vec<MomentReport>> = operators
            .par_iter()
            .map(|op| {
                let mut reports = Vec::with_capacity(points.len() * points.len());
                for &x1 in &points {
                    for &x2 in &points {
                        reports.push(MomentReport::compute(op, x1, x2)?);
                    }
                }
                Ok(reports)
            })
            .collect::<Result<_>>()?;
        Ok(per_op.into_iter().flatten().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn worked() -> BivariateOperator {
        let axis = AxisConfig::new(2, 1, PqPair::new(1.0, 0.5).unwrap(), 1.0, 2.0).unwrap();
        BivariateOperator::symmetric(axis)
    }

    #[test]
    fn worked_closed_forms() {
        let op = worked();
        assert_eq!(moment_closed(&op, 0, 0, 0.5, 0.5).unwrap(), 1.0);
        assert_relative_eq!(
            moment_closed(&op, 1, 0, 0.5, 0.2).unwrap(),
            1.875 / 3.5,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            moment_closed(&op, 2, 0, 0.5, 0.2).unwrap(),
            3.953125 / 12.25,
            max_relative = 1e-15
        );
        let c1 = central_moment_closed(&op, 1, 0.5, 0.9).unwrap();
        assert_relative_eq!(c1, 3.953125 / 12.25 - 1.875 / 3.5 + 0.25, max_relative = 1e-14);
        assert_relative_eq!(c1, 0.0369898, max_relative = 1e-6);
        assert_relative_eq!(delta(&op, 1, 0.5).unwrap(), 0.1923273, max_relative = 1e-6);
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        let op = worked();
        assert_eq!(moment_closed(&op, 2, 1, 0.5, 0.5), Err(Error::UnsupportedMoment(2, 1)));
        assert_eq!(moment_closed(&op, 3, 0, 0.5, 0.5), Err(Error::UnsupportedMoment(3, 0)));
        assert!(central_moment_closed(&op, 3, 0.5, 0.5).is_err());
        assert!(moment_closed(&op, 1, 0, 1.2, 0.5).is_err());
    }

    #[test]
    fn central_moment_is_linear_combination() {
        let op = worked();
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let lin =
                moment_closed(&op, 2, 0, x, 0.3).unwrap() - 2.0 * x * moment_closed(&op, 1, 0, x, 0.3).unwrap() + x * x;
            assert!((central_moment_closed(&op, 1, x, 0.3).unwrap() - lin).abs() < 1e-12);
            let d = delta(&op, 1, x).unwrap();
            assert!((d * d - central_moment_closed(&op, 1, x, 0.3).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_vanishes_at_origin_without_stancu_shift() {
        let axis = AxisConfig::new(7, 2, PqPair::new(0.9, 0.6).unwrap(), 0.0, 1.0).unwrap();
        let op = BivariateOperator::symmetric(axis);
        assert_eq!(delta(&op, 1, 0.0).unwrap(), 0.0);
        assert_eq!(central_moment_closed(&op, 2, 0.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let op = worked();
        assert!((moment_oracle(&op, |_, _| 1.0, 0.3, 0.6).unwrap() - 1.0).abs() <= 1e-14);
        assert_relative_eq!(
            moment_oracle(&op, |t1, _| t1, 0.5, 0.1).unwrap(),
            1.875 / 3.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn report_passes_for_worked_axis() {
        let report = MomentReport::compute(&worked(), 0.5, 0.25).unwrap();
        assert_eq!(report.entries.len(), 8);
        assert!(report.passes(1e-12), "{report:?}");
        assert!(!report.passes(-1.0));
    }
}
