//! Smoothness moduli, the auxiliary operator and the pointwise error bounds.
//!
//! Grid-based moduli are lower estimates of a supremum. They are reported but
//! never used on the right-hand side of a bound check, since an
//! underestimated modulus could make a true inequality look violated.

use serde::{Deserialize, Serialize};

use crate::catalog::{Rect, TestFunction};
use crate::error::{Error, Result};
use crate::moments::{central_moment_closed, delta, first_moment_point};
use crate::operator::{uniform_grid, BivariateOperator, TensorGrid};

/// Default resolution (points per axis) for grid suprema.
pub const DEFAULT_VERIFICATION_GRID: usize = 101;

/// Default resolution for pairwise Lipschitz-class membership checks.
pub const DEFAULT_MEMBERSHIP_GRID: usize = 21;

/// Absolute slack for rounding in membership and bound comparisons.
pub const COMPARISON_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusValue {
    pub value: f64,
    /// `false` marks a grid lower estimate.
    pub exact: bool,
}

fn samples(f: &TestFunction, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
    xs.iter().map(|&x| ys.iter().map(|&y| f.eval(x, y)).collect()).collect()
}

/// Offsets (in grid steps) that stay within `delta`.
fn steps_within(delta: f64, step: f64, k: usize) -> usize {
    ((delta / step * (1.0 + 1e-12)).floor() as usize).min(k - 1)
}

/// Window extrema of width `w + 1` along one slice.
fn sliding<F: Fn(f64, f64) -> f64>(row: &[f64], w: usize, pick: F) -> Vec<f64> {
    (0..row.len() - w)
        .map(|i| row[i..=i + w].iter().copied().fold(row[i], &pick))
        .collect()
}

/// Grid lower estimate of the total modulus on `rect`.
///
/// Two points are within `(δ1, δ2)` iff they fit in a `δ1 × δ2` box, so the
/// supremum is the largest `max − min` over such boxes.
pub fn omega_total_grid(f: &TestFunction, delta1: f64, delta2: f64, rect: Rect, k: usize) -> Result<f64> {
    if delta1 < 0.0 {
        return Err(Error::NegativeDelta(delta1));
    }
    if delta2 < 0.0 {
        return Err(Error::NegativeDelta(delta2));
    }
    let xs = uniform_grid(0.0, rect.x_max, k)?;
    let ys = uniform_grid(0.0, rect.y_max, k)?;
    let s1 = steps_within(delta1, xs[1] - xs[0], k);
    let s2 = steps_within(delta2, ys[1] - ys[0], k);
    let values = samples(f, &xs, &ys);

    let transpose = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..m[0].len()).map(|j| m.iter().map(|row| row[j]).collect()).collect()
    };
    let window = |pick: fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
        let along_y: Vec<Vec<f64>> = values.iter().map(|r| sliding(r, s2, pick)).collect();
        transpose(&along_y).iter().map(|c| sliding(c, s1, pick)).collect()
    };
    let maxima = window(f64::max);
    let minima = window(f64::min);
    Ok(maxima
        .iter()
        .flatten()
        .zip(minima.iter().flatten())
        .map(|(hi, lo)| hi - lo)
        .fold(0.0, f64::max))
}

/// `ω_total(f; δ1, δ2)`: analytic when the catalog carries it, otherwise a
/// grid lower estimate flagged with `exact = false`.
pub fn omega_total(f: &TestFunction, delta1: f64, delta2: f64, rect: Rect, k: usize) -> Result<ModulusValue> {
    if delta1 < 0.0 || delta2 < 0.0 {
        return Err(Error::NegativeDelta(delta1.min(delta2)));
    }
    match f.exact_total_modulus(delta1, delta2, rect) {
        Some(value) => Ok(ModulusValue { value, exact: true }),
        None => Ok(ModulusValue {
            value: omega_total_grid(f, delta1, delta2, rect, k)?,
            exact: false,
        }),
    }
}

/// Grid estimate of the second modulus
/// `sup_{0<h≤δ} sup_x |f(x+2h) − 2f(x+h) + f(x)|` on `[lo, hi]`.
pub fn second_modulus<F: Fn(f64) -> f64>(f: F, delta: f64, lo: f64, hi: f64, k: usize) -> Result<ModulusValue> {
    if delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    let xs = uniform_grid(lo, hi, k)?;
    let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let smax = steps_within(delta, xs[1] - xs[0], k);
    let mut best: f64 = 0.0;
    for s in 1..=smax {
        for i in 0..k.saturating_sub(2 * s) {
            let d2 = values[i + 2 * s] - 2.0 * values[i + s] + values[i];
            best = best.max(d2.abs());
        }
    }
    Ok(ModulusValue {
        value: best,
        exact: false,
    })
}

/// Bivariate analogue of [`second_modulus`] with steps `h ∈ R²`,
/// `‖h‖₂ ≤ δ`, in all four sign quadrants. Reported only.
pub fn second_modulus_bivariate(f: &TestFunction, delta: f64, rect: Rect, k: usize) -> Result<ModulusValue> {
    if delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    let xs = uniform_grid(0.0, rect.x_max, k)?;
    let ys = uniform_grid(0.0, rect.y_max, k)?;
    let (hx, hy) = (xs[1] - xs[0], ys[1] - ys[0]);
    let values = samples(f, &xs, &ys);
    let k = k as i64;
    let (mx, my) = (
        steps_within(delta, hx, k as usize) as i64,
        steps_within(delta, hy, k as usize) as i64,
    );
    let mut best: f64 = 0.0;
    for si in -mx..=mx {
        for sj in 0..=my {
            if (si == 0 && sj == 0) || ((si as f64 * hx).hypot(sj as f64 * hy) > delta * (1.0 + 1e-12)) {
                continue;
            }
            for i in 0..k {
                for j in 0..k {
                    let (i2, j2) = (i + 2 * si, j + 2 * sj);
                    if !(0..k).contains(&i2) || !(0..k).contains(&j2) {
                        continue;
                    }
                    let at = |a: i64, b: i64| values[a as usize][b as usize];
                    let d2 = at(i2, j2) - 2.0 * at(i + si, j + sj) + at(i, j);
                    best = best.max(d2.abs());
                }
            }
        }
    }
    Ok(ModulusValue {
        value: best,
        exact: false,
    })
}

/// Euclidean modulus `ω(f; δ)`: analytic when known, else a grid lower estimate.
pub fn omega_euclidean(f: &TestFunction, delta: f64, rect: Rect, k: usize) -> Result<ModulusValue> {
    if delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    if let Some(value) = f.exact_euclidean_modulus(delta, rect) {
        return Ok(ModulusValue { value, exact: true });
    }
    let xs = uniform_grid(0.0, rect.x_max, k)?;
    let ys = uniform_grid(0.0, rect.y_max, k)?;
    let (hx, hy) = (xs[1] - xs[0], ys[1] - ys[0]);
    let values = samples(f, &xs, &ys);
    let k = k as i64;
    let mx = steps_within(delta, hx, k as usize) as i64;
    let my = steps_within(delta, hy, k as usize) as i64;
    let mut best: f64 = 0.0;
    for si in 0..=mx {
        for sj in -my..=my {
            if (si as f64 * hx).hypot(sj as f64 * hy) > delta * (1.0 + 1e-12) {
                continue;
            }
            for i in 0..k - si {
                for j in 0..k {
                    let j2 = j + sj;
                    if !(0..k).contains(&j2) {
                        continue;
                    }
                    let d = values[(i + si) as usize][j2 as usize] - values[i as usize][j as usize];
                    best = best.max(d.abs());
                }
            }
        }
    }
    Ok(ModulusValue {
        value: best,
        exact: false,
    })
}

/// `Ŝ(f; x1, x2) = S(f; x1, x2) − f(m1, m2) + f(x1, x2)` where `(m1, m2)` is
/// the image of the coordinate functions. `Ŝ` annihilates `t1 − x1` and
/// `t2 − x2`.
pub fn auxiliary_apply<F: Fn(f64, f64) -> f64 + Sync>(op: &BivariateOperator, f: F, x1: f64, x2: f64) -> Result<f64> {
    let (m1, m2) = first_moment_point(op, x1, x2);
    let s = op.apply(&f, x1, x2)?;
    Ok(s - f(m1, m2) + f(x1, x2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub x1: f64,
    pub x2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundReport {
    fn new(x1: f64, x2: f64, lhs: f64, rhs: f64) -> Self {
        Self {
            x1,
            x2,
            lhs,
            rhs,
            holds: lhs <= rhs + COMPARISON_SLACK,
        }
    }
}

fn require_exact_modulus(f: &TestFunction) -> Result<()> {
    if f.has_exact_modulus() {
        Ok(())
    } else {
        Err(Error::MissingModulus(f.name().to_owned()))
    }
}

fn modulus_rhs(op: &BivariateOperator, f: &TestFunction, x1: f64, x2: f64) -> Result<f64> {
    let d1 = delta(op, 1, x1)?;
    let d2 = delta(op, 2, x2)?;
    let (a, b) = op.domain();
    let omega = f
        .exact_total_modulus(d1, d2, Rect::new(a, b))
        .ok_or_else(|| Error::MissingModulus(f.name().to_owned()))?;
    Ok(4.0 * omega)
}

/// `|S f − f| ≤ 4 ω_total(f; δ1(x1), δ2(x2))` at one point, where
/// `δi = sqrt(S((ti − xi)²))`.
pub fn modulus_bound(op: &BivariateOperator, f: &TestFunction, x1: f64, x2: f64) -> Result<BoundReport> {
    require_exact_modulus(f)?;
    let lhs = (op.apply(|a, b| f.eval(a, b), x1, x2)? - f.eval(x1, x2)).abs();
    Ok(BoundReport::new(x1, x2, lhs, modulus_rhs(op, f, x1, x2)?))
}

/// [`modulus_bound`] at every point of a `k × k` grid on `[0,1]²`, row-major in `x1`.
pub fn modulus_bound_grid(op: &BivariateOperator, f: &TestFunction, k: usize) -> Result<Vec<BoundReport>> {
    require_exact_modulus(f)?;
    let xs = uniform_grid(0.0, 1.0, k)?;
    let values = TensorGrid::new(op, &xs, &xs)?.apply(|a, b| f.eval(a, b));
    let mut out = Vec::with_capacity(k * k);
    for (row, &x1) in values.iter().zip(&xs) {
        for (s, &x2) in row.iter().zip(&xs) {
            let lhs = (s - f.eval(x1, x2)).abs();
            out.push(BoundReport::new(x1, x2, lhs, modulus_rhs(op, f, x1, x2)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFunctionalEstimate {
    /// Upper bound on `K(f; δ)`.
    pub value: f64,
    pub best_candidate: String,
    /// Objective `‖f − g‖ + δ‖g‖_{C_B²}` per candidate, in input order.
    pub objectives: Vec<f64>,
}

/// `min_g ‖f − g‖ + δ ‖g‖_{C_B²}` over `candidates`, with the sup norm of
/// `f − g` taken on a `k × k` grid of `rect`.
pub fn k_functional_upper(
    f: &TestFunction,
    delta: f64,
    candidates: &[TestFunction],
    rect: Rect,
    k: usize,
) -> Result<KFunctionalEstimate> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    let xs = uniform_grid(0.0, rect.x_max, k)?;
    let ys = uniform_grid(0.0, rect.y_max, k)?;
    let objectives = candidates
        .iter()
        .map(|g| {
            let norm = g
                .cb2_norm(rect)
                .ok_or_else(|| Error::MissingNorm(g.name().to_owned()))?;
            let sup = xs
                .iter()
                .flat_map(|&x| ys.iter().map(move |&y| (f.eval(x, y) - g.eval(x, y)).abs()))
                .fold(0.0, f64::max);
            Ok(sup + delta * norm)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (best, value) = objectives
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Ok(KFunctionalEstimate {
        value,
        best_candidate: candidates[best].name().to_owned(),
        objectives,
    })
}

/// Quantities entering the K-functional error estimate at one point. The
/// constants `M` and `M₁` of that estimate are unknown, so nothing here is
/// asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFunctionalReport {
    pub x1: f64,
    pub x2: f64,
    /// `|S f − f|`
    pub lhs: f64,
    /// `δ1² + δ2²`
    pub spread: f64,
    /// Upper bound on `K(f; spread)`.
    pub k_upper: f64,
    /// `ω(f; sqrt(m1² + m2²))`, with `(m1, m2)` the first-moment point.
    pub omega_literal: ModulusValue,
    /// `ω(f; sqrt((m1 − x1)² + (m2 − x2)²))`.
    pub omega_deviation: ModulusValue,
    /// `4 K + ω` using the deviation argument.
    pub first_stage_rhs: f64,
    /// `ω₂(f; sqrt(spread))`, grid estimate.
    pub omega2: ModulusValue,
    /// `min(1, spread) ‖f‖`, `None` without sup-norm metadata.
    pub norm_term: Option<f64>,
    /// `k_upper / (ω₂ + min(1, spread)‖f‖)`; a value `M₁` must at least match.
    pub implied_m1: Option<f64>,
}

pub fn k_functional_report(
    op: &BivariateOperator,
    f: &TestFunction,
    candidates: &[TestFunction],
    x1: f64,
    x2: f64,
    k: usize,
) -> Result<KFunctionalReport> {
    let (a, b) = op.domain();
    let rect = Rect::new(a, b);
    let lhs = (op.apply(|s, t| f.eval(s, t), x1, x2)? - f.eval(x1, x2)).abs();
    let spread = delta(op, 1, x1)?.powi(2) + delta(op, 2, x2)?.powi(2);
    let k_upper = k_functional_upper(f, spread, candidates, rect, k)?.value;
    let (m1, m2) = first_moment_point(op, x1, x2);
    let omega_literal = omega_euclidean(f, m1.hypot(m2), rect, k)?;
    let omega_deviation = omega_euclidean(f, (m1 - x1).hypot(m2 - x2), rect, k)?;
    let omega2 = second_modulus_bivariate(f, spread.sqrt(), rect, k)?;
    let norm_term = f.sup_norm(rect).map(|n| spread.min(1.0) * n);
    let implied_m1 = norm_term
        .map(|nt| k_upper / (omega2.value + nt))
        .filter(|v| v.is_finite());
    Ok(KFunctionalReport {
        x1,
        x2,
        lhs,
        spread,
        k_upper,
        first_stage_rhs: 4.0 * k_upper + omega_deviation.value,
        omega_literal,
        omega_deviation,
        omega2,
        norm_term,
        implied_m1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LipschitzForm {
    /// `|f(t) − f(x)| ≤ M |t1−x1|^γ1 |t2−x2|^γ2`, the class as defined.
    #[default]
    Product,
    /// `|f(t) − f(x)| ≤ M (|t1−x1|^γ1 + |t2−x2|^γ2)`. Experimental; the
    /// product form is the canonical class.
    AdditiveExperimental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzSpec {
    m: f64,
    gamma1: f64,
    gamma2: f64,
    form: LipschitzForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzViolation {
    pub t: (f64, f64),
    pub x: (f64, f64),
    pub lhs: f64,
    pub rhs: f64,
}

impl LipschitzSpec {
    pub fn new(m: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        let gamma_ok = |g: f64| g > 0.0 && g <= 1.0;
        if !(m > 0.0 && gamma_ok(gamma1) && gamma_ok(gamma2)) {
            return Err(Error::InvalidLipschitzSpec { m, gamma1, gamma2 });
        }
        Ok(Self {
            m,
            gamma1,
            gamma2,
            form: LipschitzForm::Product,
        })
    }

    pub fn with_form(mut self, form: LipschitzForm) -> Self {
        self.form = form;
        self
    }

    pub fn form(&self) -> LipschitzForm {
        self.form
    }

    fn envelope(&self, d1: f64, d2: f64) -> f64 {
        let (a, b) = (d1.abs().powf(self.gamma1), d2.abs().powf(self.gamma2));
        match self.form {
            LipschitzForm::Product => self.m * a * b,
            LipschitzForm::AdditiveExperimental => self.m * (a + b),
        }
    }

    /// First pair on a `k × k` grid of `rect` that breaks the class inequality.
    pub fn find_violation(&self, f: &TestFunction, rect: Rect, k: usize) -> Result<Option<LipschitzViolation>> {
        let xs = uniform_grid(0.0, rect.x_max, k)?;
        let ys = uniform_grid(0.0, rect.y_max, k)?;
        let values = samples(f, &xs, &ys);
        for (i, &x1) in xs.iter().enumerate() {
            for (j, &x2) in ys.iter().enumerate() {
                for (a, &t1) in xs.iter().enumerate() {
                    for (b, &t2) in ys.iter().enumerate() {
                        let lhs = (values[a][b] - values[i][j]).abs();
                        let rhs = self.envelope(t1 - x1, t2 - x2);
                        if lhs > rhs + COMPARISON_SLACK {
                            return Ok(Some(LipschitzViolation {
                                t: (t1, t2),
                                x: (x1, x2),
                                lhs,
                                rhs,
                            }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn check_membership(&self, f: &TestFunction, rect: Rect, k: usize) -> Result<()> {
        match self.find_violation(f, rect, k)? {
            None => Ok(()),
            Some(v) => Err(Error::LipschitzViolation {
                function: f.name().to_owned(),
                t1: v.t.0,
                t2: v.t.1,
                x1: v.x.0,
                x2: v.x.1,
            }),
        }
    }
}

/// `|S f − f| ≤ M δ1^{γ1} δ2^{γ2}` (product form) or
/// `M (δ1^{γ1} + δ2^{γ2})` (additive form), after checking membership on a
/// `k × k` grid of the operator's domain.
pub fn bound_lipschitz(
    op: &BivariateOperator,
    f: &TestFunction,
    spec: &LipschitzSpec,
    x1: f64,
    x2: f64,
    k: usize,
) -> Result<BoundReport> {
    let (a, b) = op.domain();
    spec.check_membership(f, Rect::new(a, b), k)?;
    let lhs = (op.apply(|s, t| f.eval(s, t), x1, x2)? - f.eval(x1, x2)).abs();
    let rhs = spec.envelope(delta(op, 1, x1)?, delta(op, 2, x2)?);
    Ok(BoundReport::new(x1, x2, lhs, rhs))
}

/// [`bound_lipschitz`] on a `k × k` grid of `[0,1]²`, with membership checked
/// once on a `membership_k × membership_k` grid.
pub fn bound_lipschitz_grid(
    op: &BivariateOperator,
    f: &TestFunction,
    spec: &LipschitzSpec,
    k: usize,
    membership_k: usize,
) -> Result<Vec<BoundReport>> {
    let (a, b) = op.domain();
    spec.check_membership(f, Rect::new(a, b), membership_k)?;
    let xs = uniform_grid(0.0, 1.0, k)?;
    let values = TensorGrid::new(op, &xs, &xs)?.apply(|s, t| f.eval(s, t));
    let mut out = Vec::with_capacity(k * k);
    for (row, &x1) in values.iter().zip(&xs) {
        for (s, &x2) in row.iter().zip(&xs) {
            let lhs = (s - f.eval(x1, x2)).abs();
            let rhs = spec.envelope(delta(op, 1, x1)?, delta(op, 2, x2)?);
            out.push(BoundReport::new(x1, x2, lhs, rhs));
        }
    }
    Ok(out)
}

/// `(S((t1−x1)²), S((t2−x2)²))` at a point, for reporting.
pub fn central_pair(op: &BivariateOperator, x1: f64, x2: f64) -> Result<(f64, f64)> {
    Ok((
        central_moment_closed(op, 1, x1, x2)?,
        central_moment_closed(op, 2, x1, x2)?,
    ))
}
