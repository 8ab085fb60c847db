//! Catalog of test functions with hand-derived metadata.
//!
//! All metadata refers to a rectangle `[0,A] × [0,B]` (for an operator,
//! `A = l1 + 1`, `B = l2 + 1`, so `A, B ≥ 1`). Below `a = min(δ1, A)` and
//! `b = min(δ2, B)` are the largest coordinate offsets realisable inside the
//! rectangle.
//!
//! Total modulus `ω(f; δ1, δ2) = sup |f(t) − f(t')|` over `|t1−t1'| ≤ δ1`,
//! `|t2−t2'| ≤ δ2`:
//!
//! | function | ω(f; δ1, δ2) | derivation |
//! |---|---|---|
//! | constant | 0 | |
//! | `t1` | `a` | |
//! | `t1 + t2` | `a + b` | increments add |
//! | `t1 t2` | `A b + B a − a b` | `xy − (x−s)(y−t) = xt + ys − st` is increasing in `x, y, s, t` on the rectangle |
//! | `t1²` | `2 A a − a²` | `x² − (x−s)² = 2xs − s²`, maximal at `x = A`, `s = a` |
//! | `t1² + t2²` | sum of the two one-axis moduli | the maximisers are compatible |
//! | `exp(t1+t2)` | `e^{A+B} (1 − e^{−(a+b)})` | monotone, steepest at the top corner |
//! | `\|t1 − 1/2\|` | `min(δ1, A − 1/2)` | 1-Lipschitz; range is `[0, A − 1/2]` and is attained over distance `A − 1/2` |
//! | smooth ramp `sqrt((t1−1/2)² + w²) − w` | `g(A) − g(max(1/2, A − a))` | even, convex and increasing in `\|t1 − 1/2\|`, and `A − 1/2 ≥ 1/2` |
//!
//! `sin(πt1) sin(πt2)` carries no exact modulus: only Lipschitz envelopes are
//! known, and those are upper bounds.
//!
//! The Euclidean modulus `ω(f; δ)` (pairs with `‖t − t'‖₂ ≤ δ`) is known for
//! the constant, coordinate, sum, exponential and ramp entries; for the sum it
//! is the maximum of `d1 + d2` over the disk of radius `δ` clipped to the
//! box `[0,A] × [0,B]`.
//!
//! The `C_B²` norm is `‖g‖ + ‖∂1 g‖ + ‖∂1² g‖ + ‖∂2 g‖ + ‖∂2² g‖` (sup norms on
//! the rectangle). For `sin(πt1) sin(πt2)` it is `1 + 2π + 2π²` since the
//! rectangle contains `t = 1/2` on both axes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// The rectangle `[0, x_max] × [0, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_max: f64, y_max: f64) -> Self {
        Self { x_max, y_max }
    }

    pub fn square(side: f64) -> Self {
        Self::new(side, side)
    }
}

/// Partial derivatives carried as metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partial {
    D1,
    D11,
    D2,
    D22,
}

type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    /// `t1^i t2^j` for the five non-constant Korovkin monomials.
    Monomial(u32, u32),
    SquareSum,
    Sum,
    ExpSum,
    SinSin,
    AbsRamp,
    SmoothRamp(f64),
    Custom(Evaluator),
}

#[derive(Clone)]
pub struct TestFunction {
    name: String,
    kind: Kind,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

/// Largest `d1 + d2` with `d1² + d2² ≤ δ²`, `0 ≤ d1 ≤ A`, `0 ≤ d2 ≤ B`.
fn clipped_disk_sum(delta: f64, rect: Rect) -> f64 {
    let diag = delta / std::f64::consts::SQRT_2;
    let (small, large) = if rect.x_max <= rect.y_max {
        (rect.x_max, rect.y_max)
    } else {
        (rect.y_max, rect.x_max)
    };
    if diag <= small {
        return 2.0 * diag;
    }
    small + large.min((delta * delta - small * small).sqrt())
}

impl TestFunction {
    fn named(name: impl Into<String>, kind: Kind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::named(format!("const({c})"), Kind::Constant(c))
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::named(name, Kind::Custom(Arc::new(f)))
    }

    /// `sqrt((t1 − 1/2)² + w²) − w`, a `C²` approximation of `|t1 − 1/2|`.
    pub fn smooth_ramp(width: f64) -> Self {
        Self::named(format!("smooth_ramp:{width}"), Kind::SmoothRamp(width))
    }

    /// Names accepted by [`Self::by_name`], in catalog order.
    pub const NAMES: [&'static str; 13] = [
        "const1", "e00", "e10", "e01", "e11", "e20", "e02", "e20+e02", "sum", "product", "exp_sum", "sin_sin",
        "abs_ramp",
    ];

    pub fn by_name(name: &str) -> Result<Self> {
        let kind = match name {
            "const1" | "e00" => Kind::Constant(1.0),
            "e10" => Kind::Monomial(1, 0),
            "e01" => Kind::Monomial(0, 1),
            "e11" | "product" => Kind::Monomial(1, 1),
            "e20" => Kind::Monomial(2, 0),
            "e02" => Kind::Monomial(0, 2),
            "e20+e02" => Kind::SquareSum,
            "sum" | "e10+e01" => Kind::Sum,
            "exp_sum" => Kind::ExpSum,
            "sin_sin" => Kind::SinSin,
            "abs_ramp" => Kind::AbsRamp,
            other => {
                if let Some(w) = other.strip_prefix("smooth_ramp:") {
                    match w.parse::<f64>() {
                        Ok(w) if w > 0.0 => return Ok(Self::smooth_ramp(w)),
                        _ => return Err(Error::UnknownFunction(other.to_owned())),
                    }
                }
                return Err(Error::UnknownFunction(other.to_owned()));
            }
        };
        Ok(Self::named(name, kind))
    }

    pub fn catalog() -> Vec<Self> {
        Self::NAMES
            .iter()
            .map(|n| Self::by_name(n).expect("catalog names parse"))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn formula(&self) -> String {
        match &self.kind {
            Kind::Constant(c) => format!("{c}"),
            Kind::Monomial(1, 0) => "t1".into(),
            Kind::Monomial(0, 1) => "t2".into(),
            Kind::Monomial(1, 1) => "t1*t2".into(),
            Kind::Monomial(2, 0) => "t1^2".into(),
            Kind::Monomial(0, 2) => "t2^2".into(),
            Kind::Monomial(i, j) => format!("t1^{i}*t2^{j}"),
            Kind::SquareSum => "t1^2+t2^2".into(),
            Kind::Sum => "t1+t2".into(),
            Kind::ExpSum => "exp(t1+t2)".into(),
            Kind::SinSin => "sin(pi*t1)*sin(pi*t2)".into(),
            Kind::AbsRamp => "|t1-0.5|".into(),
            Kind::SmoothRamp(w) => format!("sqrt((t1-0.5)^2+{w}^2)-{w}"),
            Kind::Custom(_) => "<custom>".into(),
        }
    }

    pub fn eval(&self, t1: f64, t2: f64) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Monomial(i, j) => t1.powi(*i as i32) * t2.powi(*j as i32),
            Kind::SquareSum => t1 * t1 + t2 * t2,
            Kind::Sum => t1 + t2,
            Kind::ExpSum => (t1 + t2).exp(),
            Kind::SinSin => (PI * t1).sin() * (PI * t2).sin(),
            Kind::AbsRamp => (t1 - 0.5).abs(),
            Kind::SmoothRamp(w) => ((t1 - 0.5).powi(2) + w * w).sqrt() - w,
            Kind::Custom(f) => f(t1, t2),
        }
    }

    /// Exact total modulus `ω(f; δ1, δ2)` on `rect`, when derivable.
    pub fn exact_total_modulus(&self, delta1: f64, delta2: f64, rect: Rect) -> Option<f64> {
        let (big_a, big_b) = (rect.x_max, rect.y_max);
        let a = delta1.max(0.0).min(big_a);
        let b = delta2.max(0.0).min(big_b);
        Some(match &self.kind {
            Kind::Constant(_) => 0.0,
            Kind::Monomial(1, 0) => a,
            Kind::Monomial(0, 1) => b,
            Kind::Monomial(1, 1) => big_a * b + big_b * a - a * b,
            Kind::Monomial(2, 0) => 2.0 * big_a * a - a * a,
            Kind::Monomial(0, 2) => 2.0 * big_b * b - b * b,
            Kind::SquareSum => 2.0 * big_a * a - a * a + 2.0 * big_b * b - b * b,
            Kind::Sum => a + b,
            Kind::ExpSum => (big_a + big_b).exp() * -(-(a + b)).exp_m1(),
            Kind::AbsRamp => delta1.max(0.0).min(big_a - 0.5),
            Kind::SmoothRamp(_) => self.eval(big_a, 0.0) - self.eval((big_a - a).max(0.5), 0.0),
            Kind::Monomial(..) | Kind::SinSin | Kind::Custom(_) => return None,
        })
    }

    /// Exact Euclidean modulus `ω(f; δ)` on `rect`, when derivable.
    pub fn exact_euclidean_modulus(&self, delta: f64, rect: Rect) -> Option<f64> {
        let delta = delta.max(0.0);
        Some(match &self.kind {
            Kind::Constant(_) => 0.0,
            Kind::Monomial(1, 0) => delta.min(rect.x_max),
            Kind::Monomial(0, 1) => delta.min(rect.y_max),
            Kind::Sum => clipped_disk_sum(delta, rect),
            Kind::ExpSum => (rect.x_max + rect.y_max).exp() * -(-clipped_disk_sum(delta, rect)).exp_m1(),
            Kind::AbsRamp | Kind::SmoothRamp(_) => self.exact_total_modulus(delta, 0.0, rect)?,
            _ => return None,
        })
    }

    /// Per-axis Lipschitz constants `(L1, L2)` on `rect`.
    pub fn lipschitz(&self, rect: Rect) -> Option<(f64, f64)> {
        let (big_a, big_b) = (rect.x_max, rect.y_max);
        Some(match &self.kind {
            Kind::Constant(_) => (0.0, 0.0),
            Kind::Monomial(1, 0) => (1.0, 0.0),
            Kind::Monomial(0, 1) => (0.0, 1.0),
            Kind::Monomial(1, 1) => (big_b, big_a),
            Kind::Monomial(2, 0) => (2.0 * big_a, 0.0),
            Kind::Monomial(0, 2) => (0.0, 2.0 * big_b),
            Kind::SquareSum => (2.0 * big_a, 2.0 * big_b),
            Kind::Sum => (1.0, 1.0),
            Kind::ExpSum => {
                let e = (big_a + big_b).exp();
                (e, e)
            }
            Kind::SinSin => (PI, PI),
            Kind::AbsRamp => (1.0, 0.0),
            Kind::SmoothRamp(w) => {
                let u = big_a - 0.5;
                (u / (u * u + w * w).sqrt(), 0.0)
            }
            Kind::Monomial(..) | Kind::Custom(_) => return None,
        })
    }

    /// Partial derivative metadata; `None` when not carried or not `C²`.
    pub fn partial(&self, which: Partial, t1: f64, t2: f64) -> Option<f64> {
        use Partial::*;
        Some(match (&self.kind, which) {
            (Kind::Constant(_), _) => 0.0,
            (Kind::Monomial(1, 0), D1) => 1.0,
            (Kind::Monomial(1, 0), _) => 0.0,
            (Kind::Monomial(0, 1), D2) => 1.0,
            (Kind::Monomial(0, 1), _) => 0.0,
            (Kind::Monomial(1, 1), D1) => t2,
            (Kind::Monomial(1, 1), D2) => t1,
            (Kind::Monomial(1, 1), _) => 0.0,
            (Kind::Monomial(2, 0), D1) => 2.0 * t1,
            (Kind::Monomial(2, 0), D11) => 2.0,
            (Kind::Monomial(2, 0), _) => 0.0,
            (Kind::Monomial(0, 2), D2) => 2.0 * t2,
            (Kind::Monomial(0, 2), D22) => 2.0,
            (Kind::Monomial(0, 2), _) => 0.0,
            (Kind::SquareSum, D1) => 2.0 * t1,
            (Kind::SquareSum, D2) => 2.0 * t2,
            (Kind::SquareSum, _) => 2.0,
            (Kind::Sum, D1 | D2) => 1.0,
            (Kind::Sum, _) => 0.0,
            (Kind::ExpSum, _) => (t1 + t2).exp(),
            (Kind::SinSin, D1) => PI * (PI * t1).cos() * (PI * t2).sin(),
            (Kind::SinSin, D2) => PI * (PI * t1).sin() * (PI * t2).cos(),
            (Kind::SinSin, _) => -PI * PI * (PI * t1).sin() * (PI * t2).sin(),
            (Kind::SmoothRamp(w), D1) => {
                let u = t1 - 0.5;
                u / (u * u + w * w).sqrt()
            }
            (Kind::SmoothRamp(w), D11) => w * w / ((t1 - 0.5).powi(2) + w * w).powf(1.5),
            (Kind::SmoothRamp(_), _) => 0.0,
            (Kind::Monomial(..) | Kind::AbsRamp | Kind::Custom(_), _) => return None,
        })
    }

    /// `sup |f|` on `rect`.
    pub fn sup_norm(&self, rect: Rect) -> Option<f64> {
        let (big_a, big_b) = (rect.x_max, rect.y_max);
        Some(match &self.kind {
            Kind::Constant(c) => c.abs(),
            Kind::Monomial(i, j) => big_a.powi(*i as i32) * big_b.powi(*j as i32),
            Kind::SquareSum => big_a * big_a + big_b * big_b,
            Kind::Sum => big_a + big_b,
            Kind::ExpSum => (big_a + big_b).exp(),
            Kind::SinSin => 1.0,
            Kind::AbsRamp => big_a - 0.5,
            Kind::SmoothRamp(_) => self.eval(big_a, 0.0),
            Kind::Custom(_) => return None,
        })
    }

    /// `‖f‖_{C_B²}` on `rect`.
    pub fn cb2_norm(&self, rect: Rect) -> Option<f64> {
        let (big_a, big_b) = (rect.x_max, rect.y_max);
        let sup = self.sup_norm(rect)?;
        let derivatives = match &self.kind {
            Kind::Constant(_) => 0.0,
            Kind::Monomial(1, 0) | Kind::Monomial(0, 1) => 1.0,
            Kind::Monomial(1, 1) => big_a + big_b,
            Kind::Monomial(2, 0) => 2.0 * big_a + 2.0,
            Kind::Monomial(0, 2) => 2.0 * big_b + 2.0,
            Kind::SquareSum => 2.0 * big_a + 2.0 * big_b + 4.0,
            Kind::Sum => 2.0,
            Kind::ExpSum => 4.0 * (big_a + big_b).exp(),
            Kind::SinSin => 2.0 * PI + 2.0 * PI * PI,
            Kind::SmoothRamp(w) => self.lipschitz(rect)?.0 + 1.0 / w,
            Kind::Monomial(..) | Kind::AbsRamp | Kind::Custom(_) => return None,
        };
        Some(sup + derivatives)
    }

    pub fn has_exact_modulus(&self) -> bool {
        self.exact_total_modulus(0.0, 0.0, Rect::square(1.0)).is_some()
    }
}

impl PartialEq for TestFunction {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

/// Row of the `catalog` listing.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub formula: String,
    pub exact_total_modulus: bool,
    pub exact_euclidean_modulus: bool,
    pub lipschitz: Option<(f64, f64)>,
    pub partials: bool,
    pub sup_norm: Option<f64>,
    pub cb2_norm: Option<f64>,
}

impl CatalogEntry {
    pub fn describe(f: &TestFunction, rect: Rect) -> Self {
        Self {
            name: f.name().to_owned(),
            formula: f.formula(),
            exact_total_modulus: f.exact_total_modulus(0.1, 0.1, rect).is_some(),
            exact_euclidean_modulus: f.exact_euclidean_modulus(0.1, rect).is_some(),
            lipschitz: f.lipschitz(rect),
            partials: f.partial(Partial::D11, 0.5, 0.5).is_some(),
            sup_norm: f.sup_norm(rect),
            cb2_norm: f.cb2_norm(rect),
        }
    }
}
