mod common;

use approx::assert_relative_eq;
use common::{bracket, log_route_weights, q_reference, Reference};
use proptest::prelude::*;
use schurer_stancu::moments::moment_oracle;
use schurer_stancu::operator::{uniform_grid, Reduction};
use schurer_stancu::{AxisConfig, BivariateOperator, NodeExponent, PqPair, TensorGrid};

fn axis(n: u32, l: u32, p: f64, q: f64, alpha: f64, beta: f64) -> AxisConfig {
    AxisConfig::new(n, l, PqPair::new(p, q).unwrap(), alpha, beta).unwrap()
}

#[test]
fn worked_axis_examples() {
    let a = axis(2, 1, 1.0, 0.5, 1.0, 2.0);
    let weights = a.weights(0.5).unwrap();
    assert_relative_eq!(weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    assert_relative_eq!(a.node(0).unwrap(), 1.0 / 3.5, max_relative = 1e-15);
    assert_relative_eq!(a.node(2).unwrap(), 2.5 / 3.5, max_relative = 1e-15);
    assert_relative_eq!(a.node(3).unwrap(), 2.75 / 3.5, max_relative = 1e-15);
    // [3]·0.5 + 1 over [2] + 2 with [3] = 1.75, [2] = 1.5
    assert_relative_eq!(
        a.apply_univariate(|t| t, 0.5).unwrap(),
        1.875 / 3.5,
        max_relative = 1e-14
    );
    assert_relative_eq!(a.apply_univariate(|_| 4.2, 0.37).unwrap(), 4.2, max_relative = 1e-14);
    let f = |t: f64| (3.0 * t).sin();
    assert_eq!(a.apply_univariate(f, 0.0).unwrap(), f(1.0 / 3.5));
}

#[test]
fn bivariate_examples() {
    let op = BivariateOperator::new(axis(2, 1, 1.0, 0.5, 1.0, 2.0), axis(3, 0, 0.9, 0.6, 0.5, 0.5));
    assert_relative_eq!(op.apply(|_, _| 1.0, 0.3, 0.7).unwrap(), 1.0, epsilon = 1e-15);
    let m1 = op.axis1.apply_univariate(|t| t, 0.3).unwrap();
    let m2 = op.axis2.apply_univariate(|t| t, 0.7).unwrap();
    assert_relative_eq!(op.apply(|a, b| a * b, 0.3, 0.7).unwrap(), m1 * m2, max_relative = 1e-14);
    let f = |a: f64, b: f64| (a - b).exp();
    let corner = op.apply(f, 0.0, 0.0).unwrap();
    assert_eq!(corner, f(op.axis1.node(0).unwrap(), op.axis2.node(0).unwrap()));
}

#[test]
fn reductions_match_direct_formulas() {
    let xs = uniform_grid(0.0, 1.0, 21).unwrap();
    let f = |a: f64, b: f64| (a + 2.0 * b).sin() + a * a * b;
    let cases = [
        (
            Reduction::QSchurerStancu,
            axis(5, 2, 0.9, 0.6, 1.0, 2.0),
            axis(4, 2, 0.8, 0.3, 0.5, 0.5),
        ),
        (
            Reduction::PqBernsteinSchurer,
            axis(5, 2, 0.9, 0.6, 1.0, 2.0),
            axis(4, 3, 0.8, 0.3, 0.5, 0.5),
        ),
        (
            Reduction::PqBernstein,
            axis(6, 2, 0.9, 0.6, 1.0, 2.0),
            axis(3, 1, 0.8, 0.3, 0.5, 0.5),
        ),
    ];
    for (target, a1, a2) in cases {
        let reduced = BivariateOperator::new(a1, a2).reduce(target);
        let grid = TensorGrid::new(&reduced, &xs, &xs).unwrap().apply(f);
        for (i, &x1) in xs.iter().enumerate() {
            for (j, &x2) in xs.iter().enumerate() {
                let reference = |a: &AxisConfig, x: f64| match target {
                    Reduction::QSchurerStancu => {
                        assert_eq!(a.pq().p(), 1.0);
                        q_reference(a.n() as usize, a.l() as usize, a.pq().q(), a.alpha(), a.beta(), x)
                    }
                    _ => Reference::new(
                        a.n() as usize,
                        a.l() as usize,
                        a.pq().p(),
                        a.pq().q(),
                        a.alpha(),
                        a.beta(),
                        x,
                    ),
                };
                let r1 = reference(&reduced.axis1, x1);
                let r2 = reference(&reduced.axis2, x2);
                let expect: f64 = r1
                    .weights
                    .iter()
                    .zip(&r1.nodes)
                    .map(|(w1, t1)| w1 * r2.apply(|t2| f(*t1, t2)))
                    .sum();
                assert!(
                    (grid[i][j] - expect).abs() <= 1e-12,
                    "{target:?} at ({x1}, {x2}): {} vs {expect}",
                    grid[i][j]
                );
            }
        }
        match target {
            Reduction::QSchurerStancu => {}
            Reduction::PqBernsteinSchurer => {
                assert_eq!((reduced.axis1.alpha(), reduced.axis1.beta()), (0.0, 0.0));
                let a = &reduced.axis1;
                for nu in 0..=a.degree() {
                    let expect = a.pq().p().powi((a.degree() - nu) as i32) * bracket(nu, a.pq().p(), a.pq().q())
                        / bracket(a.n() as usize, a.pq().p(), a.pq().q());
                    assert_relative_eq!(a.node(nu).unwrap(), expect, max_relative = 1e-13);
                }
            }
            Reduction::PqBernstein => {
                assert_eq!(reduced.axis1.l(), 0);
                assert_eq!(reduced.axis2.l(), 0);
            }
        }
    }
}

#[test]
fn q_reduction_weights_match_pointwise() {
    let a = axis(6, 2, 0.9, 0.6, 1.0, 2.0);
    let reduced = BivariateOperator::symmetric(a).reduce(Reduction::QSchurerStancu).axis1;
    for x in uniform_grid(0.0, 1.0, 21).unwrap() {
        let reference = q_reference(6, 2, 0.6, 1.0, 2.0, x);
        for (got, expect) in reduced.weights(x).unwrap().iter().zip(&reference.weights) {
            assert!((got - expect).abs() < 1e-14);
        }
    }
}

#[test]
fn large_degree_weights() {
    // n + l = 2000 with p = 0.999, q = 0.998
    let a = axis(1997, 3, 0.999, 0.998, 0.5, 1.0);
    for x in [1e-3, 0.1, 0.37, 0.5, 0.9, 0.999] {
        let w = a.weights(x).unwrap();
        assert!(w.iter().all(|&v| v >= 0.0));
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "sum {total} at x={x}");
        for (nu, expect) in log_route_weights(2000, 0.999, 0.998, x, 37) {
            if expect > 1e-200 {
                assert!(
                    (w[nu] / expect - 1.0).abs() < 1e-9,
                    "nu={nu} x={x}: {} vs {expect}",
                    w[nu]
                );
            } else {
                assert!(w[nu] < 1e-190);
            }
        }
    }
}

fn arb_axis() -> impl Strategy<Value = AxisConfig> {
    (1u32..40, 0u32..4, 0.3f64..=1.0, 0.02f64..0.98, 0.0f64..2.0, 0.0f64..1.0)
        .prop_map(|(n, l, p, ratio, beta, frac)| axis(n, l, p, p * ratio, beta * frac, beta))
}

proptest! {
    #[test]
    fn partition_of_unity_and_nonnegativity(a in arb_axis(), x in 0.0f64..=1.0) {
        let w = a.weights(x).unwrap();
        prop_assert!(w.iter().all(|&v| v >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let tri = (a.degree() * (a.degree() - 1) / 2) as f64;
        if a.degree() <= 60 && a.pq().p().powf(-tri) < 1e200 {
            let reference = Reference::new(a.n() as usize, a.l() as usize, a.pq().p(), a.pq().q(), a.alpha(), a.beta(), x);
            prop_assert!((reference.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (got, expect) in w.iter().zip(&reference.weights) {
                prop_assert!((got - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn nodes_are_monotone(a in arb_axis()) {
        for exponent in [NodeExponent::Canonical, NodeExponent::PaperLiteral] {
            let nodes = a.with_node_exponent(exponent).nodes();
            prop_assert!(nodes.windows(2).all(|w| w[1] >= w[0]), "{exponent:?}: {nodes:?}");
        }
        let nodes = a.nodes();
        prop_assert!(nodes[0] >= 0.0);
        prop_assert!(*nodes.last().unwrap() <= a.domain_end() + 1e-12);
    }

    #[test]
    fn operator_is_positive(a1 in arb_axis(), a2 in arb_axis(), x1 in 0.0f64..=1.0, x2 in 0.0f64..=1.0, c in 0.0f64..4.0) {
        let op = BivariateOperator::new(a1, a2);
        let value = op.apply(|s, t| (s - c).powi(2) * (t - c / 2.0).abs(), x1, x2).unwrap();
        prop_assert!(value >= 0.0);
    }

    #[test]
    fn separable_functions_factorize(a1 in arb_axis(), a2 in arb_axis(), x1 in 0.0f64..=1.0, x2 in 0.0f64..=1.0) {
        let op = BivariateOperator::new(a1, a2);
        let g = |s: f64| (1.3 * s).cos() + 2.0;
        let h = |t: f64| t * t + 0.5;
        let both = op.apply(|s, t| g(s) * h(t), x1, x2).unwrap();
        let split = a1.apply_univariate(g, x1).unwrap() * a2.apply_univariate(h, x2).unwrap();
        prop_assert!((both - split).abs() <= 1e-12 * split.abs().max(1.0));
        let oracle = moment_oracle(&op, |s, t| g(s) * h(t), x1, x2).unwrap();
        prop_assert!((both - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    }

    #[test]
    fn bernstein_reduction_interpolates_endpoints(a in arb_axis()) {
        let b = BivariateOperator::symmetric(a).reduce(Reduction::PqBernstein).axis1;
        let f = |t: f64| (2.0 * t).exp() - t;
        prop_assert_eq!(b.apply_univariate(f, 0.0).unwrap(), f(0.0));
        prop_assert!((b.apply_univariate(f, 1.0).unwrap() - f(1.0)).abs() <= 1e-15 * f(1.0));
    }
}
