#![allow(dead_code)]

/// `(p^k − q^k)/(p − q)` straight from the definition.
pub fn bracket(k: usize, p: f64, q: f64) -> f64 {
    (p.powi(k as i32) - q.powi(k as i32)) / (p - q)
}

/// Row `n` of the (p,q)-binomial triangle via `C(n,k) = p^k C(n-1,k) + q^{n-k} C(n-1,k-1)`.
pub fn binomial_row(n: usize, p: f64, q: f64) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 1..=n {
        let mut next = vec![1.0; m + 1];
        for k in 1..m {
            next[k] = p.powi(k as i32) * row[k] + q.powi((m - k) as i32) * row[k - 1];
        }
        row = next;
    }
    row
}

/// Direct weights and nodes of one axis, canonical exponent.
pub struct Reference {
    pub weights: Vec<f64>,
    pub nodes: Vec<f64>,
}

impl Reference {
    pub fn new(n: usize, l: usize, p: f64, q: f64, alpha: f64, beta: f64, x: f64) -> Self {
        let big_n = n + l;
        let row = binomial_row(big_n, p, q);
        let tri = |k: usize| (k * k.saturating_sub(1) / 2) as f64;
        let weights = (0..=big_n)
            .map(|nu| {
                let rising: f64 = (0..big_n - nu)
                    .map(|j| p.powi(j as i32) - q.powi(j as i32) * x)
                    .product();
                p.powf(tri(nu) - tri(big_n)) * row[nu] * x.powi(nu as i32) * rising
            })
            .collect();
        let denom = bracket(n, p, q) + beta;
        let nodes = (0..=big_n)
            .map(|nu| (p.powi((big_n - nu) as i32) * bracket(nu, p, q) + alpha) / denom)
            .collect();
        Self { weights, nodes }
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weights.iter().zip(&self.nodes).map(|(w, t)| w * f(*t)).sum()
    }
}

/// q-Schurer-Stancu on one axis: Gaussian binomials and `∏(1 − q^j x)`.
pub fn q_reference(n: usize, l: usize, q: f64, alpha: f64, beta: f64, x: f64) -> Reference {
    let big_n = n + l;
    let mut row = vec![1.0];
    for m in 1..=big_n {
        let mut next = vec![1.0; m + 1];
        for k in 1..m {
            next[k] = row[k - 1] + q.powi(k as i32) * row[k];
        }
        row = next;
    }
    let q_int = |k: usize| (0..k).map(|j| q.powi(j as i32)).sum::<f64>();
    let weights = (0..=big_n)
        .map(|nu| {
            let rising: f64 = (0..big_n - nu).map(|j| 1.0 - q.powi(j as i32) * x).product();
            row[nu] * x.powi(nu as i32) * rising
        })
        .collect();
    let nodes = (0..=big_n).map(|nu| (q_int(nu) + alpha) / (q_int(n) + beta)).collect();
    Reference { weights, nodes }
}

/// `Σ Σ w1 w2 f(t1, t2)` over two axis references.
pub fn apply2(r1: &Reference, r2: &Reference, f: impl Fn(f64, f64) -> f64) -> f64 {
    r1.weights
        .iter()
        .zip(&r1.nodes)
        .map(|(w1, t1)| w1 * r2.apply(|t2| f(*t1, t2)))
        .sum()
}

/// Weights `ν = 0, step, 2·step, …` of an axis of degree `big_n` by summing
/// logarithms of every factor.
pub fn log_route_weights(big_n: usize, p: f64, q: f64, x: f64, step: usize) -> Vec<(usize, f64)> {
    let ln_bracket = |k: usize| {
        let r = q / p;
        (k as f64 - 1.0) * p.ln() + (1.0 - r.powi(k as i32)).ln() - (1.0 - r).ln()
    };
    let mut ln_fact = vec![0.0f64; big_n + 1];
    for k in 1..=big_n {
        ln_fact[k] = ln_fact[k - 1] + ln_bracket(k);
    }
    let tri = |k: usize| (k * k.saturating_sub(1) / 2) as f64;
    (0..=big_n)
        .step_by(step)
        .map(|nu| {
            let ln_rising: f64 = (0..big_n - nu)
                .map(|j| (p.powi(j as i32) - q.powi(j as i32) * x).ln())
                .sum();
            let ln_w = (tri(nu) - tri(big_n)) * p.ln() + ln_fact[big_n] - ln_fact[nu] - ln_fact[big_n - nu]
                + nu as f64 * x.ln()
                + ln_rising;
            (nu, ln_w.exp())
        })
        .collect()
}
