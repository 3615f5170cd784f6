//! Gauss-Legendre rules and a feature-aware panel integrator for the
//! thin-wire reaction integrals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, lazily built rule for `n` nodes.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates a real function over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Refinement policy: start at `initial_nodes` per panel half, double until
/// two successive estimates agree to `rel_tol`, give up past `max_nodes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 64,
            max_nodes: 1024,
            rel_tol: 1e-9,
        }
    }
}

/// Outcome of an adaptive integration that failed to settle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonConvergence {
    pub estimate: Complex64,
    pub residual: f64,
    pub nodes: usize,
}

/// Integrates a complex function over `[lo, hi]` whose only sharp features
/// sit at `breakpoints` and decay on the length scale `scale`.
///
/// Each sub-interval between features is halved, and every half is mapped
/// through `t = e ± scale * sinh(s)` toward its feature end `e`. Under that
/// map an integrand shaped like `1 / sqrt(scale² + t²)` becomes smooth in
/// `s`, so plain Gauss-Legendre converges geometrically.
pub fn integrate_with_features<F>(
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    scale: f64,
    nodes: usize,
    f: &F,
) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let rule = GaussLegendre::cached(nodes);
    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(lo);
    cuts.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let m = 0.5 * (a + b);
        total += clustered_half(&rule, a, m - a, scale, 1.0, f);
        total += clustered_half(&rule, b, b - m, scale, -1.0, f);
    }
    total
}

// Integral over [anchor, anchor + dir * len] with nodes clustered at `anchor`.
fn clustered_half<F>(
    rule: &GaussLegendre,
    anchor: f64,
    len: f64,
    scale: f64,
    dir: f64,
    f: &F,
) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let s_max = (len / scale).asinh();
    let half = 0.5 * s_max;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = half * (t + 1.0);
        let x = anchor + dir * scale * s.sinh();
        acc += f(x) * (w * scale * s.cosh());
    }
    acc * half
}

/// Doubles the node count until successive estimates agree.
pub fn integrate_adaptive<F>(
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    scale: f64,
    opts: &QuadratureOptions,
    f: &F,
) -> Result<Complex64, NonConvergence>
where
    F: Fn(f64) -> Complex64,
{
    let mut n = opts.initial_nodes.max(1);
    let mut prev = integrate_with_features(lo, hi, breakpoints, scale, n, f);
    loop {
        let next_n = n * 2;
        if next_n > opts.max_nodes {
            return Err(NonConvergence {
                estimate: prev,
                residual: f64::INFINITY,
                nodes: n,
            });
        }
        let next = integrate_with_features(lo, hi, breakpoints, scale, next_n, f);
        let diff = (next - prev).norm();
        let size = next.norm();
        if diff <= opts.rel_tol * size || diff == 0.0 {
            return Ok(next);
        }
        if next_n * 2 > opts.max_nodes {
            return Err(NonConvergence {
                estimate: next,
                residual: diff / size.max(f64::MIN_POSITIVE),
                nodes: next_n,
            });
        }
        prev = next;
        n = next_n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_sum_to_two() {
        for n in [1, 2, 5, 64, 1024] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn rule_is_exact_for_polynomials() {
        let r = GaussLegendre::new(8);
        // degree 15 is the highest integrated exactly by 8 nodes
        let got = r.integrate(0.0, 2.0, |x| x.powi(15));
        let exact = 2f64.powi(16) / 16.0;
        assert!((got - exact).abs() / exact < 1e-13);
    }

    #[test]
    fn sinh_map_handles_near_singular_peak() {
        let eps = 1e-4;
        let f = |x: f64| Complex64::new(1.0 / (eps * eps + x * x).sqrt(), 0.0);
        // ∫_{-1}^{1} dx / sqrt(eps² + x²) = 2 asinh(1/eps)
        let exact = 2.0 * (1.0 / eps).asinh();
        let got = integrate_adaptive(-1.0, 1.0, &[0.0], eps, &QuadratureOptions::default(), &f)
            .unwrap();
        assert!((got.re - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let f = |x: f64| Complex64::new((1e4 * x).sin().abs(), 0.0);
        let opts = QuadratureOptions {
            initial_nodes: 4,
            max_nodes: 16,
            rel_tol: 1e-14,
        };
        let err = integrate_adaptive(0.0, 1.0, &[], 1.0, &opts, &f).unwrap_err();
        assert!(err.residual > 0.0);
    }
}
