//! Gauss rules used throughout: Gauss–Legendre (f64 and double-double),
//! Gauss–Chebyshev of the first and second kind, and the whole-line rule
//! that integrates against the GUE density.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::ddouble::DD;

/// Nodes and weights of a rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// The rule mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        Rule {
            nodes: self.nodes.iter().map(|&x| c + h * x).collect(),
            weights: self.weights.iter().map(|&w| h * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    if n == 1 {
        return Rule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Cached `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

/// Gauss–Legendre rule in double-double precision on `[-1, 1]`.
pub fn gauss_legendre_dd(n: usize) -> (Vec<DD>, Vec<DD>) {
    let base = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in &base.nodes {
        let mut x = DD::from_f64(x0);
        let mut dp = DD::ONE;
        for _ in 0..3 {
            let mut p0 = DD::ONE;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = (x * p1).mul_f64(2.0 * kf - 1.0) - p0.mul_f64(kf - 1.0);
                p0 = p1;
                p1 = p2 / DD::from_f64(kf);
            }
            dp = (x * p1 - p0).mul_f64(n as f64) / (x * x - DD::ONE);
            x -= p1 / dp;
        }
        let w = DD::from_f64(2.0) / ((DD::ONE - x * x) * dp * dp);
        nodes.push(x);
        weights.push(w);
    }
    (nodes, weights)
}

/// Midpoint angles `θ_i = (i + 1/2)π/m` of the `m`-point Gauss–Chebyshev
/// rule of the first kind. With `x = 2cos θ`,
/// `(1/π)∫ f(x)/√(4−x²) dx ≈ (1/m) Σ f(2cos θ_i)`.
pub fn chebyshev_angles(m: usize) -> Vec<f64> {
    (0..m).map(|i| (i as f64 + 0.5) * PI / m as f64).collect()
}

/// Semicircle average `(1/2π)∫ g(s)√(4−s²) ds` by the `m`-point
/// Gauss–Chebyshev rule of the second kind; exact for polynomials of
/// degree below `2m`.
pub fn semicircle_rule<T, F>(m: usize, mut g: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: FnMut(f64) -> T,
{
    let mut acc = T::default();
    let scale = 2.0 / (m as f64 + 1.0);
    for i in 1..=m {
        let th = i as f64 * PI / (m as f64 + 1.0);
        let s = th.sin();
        acc = acc + g(2.0 * th.cos()) * (scale * s * s);
    }
    acc
}

/// Composite Gauss–Legendre rule on `[lo, hi]` with `per_panel` nodes per
/// panel. Panels start at width `h0` next to `center` and double outward up
/// to `hmax`, which resolves an integrand with a nearby complex pole over
/// `center` at distance about `h0`.
pub fn graded_rule(lo: f64, hi: f64, center: f64, h0: f64, hmax: f64, per_panel: usize) -> Rule {
    let c = center.clamp(lo, hi);
    let mut breaks = vec![c];
    for dir in [-1.0, 1.0] {
        let mut x = c;
        let mut h = h0.min(hmax);
        loop {
            let next = x + dir * h;
            if (dir < 0.0 && next <= lo) || (dir > 0.0 && next >= hi) {
                breaks.push(if dir < 0.0 { lo } else { hi });
                break;
            }
            breaks.push(next);
            x = next;
            h = (2.0 * h).min(hmax);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let base = gauss_legendre(per_panel);
    let mut nodes = Vec::with_capacity(breaks.len() * per_panel);
    let mut weights = Vec::with_capacity(breaks.len() * per_panel);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let r = base.mapped(w[0], w[1]);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
    }
    Rule { nodes, weights }
}

/// Truncation and node policy for integrals against `h_n` over the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineQuadConfig {
    /// Nominal truncation radius.
    pub radius: f64,
    /// Nominal Gauss–Legendre node count.
    pub nodes: usize,
}

impl Default for LineQuadConfig {
    fn default() -> Self {
        LineQuadConfig {
            radius: 4.0,
            nodes: 512,
        }
    }
}

impl LineQuadConfig {
    /// Radius actually used for size `n`. Small `n` has Gaussian tails of
    /// width about `1/√n`, so the box grows until `n R²/2 ≥ 45`.
    pub fn effective_radius(&self, n: usize) -> f64 {
        self.radius.max((90.0 / n as f64).sqrt())
    }

    /// Node count actually used for size `n`. The density oscillates with
    /// frequency up to `2n` on `[-2, 2]`, so large `n` needs more nodes.
    pub fn effective_nodes(&self, n: usize) -> usize {
        self.nodes.max(8 * n + 64)
    }

    pub fn rule(&self, n: usize) -> Rule {
        let r = self.effective_radius(n);
        gauss_legendre(self.effective_nodes(n)).mapped(-r, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(20);
        for p in 0..40 {
            let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            let got = r.integrate(|x| x.powi(p));
            assert!((got - want).abs() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn large_rule_weights_sum() {
        let r = gauss_legendre(512);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        let e = r.integrate(f64::exp);
        assert!((e - (1f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn dd_rule_is_sharper() {
        let (x, w) = gauss_legendre_dd(64);
        let mut acc = DD::ZERO;
        for (xi, wi) in x.iter().zip(&w) {
            acc += *wi * xi.powi(10);
        }
        let want = DD::ratio(2.0, 11.0);
        assert!((acc - want).abs().hi < 1e-30);
    }

    #[test]
    fn semicircle_moments() {
        let m0: f64 = semicircle_rule(64, |_| 1.0);
        let m2: f64 = semicircle_rule(64, |x| x * x);
        let m4: f64 = semicircle_rule(64, |x| x.powi(4));
        let m6: f64 = semicircle_rule(64, |x| x.powi(6));
        assert!((m0 - 1.0).abs() < 1e-14);
        assert!((m2 - 1.0).abs() < 1e-14);
        assert!((m4 - 2.0).abs() < 1e-14);
        assert!((m6 - 5.0).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_moment_identity() {
        // (1/π)∫ x^p T_k(x/2)/√(4−x²) dx = binom(p, (p−k)/2) for p−k even.
        let th = chebyshev_angles(64);
        for p in 0..=12i32 {
            for k in 0..=6i32 {
                let got: f64 = th
                    .iter()
                    .map(|&t| (2.0 * t.cos()).powi(p) * (k as f64 * t).cos())
                    .sum::<f64>()
                    / th.len() as f64;
                let want = if p >= k && (p - k) % 2 == 0 {
                    let m = ((p - k) / 2) as u64;
                    binom(p as u64, m) as f64
                } else {
                    0.0
                };
                assert!((got - want).abs() < 1e-10, "p={p} k={k} got={got}");
            }
        }
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn graded_rule_near_pole() {
        // ∫_{-4}^{4} dx/((x − a)² + b²) = (atan((4−a)/b) + atan((4+a)/b))/b
        let (a, b) = (0.7, 0.05);
        let r = graded_rule(-4.0, 4.0, a, b, 0.5, 32);
        let got = r.integrate(|x| 1.0 / ((x - a).powi(2) + b * b));
        let want = (((4.0 - a) / b).atan() + ((4.0 + a) / b).atan()) / b;
        assert!((got - want).abs() < 1e-12 * want);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 8.0).abs() < 1e-13);
    }
}
