//! Finite-`n` Cauchy transforms, trace covariances through the kernel
//! `ρ_n`, and the `Γ`/`Υ` expansions of the two-dimensional transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::SmoothInput;
use crate::hermite::HermiteEvaluator;
use crate::quadrature::{gauss_legendre, graded_rule, LineQuadConfig, Rule};
use crate::stats::{fit_slope, SlopeFit};
use crate::symbolic::{gamma_l, upsilon_l, EtaFamily};

/// Smallest `|Im λ|` accepted inside the strip `|Re λ| ≤ 2.5`.
pub const MIN_IMAG: f64 = 0.05;
/// Outside `|Re λ| > 2.5` any non-real `λ` is accepted.
pub const REAL_MARGIN: f64 = 2.5;
/// `g2_exact` uses the diagonal formula when `λ = μ` exactly and a Taylor
/// form of the off-diagonal formula for `|λ − μ|` below this multiple of
/// `min(|Im λ|, 1)`.
pub const TAYLOR_BAND: f64 = 0.01;
/// `g2_expansion` uses the `Υ` series below this separation.
pub const DIAGONAL_SWITCH: f64 = 1e-6;

// Derivatives of G_n needed by the near-diagonal Taylor form.
const TAYLOR_ORDER: usize = 7;

/// Numerical parameters of the covariance engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovConfig {
    pub line: LineQuadConfig,
    /// Gauss–Legendre nodes per panel of the graded resolvent rule.
    pub panel_nodes: usize,
    /// Nodes per axis of the tensor rule for `∬ · ρ_n`.
    pub tensor_nodes: usize,
    /// Midpoint nodes per axis for integrals against the limit kernel `ρ`.
    pub limit_nodes: usize,
}

impl Default for CovConfig {
    fn default() -> Self {
        CovConfig {
            line: LineQuadConfig::default(),
            panel_nodes: 32,
            tensor_nodes: 256,
            limit_nodes: 256,
        }
    }
}

/// Rejects spectral parameters for which the quadrature is unreliable.
pub fn check_spectral(lambda: Complex64) -> Result<()> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::Domain(format!("spectral parameter {lambda} is not finite")));
    }
    let im = lambda.im.abs();
    if im == 0.0 || (im < MIN_IMAG && lambda.re.abs() <= REAL_MARGIN) {
        return Err(Error::Conditioning { lambda, im });
    }
    Ok(())
}

fn resolvent_rule(n: usize, lambda: Complex64, cfg: &CovConfig) -> Rule {
    let r = cfg.line.effective_radius(n);
    let panels = (cfg.line.effective_nodes(n) / cfg.panel_nodes).max(16);
    let hmax = 2.0 * r / panels as f64;
    graded_rule(-r, r, lambda.re, lambda.im.abs(), hmax, cfg.panel_nodes)
}

/// `G_n^{(k)}(λ) = ∫ (−1)^k k!/(λ−t)^{k+1} h_n(t) dt` for `k = 0..=order`.
pub fn resolvent_derivatives(n: usize, lambda: Complex64, order: usize, cfg: &CovConfig) -> Result<Vec<Complex64>> {
    check_spectral(lambda)?;
    let ev = HermiteEvaluator::new(n)?;
    let rule = resolvent_rule(n, lambda, cfg);
    let terms: Vec<Vec<Complex64>> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| {
            let inv = 1.0 / (lambda - t);
            let mut p = inv * (w * ev.density(t));
            let mut out = Vec::with_capacity(order + 1);
            let mut fact = 1.0;
            for k in 0..=order {
                out.push(p * fact);
                fact *= -((k + 1) as f64);
                p *= inv;
            }
            out
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); order + 1];
    for row in &terms {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    Ok(acc)
}

/// `G_n` and its first three derivatives at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventSet {
    pub n: usize,
    pub lambda: Complex64,
    pub g: Complex64,
    pub g1: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
    /// `G − λG′`.
    pub g_tilde: Complex64,
}

impl ResolventSet {
    fn from_derivatives(n: usize, lambda: Complex64, d: &[Complex64]) -> Self {
        ResolventSet {
            n,
            lambda,
            g: d[0],
            g1: d[1],
            g2: d[2],
            g3: d[3],
            g_tilde: d[0] - lambda * d[1],
        }
    }

    fn inv_n2(&self) -> f64 {
        1.0 / (self.n * self.n) as f64
    }

    /// `|n⁻²G‴ + (4−λ²)G′ + λG − 2|`.
    pub fn ode_residual(&self) -> f64 {
        let l = self.lambda;
        (self.g3 * self.inv_n2() + (4.0 - l * l) * self.g1 + l * self.g - 2.0).norm()
    }

    /// `|G̃² − 4G′² + 4G′ − n⁻²G″²|`.
    pub fn nonlinear_residual(&self) -> f64 {
        (self.g_tilde * self.g_tilde - 4.0 * self.g1 * self.g1 + 4.0 * self.g1
            - self.g2 * self.g2 * self.inv_n2())
        .norm()
    }
}

pub fn resolvent_set(n: usize, lambda: Complex64, cfg: &CovConfig) -> Result<ResolventSet> {
    let d = resolvent_derivatives(n, lambda, 3, cfg)?;
    Ok(ResolventSet::from_derivatives(n, lambda, &d))
}

/// Off-diagonal formula
/// `−(G̃(λ)G̃(μ) − (2G′(λ)−1)(2G′(μ)−1) + 1 − n⁻²G″(λ)G″(μ))/(2(λ−μ)²)`.
pub fn g2_off_diagonal(a: &ResolventSet, b: &ResolventSet) -> Complex64 {
    let num = a.g_tilde * b.g_tilde - (2.0 * a.g1 - 1.0) * (2.0 * b.g1 - 1.0) + 1.0 - a.g2 * b.g2 * a.inv_n2();
    let d = a.lambda - b.lambda;
    -num / (2.0 * d * d)
}

/// Diagonal formula `¼(λ²−4)G″² − G‴²/(4n²)`.
pub fn g2_diagonal(a: &ResolventSet) -> Complex64 {
    let l = a.lambda;
    0.25 * (l * l - 4.0) * a.g2 * a.g2 - a.g3 * a.g3 * (0.25 * a.inv_n2())
}

// Taylor expansion of the off-diagonal numerator in δ = μ − λ about λ,
// whose constant and linear terms vanish identically.
fn g2_taylor(n: usize, lambda: Complex64, d: &[Complex64], delta: Complex64) -> Complex64 {
    let inv_n2 = 1.0 / (n * n) as f64;
    let gt = |k: usize| (1.0 - k as f64) * d[k] - lambda * d[k + 1];
    let a0 = 2.0 * d[1] - 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    let mut fact = 2.0;
    for k in 2..=TAYLOR_ORDER {
        let c = gt(0) * gt(k) - a0 * 2.0 * d[k + 1] - d[2] * d[k + 2] * inv_n2;
        acc += c * pow / fact;
        pow *= delta;
        fact *= (k + 1) as f64;
    }
    -0.5 * acc
}

/// `G_n(λ, μ) = Cov{Tr(λ − X_n)^{−1}, Tr(μ − X_n)^{−1}}`.
pub fn g2_exact(n: usize, lambda: Complex64, mu: Complex64, cfg: &CovConfig) -> Result<Complex64> {
    check_spectral(mu)?;
    let delta = mu - lambda;
    if delta == Complex64::new(0.0, 0.0) {
        return Ok(g2_diagonal(&resolvent_set(n, lambda, cfg)?));
    }
    let band = TAYLOR_BAND * lambda.im.abs().min(1.0);
    if delta.norm() < band {
        let d = resolvent_derivatives(n, lambda, TAYLOR_ORDER + 2, cfg)?;
        return Ok(g2_taylor(n, lambda, &d, delta));
    }
    let a = resolvent_set(n, lambda, cfg)?;
    let b = resolvent_set(n, mu, cfg)?;
    Ok(g2_off_diagonal(&a, &b))
}

/// Expansion of `G_n(λ, μ)` to order `k` at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cov2Report {
    pub n: usize,
    pub lambda: Complex64,
    pub mu: Complex64,
    pub k: usize,
    /// Whether the `Υ` (diagonal) series was used.
    pub diagonal: bool,
    pub exact: Complex64,
    /// Expansion coefficients: `Γ_l/(2(λ−μ)²)` or `Υ_l/4`.
    pub coefficients: Vec<Complex64>,
    pub partial_sums: Vec<Complex64>,
    pub remainders: Vec<f64>,
    /// Rounding floor of the remainders.
    pub floor: f64,
}

/// Coefficients of `n^{−2l}`, `l = 0..=k`, in the expansion of `G_n(λ, μ)`.
pub fn g2_coefficients(lambda: Complex64, mu: Complex64, k: usize) -> Result<(bool, Vec<Complex64>)> {
    let family = EtaFamily::new(k + 1);
    let delta = lambda - mu;
    if delta.norm() < DIAGONAL_SWITCH {
        let c = (0..=k)
            .map(|l| upsilon_l(&family, l).evaluate(lambda).map(|v| v / 4.0))
            .collect::<Result<Vec<_>>>()?;
        Ok((true, c))
    } else {
        let c = (0..=k)
            .map(|l| gamma_l(&family, l).evaluate(lambda, mu).map(|v| v / (2.0 * delta * delta)))
            .collect::<Result<Vec<_>>>()?;
        Ok((false, c))
    }
}

fn cov2_report(
    n: usize,
    lambda: Complex64,
    mu: Complex64,
    diagonal: bool,
    coefficients: &[Complex64],
    cfg: &CovConfig,
) -> Result<Cov2Report> {
    let exact = if diagonal {
        g2_exact(n, lambda, lambda, cfg)?
    } else {
        g2_exact(n, lambda, mu, cfg)?
    };
    let nf = n as f64;
    let mut partial_sums = Vec::with_capacity(coefficients.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = exact.norm();
    for (l, c) in coefficients.iter().enumerate() {
        let term = c * nf.powi(-2 * l as i32);
        scale += term.norm();
        acc += term;
        partial_sums.push(acc);
    }
    let remainders = partial_sums.iter().map(|p| (exact - p).norm()).collect();
    Ok(Cov2Report {
        n,
        lambda,
        mu,
        k: coefficients.len() - 1,
        diagonal,
        exact,
        coefficients: coefficients.to_vec(),
        partial_sums,
        remainders,
        floor: 256.0 * f64::EPSILON * scale,
    })
}

pub fn g2_expansion(n: usize, lambda: Complex64, mu: Complex64, k: usize, cfg: &CovConfig) -> Result<Cov2Report> {
    let (diagonal, c) = g2_coefficients(lambda, mu, k)?;
    cov2_report(n, lambda, mu, diagonal, &c, cfg)
}

/// Remainder behaviour of the `G_n(λ, μ)` expansion over a ladder of `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cov2Ladder {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub k: usize,
    pub reports: Vec<Cov2Report>,
    /// Log-log slope of the order-`l` remainder, `l = 0..=k`.
    pub slopes: Vec<SlopeFit>,
}

pub fn g2_ladder(ns: &[usize], lambda: Complex64, mu: Complex64, k: usize, cfg: &CovConfig) -> Result<Cov2Ladder> {
    let (diagonal, c) = g2_coefficients(lambda, mu, k)?;
    let reports = ns
        .iter()
        .map(|&n| cov2_report(n, lambda, mu, diagonal, &c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let slopes = (0..=k)
        .map(|l| {
            let pts: Vec<_> = reports.iter().map(|r| (r.n as f64, r.remainders[l], r.floor)).collect();
            fit_slope(&pts)
        })
        .collect();
    Ok(Cov2Ladder {
        lambda,
        mu,
        k,
        reports,
        slopes,
    })
}

// Values of f at the nodes, and Δf over the tensor grid row by row.
struct Divided<'a> {
    f: &'a SmoothInput,
    nodes: &'a [f64],
    values: Vec<Complex64>,
}

impl<'a> Divided<'a> {
    fn new(f: &'a SmoothInput, nodes: &'a [f64]) -> Result<Self> {
        let values = nodes.iter().map(|&x| f.value(x)).collect::<Result<_>>()?;
        Ok(Divided { f, nodes, values })
    }

    fn get(&self, i: usize, j: usize) -> Result<Complex64> {
        let d = self.nodes[i] - self.nodes[j];
        if d.abs() > 1e-3 {
            Ok((self.values[i] - self.values[j]) / d)
        } else {
            self.f.divided_difference(self.nodes[i], self.nodes[j])
        }
    }
}

/// `Cov{Tr_n f(X_n), Tr_n g(X_n)} = ∬ Δf Δg ρ_n` by tensor Gauss–Legendre
/// quadrature over `[−R, R]²`.
pub fn cov_trace(f: &SmoothInput, g: &SmoothInput, n: usize, cfg: &CovConfig) -> Result<Complex64> {
    f.require_order(1)?;
    g.require_order(1)?;
    let ev = HermiteEvaluator::new(n)?;
    let r = cfg.line.effective_radius(n);
    let m = cfg.tensor_nodes.max(cfg.line.effective_nodes(n));
    let rule = gauss_legendre(m).mapped(-r, r);
    let phi: Vec<(f64, f64)> = rule.nodes.par_iter().map(|&x| ev.phi_pair(x)).collect();
    let df = Divided::new(f, &rule.nodes)?;
    let dg = Divided::new(g, &rule.nodes)?;
    let quarter_n = 0.25 * n as f64;
    let rows: Vec<Result<Complex64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let (ai, bi) = phi[i];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                let (aj, bj) = phi[j];
                let k = bi * aj - ai * bj;
                let rho = quarter_n * k * k;
                if rho == 0.0 {
                    continue;
                }
                acc += df.get(i, j)? * dg.get(i, j)? * (rule.weights[j] * rho);
            }
            Ok(acc * rule.weights[i])
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for row in rows {
        total += row?;
    }
    Ok(total)
}

/// `∬ Δf Δg ρ` over `(−2, 2)²`, the `n → ∞` limit of `cov_trace`. With
/// `x = 2cos θ` the measure is `π⁻²(1 − cos θ cos φ) dθ dφ` on `[0, π]²`,
/// integrated by the midpoint rule, which is spectrally accurate for these
/// even periodic integrands.
pub fn covariance_clt_limit(f: &SmoothInput, g: &SmoothInput, cfg: &CovConfig) -> Result<Complex64> {
    f.require_order(1)?;
    g.require_order(1)?;
    let m = cfg.limit_nodes;
    let h = PI / m as f64;
    let cosines: Vec<f64> = (0..m).map(|i| ((i as f64 + 0.5) * h).cos()).collect();
    let nodes: Vec<f64> = cosines.iter().map(|c| 2.0 * c).collect();
    let df = Divided::new(f, &nodes)?;
    let dg = Divided::new(g, &nodes)?;
    let rows: Vec<Result<Complex64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                acc += df.get(i, j)? * dg.get(i, j)? * (1.0 - cosines[i] * cosines[j]);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for row in rows {
        total += row?;
    }
    Ok(total * (h * h / (PI * PI)))
}

/// `σ²(f) = ∬ (Δf)² ρ`.
pub fn variance_clt_limit(f: &SmoothInput, cfg: &CovConfig) -> Result<Complex64> {
    covariance_clt_limit(f, f, cfg)
}

/// `∬ e^{i(zx + wy)} ρ_n(x, y) dx dy`. The kernel is a sum of three
/// separable products of `φ_n` and `φ_{n−1}`, so this reduces to
/// one-dimensional integrals.
pub fn char_fn_rho_n(n: usize, z: f64, w: f64, cfg: &CovConfig) -> Result<Complex64> {
    let ev = HermiteEvaluator::new(n)?;
    let rule = cfg.line.rule(n);
    let phi: Vec<(f64, f64)> = rule.nodes.par_iter().map(|&x| ev.phi_pair(x)).collect();
    // [∫e^{isx}φ_{n−1}², ∫e^{isx}φ_n², ∫e^{isx}φ_nφ_{n−1}]
    let moments = |s: f64| {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for ((&x, &wt), &(a, b)) in rule.nodes.iter().zip(&rule.weights).zip(&phi) {
            let e = Complex64::from_polar(wt, s * x);
            out[0] += e * (a * a);
            out[1] += e * (b * b);
            out[2] += e * (a * b);
        }
        out
    };
    let mz = moments(z);
    let mw = moments(w);
    Ok(0.25 * n as f64 * (mz[1] * mw[0] - 2.0 * mz[2] * mw[2] + mz[0] * mw[1]))
}

/// `∬ e^{i(zx + wy)} ρ(x, y) dx dy` for the limit kernel, from the
/// separable form `P₀(z)P₀(w) − P₁(z)P₁(w)` with
/// `P_k(s) = π⁻¹∫_0^π cos^kθ e^{2is cos θ} dθ` by the midpoint rule.
pub fn char_fn_rho_limit(z: f64, w: f64, cfg: &CovConfig) -> Complex64 {
    let m = cfg.limit_nodes;
    let h = PI / m as f64;
    let p = |s: f64| {
        let mut p0 = Complex64::new(0.0, 0.0);
        let mut p1 = Complex64::new(0.0, 0.0);
        for i in 0..m {
            let c = ((i as f64 + 0.5) * h).cos();
            let e = Complex64::from_polar(1.0, 2.0 * s * c);
            p0 += e;
            p1 += e * c;
        }
        (p0 / m as f64, p1 / m as f64)
    };
    let (a0, a1) = p(z);
    let (b0, b1) = p(w);
    a0 * b0 - a1 * b1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::branch_root;

    fn cfg() -> CovConfig {
        CovConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Plain Gauss–Legendre on a wide box against the standard normal density.
    fn scalar_normal<F: Fn(f64) -> Complex64>(f: F) -> Complex64 {
        let rule = gauss_legendre(2000).mapped(-12.0, 12.0);
        let mut acc = c(0.0, 0.0);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += f(x) * (w * (-0.5 * x * x).exp() / (2.0 * PI).sqrt());
        }
        acc
    }

    #[test]
    fn scalar_resolvent_oracle() {
        let l = c(0.0, 3.0);
        let set = resolvent_set(1, l, &cfg()).unwrap();
        let want = scalar_normal(|x| 1.0 / (l - x));
        assert!((set.g - want).norm() < 1e-13);
        let want3 = scalar_normal(|x| -6.0 / (l - x).powi(4));
        assert!((set.g3 - want3).norm() < 1e-13);
    }

    #[test]
    fn resolvent_invariants() {
        let l = c(1.0, 2.0);
        let a = resolvent_set(8, l, &cfg()).unwrap();
        let b = resolvent_set(8, l.conj(), &cfg()).unwrap();
        assert!((a.g - b.g.conj()).norm() < 1e-14);
        assert!(a.g.norm() <= 1.0 / l.im);
        assert!(a.ode_residual() < 1e-10, "{}", a.ode_residual());
        assert!(a.nonlinear_residual() < 1e-10);
        let far = resolvent_set(8, c(0.0, 100.0), &cfg()).unwrap();
        assert!((far.g * c(0.0, 100.0) - 1.0).norm() < 2e-4);
    }

    #[test]
    fn near_cut_is_refused_or_resolved() {
        assert!(matches!(resolvent_set(4, c(1.0, 0.01), &cfg()), Err(Error::Conditioning { .. })));
        assert!(matches!(resolvent_set(4, c(3.0, 0.0), &cfg()), Err(Error::Conditioning { .. })));
        let s = resolvent_set(4, c(0.5, 0.05), &cfg()).unwrap();
        assert!(s.ode_residual() < 1e-7 * (1.0 + s.g3.norm() / 16.0));
        let s = resolvent_set(4, c(3.0, 0.01), &cfg()).unwrap();
        assert!(s.nonlinear_residual() < 1e-7 * (1.0 + s.g2.norm().powi(2)));
    }

    #[test]
    fn g2_scalar_oracle() {
        let (l, m) = (c(0.0, 3.0), c(0.0, 2.0));
        let el = scalar_normal(|x| 1.0 / (l - x));
        let em = scalar_normal(|x| 1.0 / (m - x));
        let elm = scalar_normal(|x| 1.0 / ((l - x) * (m - x)));
        let want = elm - el * em;
        let got = g2_exact(1, l, m, &cfg()).unwrap();
        assert!((got - want).norm() < 1e-13 * want.norm(), "{got} vs {want}");
    }

    #[test]
    fn g2_diagonal_continuity() {
        let l = c(0.3, 1.5);
        let n = 8;
        let diag = g2_exact(n, l, l, &cfg()).unwrap();
        let a = resolvent_set(n, l, &cfg()).unwrap();
        let b = resolvent_set(n, l + 1e-4, &cfg()).unwrap();
        let raw = g2_off_diagonal(&a, &b);
        assert!((raw - diag).norm() < 1e-5);
        // Taylor form at δ → 0 reproduces the diagonal formula.
        let tiny = g2_exact(n, l, l + c(1e-9, 0.0), &cfg()).unwrap();
        assert!((tiny - diag).norm() < 1e-8 * diag.norm());
        // Both sides of the Taylor band edge.
        let edge = TAYLOR_BAND;
        for dir in [c(1.0, 0.0), c(0.6, 0.8)] {
            let inside = g2_exact(n, l, l + dir * (edge * (1.0 - 1e-10)), &cfg()).unwrap();
            let outside = g2_exact(n, l, l + dir * (edge * (1.0 + 1e-10)), &cfg()).unwrap();
            assert!((inside - outside).norm() < 1e-9 * inside.norm(), "{inside} {outside}");
        }
    }

    #[test]
    fn g2_limit_is_gamma_zero() {
        let (l, m) = (c(0.0, 3.0), c(2.0, 2.0));
        let wl = branch_root(l).unwrap();
        let wm = branch_root(m).unwrap();
        let limit = ((l * m - 4.0) / (wl * wm) - 1.0) / (2.0 * (l - m) * (l - m));
        let (_, coeffs) = g2_coefficients(l, m, 0).unwrap();
        assert!((coeffs[0] - limit).norm() < 1e-14);
        let r = g2_expansion(64, l, m, 0, &cfg()).unwrap();
        assert!(r.remainders[0] < 1e-4 * limit.norm());
    }

    #[test]
    fn cov_trace_linear_and_symmetric() {
        let x = SmoothInput::monomial(1);
        for n in [1, 3, 8] {
            let v = cov_trace(&x, &x, n, &cfg()).unwrap();
            assert!((v - 1.0).norm() < 1e-10, "n={n}: {v}");
        }
        // Var{Tr X_n²} = 2 exactly for GUE(n, 1/n).
        let x2 = SmoothInput::monomial(2);
        let v = cov_trace(&x2, &x2, 5, &cfg()).unwrap();
        assert!((v - 2.0).norm() < 1e-10, "{v}");
        let g = SmoothInput::gauss();
        let a = cov_trace(&g, &x2, 6, &cfg()).unwrap();
        let b = cov_trace(&x2, &g, 6, &cfg()).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn cov_trace_matches_g2_exact() {
        let (l, m) = (c(0.0, 3.0), c(2.0, 2.0));
        let f = SmoothInput::resolvent(l).unwrap();
        let g = SmoothInput::resolvent(m).unwrap();
        let a = cov_trace(&f, &g, 8, &cfg()).unwrap();
        let b = g2_exact(8, l, m, &cfg()).unwrap();
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn clt_limits() {
        let x = SmoothInput::monomial(1);
        assert!((variance_clt_limit(&x, &cfg()).unwrap() - 1.0).norm() < 1e-13);
        let x2 = SmoothInput::monomial(2);
        assert!((variance_clt_limit(&x2, &cfg()).unwrap() - 2.0).norm() < 1e-13);
        let g = SmoothInput::resolvent(c(0.0, 3.0)).unwrap();
        let v = variance_clt_limit(&g, &cfg()).unwrap();
        assert!((v - 1.0 / 169.0).norm() < 1e-14, "{v}");
    }

    // J_0 and J_1 by their power series.
    fn bessel(nu: i32, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(nu);
        let mut sum = term;
        for k in 1..60 {
            term *= -(x * x / 4.0) / (k as f64 * (k as f64 + nu as f64));
            sum += term;
        }
        sum
    }

    #[test]
    fn characteristic_functions() {
        for (z, w) in [(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (-0.7, 1.3)] {
            let want = bessel(0, 2.0 * z) * bessel(0, 2.0 * w) + bessel(1, 2.0 * z) * bessel(1, 2.0 * w);
            let got = char_fn_rho_limit(z, w, &cfg());
            assert!((got - want).norm() < 1e-14, "({z},{w}): {got} vs {want}");
        }
        for n in [1, 4, 16] {
            let one = char_fn_rho_n(n, 0.0, 0.0, &cfg()).unwrap();
            assert!((one - 1.0).norm() < 1e-13);
        }
        // n = 1: ρ_1(x,y) = (x−y)²/(4π) e^{−(x²+y²)/2}, whose transform
        // at (z, 0) is e^{−z²/2}(2 − z²)/2.
        let z: f64 = 0.8;
        let got = char_fn_rho_n(1, z, 0.0, &cfg()).unwrap();
        let want = (-z * z / 2.0).exp() * (2.0 - z * z) / 2.0;
        assert!((got - want).norm() < 1e-13, "{got} vs {want}");
    }
}
