//! Hermite functions, the spectral density `h_n` of GUE(n, 1/n) with its
//! first three derivatives, and the two-point kernel `ρ_n`.
//!
//! The recurrence runs on a mantissa with a separately tracked exponent, so
//! values stay accurate (not just finite) far into the Gaussian tail.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::LineQuadConfig;

const RESCALE_AT: f64 = 1e150;
const RESCALE_BY: f64 = 1e-150;
const LN_RESCALE: f64 = 345.38776394910684; // 150 ln 10

fn frac_pi_quarter_root() -> f64 {
    PI.powf(-0.25)
}

/// Mantissa and natural-log exponent: value = m · e^s.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    m: f64,
    s: f64,
}

impl Scaled {
    fn value(self) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        self.m.signum() * (self.m.abs().ln() + self.s).exp()
    }
}

fn product(a: Scaled, b: Scaled) -> f64 {
    if a.m == 0.0 || b.m == 0.0 {
        return 0.0;
    }
    (a.m * b.m).signum() * (a.m.abs().ln() + b.m.abs().ln() + a.s + b.s).exp()
}

/// Runs the recurrence up to `φ_n(t)`, returning `φ_{n−1}`, `φ_n` and
/// `Σ_{k<n} φ_k²` (all scaled).
fn recurrence(n: usize, t: f64) -> (Scaled, Scaled, Scaled) {
    let mut s = -0.5 * t * t;
    let mut prev = 0.0;
    let mut cur = frac_pi_quarter_root();
    let mut sumsq = 0.0;
    for k in 0..n {
        sumsq += cur * cur;
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur *= RESCALE_BY;
            prev *= RESCALE_BY;
            sumsq *= RESCALE_BY * RESCALE_BY;
            s += LN_RESCALE;
        }
    }
    (
        Scaled { m: prev, s },
        Scaled { m: cur, s },
        Scaled { m: sumsq, s: 2.0 * s },
    )
}

/// `φ_k(t)` by the normalized three-term recurrence.
pub fn hermite_phi(k: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("hermite_phi: t = {t} is not finite")));
    }
    Ok(recurrence(k, t).1.value())
}

/// `φ_0(t), …, φ_k(t)`.
pub fn hermite_phi_all(k: usize, t: f64) -> Result<Vec<f64>> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("hermite_phi: t = {t} is not finite")));
    }
    let mut out = Vec::with_capacity(k + 1);
    let mut s = -0.5 * t * t;
    let mut prev = 0.0;
    let mut cur = frac_pi_quarter_root();
    out.push(Scaled { m: cur, s }.value());
    for j in 0..k {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * t * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur *= RESCALE_BY;
            prev *= RESCALE_BY;
            s += LN_RESCALE;
        }
        out.push(Scaled { m: cur, s }.value());
    }
    Ok(out)
}

/// The density `h_n` and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityBundle {
    pub n: usize,
    pub x: f64,
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h_tilde: f64,
}

impl DensityBundle {
    /// `n⁻² h‴ + (4 − x²) h′ + x h`, which vanishes identically.
    pub fn ode_residual(&self) -> f64 {
        let n2 = (self.n * self.n) as f64;
        self.h3 / n2 + (4.0 - self.x * self.x) * self.h1 + self.x * self.h
    }

    /// Scale against which the residual is judged: `1 + |h‴|/n²`.
    pub fn residual_scale(&self) -> f64 {
        1.0 + self.h3.abs() / (self.n * self.n) as f64
    }
}

/// Evaluator for fixed matrix size `n`. Immutable and `Sync`.
#[derive(Debug, Clone, Copy)]
pub struct HermiteEvaluator {
    n: usize,
    scale: f64,
}

impl HermiteEvaluator {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("matrix size n must be at least 1".into()));
        }
        Ok(HermiteEvaluator {
            n,
            scale: (n as f64 / 2.0).sqrt(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `φ_{n−1}(t)` and `φ_n(t)` at `t = √(n/2) x`.
    pub fn phi_pair(&self, x: f64) -> (f64, f64) {
        let (a, b, _) = recurrence(self.n, self.scale * x);
        (a.value(), b.value())
    }

    /// `h_n(x)` alone.
    pub fn density(&self, x: f64) -> f64 {
        let (_, _, sq) = recurrence(self.n, self.scale * x);
        sq.value() / (2.0 * self.n as f64).sqrt()
    }

    /// `h_n` and its first three derivatives at `x`. The third derivative
    /// comes from the closed form, not from the ODE, so the ODE residual
    /// remains a genuine check.
    pub fn bundle(&self, x: f64) -> DensityBundle {
        let n = self.n as f64;
        let t = self.scale * x;
        let (pm, pn, sq) = recurrence(self.n, t);
        let root2n = (2.0 * n).sqrt();
        let h = sq.value() / root2n;
        let pnpm = product(pn, pm);
        let pn2 = product(pn, pn);
        let pm2 = product(pm, pm);
        let h1 = -self.scale * pnpm;
        let h2 = n * n / root2n * (pn2 - pm2);
        let b3 = 4.0 * n * (-t * (pn2 + pm2) + 2.0 * root2n * pnpm);
        let h3 = b3 * self.scale.powi(3) / root2n;
        DensityBundle {
            n: self.n,
            x,
            h,
            h1,
            h2,
            h3,
            h_tilde: h - x * h1,
        }
    }

    /// Christoffel–Darboux kernel `Σ_{j<n} φ_j(x)φ_j(y)` in the Hermite
    /// variable (no `√(n/2)` scaling). Uses the quotient form off the
    /// diagonal and the sum form for `|x − y| ≤ 1e−6`.
    pub fn cd_kernel(&self, x: f64, y: f64) -> f64 {
        if (x - y).abs() <= 1e-6 {
            cd_kernel_sum(self.n, x, y)
        } else {
            cd_kernel_quotient(self.n, x, y)
        }
    }

    /// `ρ_n(x, y)` from the Hermite functions.
    pub fn rho(&self, x: f64, y: f64) -> f64 {
        let (ax, bx) = self.phi_pair(x);
        let (ay, by) = self.phi_pair(y);
        let d = bx * ay - ax * by;
        0.25 * self.n as f64 * d * d
    }

    /// `ρ_n(x, y)` from the density and its derivatives.
    pub fn rho_from_density(&self, x: f64, y: f64) -> f64 {
        rho_from_bundles(&self.bundle(x), &self.bundle(y))
    }

    /// `∫ g h_n` over the real line under `cfg`.
    pub fn integrate<F: Fn(f64) -> f64 + Sync>(&self, cfg: &LineQuadConfig, g: F) -> f64 {
        let rule = cfg.rule(self.n);
        let terms: Vec<f64> = rule
            .nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * g(x) * self.density(x))
            .collect();
        terms.iter().sum()
    }

    /// Density bundles at every node of the line rule, paired with weights.
    pub fn bundles_on_rule(&self, cfg: &LineQuadConfig) -> Vec<(f64, DensityBundle)> {
        let rule = cfg.rule(self.n);
        rule.nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| (w, self.bundle(x)))
            .collect()
    }
}

/// `ρ_n(x, y) = ¼[h̃(x)h̃(y) − 4h′(x)h′(y) − n⁻²h″(x)h″(y)]`.
pub fn rho_from_bundles(bx: &DensityBundle, by: &DensityBundle) -> f64 {
    let n2 = (bx.n * bx.n) as f64;
    0.25 * (bx.h_tilde * by.h_tilde - 4.0 * bx.h1 * by.h1 - bx.h2 * by.h2 / n2)
}

/// `Σ_{j<n} φ_j(x) φ_j(y)` summed directly.
pub fn cd_kernel_sum(n: usize, x: f64, y: f64) -> f64 {
    let px = hermite_phi_all(n, x).unwrap_or_default();
    let py = hermite_phi_all(n, y).unwrap_or_default();
    px.iter().zip(&py).take(n).map(|(a, b)| a * b).sum()
}

/// Quotient form `√(n/2)(φ_n(x)φ_{n−1}(y) − φ_{n−1}(x)φ_n(y))/(x − y)`.
pub fn cd_kernel_quotient(n: usize, x: f64, y: f64) -> f64 {
    let (ax, bx, _) = recurrence(n, x);
    let (ay, by, _) = recurrence(n, y);
    (n as f64 / 2.0).sqrt() * (product(bx, ay) - product(ax, by)) / (x - y)
}

/// Limit kernel `ρ(x, y) = (4 − xy)/(4π² √(4−x²) √(4−y²))` on `(−2, 2)²`,
/// zero outside the closed square and `+∞` on its boundary, where the
/// density has an integrable singularity.
pub fn rho_limit(x: f64, y: f64) -> f64 {
    if x.abs() > 2.0 || y.abs() > 2.0 {
        return 0.0;
    }
    if x.abs() == 2.0 || y.abs() == 2.0 {
        return f64::INFINITY;
    }
    (4.0 - x * y) / (4.0 * PI * PI * (4.0 - x * x).sqrt() * (4.0 - y * y).sqrt())
}

/// `ρ_n` sampled on a tensor grid.
#[derive(Debug, Clone)]
pub struct KernelField {
    pub n: usize,
    pub grid_x: Vec<f64>,
    pub grid_y: Vec<f64>,
    /// Row-major, `values[i * grid_y.len() + j] = ρ_n(grid_x[i], grid_y[j])`.
    pub values: Vec<f64>,
}

impl KernelField {
    pub fn new(n: usize, grid_x: Vec<f64>, grid_y: Vec<f64>) -> Result<Self> {
        let ev = HermiteEvaluator::new(n)?;
        let py: Vec<(f64, f64)> = grid_y.iter().map(|&y| ev.phi_pair(y)).collect();
        let values = grid_x
            .par_iter()
            .flat_map_iter(|&x| {
                let (ax, bx) = ev.phi_pair(x);
                py.iter().map(move |&(ay, by)| {
                    let d = bx * ay - ax * by;
                    0.25 * n as f64 * d * d
                })
            })
            .collect();
        Ok(KernelField {
            n,
            grid_x,
            grid_y,
            values,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_y.len() + j]
    }
}
