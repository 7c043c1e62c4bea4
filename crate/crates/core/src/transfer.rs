//! The solution operator `S`, the transfer operator `T = (S·)‴`, the
//! expansion coefficients `α_j` and the expansion of `E{tr_n g(X_n)}`.
//!
//! `Sg` is the bounded solution `f` on `[-2, 2]` of
//! `(t²−4) f′ + 3t f = g_c`, where `g_c` is `g` minus its semicircle
//! average. With `t = 2cos θ` the equation becomes
//! `d/dθ [sin³θ f] = ½ sin²θ g_c(2cos θ)`, which is solved exactly in
//! coefficient space: `g_c` in cosines, `sin θ · f` in sines.

use num_complex::Complex64;
use serde::Serialize;

use crate::chebyshev::GridFunction;
use crate::ddouble::DDComplex;
use crate::error::{Error, Result};
use crate::functions::SmoothInput;
use crate::hermite::HermiteEvaluator;
use crate::precise;
use crate::quadrature::{self, gauss_legendre, LineQuadConfig};
use crate::stats::{fit_slope, SlopeFit};
use crate::symbolic::cjr_table;

/// Numerical parameters of the transfer-operator module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferConfig {
    /// Chebyshev degree used to represent `g` on `[-2, 2]`.
    pub degree: usize,
    /// Relative threshold below which trailing coefficients are dropped.
    pub chop_tol: f64,
    /// Nodes of the second-kind Gauss–Chebyshev rule for `α_0`.
    pub semicircle_nodes: usize,
    /// Nodes of the first-kind Gauss–Chebyshev rule for `E_k`.
    pub chebyshev_nodes: usize,
    /// Whole-line quadrature for `∫ g h_n`.
    pub line: LineQuadConfig,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            degree: 256,
            chop_tol: 1e-15,
            semicircle_nodes: 512,
            chebyshev_nodes: 2048,
            line: LineQuadConfig::default(),
        }
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `(1/2π)∫_{-2}^{2} g(s)√(4−s²) ds`.
pub fn semicircle_average(g: &SmoothInput, cfg: &TransferConfig) -> Result<Complex64> {
    let mut err = None;
    let v = quadrature::semicircle_rule(cfg.semicircle_nodes, |x| match g.value(x) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            zero()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Chebyshev representation of `g` on `[-2, 2]`.
pub fn grid_of(g: &SmoothInput, cfg: &TransferConfig) -> Result<GridFunction> {
    let mut err = None;
    let gf = GridFunction::on_support(cfg.degree, |x| match g.value(x) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            zero()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(gf.chop(cfg.chop_tol)),
    }
}

/// Result of applying `S` in coefficient space.
#[derive(Debug, Clone)]
pub struct SSolution {
    /// `f = Sg` as a Chebyshev series on `[-2, 2]`.
    pub f: GridFunction,
    /// Relative mismatch in the two sine modes left over by the
    /// top-down solve; zero up to rounding when `g_c` is centered.
    pub consistency: f64,
}

/// `Sg` for `g` given by its Chebyshev coefficients on `[-2, 2]`.
pub fn solve_s_grid(g: &GridFunction) -> SSolution {
    let mut c = g.coeffs.clone();
    if c.len() < 3 {
        c.resize(3, zero());
    }
    let n = c.len() - 1;
    // Centering: subtract the semicircle average c_0 − c_2/2.
    c[0] = c[2] * 0.5;
    let len = n + 3;
    // R_p: cosine coefficients of sin²θ · g_c(2cos θ).
    let mut r = vec![zero(); len + 1];
    for (k, &ck) in c.iter().enumerate() {
        r[k] += ck * 0.5;
        r[k + 2] -= ck * 0.25;
        r[k.abs_diff(2)] -= ck * 0.25;
    }
    // Sine coefficients S_p = R_p/(2p) of sin²θ Σ B_m sin mθ.
    let s: Vec<Complex64> = (0..=len)
        .map(|p| if p == 0 { zero() } else { r[p] / (2.0 * p as f64) })
        .collect();
    // S_p = ½B_p − ¼B_{p+2} − ¼B_{p−2} for p ≥ 3, solved from the top.
    let mut b = vec![zero(); len + 3];
    for p in (3..=len).rev() {
        b[p - 2] = b[p] * 2.0 - b[p + 2] - s[p] * 4.0;
    }
    let res2 = s[2] - (b[2] * 0.5 - b[4] * 0.25);
    let res1 = s[1] - (b[1] * 0.75 - b[3] * 0.25);
    let scale = s.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let consistency = res1.norm().max(res2.norm()) / scale;
    // sin θ · f = Σ B_m sin mθ, so f = Σ B_m U_{m−1}; convert to T.
    let deg_f = n.saturating_sub(1);
    let mut a = vec![zero(); deg_f + 1];
    let mut suffix = [zero(), zero()];
    for j in (0..=deg_f).rev() {
        suffix[j % 2] += b[j + 1];
        a[j] = if j == 0 { suffix[0] } else { suffix[j % 2] * 2.0 };
    }
    SSolution {
        f: GridFunction::from_coeffs(-2.0, 2.0, a),
        consistency,
    }
}

/// `Sg` as a Chebyshev series.
pub fn solve_s(g: &SmoothInput, cfg: &TransferConfig) -> Result<GridFunction> {
    g.require_order(1)?;
    Ok(solve_s_grid(&grid_of(g, cfg)?).f)
}

/// `Tg = (Sg)‴` for a Chebyshev series on `[-2, 2]`.
pub fn apply_t_grid(g: &GridFunction, chop_tol: f64) -> GridFunction {
    solve_s_grid(g).f.nth_derivative(3).chop(chop_tol)
}

/// `Tg = (Sg)‴`.
pub fn apply_t(g: &SmoothInput, cfg: &TransferConfig) -> Result<GridFunction> {
    g.require_order(3)?;
    Ok(apply_t_grid(&grid_of(g, cfg)?, cfg.chop_tol))
}

/// Pointwise `(Sg)(t)` from the integral form
/// `sin³θ f(2cos θ) = ½∫_0^θ sin²φ g_c(2cos φ) dφ`, integrated from the
/// nearer endpoint (`θ = 0` or `θ = π`) so that no cancellation occurs.
/// Independent of the coefficient-space solver.
pub fn solve_s_at(g: &SmoothInput, t: f64, cfg: &TransferConfig) -> Result<Complex64> {
    if !(-2.0..=2.0).contains(&t) {
        return Err(Error::Domain(format!("S is evaluated on [-2, 2], got t = {t}")));
    }
    let avg = semicircle_average(g, cfg)?;
    if t == 2.0 {
        return Ok((g.value(2.0)? - avg) / 6.0);
    }
    if t == -2.0 {
        return Ok(-(g.value(-2.0)? - avg) / 6.0);
    }
    let theta = (t / 2.0).acos();
    let (a, b, sign) = if theta <= std::f64::consts::FRAC_PI_2 {
        (0.0, theta, 1.0)
    } else {
        (theta, std::f64::consts::PI, -1.0)
    };
    let rule = gauss_legendre(64).mapped(a, b);
    let mut acc = zero();
    for (&phi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = phi.sin();
        acc += (g.value(2.0 * phi.cos())? - avg) * (w * s * s);
    }
    Ok(acc * (0.5 * sign) / theta.sin().powi(3))
}

/// `E_k(g) = (1/π)∫ g^{(k)}(x) T_k(x/2)/√(4−x²) dx` by the first-kind
/// Gauss–Chebyshev rule.
pub fn chebyshev_moment(g: &SmoothInput, k: usize, nodes: usize) -> Result<Complex64> {
    Ok(chebyshev_moment_scaled(g, k, nodes)?.0)
}

// E_k together with the rule applied to |g^{(k)}|.
fn chebyshev_moment_scaled(g: &SmoothInput, k: usize, nodes: usize) -> Result<(Complex64, f64)> {
    g.require_order(k)?;
    let th = quadrature::chebyshev_angles(nodes);
    let mut acc = zero();
    let mut abs = 0.0;
    for &t in &th {
        let v = g.deriv(k, 2.0 * t.cos())?;
        acc += v * (k as f64 * t).cos();
        abs += v.norm();
    }
    Ok((acc / nodes as f64, abs / nodes as f64))
}

/// `α_j` from the finite distributional formula
/// `Σ_{k=2j}^{3j−1} C_{j,k} k!/(2k)! E_k(g)`; `α_0` is the semicircle average.
pub fn alpha_distribution(g: &SmoothInput, j: usize, cfg: &TransferConfig) -> Result<Complex64> {
    Ok(alpha_with_scale(g, j, cfg)?.0)
}

// α_j and the magnitude of the terms summed to form it, which sets its
// rounding error.
fn alpha_with_scale(g: &SmoothInput, j: usize, cfg: &TransferConfig) -> Result<(Complex64, f64)> {
    if j == 0 {
        let v = semicircle_average(g, cfg)?;
        let mut err = None;
        let abs = quadrature::semicircle_rule(cfg.semicircle_nodes, |x| match g.value(x) {
            Ok(v) => Complex64::new(v.norm(), 0.0),
            Err(e) => {
                err.get_or_insert(e);
                zero()
            }
        });
        return match err {
            Some(e) => Err(e),
            None => Ok((v, abs.re)),
        };
    }
    g.require_order(3 * j - 1)?;
    let table = cjr_table(j);
    let mut acc = zero();
    let mut scale = 0.0;
    for (k, c) in table.row(j) {
        // k!/(2k)! = 1/((k+1)(k+2)...(2k))
        let ratio: f64 = ((k + 1)..=(2 * k)).map(|m| 1.0 / m as f64).product();
        let (e, abs) = chebyshev_moment_scaled(g, k, cfg.chebyshev_nodes)?;
        acc += e * (c * ratio);
        scale += abs * (c * ratio).abs();
    }
    Ok((acc, scale))
}

/// `α_j = (1/2π)∫ (T^j g)(t)√(4−t²) dt` by iterating `T` on the series.
pub fn alpha_iterated(g: &SmoothInput, j: usize, cfg: &TransferConfig) -> Result<Complex64> {
    if j == 0 {
        return semicircle_average(g, cfg);
    }
    g.require_order(3 * j)?;
    let mut gf = grid_of(g, cfg)?;
    for _ in 0..j {
        gf = apply_t_grid(&gf, cfg.chop_tol);
    }
    Ok(gf.semicircle_average())
}

/// Both evaluations of one coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaValue {
    pub j: usize,
    /// Distributional formula; the value reported as `α_j`.
    pub value: Complex64,
    /// Iterated-`T` cross-check, when the input supports it.
    pub iterated: Option<Complex64>,
}

impl AlphaValue {
    pub fn discrepancy(&self) -> Option<f64> {
        self.iterated.map(|a| (a - self.value).norm())
    }
}

pub fn alpha_j(g: &SmoothInput, j: usize, cfg: &TransferConfig) -> Result<AlphaValue> {
    let value = alpha_distribution(g, j, cfg)?;
    let iterated = alpha_iterated(g, j, cfg).ok();
    Ok(AlphaValue { j, value, iterated })
}

/// Working precision for the exact side of an expansion check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    /// Double-double for `∫ g h_n` and `α_0`; needed once remainders drop
    /// below about `1e−15` of the value.
    Extended,
}

/// Expansion of `E{tr_n g(X_n)}` at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub input: String,
    pub n: usize,
    pub k: usize,
    pub precision: Precision,
    pub alphas: Vec<Complex64>,
    /// `Σ_{j≤l} α_j n^{−2j}` for `l = 0..=k`.
    pub partial_sums: Vec<Complex64>,
    /// `∫ g h_n` by whole-line quadrature.
    pub exact: Complex64,
    /// `|exact − partial_sums[l]|`.
    pub remainders: Vec<f64>,
    /// Rounding floor of each remainder: values below it carry no signal.
    pub floors: Vec<f64>,
}

/// Expansion coefficients with their rounding scales.
#[derive(Debug, Clone)]
pub struct AlphaSet {
    pub values: Vec<Complex64>,
    /// Magnitude of the terms that were summed into each `α_j`.
    pub scales: Vec<f64>,
    /// `α_0` in double-double, present at extended precision.
    pub alpha0_dd: Option<precise::DDValue>,
}

/// The first `k + 1` coefficients, with `α_0` in double-double when asked.
pub fn alphas(g: &SmoothInput, k: usize, cfg: &TransferConfig, precision: Precision) -> Result<AlphaSet> {
    let mut values = Vec::with_capacity(k + 1);
    let mut scales = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let (v, s) = alpha_with_scale(g, j, cfg)?;
        values.push(v);
        scales.push(s);
    }
    let mut alpha0_dd = None;
    if precision == Precision::Extended {
        let v = precise::semicircle_average_dd(g, cfg.semicircle_nodes)?;
        values[0] = v.to_c64();
        alpha0_dd = Some(v);
    }
    Ok(AlphaSet { values, scales, alpha0_dd })
}

// Relative rounding of a sum of double-double terms.
const DD_ROUNDING: f64 = 1e-29;
// Relative rounding of an f64 quadrature sum.
const F64_ROUNDING: f64 = 64.0 * f64::EPSILON;

fn report_from(
    g: &SmoothInput,
    n: usize,
    set: &AlphaSet,
    cfg: &TransferConfig,
    precision: Precision,
) -> Result<ExpansionReport> {
    let ev = HermiteEvaluator::new(n)?;
    let alphas = &set.values;
    let k = alphas.len() - 1;
    let nf = n as f64;
    let mut partial_sums = Vec::with_capacity(k + 1);
    let mut acc = zero();
    for (j, a) in alphas.iter().enumerate() {
        acc += a * nf.powi(-2 * j as i32);
        partial_sums.push(acc);
    }
    let (exact, remainders, base) = match precision {
        Precision::Double => {
            let (exact, l1) = integrate_with_scale(&ev, g, &cfg.line)?;
            let rem = partial_sums.iter().map(|p| (exact - p).norm()).collect();
            (exact, rem, F64_ROUNDING * (l1 + set.scales[0]))
        }
        Precision::Extended => {
            let (exact, l1) = precise::integrate_density_dd(g, n, &cfg.line)?;
            let a0 = set.alpha0_dd.expect("extended precision needs a double-double α_0");
            let mut rem = Vec::with_capacity(k + 1);
            let mut diff = exact - a0;
            rem.push(diff.norm());
            for (j, a) in alphas.iter().enumerate().skip(1) {
                diff = diff - DDComplex::from_c64(a * nf.powi(-2 * j as i32));
                rem.push(diff.norm());
            }
            (exact.to_c64(), rem, DD_ROUNDING * (l1 + set.scales[0]))
        }
    };
    let mut floors = Vec::with_capacity(k + 1);
    let mut floor = base;
    for (j, s) in set.scales.iter().enumerate() {
        if j > 0 {
            floor += F64_ROUNDING * s * nf.powi(-2 * j as i32);
        }
        floors.push(floor);
    }
    Ok(ExpansionReport {
        input: g.label().to_string(),
        n,
        k,
        precision,
        alphas: alphas.to_vec(),
        partial_sums,
        exact,
        remainders,
        floors,
    })
}

/// `∫ g h_n` together with `∫ |g| h_n`.
pub fn integrate_with_scale(
    ev: &HermiteEvaluator,
    g: &SmoothInput,
    line: &LineQuadConfig,
) -> Result<(Complex64, f64)> {
    let rule = line.rule(ev.n());
    let mut acc = zero();
    let mut l1 = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = g.value(x)? * (w * ev.density(x));
        acc += v;
        l1 += v.norm();
    }
    Ok((acc, l1))
}

/// `∫ g h_n` over the real line.
pub fn expectation(g: &SmoothInput, n: usize, line: &LineQuadConfig) -> Result<Complex64> {
    let ev = HermiteEvaluator::new(n)?;
    Ok(integrate_with_scale(&ev, g, line)?.0)
}

/// Expansion to order `k` at a single `n`.
pub fn expand_expectation(
    g: &SmoothInput,
    n: usize,
    k: usize,
    cfg: &TransferConfig,
    precision: Precision,
) -> Result<ExpansionReport> {
    let set = alphas(g, k, cfg, precision)?;
    report_from(g, n, &set, cfg, precision)
}

/// Remainder behaviour over a ladder of `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub input: String,
    pub k: usize,
    pub ns: Vec<usize>,
    pub reports: Vec<ExpansionReport>,
    /// Log-log slope of the order-`l` remainder in `n`, for `l = 0..=k`.
    pub slopes: Vec<SlopeFit>,
}

pub fn expansion_ladder(
    g: &SmoothInput,
    ns: &[usize],
    k: usize,
    cfg: &TransferConfig,
    precision: Precision,
) -> Result<LadderReport> {
    let set = alphas(g, k, cfg, precision)?;
    let reports = ns
        .iter()
        .map(|&n| report_from(g, n, &set, cfg, precision))
        .collect::<Result<Vec<_>>>()?;
    let slopes = (0..=k)
        .map(|l| {
            let pts: Vec<(f64, f64, f64)> = reports
                .iter()
                .map(|r| (r.n as f64, r.remainders[l], r.floors[l]))
                .collect();
            fit_slope(&pts)
        })
        .collect();
    Ok(LadderReport {
        input: g.label().to_string(),
        k,
        ns: ns.to_vec(),
        reports,
        slopes,
    })
}
