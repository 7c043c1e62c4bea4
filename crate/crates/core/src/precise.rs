//! Double-double versions of the quadratures whose results feed remainder
//! checks that fall below `f64` resolution.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::ddouble::{DDComplex, DD};
use crate::error::{Error, Result};
use crate::functions::SmoothInput;
use crate::hermite::HermiteEvaluator;
use crate::quadrature::{gauss_legendre_dd, LineQuadConfig};

pub type DDValue = DDComplex;

const RESCALE_EXP: i32 = 600;

fn dd_rule(nodes: usize) -> Arc<(Vec<DD>, Vec<DD>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<DD>, Vec<DD>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&nodes) {
        return r.clone();
    }
    let r = Arc::new(gauss_legendre_dd(nodes));
    cache.lock().unwrap().insert(nodes, r.clone());
    r
}

/// Radius for the extended-precision line rule: the smallest step of
/// `0.25` beyond `line.radius` where `h_n` has fallen below `1e−36`.
pub fn extended_radius(line: &LineQuadConfig, n: usize) -> Result<f64> {
    let ev = HermiteEvaluator::new(n)?;
    let mut r = line.radius;
    while ev.density(r) > 1e-36 {
        r += 0.25;
    }
    Ok(r)
}

/// `h_n(x)` in double-double. The Gaussian factor is split as
/// `2^{−K} e^{K ln 2 − t²/2}` and the power of two carried separately, so
/// no intermediate underflows.
#[derive(Debug, Clone)]
pub struct DensityDD {
    n: usize,
    scale: DD,
    a: Vec<DD>,
    b: Vec<DD>,
    norm: DD,
    quarter_pi: DD,
}

impl DensityDD {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("matrix size n must be at least 1".into()));
        }
        let a = (0..n).map(|k| DD::ratio(2.0, k as f64 + 1.0).sqrt()).collect();
        let b = (0..n).map(|k| DD::ratio(k as f64, k as f64 + 1.0).sqrt()).collect();
        Ok(DensityDD {
            n,
            scale: DD::ratio(n as f64, 2.0).sqrt(),
            a,
            b,
            norm: DD::ONE / DD::from_f64(2.0 * n as f64).sqrt(),
            quarter_pi: DD::ONE / DD::PI.sqrt().sqrt(),
        })
    }

    pub fn density(&self, x: DD) -> DD {
        let t = self.scale * x;
        let half_t2 = (t * t).mul_f64(0.5);
        let k = (half_t2.hi / DD::LN2.hi).floor();
        let mut cur = (DD::LN2.mul_f64(k) - half_t2).exp() * self.quarter_pi;
        let mut e2 = -(k as i32);
        let mut prev = DD::ZERO;
        let mut sumsq = DD::ZERO;
        for j in 0..self.n {
            sumsq += cur.sqr();
            let next = self.a[j] * t * cur - self.b[j] * prev;
            prev = cur;
            cur = next;
            if cur.hi.abs() > 2f64.powi(RESCALE_EXP) {
                cur = cur.ldexp(-RESCALE_EXP);
                prev = prev.ldexp(-RESCALE_EXP);
                sumsq = sumsq.ldexp(-2 * RESCALE_EXP);
                e2 += RESCALE_EXP;
            }
        }
        (sumsq * self.norm).ldexp(2 * e2)
    }
}

/// `∫ g h_n` in double-double, with `∫ |g| h_n` as a rounding scale.
pub fn integrate_density_dd(g: &SmoothInput, n: usize, line: &LineQuadConfig) -> Result<(DDValue, f64)> {
    let dens = DensityDD::new(n)?;
    let r = extended_radius(line, n)?;
    let rule = dd_rule(line.effective_nodes(n));
    let half = DD::from_f64(r);
    let mut acc = DDComplex::default();
    let mut l1 = 0.0;
    for (u, w) in rule.0.iter().zip(&rule.1) {
        let x = *u * half;
        let gv = g
            .value_dd(x)
            .ok_or_else(|| Error::Domain(format!("{g} has no extended-precision evaluator")))?;
        let term = gv.scale(*w * half * dens.density(x));
        l1 += term.norm();
        acc += term;
    }
    Ok((acc, l1))
}

/// `(1/2π)∫ g(s)√(4−s²) ds` by the second-kind Gauss–Chebyshev rule in
/// double-double.
pub fn semicircle_average_dd(g: &SmoothInput, m: usize) -> Result<DDValue> {
    let step = DD::PI / DD::from_f64(m as f64 + 1.0);
    let scale = DD::ratio(2.0, m as f64 + 1.0);
    let mut acc = DDComplex::default();
    for i in 1..=m {
        let (s, c) = step.mul_f64(i as f64).sin_cos();
        let gv = g
            .value_dd(c.mul_f64(2.0))
            .ok_or_else(|| Error::Domain(format!("{g} has no extended-precision evaluator")))?;
        acc += gv.scale(s.sqr() * scale);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_matches_f64() {
        for n in [1usize, 5, 40] {
            let d = DensityDD::new(n).unwrap();
            let ev = HermiteEvaluator::new(n).unwrap();
            for &x in &[-3.0, -1.1, 0.0, 0.7, 2.2] {
                let a = d.density(DD::from_f64(x)).to_f64();
                let b = ev.density(x);
                assert!((a - b).abs() <= 1e-13 * (b + 1e-300), "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn normalization_in_extended_precision() {
        let one = SmoothInput::poly(vec![1.0]);
        let x2 = SmoothInput::monomial(2);
        let x4 = SmoothInput::monomial(4);
        let line = LineQuadConfig::default();
        for n in [1usize, 4, 8] {
            let (m0, _) = integrate_density_dd(&one, n, &line).unwrap();
            let (m2, _) = integrate_density_dd(&x2, n, &line).unwrap();
            let (m4, _) = integrate_density_dd(&x4, n, &line).unwrap();
            assert!((m0.re - DD::ONE).abs().hi < 1e-28, "n={n}: {:?}", m0.re - DD::ONE);
            assert!((m2.re - DD::ONE).abs().hi < 1e-28, "n={n}");
            let want = DD::from_f64(2.0) + DD::ONE / DD::from_f64((n * n) as f64);
            assert!((m4.re - want).abs().hi < 1e-27, "n={n}");
        }
    }

    #[test]
    fn characteristic_function_oracle() {
        // E tr e^{isX} = e^{−s²/(2n)} L^{(1)}_{n−1}(s²/n)/n.
        let n = 6usize;
        let s = 1.0f64;
        let x = s * s / n as f64;
        let mut l0 = 1.0;
        let mut l1 = 2.0 - x;
        for k in 1..(n - 1) {
            let kf = k as f64;
            let l2 = ((2.0 * kf + 2.0 - x) * l1 - (kf + 1.0) * l0) / (kf + 1.0);
            l0 = l1;
            l1 = l2;
        }
        let want = (-s * s / (2.0 * n as f64)).exp() * l1 / n as f64;
        let (v, _) = integrate_density_dd(&SmoothInput::cos(), n, &LineQuadConfig::default()).unwrap();
        assert!((v.re.to_f64() - want).abs() < 1e-15);
    }

    #[test]
    fn semicircle_average_extended() {
        let v = semicircle_average_dd(&SmoothInput::monomial(6), 64).unwrap();
        assert!((v.re - DD::from_f64(5.0)).abs().hi < 1e-29);
    }
}
