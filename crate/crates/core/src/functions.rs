//! Test functions `g` fed to the expansions, in analytic or sampled mode.
//!
//! Analytic inputs know every derivative in closed form. A sampled input is
//! a Chebyshev interpolant of a black-box closure, differentiated
//! spectrally, and declares how many derivatives it is willing to supply.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::chebyshev::GridFunction;
use crate::ddouble::{DDComplex, DD};
use crate::error::{Error, Result};

/// Which part of a complex-valued function is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Full,
    Re,
    Im,
}

#[derive(Debug, Clone)]
enum Kind {
    /// `Σ a_i x^i`, coefficients ascending.
    Poly(Vec<f64>),
    /// `e^{−x²}`.
    Gauss,
    Cos,
    Sin,
    /// `e^{i z x}`.
    ExpI(f64),
    /// `g_λ(x) = 1/(λ − x)`.
    Resolvent(Complex64),
    Sampled {
        derivs: Arc<Vec<GridFunction>>,
    },
}

/// A smooth input function with access to its derivatives.
#[derive(Debug, Clone)]
pub struct SmoothInput {
    kind: Kind,
    part: Part,
    label: String,
}

fn cplx(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl SmoothInput {
    pub fn poly(coeffs: Vec<f64>) -> Self {
        let label = format!(
            "poly:{}",
            coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        );
        SmoothInput {
            kind: Kind::Poly(coeffs),
            part: Part::Full,
            label,
        }
    }

    /// `x^p`.
    pub fn monomial(p: usize) -> Self {
        let mut c = vec![0.0; p + 1];
        c[p] = 1.0;
        Self::poly(c)
    }

    pub fn gauss() -> Self {
        SmoothInput {
            kind: Kind::Gauss,
            part: Part::Full,
            label: "gauss".into(),
        }
    }

    pub fn cos() -> Self {
        SmoothInput {
            kind: Kind::Cos,
            part: Part::Full,
            label: "cos".into(),
        }
    }

    pub fn sin() -> Self {
        SmoothInput {
            kind: Kind::Sin,
            part: Part::Full,
            label: "sin".into(),
        }
    }

    /// `x ↦ e^{izx}`.
    pub fn exp_i(z: f64) -> Self {
        SmoothInput {
            kind: Kind::ExpI(z),
            part: Part::Full,
            label: format!("expi:{z}"),
        }
    }

    /// `x ↦ 1/(λ − x)`. Requires `λ ∉ ℝ`.
    pub fn resolvent(lambda: Complex64) -> Result<Self> {
        if lambda.im == 0.0 || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "resolvent input needs a non-real spectral parameter, got {lambda}"
            )));
        }
        Ok(SmoothInput {
            kind: Kind::Resolvent(lambda),
            part: Part::Full,
            label: format!("resolvent:{}", format_complex(lambda)),
        })
    }

    /// Chebyshev interpolant of `f` on `[lo, hi]` supplying derivatives up
    /// to `max_order`.
    pub fn sampled<F: FnMut(f64) -> Complex64>(
        label: &str,
        lo: f64,
        hi: f64,
        degree: usize,
        max_order: usize,
        f: F,
    ) -> Self {
        let base = GridFunction::interpolate(lo, hi, degree, f);
        let mut derivs = vec![base];
        for _ in 0..max_order {
            let next = derivs.last().unwrap().derivative();
            derivs.push(next);
        }
        SmoothInput {
            kind: Kind::Sampled {
                derivs: Arc::new(derivs),
            },
            part: Part::Full,
            label: format!("sampled:{label}"),
        }
    }

    pub fn re(mut self) -> Self {
        self.part = Part::Re;
        self.label = format!("re:{}", self.label);
        self
    }

    pub fn im(mut self) -> Self {
        self.part = Part::Im;
        self.label = format!("im:{}", self.label);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn part(&self) -> Part {
        self.part
    }

    /// Highest derivative order available; `None` means unlimited.
    pub fn max_order(&self) -> Option<usize> {
        match &self.kind {
            Kind::Sampled { derivs } => Some(derivs.len() - 1),
            _ => None,
        }
    }

    /// Whether the function is real valued on the real line.
    pub fn is_real(&self) -> bool {
        match self.part {
            Part::Re | Part::Im => true,
            Part::Full => !matches!(self.kind, Kind::ExpI(_) | Kind::Resolvent(_) | Kind::Sampled { .. }),
        }
    }

    /// Errors unless derivatives up to `order` are available.
    pub fn require_order(&self, order: usize) -> Result<()> {
        match self.max_order() {
            Some(m) if m < order => Err(Error::Capability {
                required: order,
                available: m,
            }),
            _ => Ok(()),
        }
    }

    fn apply_part(&self, v: Complex64) -> Complex64 {
        match self.part {
            Part::Full => v,
            Part::Re => cplx(v.re),
            Part::Im => cplx(v.im),
        }
    }

    pub fn value(&self, x: f64) -> Result<Complex64> {
        self.deriv(0, x)
    }

    /// `g^{(k)}(x)`.
    pub fn deriv(&self, k: usize, x: f64) -> Result<Complex64> {
        if !x.is_finite() {
            return Err(Error::Input(x));
        }
        let v = match &self.kind {
            Kind::Poly(c) => cplx(poly_deriv(c, k, x)),
            Kind::Gauss => {
                let hk = hermite_poly(k, x);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                cplx(sign * hk * (-x * x).exp())
            }
            Kind::Cos => cplx((x + k as f64 * std::f64::consts::FRAC_PI_2).cos()),
            Kind::Sin => cplx((x + k as f64 * std::f64::consts::FRAC_PI_2).sin()),
            Kind::ExpI(z) => {
                let iz = Complex64::new(0.0, *z);
                iz.powu(k as u32) * Complex64::new(0.0, z * x).exp()
            }
            Kind::Resolvent(l) => {
                let fact: f64 = (1..=k).map(|i| i as f64).product();
                cplx(fact) / (l - x).powu(k as u32 + 1)
            }
            Kind::Sampled { derivs } => {
                let d = derivs.get(k).ok_or(Error::Capability {
                    required: k,
                    available: derivs.len() - 1,
                })?;
                if !d.contains(x) {
                    return Err(Error::Input(x));
                }
                d.eval(x)
            }
        };
        if !v.is_finite() {
            return Err(Error::Input(x));
        }
        Ok(self.apply_part(v))
    }

    /// Value in double-double precision, for the analytic kinds.
    pub fn value_dd(&self, x: DD) -> Option<DDComplex> {
        let v = match &self.kind {
            Kind::Poly(c) => {
                let mut acc = DD::ZERO;
                for &a in c.iter().rev() {
                    acc = acc * x + DD::from_f64(a);
                }
                DDComplex::from_real(acc)
            }
            Kind::Gauss => DDComplex::from_real((-(x * x)).exp()),
            Kind::Cos => DDComplex::from_real(x.cos()),
            Kind::Sin => DDComplex::from_real(x.sin()),
            Kind::ExpI(z) => {
                let (s, c) = x.mul_f64(*z).sin_cos();
                DDComplex::new(c, s)
            }
            Kind::Resolvent(l) => {
                let d = DDComplex::new(DD::from_f64(l.re) - x, DD::from_f64(l.im));
                d.recip()
            }
            Kind::Sampled { .. } => return None,
        };
        Some(match self.part {
            Part::Full => v,
            Part::Re => DDComplex::from_real(v.re),
            Part::Im => DDComplex::from_real(v.im),
        })
    }

    /// Divided difference `Δg(x, y) = (g(x) − g(y))/(x − y)`.
    ///
    /// Near the diagonal it switches to the mean-value integral
    /// `∫_0^1 g′(sx + (1−s)y) ds`, expanded about the midpoint `m`:
    /// `g′(m) + g‴(m)d²/24 + g⁽⁵⁾(m)d⁴/1920 + O(d⁶)`. With all five
    /// derivatives the switch sits at `|d| = 1e−3`, where the truncation is
    /// below rounding; otherwise at `1e−7` with the terms available.
    pub fn divided_difference(&self, x: f64, y: f64) -> Result<Complex64> {
        let d = x - y;
        let order = self.max_order().unwrap_or(usize::MAX);
        let radius = if order >= 5 { 1e-3 } else { 1e-7 };
        if d.abs() > radius {
            return Ok((self.value(x)? - self.value(y)?) / d);
        }
        let m = 0.5 * (x + y);
        let d2 = d * d;
        let mut acc = self.deriv(1, m)?;
        if order >= 3 {
            acc += self.deriv(3, m)? * (d2 / 24.0);
        }
        if order >= 5 {
            acc += self.deriv(5, m)? * (d2 * d2 / 1920.0);
        }
        Ok(acc)
    }
}

impl fmt::Display for SmoothInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn poly_deriv(c: &[f64], k: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &a) in c.iter().enumerate().skip(k).rev() {
        let falling: f64 = ((i - k + 1)..=i).map(|m| m as f64).product();
        acc = acc * x + a * falling;
    }
    acc
}

/// Physicists' Hermite polynomial `H_k(x)`.
fn hermite_poly(k: usize, x: f64) -> f64 {
    let mut a = 1.0;
    if k == 0 {
        return a;
    }
    let mut b = 2.0 * x;
    for m in 1..k {
        let c = 2.0 * x * b - 2.0 * m as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Formats `a+bi` so that [`parse_complex`] reads it back exactly.
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

/// Parses `a+bi`, `a-bi`, `bi`, `a` (whitespace ignored).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot read complex number from {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let num = |u: &str| -> Result<f64> {
        match u {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => u.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => Ok(Complex64::new(
            body[..i].parse::<f64>().map_err(|_| bad())?,
            num(&body[i..])?,
        )),
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

/// Parses an input spec from the built-in catalog:
/// `poly:<c0,c1,...>`, `gauss`, `cos`, `sin`, `expi:<z>`,
/// `resolvent:<a+bi>`, each optionally prefixed by `re:` or `im:`.
pub fn parse_input(spec: &str) -> Result<SmoothInput> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("re:") {
        return Ok(parse_input(rest)?.re());
    }
    if let Some(rest) = spec.strip_prefix("im:") {
        return Ok(parse_input(rest)?.im());
    }
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    match (head, arg) {
        ("gauss", None) => Ok(SmoothInput::gauss()),
        ("cos", None) => Ok(SmoothInput::cos()),
        ("sin", None) => Ok(SmoothInput::sin()),
        ("poly", Some(a)) => {
            let coeffs = a
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse(format!("bad polynomial coefficients {a:?}")))?;
            if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::Parse(format!("bad polynomial coefficients {a:?}")));
            }
            Ok(SmoothInput::poly(coeffs))
        }
        ("expi", Some(a)) => {
            let z = a
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad frequency {a:?}")))?;
            Ok(SmoothInput::exp_i(z))
        }
        ("resolvent", Some(a)) => SmoothInput::resolvent(parse_complex(a)?)
            .map_err(|e| Error::Parse(e.to_string())),
        _ => Err(Error::Parse(format!("unknown input function {spec:?}"))),
    }
}
