//! Chebyshev series on an interval, with spectral differentiation.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `Σ c_k T_k(u)` with `u = (2x − a − b)/(b − a)` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<Complex64>,
}

impl GridFunction {
    pub fn from_coeffs(lo: f64, hi: f64, coeffs: Vec<Complex64>) -> Self {
        GridFunction { lo, hi, coeffs }
    }

    /// Interpolant of degree `degree` through the Chebyshev points of the
    /// first kind.
    pub fn interpolate<F: FnMut(f64) -> Complex64>(lo: f64, hi: f64, degree: usize, mut f: F) -> Self {
        let m = degree + 1;
        let mf = m as f64;
        let values: Vec<Complex64> = (0..m)
            .map(|j| {
                let u = ((j as f64 + 0.5) * PI / mf).cos();
                f(0.5 * (lo + hi) + 0.5 * (hi - lo) * u)
            })
            .collect();
        // cos(k(j+1/2)π/m) = cos(k(2j+1)π/(2m)), tabulated over one period.
        let period = 4 * m;
        let table: Vec<f64> = (0..period)
            .map(|i| (i as f64 * PI / (2.0 * mf)).cos())
            .collect();
        let coeffs = (0..m)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    acc += v * table[(k * (2 * j + 1)) % period];
                }
                let scale = if k == 0 { 1.0 / mf } else { 2.0 / mf };
                acc * scale
            })
            .collect();
        GridFunction { lo, hi, coeffs }
    }

    /// Interpolant on the transfer-operator interval `[-2, 2]`.
    pub fn on_support<F: FnMut(f64) -> Complex64>(degree: usize, f: F) -> Self {
        Self::interpolate(-2.0, 2.0, degree, f)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        let tol = 1e-12 * (self.hi - self.lo);
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> Complex64 {
        let u = self.to_unit(x);
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * u) - b2;
            b2 = b1;
            b1 = b0;
        }
        match self.coeffs.first() {
            Some(c0) => c0 + b1 * u - b2,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Exact derivative of the series, one degree lower.
    pub fn derivative(&self) -> GridFunction {
        let n = self.coeffs.len();
        if n <= 1 {
            return GridFunction::from_coeffs(self.lo, self.hi, vec![Complex64::new(0.0, 0.0)]);
        }
        let mut d = vec![Complex64::new(0.0, 0.0); n - 1];
        // d_{k-1} = d_{k+1} + 2k c_k, then halve d_0.
        for k in (1..n).rev() {
            let next = if k + 1 < n - 1 { d[k + 1] } else { Complex64::new(0.0, 0.0) };
            d[k - 1] = next + self.coeffs[k] * (2.0 * k as f64);
        }
        d[0] *= 0.5;
        let s = 2.0 / (self.hi - self.lo);
        for c in &mut d {
            *c *= s;
        }
        GridFunction::from_coeffs(self.lo, self.hi, d)
    }

    pub fn nth_derivative(&self, k: usize) -> GridFunction {
        (0..k).fold(self.clone(), |f, _| f.derivative())
    }

    /// Drops trailing coefficients below `tol · max|c|`.
    pub fn chop(mut self, tol: f64) -> GridFunction {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= tol * scale {
            self.coeffs.pop();
        }
        self
    }

    /// Magnitude of the last retained coefficient.
    pub fn tail(&self) -> f64 {
        self.coeffs.last().map(|c| c.norm()).unwrap_or(0.0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from `f` at the Chebyshev–Lobatto points, which are
    /// staggered against the interpolation nodes.
    pub fn interpolation_residual<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> f64 {
        let m = self.coeffs.len().max(2);
        (0..=m)
            .map(|j| {
                let u = (j as f64 * PI / m as f64).cos();
                let x = 0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * u;
                (self.eval(x) - f(x)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `(1/2π)∫ f(s)√(4−s²) ds` for a series on `[-2, 2]`: only `T_0`
    /// and `T_2` pair nontrivially with the semicircle.
    pub fn semicircle_average(&self) -> Complex64 {
        debug_assert!(self.lo == -2.0 && self.hi == 2.0);
        let c0 = self.coeffs.first().copied().unwrap_or_default();
        let c2 = self.coeffs.get(2).copied().unwrap_or_default();
        c0 - c2 * 0.5
    }

    pub fn scale(mut self, s: Complex64) -> GridFunction {
        for c in &mut self.coeffs {
            *c *= s;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn interpolates_polynomial_exactly() {
        let g = GridFunction::on_support(8, |x| c(x.powi(4) - 3.0 * x));
        for &x in &[-2.0, -0.7, 0.0, 1.9] {
            assert!((g.eval(x) - c(x.powi(4) - 3.0 * x)).norm() < 1e-12);
        }
        assert!((g.semicircle_average() - c(2.0)).norm() < 1e-13);
    }

    #[test]
    fn spectral_derivatives() {
        let g = GridFunction::interpolate(-1.0, 3.0, 60, |x| c(x.sin())).chop(1e-15);
        assert!(g.degree() < 40);
        let d3 = g.nth_derivative(3);
        for &x in &[-1.0, 0.2, 1.7, 3.0] {
            assert!((g.derivative().eval(x) - c(x.cos())).norm() < 1e-12);
            assert!((d3.eval(x) - c(-x.cos())).norm() < 1e-9);
        }
        assert!(g.interpolation_residual(|x| c(x.sin())) < 1e-14);
    }

    #[test]
    fn chop_keeps_leading_part() {
        let g = GridFunction::on_support(100, |x| c((-x * x).exp())).chop(1e-15);
        assert!(g.degree() < 60);
        assert!((g.eval(0.5) - c((-0.25f64).exp())).norm() < 1e-15);
    }
}
