//! Dense Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix, then implicit QL with Wilkinson shifts.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues in ascending order and, when requested, unit eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Option<CMatrix>,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Option<Vec<Complex64>> {
        let v = self.vectors.as_ref()?;
        Some((0..v.n).map(|i| v[(i, k)]).collect())
    }
}

// Reduces `a` in place (lower triangle used) to Hermitian tridiagonal form
// and then to real symmetric form. Returns (diag, subdiag, Q) with
// A = Q T Qᴴ when `want_q`.
fn tridiagonalize(mut a: CMatrix, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<CMatrix>) {
    let n = a.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut q = want_q.then(|| CMatrix::identity(n));
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = ((k + 1)..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v = vec![zero; n];
        for i in (k + 1)..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // p = β A v, w = p − (β vᴴp / 2) v, A ← A − v wᴴ − w vᴴ.
        let mut p = vec![zero; n];
        for i in (k + 1)..n {
            let mut s = zero;
            for j in (k + 1)..n {
                s += a[(i, j)] * v[j];
            }
            p[i] = s * beta;
        }
        let vp: Complex64 = ((k + 1)..n).map(|i| v[i].conj() * p[i]).sum();
        let kk = vp * (0.5 * beta);
        let w: Vec<Complex64> = (0..n).map(|i| p[i] - kk * v[i]).collect();
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[(i, j)] -= upd;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in (k + 2)..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }
        if let Some(q) = q.as_mut() {
            // Q ← Q H with H = I − β v vᴴ.
            for r in 0..n {
                let s: Complex64 = ((k + 1)..n).map(|j| q[(r, j)] * v[j]).sum::<Complex64>() * beta;
                for j in (k + 1)..n {
                    q[(r, j)] -= s * v[j].conj();
                }
            }
        }
    }
    // Diagonal phase D making the subdiagonal real and nonnegative:
    // T = D S Dᴴ with S real.
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phase = Complex64::new(1.0, 0.0);
    let mut phases = vec![phase; n];
    for i in 0..n.saturating_sub(1) {
        let s = a[(i + 1, i)];
        let m = s.norm();
        e[i] = m;
        if m > 0.0 {
            phase *= s / m;
        }
        phases[i + 1] = phase;
    }
    if let Some(q) = q.as_mut() {
        for r in 0..n {
            for (j, ph) in phases.iter().enumerate() {
                q[(r, j)] *= ph;
            }
        }
    }
    (d, e, q)
}

// Implicit QL on a real symmetric tridiagonal matrix; `e[i]` couples rows
// `i` and `i + 1`. Rotations are applied to the columns of `z` if present.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut CMatrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let max_iter = 30 * n.max(1);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::NoConvergence {
                    method: "tridiagonal QL",
                    iterations: iter,
                    detail: format!("off-diagonal {} at row {l}", e[l]),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = z[(k, i)] * s + f * c;
                        z[(k, i)] = z[(k, i)] * c - f * s;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix, want_vectors: bool) -> Result<EigenDecomposition> {
    if !a.is_hermitian() {
        return Err(Error::Domain("matrix is not Hermitian".into()));
    }
    let n = a.n;
    let (mut d, mut e, mut q) = tridiagonalize(a.clone(), want_vectors);
    tridiagonal_ql(&mut d, &mut e, q.as_mut())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = q.map(|q| {
        let mut out = CMatrix::zeros(n);
        for (new, &old) in order.iter().enumerate() {
            for r in 0..n {
                out[(r, new)] = q[(r, old)];
            }
        }
        out
    });
    Ok(EigenDecomposition { values, vectors })
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a, false)?.values)
}
