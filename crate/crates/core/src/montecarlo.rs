//! Monte Carlo sampling of GUE(n, σ²) spectra and empirical linear
//! statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{hermitian_eigenvalues, CMatrix};
use crate::error::{Error, Result};
use crate::functions::SmoothInput;
use crate::stats::{block_jackknife, covariance_jackknife};
use num_complex::Complex64;

/// Draws handled by one random stream. Chunk `c` always uses stream `c` of
/// the seeded generator, so results do not depend on the thread count.
pub const CHUNK: usize = 1024;

/// GUE(n, σ²): Hermitian, diagonal entries `N(0, σ²)`, off-diagonal real
/// and imaginary parts independent `N(0, σ²/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GueSampler {
    pub n: usize,
    pub sigma2: f64,
    pub seed: u64,
}

impl GueSampler {
    pub fn new(n: usize, sigma2: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("matrix size n must be at least 1".into()));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Domain(format!("entry variance must be positive, got {sigma2}")));
        }
        Ok(GueSampler { n, sigma2, seed })
    }

    /// The normalisation `σ² = 1/n` used throughout the expansions.
    pub fn normalized(n: usize, seed: u64) -> Result<Self> {
        Self::new(n, 1.0 / n.max(1) as f64, seed)
    }

    /// Generator for chunk `c`.
    pub fn stream(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk);
        rng
    }

    pub fn sample_matrix<R: Rng>(&self, rng: &mut R) -> CMatrix {
        let n = self.n;
        let sd = self.sigma2.sqrt();
        let half = (0.5 * self.sigma2).sqrt();
        let mut a = CMatrix::zeros(n);
        for i in 0..n {
            let x: f64 = rng.sample(StandardNormal);
            a[(i, i)] = Complex64::new(sd * x, 0.0);
            for j in 0..i {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(half * re, half * im);
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        a
    }

    /// Ascending eigenvalues of one draw.
    pub fn sample_spectrum<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.sample_matrix(rng))
    }
}

/// Empirical `E{tr_n f}`, `E{tr_n g}` and `Cov{Tr_n f, Tr_n g}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McStats {
    pub sampler: GueSampler,
    pub f: String,
    pub g: String,
    pub draws: usize,
    pub blocks: usize,
    pub mean_f: f64,
    pub mean_f_se: f64,
    pub mean_g: f64,
    pub mean_g_se: f64,
    pub cov_fg: f64,
    pub cov_fg_se: f64,
}

/// Linear statistics `Tr f(X)` and `Tr g(X)` for each of `draws` samples,
/// in draw order.
pub fn trace_samples(sampler: &GueSampler, f: &SmoothInput, g: &SmoothInput, draws: usize) -> Result<Vec<(f64, f64)>> {
    for h in [f, g] {
        if !h.is_real() {
            return Err(Error::Domain(format!("{h} is complex-valued; sample its re: or im: part")));
        }
    }
    let chunks = draws.div_ceil(CHUNK);
    let per_chunk: Vec<Result<Vec<(f64, f64)>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = sampler.stream(c as u64);
            let count = CHUNK.min(draws - c * CHUNK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let spec = sampler.sample_spectrum(&mut rng)?;
                let mut tf = 0.0;
                let mut tg = 0.0;
                for &x in &spec {
                    tf += f.value(x)?.re;
                    tg += g.value(x)?.re;
                }
                out.push((tf, tg));
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(draws);
    for chunk in per_chunk {
        all.extend(chunk?);
    }
    Ok(all)
}

/// Monte Carlo estimates with block-jackknife standard errors.
pub fn empirical_statistics(
    sampler: &GueSampler,
    f: &SmoothInput,
    g: &SmoothInput,
    draws: usize,
    blocks: usize,
) -> Result<McStats> {
    if draws < 100 {
        return Err(Error::Domain(format!("at least 100 draws are required, got {draws}")));
    }
    let samples = trace_samples(sampler, f, g, draws)?;
    let inv_n = 1.0 / sampler.n as f64;
    let tf: Vec<f64> = samples.iter().map(|s| s.0 * inv_n).collect();
    let tg: Vec<f64> = samples.iter().map(|s| s.1 * inv_n).collect();
    let (mean_f, mean_f_se) = block_jackknife(&tf, blocks);
    let (mean_g, mean_g_se) = block_jackknife(&tg, blocks);
    let big_f: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let big_g: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let (cov_fg, cov_fg_se) = covariance_jackknife(&big_f, &big_g, blocks);
    Ok(McStats {
        sampler: *sampler,
        f: f.label().to_string(),
        g: g.label().to_string(),
        draws,
        blocks,
        mean_f,
        mean_f_se,
        mean_g,
        mean_g_se,
        cov_fg,
        cov_fg_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_are_hermitian_and_reproducible() {
        let s = GueSampler::normalized(6, 42).unwrap();
        let a = s.sample_matrix(&mut s.stream(0));
        let b = s.sample_matrix(&mut s.stream(0));
        assert!(a.is_hermitian());
        assert_eq!(a, b);
        let c = s.sample_matrix(&mut s.stream(1));
        assert_ne!(a, c);
    }

    #[test]
    fn trace_is_preserved() {
        let s = GueSampler::normalized(10, 7).unwrap();
        let mut rng = s.stream(0);
        for _ in 0..20 {
            let a = s.sample_matrix(&mut rng);
            let ev = hermitian_eigenvalues(&a).unwrap();
            assert!((ev.iter().sum::<f64>() - a.trace().re).abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_case_variance() {
        let s = GueSampler::new(1, 1.0, 3).unwrap();
        let x = SmoothInput::monomial(1);
        let st = empirical_statistics(&s, &x, &x, 100_000, 100).unwrap();
        assert!((st.cov_fg - 1.0).abs() < 3.0 * st.cov_fg_se, "{st:?}");
        assert!(st.mean_f.abs() < 3.0 * st.mean_f_se);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = GueSampler::normalized(4, 9).unwrap();
        let x2 = SmoothInput::monomial(2);
        let a = trace_samples(&s, &x2, &x2, 3000).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| trace_samples(&s, &x2, &x2, 3000).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn complex_inputs_rejected() {
        let s = GueSampler::normalized(2, 0).unwrap();
        let g = SmoothInput::resolvent(Complex64::new(0.0, 3.0)).unwrap();
        assert!(trace_samples(&s, &g, &g, 10).is_err());
    }
}
