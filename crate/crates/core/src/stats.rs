//! Log-log slope fits for remainder ladders.

use serde::Serialize;

/// Least-squares slope of `ln r` against `ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    /// `None` when fewer than two points lie above the rounding floor.
    pub slope: Option<f64>,
    /// Points that entered the fit.
    pub used: usize,
    /// Points whose remainder was at or below the rounding floor.
    pub at_floor: usize,
}

impl SlopeFit {
    /// Whether the remainders decay at least like `n^bound`. A ladder that
    /// is entirely at the rounding floor has a remainder that vanishes to
    /// working precision, which satisfies any such bound.
    pub fn satisfies(&self, bound: f64) -> bool {
        match self.slope {
            Some(s) => s <= bound,
            None => self.used == 0 && self.at_floor > 0,
        }
    }
}

/// Fits `(n, remainder, floor)` triples, skipping remainders at the floor.
pub fn fit_slope(points: &[(f64, f64, f64)]) -> SlopeFit {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, r, floor)| r > floor && r > 0.0)
        .map(|&(n, r, _)| (n.ln(), r.ln()))
        .collect();
    let at_floor = points.len() - kept.len();
    SlopeFit {
        slope: least_squares_slope(&kept),
        used: kept.len(),
        at_floor,
    }
}

/// Slope of the least-squares line through `(x, y)` pairs.
pub fn least_squares_slope(xy: &[(f64, f64)]) -> Option<f64> {
    if xy.len() < 2 {
        return None;
    }
    let m = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / m;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Mean and jackknife standard error of `values`, using `blocks`
/// contiguous blocks.
pub fn block_jackknife(values: &[f64], blocks: usize) -> (f64, f64) {
    jackknife_with(values.len(), blocks, |range| {
        let s: f64 = range.clone().map(|i| values[i]).sum();
        (s, range.len() as f64)
    })
    .unwrap_or((f64::NAN, f64::NAN))
}

// Block jackknife of a ratio of per-block sums.
fn jackknife_with<F>(len: usize, blocks: usize, block_sum: F) -> Option<(f64, f64)>
where
    F: Fn(std::ops::Range<usize>) -> (f64, f64),
{
    if len == 0 || blocks < 2 {
        return None;
    }
    let blocks = blocks.min(len);
    let bounds: Vec<usize> = (0..=blocks).map(|b| b * len / blocks).collect();
    let sums: Vec<(f64, f64)> = bounds.windows(2).map(|w| block_sum(w[0]..w[1])).collect();
    let total: (f64, f64) = sums.iter().fold((0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1));
    let full = total.0 / total.1;
    let loo: Vec<f64> = sums
        .iter()
        .map(|s| (total.0 - s.0) / (total.1 - s.1))
        .collect();
    let b = blocks as f64;
    let mean_loo = loo.iter().sum::<f64>() / b;
    let var = (b - 1.0) / b * loo.iter().map(|v| (v - mean_loo).powi(2)).sum::<f64>();
    Some((full, var.sqrt()))
}

/// Covariance `E(Y − EY)(Z − EZ)` with a block-jackknife standard error.
pub fn covariance_jackknife(y: &[f64], z: &[f64], blocks: usize) -> (f64, f64) {
    assert_eq!(y.len(), z.len());
    let len = y.len();
    if len < 2 || blocks < 2 {
        return (f64::NAN, f64::NAN);
    }
    let blocks = blocks.min(len);
    let bounds: Vec<usize> = (0..=blocks).map(|b| b * len / blocks).collect();
    // Per-block sums of y, z, yz and counts.
    let sums: Vec<[f64; 4]> = bounds
        .windows(2)
        .map(|w| {
            let mut s = [0.0; 4];
            for i in w[0]..w[1] {
                s[0] += y[i];
                s[1] += z[i];
                s[2] += y[i] * z[i];
                s[3] += 1.0;
            }
            s
        })
        .collect();
    let total = sums.iter().fold([0.0; 4], |mut a, s| {
        for k in 0..4 {
            a[k] += s[k];
        }
        a
    });
    let cov = |s: [f64; 4]| {
        let m = s[3];
        (s[2] - s[0] * s[1] / m) / (m - 1.0)
    };
    let full = cov(total);
    let loo: Vec<f64> = sums
        .iter()
        .map(|s| cov([total[0] - s[0], total[1] - s[1], total[2] - s[2], total[3] - s[3]]))
        .collect();
    let b = blocks as f64;
    let mean_loo = loo.iter().sum::<f64>() / b;
    let var = (b - 1.0) / b * loo.iter().map(|v| (v - mean_loo).powi(2)).sum::<f64>();
    (full, var.sqrt())
}
