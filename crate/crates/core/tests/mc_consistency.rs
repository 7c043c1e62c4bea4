use gue_expand::montecarlo::{empirical_statistics, trace_samples};
use gue_expand::transfer::expectation;
use gue_expand::{Complex64, GueSampler, LineQuadConfig, SmoothInput};

// Over 20 seeds, each estimate lands within 4 standard errors of its
// deterministic value in at least 19 runs.
#[test]
fn estimates_are_consistent_across_seeds() {
    let n = 8;
    let x = SmoothInput::monomial(1);
    let x2 = SmoothInput::monomial(2);
    let g = SmoothInput::resolvent(Complex64::new(0.0, 3.0)).unwrap().re();
    let mean_g = expectation(&g, n, &LineQuadConfig::default()).unwrap().re;
    let mut hits = [0usize; 3];
    for seed in 0..20u64 {
        let s = GueSampler::normalized(n, 1000 + seed).unwrap();
        let a = empirical_statistics(&s, &x2, &x, 10_000, 50).unwrap();
        let b = empirical_statistics(&s, &g, &x, 10_000, 50).unwrap();
        hits[0] += ((a.mean_f - 1.0) / a.mean_f_se).abs().le(&4.0) as usize;
        hits[1] += ((a.cov_fg - 0.0) / a.cov_fg_se).abs().le(&4.0) as usize;
        hits[2] += ((b.mean_f - mean_g) / b.mean_f_se).abs().le(&4.0) as usize;
    }
    assert!(hits.iter().all(|&h| h >= 19), "{hits:?}");
}

#[test]
fn identical_seed_gives_identical_stream() {
    let s = GueSampler::normalized(5, 77).unwrap();
    let x = SmoothInput::monomial(1);
    let a = trace_samples(&s, &x, &x, 2500).unwrap();
    let b = trace_samples(&s, &x, &x, 2500).unwrap();
    assert_eq!(a, b);
}

#[test]
fn entry_variances() {
    use gue_expand::stats::block_jackknife;
    let s = GueSampler::new(3, 0.5, 11).unwrap();
    let mut rng = s.stream(0);
    let (mut diag, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..20_000 {
        let m = s.sample_matrix(&mut rng);
        diag.push(m[(0, 0)].re.powi(2));
        re.push(m[(1, 0)].re.powi(2));
        im.push(m[(2, 1)].im.powi(2));
        assert_eq!(m[(0, 0)].im, 0.0);
    }
    for (v, want) in [(diag, 0.5), (re, 0.25), (im, 0.25)] {
        let (mean, se) = block_jackknife(&v, 50);
        assert!((mean - want).abs() < 4.0 * se, "{mean} ± {se} vs {want}");
    }
}
