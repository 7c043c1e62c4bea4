use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gue_expand::covariance::{cov_trace, g2_exact};
use gue_expand::montecarlo::trace_samples;
use gue_expand::symbolic::{cjr_table, upsilon_l, EtaFamily};
use gue_expand::transfer::{alpha_distribution, expansion_ladder};
use gue_expand::{Complex64, CovConfig, GueSampler, HermiteEvaluator, Precision, SmoothInput, TransferConfig};

fn hermite(c: &mut Criterion) {
    let mut g = c.benchmark_group("density_bundle");
    for n in [8usize, 64, 512] {
        let ev = HermiteEvaluator::new(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &ev, |b, ev| {
            b.iter(|| ev.bundle(black_box(0.7)))
        });
    }
    g.finish();
}

fn symbolic(c: &mut Criterion) {
    c.bench_function("cjr_table_8", |b| b.iter(|| cjr_table(black_box(8))));
    c.bench_function("upsilon_2", |b| {
        b.iter(|| {
            let fam = EtaFamily::new(3);
            upsilon_l(&fam, black_box(2))
        })
    });
}

fn transfer(c: &mut Criterion) {
    let cfg = TransferConfig::default();
    let g = SmoothInput::gauss();
    c.bench_function("alpha_2_gauss", |b| b.iter(|| alpha_distribution(&g, black_box(2), &cfg).unwrap()));
    let mut grp = c.benchmark_group("ladder");
    grp.sample_size(10);
    grp.bench_function("cos_extended", |b| {
        b.iter(|| expansion_ladder(&SmoothInput::cos(), &[8, 16, 32, 64], 2, &cfg, Precision::Extended).unwrap())
    });
    grp.finish();
}

fn covariance(c: &mut Criterion) {
    let cfg = CovConfig::default();
    let (l, m) = (Complex64::new(0.0, 3.0), Complex64::new(2.0, 2.0));
    c.bench_function("g2_exact_n32", |b| b.iter(|| g2_exact(black_box(32), l, m, &cfg).unwrap()));
    let f = SmoothInput::resolvent(l).unwrap();
    let g = SmoothInput::resolvent(m).unwrap();
    let mut grp = c.benchmark_group("cov_trace");
    grp.sample_size(10);
    grp.bench_function("n8", |b| b.iter(|| cov_trace(&f, &g, black_box(8), &cfg).unwrap()));
    grp.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let s = GueSampler::normalized(8, 1).unwrap();
    let x2 = SmoothInput::monomial(2);
    let mut grp = c.benchmark_group("monte_carlo");
    grp.sample_size(10);
    grp.bench_function("n8_4096_draws", |b| b.iter(|| trace_samples(&s, &x2, &x2, black_box(4096)).unwrap()));
    grp.finish();
}

criterion_group!(benches, hermite, symbolic, transfer, covariance, monte_carlo);
criterion_main!(benches);
