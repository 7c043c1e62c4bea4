use gue_expand::eigen::{hermitian_eigen, CMatrix};
use gue_expand::functions::format_complex;
use gue_expand::stats::fit_slope;
use gue_expand::symbolic::SemicircleExpr;
use gue_expand::transfer::alpha_distribution;
use gue_expand::{parse_complex, Complex64, HermiteEvaluator, SmoothInput, TransferConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn expr() -> impl Strategy<Value = SemicircleExpr> {
    prop::collection::vec((-9i64..=9, 1i64..=4, 0u8..=3, -9i64..=5), 1..5).prop_map(|terms| {
        terms.into_iter().fold(SemicircleExpr::zero(), |acc, (p, q, eps, q2)| {
            let c = BigRational::new(BigInt::from(p), BigInt::from(q));
            acc.add(&SemicircleExpr::term(c, eps, q2))
        })
    })
}

fn canonical(e: &SemicircleExpr) -> bool {
    e.terms().all(|(&(eps, _), c)| eps <= 1 && *c != BigRational::from_integer(0.into()))
}

fn spectral() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, 0.5f64..3.0, any::<bool>()).prop_map(|(re, im, up)| Complex64::new(re, if up { im } else { -im }))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn family_is_closed(a in expr(), b in expr(), l in spectral()) {
        let prod = a.mul(&b);
        let d = a.derivative();
        prop_assert!(canonical(&prod) && canonical(&d) && canonical(&a.add(&b)));
        let (va, vb) = (a.evaluate(l).unwrap(), b.evaluate(l).unwrap());
        prop_assert!(close(prod.evaluate(l).unwrap(), va * vb, 1e-10));
        let h = 1e-5;
        let fd = (a.evaluate(l + h).unwrap() - a.evaluate(l - h).unwrap()) / (2.0 * h);
        prop_assert!(close(d.evaluate(l).unwrap(), fd, 1e-6));
    }

    #[test]
    fn product_rule(a in expr(), b in expr()) {
        let lhs = a.mul(&b).derivative();
        let rhs = a.derivative().mul(&b).add(&a.mul(&b.derivative()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn density_ode_residual(n in 1usize..=64, x in -4.0f64..4.0) {
        let b = HermiteEvaluator::new(n).unwrap().bundle(x);
        prop_assert!(b.ode_residual().abs() <= 1e-8 * b.residual_scale());
        prop_assert!(b.h >= 0.0);
    }

    #[test]
    fn divided_difference_is_symmetric(x in -3.0f64..3.0, d in -1e-2f64..1e-2) {
        for g in [SmoothInput::gauss(), SmoothInput::cos(), SmoothInput::resolvent(Complex64::new(0.5, 1.0)).unwrap()] {
            let a = g.divided_difference(x, x + d).unwrap();
            let b = g.divided_difference(x + d, x).unwrap();
            prop_assert!(close(a, b, 1e-12));
            let fd = g.deriv(1, x + 0.5 * d).unwrap();
            prop_assert!(close(a, fd, d * d));
        }
    }

    #[test]
    fn alphas_are_linear(c in prop::collection::vec(-2.0f64..2.0, 1..8), j in 1usize..=2) {
        let cfg = TransferConfig::default();
        let whole = alpha_distribution(&SmoothInput::poly(c.clone()), j, &cfg).unwrap();
        let mut parts = Complex64::new(0.0, 0.0);
        for (p, &cp) in c.iter().enumerate() {
            parts += alpha_distribution(&SmoothInput::monomial(p), j, &cfg).unwrap() * cp;
        }
        prop_assert!(close(whole, parts, 1e-11));
        if c.len() <= 2 {
            prop_assert!(whole.norm() <= 1e-10);
        }
    }

    #[test]
    fn eigenvalues_preserve_trace(n in 1usize..12, entries in prop::collection::vec(-1.0f64..1.0, 2 * 144)) {
        let mut a = CMatrix::zeros(n);
        for i in 0..n {
            a[(i, i)] = Complex64::new(entries[i * 12 + i], 0.0);
            for j in 0..i {
                let z = Complex64::new(entries[i * 12 + j], entries[144 + i * 12 + j]);
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        let e = hermitian_eigen(&a, false).unwrap();
        let sum: f64 = e.values.iter().sum();
        let sq: f64 = e.values.iter().map(|v| v * v).sum();
        prop_assert!((sum - a.trace().re).abs() <= 1e-12 * (1.0 + a.norm()));
        prop_assert!((sq - a.norm().powi(2)).abs() <= 1e-12 * (1.0 + a.norm().powi(2)));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn complex_text_roundtrip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let z = Complex64::new(re, im);
        prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn slope_of_power_law(c in 0.1f64..10.0, p in -8.0f64..-0.5) {
        let pts: Vec<_> = [8.0f64, 16.0, 32.0, 64.0].iter().map(|&n| (n, c * n.powf(p), 0.0)).collect();
        let fit = fit_slope(&pts);
        prop_assert!((fit.slope.unwrap() - p).abs() < 1e-9);
    }
}
