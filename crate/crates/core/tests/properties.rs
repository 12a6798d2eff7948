use std::sync::Arc;

use proptest::prelude::*;
use qeflat_core::catalog::{random_chart, random_potential};
use qeflat_core::conformal::conformal_metric;
use qeflat_core::curvature::universal_defects;
use qeflat_core::expr::{BinOp, Expr};
use qeflat_core::jet::{seed, Jet3};
use qeflat_core::oracle::fd_partials;
use qeflat_core::scalar::Func;
use qeflat_core::{CurvaturePack, Expression, Tolerances};

fn coords() -> Arc<[String]> {
    vec!["x".into(), "y".into()].into()
}

fn small_ast() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(-8i32..8).prop_map(|k| Expr::Num(k as f64 / 4.0)), (0usize..2).prop_map(Expr::Var)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Tanh), Just(Func::Exp)], inner.clone()).prop_map(|(f, a)| Expr::call(f, a)),
            (prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)], inner.clone(), inner).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        ]
    })
}

fn multi_indices() -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for i in 0..=3u8 {
        for j in 0..=(3 - i) {
            if i + j > 0 {
                out.push(vec![i, j]);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jet_partials_match_finite_differences(e in small_ast(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let expr = Expression::from_expr(e, coords()).unwrap();
        let p = [x, y];
        let jet = expr.evaluate(&seed(&p).unwrap()).unwrap();
        prop_assume!(jet.value().abs() < 1e3);
        for alpha in multi_indices() {
            let k: u8 = alpha.iter().sum();
            let exact = jet.partial(&alpha).unwrap();
            let fd = fd_partials(&expr, &p, &alpha).unwrap();
            let tol = 10f64.powi(-(7 - k as i32));
            prop_assert!((exact - fd).abs() <= tol * (1.0 + exact.abs()), "{} {:?}: jet {} fd {}", expr, alpha, exact, fd);
        }
    }

    #[test]
    fn ring_axioms(a in small_ast(), b in small_ast(), c in small_ast(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let s = seed(&[x, y]).unwrap();
        let ev = |e: Expr| Expression::from_expr(e, coords()).unwrap().evaluate(&s).unwrap();
        let (a, b, c) = (ev(a), ev(b), ev(c));
        let left = &(&a + &b) + &c;
        let right = &a + &(&b + &c);
        let scale = 1.0 + a.coefficients().iter().chain(b.coefficients()).chain(c.coefficients()).fold(0f64, |m, v| m.max(v.abs()));
        for (l, r) in left.coefficients().iter().zip(right.coefficients()) {
            prop_assert!((l - r).abs() <= 4.0 * f64::EPSILON * scale);
        }
        let one = Jet3::constant(2, 1.0).unwrap();
        prop_assert_eq!(&a * &one, a);
    }

    #[test]
    fn composition_matches_substitution(f in small_ast(), g in small_ast(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let f = Expression::from_expr(f, coords()).unwrap();
        let g = Expression::from_expr(g, coords()).unwrap();
        let s = seed(&[x, y]).unwrap();
        let gj = g.evaluate(&s).unwrap();
        prop_assume!(gj.value().abs() < 10.0);
        let composed = f.evaluate(&[gj, s[1].clone()]).unwrap();
        let direct = f.substitute(0, &g).evaluate(&s).unwrap();
        for (a, b) in composed.coefficients().iter().zip(direct.coefficients()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn universal_identities_on_random_metrics(n in 2usize..=6, s in 0u64..10_000) {
        let chart = random_chart(n, s).unwrap();
        let p = chart.sample_points(1, s)[0].clone();
        let pack = CurvaturePack::compute(&chart, &p).unwrap();
        let tol = Tolerances::default();
        for d in universal_defects(&pack).unwrap() {
            let bound = match d.name {
                "schur" => tol.schur(),
                "weyl_divergence" => tol.weyl_divergence(),
                "metric_compatibility" => tol.jet_identity(),
                _ => tol.symmetry(),
            };
            prop_assert!(d.value <= bound * d.scale.max(1.0), "n={} {}: {:e}", n, d.name, d.value);
        }
    }

    #[test]
    fn weyl_is_conformally_invariant(s in 0u64..10_000) {
        let chart = random_chart(4, s).unwrap();
        let f = random_potential(&chart, s).unwrap().f;
        let conf = conformal_metric(&chart, &f).unwrap();
        let p = chart.sample_points(1, s)[0].clone();
        let w = CurvaturePack::compute(&chart, &p).unwrap().weyl.unwrap();
        let wt = CurvaturePack::compute(&conf, &p).unwrap().weyl.unwrap();
        let factor = (-f.eval_f64(&p).unwrap()).exp();
        let expected = w.scaled(factor);
        prop_assert!(wt.max_abs_diff(&expected).unwrap() <= 1e-9 * (1.0 + w.max_abs()));
    }
}
