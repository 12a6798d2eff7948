use qeflat_core::adapted::{check_adapted_identities, check_level_sets, theorem_verdict};
use qeflat_core::catalog::CATALOG;
use qeflat_core::curvature::{check_curvature, check_lcf};
use qeflat_core::quasi_einstein::check_qe;
use qeflat_core::{Fixture, Tolerances, Verdict};

const QE_FIXTURES: &[&str] = &[
    "hyperbolic_qe:3:1",
    "hyperbolic_qe:4:2",
    "hyperbolic_qe:5:-1",
    "special_mu:3",
    "special_mu:5",
    "adapted_hyperbolic_qe:3:2",
    "gaussian_soliton:4",
    "adapted_gaussian_soliton:3",
    "cylinder_soliton:3",
    "sphere:4:1.5",
    "hyperbolic:3",
    "s2xs2",
];

#[test]
fn catalog_defaults_all_load() {
    for (name, _, _) in CATALOG {
        let fx = Fixture::load(name).unwrap();
        assert_eq!(fx.id.name(), *name);
    }
}

#[test]
fn qe_identities_hold_on_catalog() {
    let tol = Tolerances::default();
    for s in QE_FIXTURES {
        let fx = Fixture::load(s).unwrap();
        let pts = fx.chart.sample_points(8, 1);
        let r = check_qe(&fx.chart, &fx.potential, &pts, s, 1, tol).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_human());
        let r = check_curvature(&fx.chart, &pts, s, 1, tol).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_human());
    }
}

#[test]
fn lcf_separates_s2xs2_from_space_forms() {
    let tol = Tolerances::default();
    let s2 = Fixture::load("s2xs2").unwrap();
    let r = check_lcf(&s2.chart, &s2.chart.sample_points(4, 0), "s2xs2", 0, tol).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.max_defect("weyl_norm").unwrap();
    assert!((w - 4.0 / 3f64.sqrt()).abs() < 1e-9, "{w}");
    for s in ["sphere:4", "hyperbolic_qe:5:1", "gaussian_soliton:4", "cylinder_soliton:5"] {
        let fx = Fixture::load(s).unwrap();
        let r = check_lcf(&fx.chart, &fx.chart.sample_points(4, 0), s, 0, tol).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_human());
    }
}

#[test]
fn level_set_chain_and_theorem() {
    let tol = Tolerances::default();
    for s in ["hyperbolic_qe:3:1", "hyperbolic_qe:4:-2", "gaussian_soliton:4", "cylinder_soliton:3", "adapted_gaussian_soliton:4"] {
        let fx = Fixture::load(s).unwrap();
        let plan = fx.sample_plan(None, 10, 3, 0).unwrap();
        let r = check_level_sets(&fx.chart, &fx.potential, &plan.levels, s, 0, tol).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_human());
        let r = theorem_verdict(&fx.chart, &fx.potential, &plan, s, tol).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_human());
        assert!(r.spreads.iter().filter(|s| s.name.starts_with("fiber_sectional@")).count() >= 3);
    }
}

#[test]
fn theorem_json_is_reproducible() {
    let fx = Fixture::load("hyperbolic_qe:4:2").unwrap();
    let run = || {
        let plan = fx.sample_plan(None, 5, 3, 0).unwrap();
        theorem_verdict(&fx.chart, &fx.potential, &plan, "hyperbolic_qe:4:2", Tolerances::default()).unwrap().render_json()
    };
    assert_eq!(run(), run());
}

#[test]
fn adapted_identities_for_several_mu() {
    for s in ["adapted_hyperbolic_qe:3:1", "adapted_hyperbolic_qe:3:2", "adapted_hyperbolic_qe:3:-1", "adapted_hyperbolic_qe:4:1"] {
        let fx = Fixture::load(s).unwrap();
        let r = check_adapted_identities(&fx.adapted().unwrap(), &fx.chart.sample_points(10, 2), s, 2, Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.render_human());
    }
}
