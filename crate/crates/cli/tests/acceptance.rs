//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use qeflat_core::adapted::{check_adapted_identities, theorem_verdict, LevelPoint};
use qeflat_core::catalog::{random_chart, random_potential};
use qeflat_core::conformal::{check_conformal_ricci_formula, check_special_mu};
use qeflat_core::curvature::{check_lcf, universal_defects, weyl_divergence_defect};
use qeflat_core::oracle::{compare, fd_curvature};
use qeflat_core::quasi_einstein::check_qe;
use qeflat_core::{CurvaturePack, Fixture, PotentialSpec, Tolerances, Verdict};

/// Weyl norm of the product of two unit 2-spheres, read from the oracle.
const S2XS2_WEYL_NORM: f64 = 2.309_401_076_758_503;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T>(r: qeflat_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn pipeline_vs_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for (n, count) in [(3, 7), (4, 7), (5, 6)] {
        for k in 0..count {
            let chart = e(random_chart(n, 100 * n as u64 + k))?;
            let p = chart.sample_points(1, k)[0].clone();
            let pack = e(CurvaturePack::compute(&chart, &p))?;
            let fd = e(fd_curvature(&chart, &p))?;
            for (name, gap) in e(compare(&pack, &fd))? {
                ensure(gap < 1e-4, format!("n={n} sample {k}: {name} gap {gap:.2e}"))?;
                worst = worst.max(gap);
            }
            samples += 1;
        }
    }
    Ok(format!("{samples} samples, max gap {worst:.2e}"))
}

fn universal_identities() -> Outcome {
    let tol = Tolerances::default();
    let mut worst = std::collections::BTreeMap::<&str, f64>::new();
    for n in [3, 4, 5] {
        for k in 0..6u64 {
            let chart = e(random_chart(n, 7000 + 10 * n as u64 + k))?;
            for p in chart.sample_points(2, k) {
                let pack = e(CurvaturePack::compute(&chart, &p))?;
                for d in e(universal_defects(&pack))? {
                    let bound = match d.name {
                        "schur" => 1e-6,
                        "weyl_divergence" => 1e-6,
                        _ => 1e-9,
                    };
                    ensure(d.value < bound * d.scale.max(1.0), format!("n={n}: {} = {:.2e}", d.name, d.value))?;
                    let w = worst.entry(d.name).or_default();
                    *w = w.max(d.value);
                }
                if n >= 4 {
                    let d = e(weyl_divergence_defect(&pack))?;
                    ensure(d.value < 1e-6 * d.scale.max(1.0), format!("n={n}: weyl divergence {:.2e}", d.value))?;
                }
            }
            let pot = e(random_potential(&chart, k))?;
            let r = e(check_conformal_ricci_formula(&chart, &pot, &chart.sample_points(2, k), "random", k, tol))?;
            let d = r.max_defect("conformal_ricci").unwrap_or(f64::NAN);
            ensure(d < 1e-6, format!("n={n}: conformal Ricci formula {d:.2e}"))?;
            let w = worst.entry("conformal_ricci").or_default();
            *w = w.max(d);
        }
    }
    let schur = worst.get("schur").copied().unwrap_or(0.0);
    let bianchi = worst.get("first_bianchi").copied().unwrap_or(0.0);
    Ok(format!("first_bianchi {bianchi:.1e}, schur {schur:.1e}, conformal_ricci {:.1e}", worst["conformal_ricci"]))
}

const QE_FIXTURES: &[&str] = &[
    "flat:3",
    "sphere:3:1",
    "sphere:4:2",
    "hyperbolic:4",
    "hyperbolic_qe:3:1",
    "hyperbolic_qe:4:2",
    "hyperbolic_qe:5:-1",
    "special_mu:3",
    "special_mu:4",
    "adapted_hyperbolic_qe:3:1",
    "adapted_hyperbolic_qe:4:2",
    "gaussian_soliton:3",
    "gaussian_soliton:4",
    "adapted_gaussian_soliton:3",
    "cylinder_soliton:3",
    "cylinder_soliton:4",
    "s2xs2",
];

fn catalog_self_validation() -> Outcome {
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for s in QE_FIXTURES {
        let fx = e(Fixture::load(s))?;
        let r = e(check_qe(&fx.chart, &fx.potential, &fx.chart.sample_points(20, 3), s, 3, tol))?;
        for name in ["qe_residual", "eq1_trace", "eq2_gradient_scalar", "eq3_commutator"] {
            let d = r.max_defect(name).unwrap_or(f64::NAN);
            ensure(d < 1e-8, format!("{s}: {name} = {d:.2e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("{} fixtures, max defect {worst:.1e}", QE_FIXTURES.len()))
}

fn adapted_identities() -> Outcome {
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for s in ["adapted_hyperbolic_qe:3:1", "adapted_hyperbolic_qe:3:2", "adapted_hyperbolic_qe:3:-1", "adapted_hyperbolic_qe:4:1"] {
        let fx = e(Fixture::load(s))?;
        let r = e(check_adapted_identities(&e(fx.adapted())?, &fx.chart.sample_points(10, 5), s, 5, tol))?;
        for name in ["id1", "id1.2", "id2", "id2.2", "id3", "id3.2"] {
            let d = r.max_defect(name).unwrap_or(f64::NAN);
            ensure(d < 1e-7, format!("{s}: {name} = {d:.2e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("4 fixtures x 6 identities, max defect {worst:.1e}"))
}

fn proof_chain() -> Outcome {
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for s in ["hyperbolic_qe:3:1", "hyperbolic_qe:4:2", "gaussian_soliton:3", "gaussian_soliton:4"] {
        let fx = e(Fixture::load(s))?;
        let plan = e(fx.sample_plan(None, 10, 3, 0))?;
        ensure(plan.levels.len() >= 3, format!("{s}: only {} level sets", plan.levels.len()))?;
        let r = e(theorem_verdict(&fx.chart, &fx.potential, &plan, s, tol))?;
        ensure(r.verdict == Verdict::Pass, format!("{s}: verdict {}", r.verdict.as_str()))?;
        for name in ["tangential_ricci", "tangential_grad_scalar", "tangential_grad_norm_sq", "umbilicity"] {
            let d = r.max_defect(name).unwrap_or(f64::NAN);
            ensure(d < 1e-7, format!("{s}: {name} = {d:.2e}"))?;
            worst = worst.max(d);
        }
        let fibers: Vec<f64> = r.spreads.iter().filter(|sp| sp.name.starts_with("fiber_sectional@")).map(|sp| sp.spread()).collect();
        ensure(fibers.len() >= 3, format!("{s}: {} fiber spreads", fibers.len()))?;
        for f in fibers {
            ensure(f < 1e-7, format!("{s}: fiber sectional spread {f:.2e}"))?;
            worst = worst.max(f);
        }
    }
    Ok(format!("4 fixtures, 3 levels x 10 points x 3 planes, max defect {worst:.1e}"))
}

fn special_mu_case() -> Outcome {
    let fx = e(Fixture::load("special_mu:3"))?;
    let r = e(check_special_mu(&fx.chart, &fx.potential, &fx.chart.sample_points(10, 1), "special_mu:3", 1, Tolerances::default()))?;
    let einstein = r.max_defect("conformal_einstein").unwrap_or(f64::NAN);
    let cc = r.max_defect("conformal_constant_curvature").unwrap_or(f64::NAN);
    let spread = r.spread_of("conformal_scalar").map_or(f64::NAN, |s| s.spread());
    ensure(einstein < 1e-8 && cc < 1e-8 && spread < 1e-8, format!("einstein {einstein:.2e}, constant curvature {cc:.2e}, scalar spread {spread:.2e}"))?;
    ensure(r.verdict == Verdict::Pass, format!("verdict {}", r.verdict.as_str()))?;
    Ok(format!("einstein {einstein:.1e}, constant curvature {cc:.1e}, scalar spread {spread:.1e}"))
}

fn qeflat(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qeflat")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn negative_controls() -> Outcome {
    let tol = Tolerances::default();
    let fx = e(Fixture::load("s2xs2"))?;
    let pts = fx.chart.sample_points(5, 0);
    let r = e(check_lcf(&fx.chart, &pts, "s2xs2", 0, tol))?;
    let w = r.max_defect("weyl_norm").unwrap_or(f64::NAN);
    ensure(r.verdict == Verdict::Fail && w > 0.05, format!("s2xs2 verdict {} weyl {w:.3}", r.verdict.as_str()))?;
    ensure((w - S2XS2_WEYL_NORM).abs() < 1e-9, format!("s2xs2 weyl {w} drifted from {S2XS2_WEYL_NORM}"))?;
    let fd = e(fd_curvature(&fx.chart, &pts[0]))?;
    let pack = e(CurvaturePack::compute(&fx.chart, &pts[0]))?;
    let fd_norm = fd.weyl.as_ref().map_or(f64::NAN, |t| t.norm(&pack.metric));
    ensure((fd_norm - S2XS2_WEYL_NORM).abs() < 1e-4, format!("oracle weyl {fd_norm}"))?;

    let hyp = e(Fixture::load("hyperbolic_qe:3:1"))?;
    let names: Vec<&str> = hyp.chart.coordinates().iter().map(|s| s.as_str()).collect();
    let bent = e(PotentialSpec::parse("-t + 0.2*y1^2", &names, 1.0, -3.0))?;
    let r = e(check_qe(&hyp.chart, &bent, &hyp.chart.sample_points(5, 0), "perturbed", 0, tol))?;
    ensure(r.verdict == Verdict::Fail, "perturbed potential passed the quasi-Einstein check")?;
    let lp = e(LevelPoint::compute(&hyp.chart, &bent, &[0.1, 0.3, 0.2]))?;
    let plan = qeflat_core::SamplePlan {
        levels: vec![qeflat_core::LevelSample { level: lp.pd.value, points: vec![vec![0.1, 0.3, 0.2]] }],
        planes: 3,
        seed: 0,
    };
    let r = e(theorem_verdict(&hyp.chart, &bent, &plan, "perturbed", tol))?;
    ensure(r.verdict == Verdict::NotApplicable, format!("perturbed theorem verdict {}", r.verdict.as_str()))?;

    let (c1, _) = qeflat(&["lcf", "--catalog", "s2xs2"])?;
    let (c3, _) = qeflat(&["identities", "--catalog", "hyperbolic_qe:3:1"])?;
    ensure(c1 == 1 && c3 == 3, format!("exit codes {c1} and {c3}, expected 1 and 3"))?;
    Ok(format!("s2xs2 weyl {w:.6} (oracle {fd_norm:.6}), perturbed QE fails, exits 1/3"))
}

fn two_path() -> Outcome {
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for s in [
        "hyperbolic_qe:3:1",
        "hyperbolic_qe:4:2",
        "hyperbolic_qe:5:-1",
        "adapted_hyperbolic_qe:3:2",
        "gaussian_soliton:3",
        "gaussian_soliton:5",
        "adapted_gaussian_soliton:4",
        "cylinder_soliton:4",
    ] {
        let fx = e(Fixture::load(s))?;
        let plan = e(fx.sample_plan(None, 5, 3, 1))?;
        let r = e(theorem_verdict(&fx.chart, &fx.potential, &plan, s, tol))?;
        ensure(r.failed_gates().is_empty(), format!("{s}: gates failed {:?}", r.failed_gates()))?;
        for name in ["h_two_path", "mean_curvature_two_path", "fiber_curvature_two_path"] {
            let d = r.max_defect(name).unwrap_or(f64::NAN);
            ensure(d < 1e-8, format!("{s}: {name} = {d:.2e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("8 gated fixtures, max disagreement {worst:.1e}"))
}

fn cli_determinism(suite: Duration) -> Outcome {
    let args = ["theorem", "--catalog", "hyperbolic_qe:3:1", "--seed", "0", "--json"];
    let (c1, a) = qeflat(&args)?;
    let (c2, b) = qeflat(&args)?;
    ensure(c1 == 0 && c2 == 0, format!("exit codes {c1}, {c2}"))?;
    ensure(!a.is_empty() && a == b, "JSON differs between runs")?;
    ensure(suite < Duration::from_secs(300), format!("suite took {:.1} s", suite.as_secs_f64()))?;
    Ok(format!("{} identical bytes, suite {:.1} s", a.len(), suite.as_secs_f64()))
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |k: usize, name: &str, limit: Option<f64>, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let mut out = f();
        let secs = t.elapsed().as_secs_f64();
        if let (Ok(msg), Some(limit)) = (&out, limit) {
            if secs > limit {
                out = Err(format!("{msg}; took {secs:.1} s, limit {limit} s"));
            }
        }
        match out {
            Ok(msg) => println!("PASS  {k}  {name:<24} {msg} ({secs:.2} s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {k}  {name:<24} {msg} ({secs:.2} s)");
            }
        }
    };
    report(1, "pipeline-vs-oracle", Some(30.0), &pipeline_vs_oracle);
    report(2, "universal-identities", Some(60.0), &universal_identities);
    report(3, "catalog-self-validation", Some(30.0), &catalog_self_validation);
    report(4, "adapted-identities", None, &adapted_identities);
    report(5, "proof-chain", None, &proof_chain);
    report(6, "special-mu", None, &special_mu_case);
    report(7, "negative-controls", None, &negative_controls);
    report(8, "two-path-agreement", None, &two_path);
    let suite = start.elapsed();
    report(9, "cli-determinism", None, &move || cli_determinism(suite));
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
