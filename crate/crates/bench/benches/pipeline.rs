use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qeflat_bench::{fixture_plan, random_case};
use qeflat_core::adapted::theorem_verdict;
use qeflat_core::oracle::fd_curvature;
use qeflat_core::quasi_einstein::check_qe;
use qeflat_core::{CurvaturePack, Tolerances};

fn curvature_pack(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature_pack");
    for n in [3, 4, 5, 6] {
        let (chart, point) = random_case(n, 11);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| CurvaturePack::compute(black_box(&chart), black_box(&point)).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let (chart, point) = random_case(4, 11);
    c.bench_function("fd_curvature/4", |b| b.iter(|| fd_curvature(black_box(&chart), black_box(&point)).unwrap()));
}

fn checks(c: &mut Criterion) {
    let tol = Tolerances::default();
    let (fx, plan) = fixture_plan("hyperbolic_qe:4:1", 10);
    let pts = fx.chart.sample_points(10, 0);
    c.bench_function("check_qe/hyperbolic_qe:4:1", |b| {
        b.iter(|| check_qe(&fx.chart, &fx.potential, black_box(&pts), "bench", 0, tol).unwrap())
    });
    c.bench_function("theorem/hyperbolic_qe:4:1", |b| {
        b.iter(|| theorem_verdict(&fx.chart, &fx.potential, black_box(&plan), "bench", tol).unwrap())
    });
}

criterion_group!(benches, curvature_pack, oracle, checks);
criterion_main!(benches);
