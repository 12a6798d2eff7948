//! Shared inputs for the pipeline benchmarks.

use qeflat_core::catalog::random_chart;
use qeflat_core::{Fixture, MetricSpec, SamplePlan};

/// A random metric of dimension `n` and one interior point.
pub fn random_case(n: usize, seed: u64) -> (MetricSpec, Vec<f64>) {
    let chart = random_chart(n, seed).expect("random charts are valid");
    let point = chart.sample_points(1, seed)[0].clone();
    (chart, point)
}

/// A catalog fixture with a level-set plan of `points` per level.
pub fn fixture_plan(id: &str, points: usize) -> (Fixture, SamplePlan) {
    let fx = Fixture::load(id).expect("catalog fixture");
    let plan = fx.sample_plan(None, points, 3, 0).expect("fixture has level sets");
    (fx, plan)
}
