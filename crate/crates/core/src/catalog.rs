//! Closed-form fixtures addressable by name, e.g. `hyperbolic_qe:4:2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::adapted::{AdaptedChartSpec, LevelSample, SamplePlan};
use crate::chart::{MetricSpec, PotentialSpec};
use crate::error::{Error, Result};
use crate::quasi_einstein::qe_residual;
use crate::sampling::SplitMix64;
use crate::jet::MAX_DIM;
use crate::warp::{build_warped_chart, WarpSpec};

/// Residual bound a fixture's potential must meet when it is loaded.
pub const VALIDATION_TOL: f64 = 1e-8;
const VALIDATION_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixtureId {
    Flat(usize),
    Sphere(usize, f64),
    Hyperbolic(usize),
    HyperbolicQe(usize, f64),
    SpecialMu(usize),
    AdaptedHyperbolicQe(usize, f64),
    GaussianSoliton(usize),
    AdaptedGaussianSoliton(usize),
    CylinderSoliton(usize),
    S2xS2,
}

/// `(name, parameters, description)` for every catalog entry.
pub const CATALOG: &[(&str, &str, &str)] = &[
    ("flat", "n=3", "Euclidean space, f = 0"),
    ("sphere", "n=3:r=1", "round sphere of radius r in polar angles, f = 0"),
    ("hyperbolic", "n=3", "hyperbolic space dt² + e^{2t}δ, f = 0"),
    ("hyperbolic_qe", "n=3:mu=1", "hyperbolic space with f = -t/μ"),
    ("special_mu", "n=3", "hyperbolic space with f = (n-2)t, μ = 1/(2-n)"),
    ("adapted_hyperbolic_qe", "n=3:mu=1", "hyperbolic_qe in the chart x0 = f"),
    ("gaussian_soliton", "n=3", "Euclidean space with f = |x|²/4"),
    ("adapted_gaussian_soliton", "n=3", "gaussian_soliton in the chart x0 = f"),
    ("cylinder_soliton", "n=3", "R × S^{n-1} of radius² 2(n-2) with f = t²/4"),
    ("s2xs2", "", "product of two unit 2-spheres, f = 0"),
];

impl FixtureId {
    pub fn name(&self) -> &'static str {
        match self {
            FixtureId::Flat(_) => "flat",
            FixtureId::Sphere(..) => "sphere",
            FixtureId::Hyperbolic(_) => "hyperbolic",
            FixtureId::HyperbolicQe(..) => "hyperbolic_qe",
            FixtureId::SpecialMu(_) => "special_mu",
            FixtureId::AdaptedHyperbolicQe(..) => "adapted_hyperbolic_qe",
            FixtureId::GaussianSoliton(_) => "gaussian_soliton",
            FixtureId::AdaptedGaussianSoliton(_) => "adapted_gaussian_soliton",
            FixtureId::CylinderSoliton(_) => "cylinder_soliton",
            FixtureId::S2xS2 => "s2xs2",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            FixtureId::Flat(n)
            | FixtureId::Sphere(n, _)
            | FixtureId::Hyperbolic(n)
            | FixtureId::HyperbolicQe(n, _)
            | FixtureId::SpecialMu(n)
            | FixtureId::AdaptedHyperbolicQe(n, _)
            | FixtureId::GaussianSoliton(n)
            | FixtureId::AdaptedGaussianSoliton(n)
            | FixtureId::CylinderSoliton(n) => n,
            FixtureId::S2xS2 => 4,
        }
    }
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FixtureId::Sphere(n, r) => write!(f, "sphere:{n}:{r}"),
            FixtureId::HyperbolicQe(n, mu) | FixtureId::AdaptedHyperbolicQe(n, mu) => write!(f, "{}:{n}:{mu}", self.name()),
            FixtureId::S2xS2 => f.write_str("s2xs2"),
            _ => write!(f, "{}:{}", self.name(), self.dim()),
        }
    }
}

fn bad(spec: &str, why: impl fmt::Display) -> Error {
    Error::InvalidParameter(format!("fixture `{spec}`: {why}"))
}

impl FromStr for FixtureId {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default().trim();
        let params: Vec<&str> = parts.map(str::trim).collect();
        let min_dim = match name {
            "sphere" | "hyperbolic" | "flat" | "gaussian_soliton" => 2,
            _ => 3,
        };
        let dim = |i: usize| -> Result<usize> {
            let n = match params.get(i) {
                None => 3,
                Some(s) => s.parse::<usize>().map_err(|e| bad(spec, format!("dimension `{s}`: {e}")))?,
            };
            if n < min_dim || n > MAX_DIM {
                return Err(bad(spec, format!("dimension {n} outside {min_dim}..={MAX_DIM}")));
            }
            Ok(n)
        };
        let real = |i: usize, default: f64| -> Result<f64> {
            match params.get(i) {
                None => Ok(default),
                Some(s) => {
                    let v = s.parse::<f64>().map_err(|e| bad(spec, format!("parameter `{s}`: {e}")))?;
                    if v.is_finite() { Ok(v) } else { Err(bad(spec, format!("parameter `{s}` is not finite"))) }
                }
            }
        };
        let arity = |max: usize| -> Result<()> {
            if params.len() > max {
                Err(bad(spec, format!("takes at most {max} parameters")))
            } else {
                Ok(())
            }
        };
        let nonzero_mu = |mu: f64| if mu == 0.0 { Err(bad(spec, "mu must be nonzero")) } else { Ok(mu) };
        let id = match name {
            "flat" => FixtureId::Flat(dim(0)?),
            "sphere" => {
                arity(2)?;
                let r = real(1, 1.0)?;
                if r <= 0.0 {
                    return Err(bad(spec, "radius must be positive"));
                }
                return Ok(FixtureId::Sphere(dim(0)?, r));
            }
            "hyperbolic" => FixtureId::Hyperbolic(dim(0)?),
            "hyperbolic_qe" => {
                arity(2)?;
                return Ok(FixtureId::HyperbolicQe(dim(0)?, nonzero_mu(real(1, 1.0)?)?));
            }
            "special_mu" => FixtureId::SpecialMu(dim(0)?),
            "adapted_hyperbolic_qe" => {
                arity(2)?;
                return Ok(FixtureId::AdaptedHyperbolicQe(dim(0)?, nonzero_mu(real(1, 1.0)?)?));
            }
            "gaussian_soliton" => FixtureId::GaussianSoliton(dim(0)?),
            "adapted_gaussian_soliton" => FixtureId::AdaptedGaussianSoliton(dim(0)?),
            "cylinder_soliton" => FixtureId::CylinderSoliton(dim(0)?),
            "s2xs2" => {
                arity(0)?;
                return Ok(FixtureId::S2xS2);
            }
            _ => return Err(Error::UnknownFixture(name.to_string())),
        };
        arity(1)?;
        Ok(id)
    }
}

/// How to place points on `f = level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelParam {
    /// `f` is constant: there are no regular level sets.
    None,
    /// `x[index] = slope · level`, other coordinates free.
    Linear { index: usize, slope: f64 },
    /// `|x|² = 4 · level`.
    Radial,
    /// `x[index] = 2 √level`, other coordinates free.
    SquareRoot { index: usize },
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: FixtureId,
    pub chart: MetricSpec,
    pub potential: PotentialSpec,
    pub level: LevelParam,
    /// Level values used when none are requested.
    pub default_levels: Vec<f64>,
    pub description: &'static str,
}

fn coords(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn diagonal_chart(names: &[String], diagonal: &[String], domain: Vec<(f64, f64)>) -> Result<MetricSpec> {
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let entries: Vec<(usize, usize, &str)> = diagonal.iter().enumerate().map(|(i, s)| (i, i, s.as_str())).collect();
    MetricSpec::parse(&refs, &entries, domain)
}

/// `dt² + e^{2t} δ` with coordinates `t, x1, …`.
fn hyperbolic_chart(n: usize) -> Result<MetricSpec> {
    build_warped_chart(&WarpSpec::parse(n, "exp(t)", 0, (-1.0, 1.0))?)
}

/// Round `S^m` of radius² `r2` in polar angles, coordinates prefixed by `prefix`.
fn sphere_diagonal(names: &[String], r2: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut prefix = r2.to_string();
    for c in names {
        out.push(prefix.clone());
        prefix = format!("{prefix}*sin({c})^2");
    }
    out
}

fn sphere_domain(m: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(0.3, PI - 0.3); m];
    d[m - 1] = (-PI, PI);
    d
}

fn real(x: f64) -> String {
    format!("({x:?})")
}

impl Fixture {
    /// Parse, build and validate a fixture.
    pub fn load(spec: &str) -> Result<Fixture> {
        let fx = Fixture::build(spec.parse()?)?;
        fx.validate()?;
        Ok(fx)
    }

    /// Build without the residual check.
    pub fn build(id: FixtureId) -> Result<Fixture> {
        let description = CATALOG.iter().find(|c| c.0 == id.name()).map_or("", |c| c.2);
        let fixture = |chart: MetricSpec, f: &str, mu: f64, lambda: f64, level: LevelParam, defaults: Vec<f64>| -> Result<Fixture> {
            let names: Vec<&str> = chart.coordinates().iter().map(|s| s.as_str()).collect();
            let potential = PotentialSpec::parse(f, &names, mu, lambda)?;
            Ok(Fixture {
                id,
                chart,
                potential,
                level,
                default_levels: defaults,
                description,
            })
        };
        match id {
            FixtureId::Flat(n) => {
                let names = coords("x", n);
                let chart = diagonal_chart(&names, &vec!["1".into(); n], vec![(-1.0, 1.0); n])?;
                fixture(chart, "0", 0.0, 0.0, LevelParam::None, vec![])
            }
            FixtureId::Sphere(n, r) => {
                let names: Vec<String> = (1..=n).map(|i| format!("th{i}")).collect();
                let chart = diagonal_chart(&names, &sphere_diagonal(&names, &real(r * r)), sphere_domain(n))?;
                fixture(chart, "0", 0.0, (n as f64 - 1.0) / (r * r), LevelParam::None, vec![])
            }
            FixtureId::Hyperbolic(n) => fixture(hyperbolic_chart(n)?, "0", 0.0, -(n as f64 - 1.0), LevelParam::None, vec![]),
            FixtureId::HyperbolicQe(n, mu) => {
                let slope = -mu;
                let defaults = [-0.5, 0.2, 0.7].iter().map(|t| t / slope).collect();
                let f = format!("{}*t", real(-1.0 / mu));
                let lambda = -1.0 / mu - (n as f64 - 1.0);
                fixture(hyperbolic_chart(n)?, &f, mu, lambda, LevelParam::Linear { index: 0, slope }, defaults)
            }
            FixtureId::SpecialMu(n) => {
                let a = n as f64 - 2.0;
                let defaults = [-0.5, 0.2, 0.7].iter().map(|t| t * a).collect();
                let f = format!("{}*t", real(a));
                fixture(hyperbolic_chart(n)?, &f, 1.0 / (2.0 - n as f64), -1.0, LevelParam::Linear { index: 0, slope: 1.0 / a }, defaults)
            }
            FixtureId::AdaptedHyperbolicQe(n, mu) => {
                let names = coords("x", n);
                let mut diag = vec![real(mu * mu)];
                diag.extend((1..n).map(|_| format!("exp({}*x0)", real(-2.0 * mu))));
                let w = 1.0 / mu.abs();
                let mut domain = vec![(-w, w)];
                domain.extend(vec![(-1.0, 1.0); n - 1]);
                let chart = diagonal_chart(&names, &diag, domain)?;
                let lambda = -1.0 / mu - (n as f64 - 1.0);
                let defaults = vec![-0.5 * w, 0.2 * w, 0.7 * w];
                fixture(chart, "x0", mu, lambda, LevelParam::Linear { index: 0, slope: 1.0 }, defaults)
            }
            FixtureId::GaussianSoliton(n) => {
                let names = coords("x", n);
                let chart = diagonal_chart(&names, &vec!["1".into(); n], vec![(-2.0, 2.0); n])?;
                let f = names.iter().map(|c| format!("{c}^2")).collect::<Vec<_>>().join(" + ");
                fixture(chart, &format!("({f})/4"), 0.0, 0.5, LevelParam::Radial, vec![0.25, 0.5625, 1.0])
            }
            FixtureId::AdaptedGaussianSoliton(n) => {
                let mut names = vec!["x0".to_string()];
                names.extend((1..n).map(|i| format!("th{i}")));
                let mut diag = vec!["1/x0".to_string()];
                diag.extend(sphere_diagonal(&names[1..], "4*x0"));
                let mut domain = vec![(0.2, 2.0)];
                domain.extend(sphere_domain(n - 1));
                let chart = diagonal_chart(&names, &diag, domain)?;
                fixture(chart, "x0", 0.0, 0.5, LevelParam::Linear { index: 0, slope: 1.0 }, vec![0.25, 0.5625, 1.0])
            }
            FixtureId::CylinderSoliton(n) => {
                let mut names = vec!["t".to_string()];
                names.extend((1..n).map(|i| format!("th{i}")));
                let mut diag = vec!["1".to_string()];
                diag.extend(sphere_diagonal(&names[1..], &real(2.0 * (n as f64 - 2.0))));
                let mut domain = vec![(0.2, 2.0)];
                domain.extend(sphere_domain(n - 1));
                let chart = diagonal_chart(&names, &diag, domain)?;
                fixture(chart, "t^2/4", 0.0, 0.5, LevelParam::SquareRoot { index: 0 }, vec![0.0625, 0.25, 0.5625])
            }
            FixtureId::S2xS2 => {
                let names: Vec<String> = ["a1", "a2", "b1", "b2"].iter().map(|s| s.to_string()).collect();
                let diag: Vec<String> = ["1", "sin(a1)^2", "1", "sin(b1)^2"].iter().map(|s| s.to_string()).collect();
                let mut domain = sphere_domain(2);
                domain.extend(sphere_domain(2));
                let chart = diagonal_chart(&names, &diag, domain)?;
                fixture(chart, "0", 0.0, 1.0, LevelParam::None, vec![])
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Evaluates the quasi-Einstein residual at fixed sample points.
    pub fn validate(&self) -> Result<()> {
        for p in self.chart.sample_points(VALIDATION_POINTS, 0xF1C7) {
            let r = qe_residual(&self.chart, &self.potential, &p)?;
            if r.max_abs() > VALIDATION_TOL {
                return Err(Error::FixtureValidation {
                    name: self.id.to_string(),
                    reason: format!("quasi-Einstein residual {:.3e} at {p:?}", r.max_abs()),
                });
            }
        }
        Ok(())
    }

    pub fn has_level_sets(&self) -> bool {
        self.level != LevelParam::None
    }

    /// `count` points on `f = level`, reproducible from `seed`.
    pub fn level_points(&self, level: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut rng = SplitMix64::new(seed ^ level.to_bits());
        let domain = self.chart.domain();
        let free = |rng: &mut SplitMix64, index: usize, value: f64| {
            let mut p = rng.point_in(domain);
            p[index] = value;
            p
        };
        match self.level {
            LevelParam::None => Err(Error::NoLevelSets(format!("{} has constant potential", self.id))),
            LevelParam::Linear { index, slope } => Ok((0..count).map(|_| free(&mut rng, index, slope * level)).collect()),
            LevelParam::SquareRoot { index } => {
                if level <= 0.0 {
                    return Err(Error::NoLevelSets(format!("f >= 0 on {}, so f = {level} is empty or critical", self.id)));
                }
                Ok((0..count).map(|_| free(&mut rng, index, 2.0 * level.sqrt())).collect())
            }
            LevelParam::Radial => {
                if level <= 0.0 {
                    return Err(Error::NoLevelSets(format!("f >= 0 on {}, so f = {level} is empty or critical", self.id)));
                }
                let r = 2.0 * level.sqrt();
                Ok((0..count).map(|_| rng.unit_vector(n).into_iter().map(|x| r * x).collect()).collect())
            }
        }
    }

    /// Points on each requested level (or the defaults) plus the plane count.
    pub fn sample_plan(&self, levels: Option<&[f64]>, points: usize, planes: usize, seed: u64) -> Result<SamplePlan> {
        let levels = levels.unwrap_or(&self.default_levels);
        if !self.has_level_sets() || levels.is_empty() {
            return Err(Error::NoLevelSets(format!("{} has constant potential", self.id)));
        }
        let samples = levels
            .iter()
            .map(|&level| Ok(LevelSample { level, points: self.level_points(level, points, seed)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(SamplePlan { levels: samples, planes, seed })
    }

    /// The adapted-chart view, for fixtures whose first coordinate is `f`.
    pub fn adapted(&self) -> Result<AdaptedChartSpec> {
        AdaptedChartSpec::new(self.chart.clone(), self.potential.clone())
    }
}

/// A reproducible random metric close to `δ` on `[-1, 1]^n`.
pub fn random_chart(n: usize, seed: u64) -> Result<MetricSpec> {
    let mut rng = SplitMix64::new(seed);
    let names = coords("x", n);
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut c = || (rng.uniform(-1.0, 1.0) * 1000.0).round() / 1000.0;
    let off = 0.3 / n as f64;
    let mut entries = Vec::new();
    for a in 0..n {
        for b in a..n {
            let (i, j) = (a, (a + b + 1) % n);
            let s = if a == b {
                format!("1 + 0.1*({})*x{i}^2 + 0.1*sin({}*x{j} + {}*x{i})", c(), c(), c())
            } else {
                format!("{off}*(({})*x{a}*x{b} + cos({}*x{j}) + 0.4*({})*x{i}^3)", c(), c(), c())
            };
            entries.push((a, b, s));
        }
    }
    let e: Vec<(usize, usize, &str)> = entries.iter().map(|(a, b, s)| (*a, *b, s.as_str())).collect();
    MetricSpec::parse(&refs, &e, vec![(-1.0, 1.0); n])
}

/// A reproducible random potential on `chart`'s coordinates.
pub fn random_potential(chart: &MetricSpec, seed: u64) -> Result<PotentialSpec> {
    let mut rng = SplitMix64::new(seed.wrapping_add(0x5EED));
    let names: Vec<&str> = chart.coordinates().iter().map(|s| s.as_str()).collect();
    let mut c = || (rng.uniform(-1.0, 1.0) * 1000.0).round() / 1000.0;
    let mut terms = Vec::new();
    for (i, x) in names.iter().enumerate() {
        let y = names[(i + 1) % names.len()];
        terms.push(format!("({})*{x} + 0.3*({})*{x}*{y} + 0.2*sin({}*{x})", c(), c(), c()));
    }
    let (mu, lambda) = (c(), c());
    PotentialSpec::parse(&terms.join(" + "), &names, mu, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in ["flat:4", "sphere:3:2", "hyperbolic:5", "hyperbolic_qe:4:2", "special_mu:4", "adapted_hyperbolic_qe:3:0.5", "gaussian_soliton:3", "s2xs2"] {
            let id: FixtureId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
        assert_eq!("sphere".parse::<FixtureId>().unwrap(), FixtureId::Sphere(3, 1.0));
        assert_eq!("hyperbolic_qe".parse::<FixtureId>().unwrap(), FixtureId::HyperbolicQe(3, 1.0));
        assert!(matches!("torus:3".parse::<FixtureId>(), Err(Error::UnknownFixture(_))));
        for bad in ["flat:x", "flat:9", "hyperbolic_qe:3:0", "sphere:3:-1", "s2xs2:4", "flat:3:2"] {
            assert!(matches!(bad.parse::<FixtureId>(), Err(Error::InvalidParameter(_))), "{bad}");
        }
        assert_eq!(CATALOG.len(), 10);
    }

    #[test]
    fn every_fixture_validates() {
        for s in [
            "flat:3", "sphere:3:1", "sphere:4:2", "hyperbolic:4", "hyperbolic_qe:3:1", "hyperbolic_qe:4:2", "hyperbolic_qe:4:-0.7",
            "special_mu:4", "adapted_hyperbolic_qe:3:1", "adapted_hyperbolic_qe:4:2", "gaussian_soliton:3", "gaussian_soliton:4",
            "adapted_gaussian_soliton:3", "adapted_gaussian_soliton:4", "cylinder_soliton:3", "cylinder_soliton:4", "s2xs2",
        ] {
            Fixture::load(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }

    #[test]
    fn broken_fixture_fails_validation() {
        let mut fx = Fixture::build(FixtureId::HyperbolicQe(3, 1.0)).unwrap();
        fx.potential.lambda += 0.1;
        assert!(matches!(fx.validate(), Err(Error::FixtureValidation { .. })));
    }

    #[test]
    fn level_points_lie_on_levels() {
        for s in ["hyperbolic_qe:4:2", "special_mu:3", "adapted_hyperbolic_qe:3:1", "gaussian_soliton:3", "adapted_gaussian_soliton:3", "cylinder_soliton:3"] {
            let fx = Fixture::load(s).unwrap();
            let plan = fx.sample_plan(None, 5, 2, 9).unwrap();
            assert_eq!(plan.levels.len(), 3);
            for l in &plan.levels {
                for p in &l.points {
                    let v = fx.potential.f.eval_f64(p).unwrap();
                    assert!((v - l.level).abs() < 1e-12, "{s}: {v} vs {}", l.level);
                }
            }
        }
        assert!(matches!(Fixture::load("sphere").unwrap().sample_plan(None, 3, 1, 0), Err(Error::NoLevelSets(_))));
    }

    #[test]
    fn random_charts_are_metrics() {
        for n in 2..=MAX_DIM {
            let chart = random_chart(n, n as u64).unwrap();
            for p in chart.sample_points(5, 1) {
                chart.metric_at(&p).unwrap();
            }
        }
    }
}
