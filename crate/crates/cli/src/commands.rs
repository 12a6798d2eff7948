use std::fmt;
use std::path::PathBuf;

use qeflat_core::adapted::{check_adapted_identities, check_level_sets, default_levels, sample_level_set, theorem_verdict};
use qeflat_core::catalog::CATALOG;
use qeflat_core::conformal::check_conformal;
use qeflat_core::curvature::{check_curvature, check_lcf};
use qeflat_core::quasi_einstein::check_qe;
use qeflat_core::warp::{build_warped_chart, check_warped_lcf};
use qeflat_core::{AdaptedChartSpec, CheckReport, Error, Fixture, MetricSpec, PotentialSpec, SamplePlan, Tolerances, Verdict, WarpSpec};

use crate::metric_file::{self, MetricFile};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Precondition(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Precondition(e.to_string())
        }
    }
}

impl From<metric_file::FileError> for CliError {
    fn from(e: metric_file::FileError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Text for stdout and the exit code it maps to.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn report(r: &CheckReport, json: bool) -> Outcome {
        let text = if json { r.render_json() } else { r.render_human() };
        let code = if r.verdict == Verdict::Fail { 1 } else { 0 };
        Outcome { text, code }
    }

    fn info(text: String) -> Outcome {
        Outcome { text, code: 0 }
    }
}

pub struct Source {
    pub id: String,
    pub chart: MetricSpec,
    pub potential: Option<PotentialSpec>,
    pub adapted: bool,
    pub fixture: Option<Fixture>,
}

impl Source {
    pub fn from_file(path: &PathBuf) -> Result<Source, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let m = metric_file::load(&text, &path.display().to_string())?;
        Ok(Source {
            id: format!("file:{}", path.display()),
            chart: m.chart,
            potential: m.potential,
            adapted: m.adapted,
            fixture: None,
        })
    }

    pub fn from_catalog(spec: &str) -> Result<Source, CliError> {
        let fx = Fixture::load(spec)?;
        Ok(Source {
            id: format!("catalog:{}", fx.id),
            chart: fx.chart.clone(),
            potential: Some(fx.potential.clone()),
            adapted: fx.adapted().is_ok(),
            fixture: Some(fx),
        })
    }

    fn potential(&self) -> Result<&PotentialSpec, CliError> {
        self.potential.as_ref().ok_or_else(|| Error::MissingPotential.into())
    }

    fn adapted(&self) -> Result<AdaptedChartSpec, CliError> {
        if !self.adapted {
            let why = if self.fixture.is_some() {
                "the fixture's first coordinate is not f"
            } else {
                "the metric file does not declare adapted = true"
            };
            return Err(Error::NotAdapted(why.into()).into());
        }
        Ok(AdaptedChartSpec::new(self.chart.clone(), self.potential()?.clone())?)
    }

    fn plan(&self, levels: &[f64], points: usize, planes: usize, seed: u64) -> Result<SamplePlan, CliError> {
        let requested = (!levels.is_empty()).then_some(levels);
        if let Some(fx) = &self.fixture {
            return Ok(fx.sample_plan(requested, points, planes, seed)?);
        }
        let pot = self.potential()?;
        let levels = match requested {
            Some(l) => l.to_vec(),
            None => default_levels(&self.chart, pot, 3, seed)?,
        };
        let samples = levels
            .iter()
            .map(|&l| sample_level_set(&self.chart, pot, l, points, seed))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SamplePlan { levels: samples, planes, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Curvature,
    Lcf,
    Qe,
    Identities,
    LevelSets,
    Theorem,
    Conformal,
}

pub struct Common {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub json: bool,
    pub levels: Vec<f64>,
    pub planes: usize,
}

impl Common {
    fn tolerances(&self) -> Result<Tolerances, CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be a positive multiplier, got {}", self.tol)));
        }
        Ok(Tolerances::new(self.tol))
    }
}

pub fn run_check(check: Check, src: &Source, c: &Common) -> Result<Outcome, CliError> {
    let tol = c.tolerances()?;
    if c.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let pts = || src.chart.sample_points(c.points, c.seed);
    let id = src.id.as_str();
    let report = match check {
        Check::Curvature => check_curvature(&src.chart, &pts(), id, c.seed, tol)?,
        Check::Lcf => check_lcf(&src.chart, &pts(), id, c.seed, tol)?,
        Check::Qe => check_qe(&src.chart, src.potential()?, &pts(), id, c.seed, tol)?,
        Check::Identities => check_adapted_identities(&src.adapted()?, &pts(), id, c.seed, tol)?,
        Check::LevelSets => {
            let plan = src.plan(&c.levels, c.points, c.planes, c.seed)?;
            check_level_sets(&src.chart, src.potential()?, &plan.levels, id, c.seed, tol)?
        }
        Check::Theorem => {
            let plan = src.plan(&c.levels, c.points, c.planes, c.seed)?;
            theorem_verdict(&src.chart, src.potential()?, &plan, id, tol)?
        }
        Check::Conformal => check_conformal(&src.chart, src.potential()?, &pts(), id, c.seed, tol)?,
    };
    Ok(Outcome::report(&report, c.json))
}

pub struct WarpArgs {
    pub dim: usize,
    pub phi: String,
    pub k: i8,
    pub t_domain: (f64, f64),
    pub output: Option<PathBuf>,
    pub check: bool,
}

pub fn warp_build(w: &WarpArgs, c: &Common) -> Result<Outcome, CliError> {
    let spec = WarpSpec::parse(w.dim, &w.phi, w.k, w.t_domain)?;
    if w.check {
        let chart = build_warped_chart(&spec)?;
        let source = format!("warp:n={}:phi={}:k={}", w.dim, spec.phi, w.k);
        let r = check_warped_lcf(&spec, &chart.sample_points(c.points, c.seed), &source, c.seed, c.tolerances()?)?;
        return Ok(Outcome::report(&r, c.json));
    }
    let chart = build_warped_chart(&spec)?;
    let file = MetricFile::from_chart(&chart, None, false);
    let text = if c.json {
        serde_json::to_string_pretty(&file).expect("metric files always serialise")
    } else {
        file.to_toml()
    };
    match &w.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok(Outcome::info(format!("wrote {}", path.display())))
        }
        None => Ok(Outcome::info(text)),
    }
}

pub fn catalog_list(json: bool) -> Outcome {
    if json {
        let rows: Vec<serde_json::Value> = CATALOG
            .iter()
            .map(|(name, params, description)| serde_json::json!({"name": name, "params": params, "description": description}))
            .collect();
        return Outcome::info(serde_json::to_string_pretty(&serde_json::json!({ "fixtures": rows })).expect("plain values"));
    }
    let width = CATALOG.iter().map(|c| c.0.len() + c.1.len() + 1).max().unwrap_or(0);
    let mut out = String::new();
    for (name, params, description) in CATALOG {
        let head = if params.is_empty() { name.to_string() } else { format!("{name}:{params}") };
        out.push_str(&format!("{head:<width$}  {description}\n"));
    }
    Outcome::info(out)
}
