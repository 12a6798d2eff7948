mod commands;
mod metric_file;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Check, CliError, Common, Outcome, Source, WarpArgs};

/// Numerical checks for quasi-Einstein metrics and locally conformally flat geometry.
#[derive(Parser)]
#[command(name = "qeflat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// TOML metric file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Catalog fixture, NAME[:param...] (see `catalog-list`).
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Args)]
struct CommonArgs {
    /// Sample points (per level set for `levelsets` and `theorem`).
    #[arg(long, default_value_t = 10)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplier applied to every default tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol: f64,
    /// Print one JSON document instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LevelArgs {
    #[command(flatten)]
    check: CheckArgs,
    /// Level-set values, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    level: Vec<f64>,
    /// Random tangent planes per point for the fiber-curvature probes.
    #[arg(long, default_value_t = 3)]
    planes: usize,
}

#[derive(Args)]
struct WarpBuildArgs {
    /// Total dimension n; the fiber has dimension n - 1.
    #[arg(long)]
    dim: usize,
    /// Warping function of `t`.
    #[arg(long)]
    phi: String,
    /// Fiber curvature: -1, 0 or 1.
    #[arg(long, allow_negative_numbers = true)]
    k: i8,
    /// Interval for t as LO,HI.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, 1.0])]
    t_domain: Vec<f64>,
    /// Write the metric file here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Check conformal flatness of the built metric instead of printing it.
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature norms and the universal identities.
    Curvature(CheckArgs),
    /// Weyl and Cotton norms against the conformal-flatness gate.
    Lcf(CheckArgs),
    /// Quasi-Einstein residual and the trace, gradient and commutator identities.
    Qe(CheckArgs),
    /// The six identities in a chart whose first coordinate is f.
    Identities(CheckArgs),
    /// Constancy of curvature quantities along level sets of f.
    Levelsets(LevelArgs),
    /// Aggregate warped-product verdict over sampled level sets.
    Theorem(LevelArgs),
    /// The conformal metric e^{-2f/(n-2)} g.
    Conformal(CheckArgs),
    /// Build dt^2 + phi(t)^2 g_k as a metric file.
    WarpBuild(WarpBuildArgs),
    /// List catalog fixtures.
    CatalogList {
        #[arg(long)]
        json: bool,
    },
}

fn common(c: &CommonArgs, levels: Vec<f64>, planes: usize) -> Common {
    Common {
        points: c.points,
        seed: c.seed,
        tol: c.tol,
        json: c.json,
        levels,
        planes,
    }
}

fn source(s: &SourceArgs) -> Result<Source, CliError> {
    match (&s.file, &s.catalog) {
        (Some(path), _) => Source::from_file(path),
        (None, Some(name)) => Source::from_catalog(name),
        (None, None) => Err(CliError::Usage("one of --file or --catalog is required".into())),
    }
}

fn check(kind: Check, a: &CheckArgs, levels: Vec<f64>, planes: usize) -> Result<Outcome, CliError> {
    commands::run_check(kind, &source(&a.source)?, &common(&a.common, levels, planes))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Curvature(a) => check(Check::Curvature, &a, vec![], 0),
        Command::Lcf(a) => check(Check::Lcf, &a, vec![], 0),
        Command::Qe(a) => check(Check::Qe, &a, vec![], 0),
        Command::Identities(a) => check(Check::Identities, &a, vec![], 0),
        Command::Conformal(a) => check(Check::Conformal, &a, vec![], 0),
        Command::Levelsets(l) => check(Check::LevelSets, &l.check, l.level, l.planes),
        Command::Theorem(l) => check(Check::Theorem, &l.check, l.level, l.planes),
        Command::WarpBuild(w) => {
            if w.t_domain.len() != 2 {
                return Err(CliError::Usage(format!("--t-domain takes LO,HI, got {} values", w.t_domain.len())));
            }
            let args = WarpArgs {
                dim: w.dim,
                phi: w.phi,
                k: w.k,
                t_domain: (w.t_domain[0], w.t_domain[1]),
                output: w.output,
                check: w.check,
            };
            commands::warp_build(&args, &common(&w.common, vec![], 0))
        }
        Command::CatalogList { json } => Ok(commands::catalog_list(json)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.text.as_bytes());
            if !out.text.ends_with('\n') {
                let _ = stdout.write_all(b"\n");
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
