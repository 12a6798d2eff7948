//! Warped products `dt² + φ(t)² g_k` over constant-curvature fibers.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::MetricSpec;
use crate::curvature::check_lcf;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::report::{CheckReport, Tolerances};

/// Fiber chart of constant curvature `k` in dimension `m`.
///
/// `k = 0`: `δ`. `k = 1`: round sphere in polar angles, poles excluded from the
/// box. `k = −1`: `dy1² + e^{2 y1}(dy2² + … )`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberChart {
    pub coords: Vec<String>,
    /// Diagonal entries as source text over `coords`.
    pub diagonal: Vec<String>,
    pub domain: Vec<(f64, f64)>,
}

pub fn fiber_chart(m: usize, k: i8) -> Result<FiberChart> {
    if m == 0 {
        return Err(Error::InvalidParameter("fiber dimension must be at least 1".into()));
    }
    let chart = match k {
        0 => FiberChart {
            coords: (1..=m).map(|i| format!("y{i}")).collect(),
            diagonal: vec!["1".into(); m],
            domain: vec![(-1.0, 1.0); m],
        },
        1 => {
            let coords: Vec<String> = (1..=m).map(|i| format!("th{i}")).collect();
            let mut diagonal = Vec::with_capacity(m);
            let mut prefix = String::new();
            for c in &coords {
                diagonal.push(if prefix.is_empty() { "1".into() } else { prefix.clone() });
                let factor = format!("sin({c})^2");
                prefix = if prefix.is_empty() { factor } else { format!("{prefix}*{factor}") };
            }
            let mut domain = vec![(0.2, PI - 0.2); m];
            domain[m - 1] = (-PI, PI);
            FiberChart { coords, diagonal, domain }
        }
        -1 => {
            let coords: Vec<String> = (1..=m).map(|i| format!("y{i}")).collect();
            let diagonal = (0..m).map(|i| if i == 0 { "1".into() } else { "exp(2*y1)".into() }).collect();
            FiberChart {
                coords,
                diagonal,
                domain: vec![(-1.0, 1.0); m],
            }
        }
        _ => return Err(Error::InvalidParameter(format!("fiber curvature must be -1, 0 or 1, got {k}"))),
    };
    Ok(chart)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpSpec {
    pub n: usize,
    /// Warping function over the single coordinate `t`.
    pub phi: Expression,
    pub k: i8,
    pub t_domain: (f64, f64),
}

impl WarpSpec {
    pub fn parse(n: usize, phi: &str, k: i8, t_domain: (f64, f64)) -> Result<Self> {
        Ok(WarpSpec {
            n,
            phi: Expression::parse(phi, &["t"])?,
            k,
            t_domain,
        })
    }
}

/// `dt² + φ(t)² g_k` with coordinates `(t, fiber…)`.
pub fn build_warped_chart(spec: &WarpSpec) -> Result<MetricSpec> {
    if spec.n < 2 {
        return Err(Error::DimensionTooSmall(spec.n, 2));
    }
    let (lo, hi) = spec.t_domain;
    for i in 0..=64 {
        let t = lo + (hi - lo) * i as f64 / 64.0;
        let v = spec.phi.eval_f64(&[t])?;
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!("warping function {} = {v} at t = {t}, must be positive", spec.phi)));
        }
    }
    let fiber = fiber_chart(spec.n - 1, spec.k)?;
    let mut coords = vec!["t".to_string()];
    coords.extend(fiber.coords.iter().cloned());
    if fiber.coords.iter().any(|c| c == "t") {
        return Err(Error::InvalidParameter("fiber coordinate clashes with t".into()));
    }
    let names: Arc<[String]> = coords.iter().cloned().collect();
    let phi = spec.phi.with_coordinates(names.clone())?;
    let mut entries = vec![(0, 0, Expression::constant(1.0, names.clone()))];
    let refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    for (i, d) in fiber.diagonal.iter().enumerate() {
        let src = if d == "1" { format!("({phi})^2") } else { format!("({phi})^2*{d}") };
        let e = Expression::parse(&src, &refs)?;
        entries.push((i + 1, i + 1, e));
    }
    let mut domain = vec![spec.t_domain];
    domain.extend(fiber.domain);
    MetricSpec::new(names, entries, domain)
}

/// Conformal flatness of the warped product at the given points.
pub fn check_warped_lcf(spec: &WarpSpec, points: &[Vec<f64>], source: &str, seed: u64, tol: Tolerances) -> Result<CheckReport> {
    let chart = build_warped_chart(spec)?;
    let mut r = check_lcf(&chart, points, source, seed, tol)?;
    r.check = "warp-lcf".into();
    Ok(r)
}
