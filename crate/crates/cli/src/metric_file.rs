//! TOML metric files.
//!
//! ```toml
//! dim = 3
//! coords = ["t", "x", "y"]
//! domain = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]
//! adapted = false
//!
//! [metric]
//! "00" = "1"
//! "11" = "exp(2*t)"
//! "22" = "exp(2*t)"
//!
//! [potential]
//! f = "-t"
//! mu = 1.0
//! lambda = -3.0
//! ```

use std::collections::BTreeMap;
use std::fmt;

use qeflat_core::{MetricSpec, PotentialSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub f: String,
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub dim: usize,
    pub coords: Vec<String>,
    pub domain: Vec<[f64; 2]>,
    #[serde(default)]
    pub adapted: bool,
    pub metric: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSection>,
}

/// A problem in a metric file, with the key it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct FileError {
    pub location: String,
    pub message: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for FileError {}

fn err(location: impl Into<String>, message: impl fmt::Display) -> FileError {
    FileError {
        location: location.into(),
        message: message.to_string(),
    }
}

/// Parsed and validated contents of a metric file.
#[derive(Debug, Clone)]
pub struct LoadedMetric {
    pub chart: MetricSpec,
    pub potential: Option<PotentialSpec>,
    pub adapted: bool,
}

fn parse_key(key: &str, dim: usize) -> Result<(usize, usize), FileError> {
    let loc = format!("metric.\"{key}\"");
    let digits: Vec<u32> = key.chars().map(|c| c.to_digit(10)).collect::<Option<_>>().ok_or_else(|| err(&loc, "key must be two index digits \"ab\""))?;
    let [a, b] = digits[..] else {
        return Err(err(&loc, "key must be two index digits \"ab\""));
    };
    let (a, b) = (a as usize, b as usize);
    if a > b {
        return Err(err(&loc, format!("only keys with a <= b are allowed; write \"{b}{a}\"")));
    }
    if b >= dim {
        return Err(err(&loc, format!("index {b} out of range for dim = {dim}")));
    }
    Ok((a, b))
}

impl MetricFile {
    pub fn parse(text: &str, origin: &str) -> Result<MetricFile, FileError> {
        toml::from_str(text).map_err(|e| err(origin, e.to_string().trim_end()))
    }

    pub fn validate(&self) -> Result<LoadedMetric, FileError> {
        if self.coords.len() != self.dim {
            return Err(err("coords", format!("{} names for dim = {}", self.coords.len(), self.dim)));
        }
        if self.domain.len() != self.dim {
            return Err(err("domain", format!("{} intervals for dim = {}", self.domain.len(), self.dim)));
        }
        let names: Vec<&str> = self.coords.iter().map(|s| s.as_str()).collect();
        let mut entries = Vec::new();
        for (key, src) in &self.metric {
            let (a, b) = parse_key(key, self.dim)?;
            entries.push((a, b, src.as_str()));
        }
        for (a, b, src) in &entries {
            qeflat_core::Expression::parse(src, &names).map_err(|e| err(format!("metric.\"{a}{b}\""), e))?;
        }
        let domain = self.domain.iter().map(|[lo, hi]| (*lo, *hi)).collect();
        let chart = MetricSpec::parse(&names, &entries, domain).map_err(|e| err("metric", e))?;
        let potential = match &self.potential {
            None => None,
            Some(p) => {
                let pot = PotentialSpec::parse(&p.f, &names, p.mu, p.lambda).map_err(|e| err("potential.f", e))?;
                Some(pot)
            }
        };
        if self.adapted && potential.is_none() {
            return Err(err("adapted", "adapted = true needs a [potential] section"));
        }
        Ok(LoadedMetric {
            chart,
            potential,
            adapted: self.adapted,
        })
    }

    /// The file form of a chart and optional potential.
    pub fn from_chart(chart: &MetricSpec, potential: Option<&PotentialSpec>, adapted: bool) -> MetricFile {
        MetricFile {
            dim: chart.dim(),
            coords: chart.coordinates().to_vec(),
            domain: chart.domain().iter().map(|&(lo, hi)| [lo, hi]).collect(),
            adapted,
            metric: chart.entries().into_iter().map(|(a, b, e)| (format!("{a}{b}"), e.to_string())).collect(),
            potential: potential.map(|p| PotentialSection {
                f: p.f.to_string(),
                mu: p.mu,
                lambda: p.lambda,
            }),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("metric files always serialise")
    }
}

pub fn load(text: &str, origin: &str) -> Result<LoadedMetric, FileError> {
    MetricFile::parse(text, origin)?.validate()
}
