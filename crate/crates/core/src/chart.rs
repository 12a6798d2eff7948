//! Metric charts and quasi-Einstein potentials.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::{self, Jet3, MAX_DIM};
use crate::sampling::SplitMix64;
use crate::tensor::{Down, JetTensor, MetricAtPoint, Tensor};

/// Index of `(a, b)`, `a <= b`, in packed upper-triangular storage.
pub fn packed_index(dim: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * dim - a * (a + 1) / 2 + b
}

/// A coordinate chart: names, metric component expressions and a sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    coords: Arc<[String]>,
    components: Vec<Option<Expression>>,
    domain: Vec<(f64, f64)>,
}

impl MetricSpec {
    /// Build from `(a, b, g_ab)` entries; missing entries are zero.
    pub fn new(
        coords: Arc<[String]>,
        entries: Vec<(usize, usize, Expression)>,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::DimensionTooSmall(n, 2));
        }
        if n > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "dimension {n} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        if domain.len() != n {
            return Err(Error::InvalidParameter(format!(
                "domain has {} intervals for {n} coordinates",
                domain.len()
            )));
        }
        for (i, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "domain interval for `{}` is [{lo}, {hi}]",
                    coords[i]
                )));
            }
        }
        let mut components = vec![None; n * (n + 1) / 2];
        for (a, b, e) in entries {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!(
                    "metric entry ({a}, {b}) out of range for dimension {n}"
                )));
            }
            let k = packed_index(n, a, b);
            if components[k].is_some() {
                return Err(Error::InvalidParameter(format!("metric entry ({a}, {b}) given twice")));
            }
            components[k] = Some(e.with_coordinates(coords.clone())?);
        }
        Ok(MetricSpec {
            coords,
            components,
            domain,
        })
    }

    /// Parse `(a, b, source)` entries against `coords`.
    pub fn parse(coords: &[&str], entries: &[(usize, usize, &str)], domain: Vec<(f64, f64)>) -> Result<Self> {
        let parsed = entries
            .iter()
            .map(|&(a, b, src)| Ok((a, b, Expression::parse(src, coords)?)))
            .collect::<Result<Vec<_>>>()?;
        let names: Arc<[String]> = coords.iter().map(|s| s.to_string()).collect();
        MetricSpec::new(names, parsed, domain)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coordinates(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn component(&self, a: usize, b: usize) -> Option<&Expression> {
        self.components[packed_index(self.dim(), a, b)].as_ref()
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        let entries = self.entries();
        self.domain = domain;
        MetricSpec::new(self.coords.clone(), entries, self.domain)
    }

    /// Non-zero entries as `(a, b, g_ab)` with `a <= b`.
    pub fn entries(&self) -> Vec<(usize, usize, Expression)> {
        let n = self.dim();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a..n {
                if let Some(e) = self.component(a, b) {
                    out.push((a, b, e.clone()));
                }
            }
        }
        out
    }

    /// Apply `f` to every present component.
    pub fn map_components(&self, f: impl Fn(&Expression) -> Expression) -> MetricSpec {
        MetricSpec {
            coords: self.coords.clone(),
            components: self.components.iter().map(|c| c.as_ref().map(&f)).collect(),
            domain: self.domain.clone(),
        }
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::Shape(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Order-3 jets of every `g_ab` at `point`.
    pub fn metric_jets(&self, point: &[f64]) -> Result<JetTensor> {
        self.check_point(point)?;
        let n = self.dim();
        let vars = jet::seed(point)?;
        let zero = Jet3::constant(n, 0.0)?;
        let mut packed = Vec::with_capacity(self.components.len());
        for c in &self.components {
            packed.push(match c {
                Some(e) => e.evaluate(&vars)?,
                None => zero.clone(),
            });
        }
        Ok(Tensor::from_fn(n, &[Down, Down], |i| packed[packed_index(n, i[0], i[1])].clone()))
    }

    pub fn metric_at(&self, point: &[f64]) -> Result<MetricAtPoint> {
        self.check_point(point)?;
        let n = self.dim();
        let mut packed = Vec::with_capacity(self.components.len());
        for c in &self.components {
            packed.push(match c {
                Some(e) => e.eval_f64(point)?,
                None => 0.0,
            });
        }
        let full = (0..n * n).map(|k| packed[packed_index(n, k / n, k % n)]).collect();
        MetricAtPoint::new(n, full, point)
    }

    /// `count` points uniform in the domain box, reproducible from `seed`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = SplitMix64::new(seed);
        (0..count).map(|_| rng.point_in(&self.domain)).collect()
    }
}

/// Quasi-Einstein data `(f, μ, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub f: Expression,
    pub mu: f64,
    pub lambda: f64,
}

impl PotentialSpec {
    pub fn new(f: Expression, mu: f64, lambda: f64) -> Result<Self> {
        if !mu.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("mu = {mu}, lambda = {lambda}")));
        }
        Ok(PotentialSpec { f, mu, lambda })
    }

    pub fn parse(f: &str, coords: &[&str], mu: f64, lambda: f64) -> Result<Self> {
        PotentialSpec::new(Expression::parse(f, coords)?, mu, lambda)
    }

    /// Rebind `f` onto the chart's coordinate list.
    pub fn bound_to(&self, chart: &MetricSpec) -> Result<Self> {
        Ok(PotentialSpec {
            f: self.f.with_coordinates(chart.coordinates().clone())?,
            ..self.clone()
        })
    }

    /// `μ = 1/(2 − n)`: the conformally Einstein case.
    pub fn is_special_mu(&self, n: usize) -> bool {
        n > 2 && (self.mu - special_mu(n)).abs() <= 1e-12
    }
}

pub fn special_mu(n: usize) -> f64 {
    1.0 / (2.0 - n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polar() -> MetricSpec {
        MetricSpec::parse(&["r", "th"], &[(0, 0, "1"), (1, 1, "r^2")], vec![(0.5, 3.0), (-1.0, 1.0)]).unwrap()
    }

    #[test]
    fn packed_layout_is_dense() {
        let n = 4;
        let mut seen = vec![false; n * (n + 1) / 2];
        for a in 0..n {
            for b in a..n {
                let k = packed_index(n, a, b);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, packed_index(n, b, a));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn metric_at_and_jets_agree() {
        let m = polar();
        let p = [2.0, 0.5];
        let g = m.metric_at(&p).unwrap();
        assert_eq!(g.g.at(&[1, 1]), 4.0);
        assert_eq!(g.g.at(&[0, 1]), 0.0);
        assert!((g.g_inv.at(&[1, 1]) - 0.25).abs() < 1e-15);
        let jets = m.metric_jets(&p).unwrap();
        assert_eq!(jets.get(&[1, 1]).d(0), 4.0);
        assert_eq!(jets.get(&[1, 1]).partial(&[2, 0]).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MetricSpec::parse(&["x", "y"], &[(0, 2, "1")], vec![(0.0, 1.0); 2]).is_err());
        assert!(MetricSpec::parse(&["x", "y"], &[(0, 0, "1")], vec![(1.0, 0.0); 2]).is_err());
        let lorentz = MetricSpec::parse(&["t", "x"], &[(0, 0, "-1"), (1, 1, "1")], vec![(0.0, 1.0); 2]).unwrap();
        assert!(matches!(lorentz.metric_at(&[0.5, 0.5]), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn sampling_is_reproducible_and_in_domain() {
        let m = polar();
        let a = m.sample_points(5, 7);
        assert_eq!(a, m.sample_points(5, 7));
        assert_ne!(a, m.sample_points(5, 8));
        for p in &a {
            assert!((0.5..3.0).contains(&p[0]) && (-1.0..1.0).contains(&p[1]));
        }
    }

    #[test]
    fn special_mu_flag() {
        let p = PotentialSpec::parse("t", &["t", "x", "y"], -1.0, -1.0).unwrap();
        assert!(p.is_special_mu(3));
        assert!(!p.is_special_mu(4));
    }
}
