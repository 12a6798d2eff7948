//! Finite-difference recomputation of curvature, independent of the jet pipeline.
//!
//! Only point evaluations of the metric components are used.

use nalgebra::DMatrix;

use crate::chart::MetricSpec;
use crate::curvature::CurvaturePack;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::tensor::{Down, Tensor, TensorValue, Up};

/// Central stencil for a single-direction derivative of the given order: `(offset in h, weight)`.
fn stencil(order: u8) -> &'static [(f64, f64)] {
    match order {
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        _ => &[(0.0, 1.0)],
    }
}

/// Central-difference estimate of `∂^α f` at `point`, `|α| ≤ 3`.
pub fn fd_partial_with(f: &dyn Fn(&[f64]) -> Result<f64>, point: &[f64], alpha: &[u8]) -> Result<f64> {
    let order: u8 = alpha.iter().sum();
    if order > 3 || alpha.len() != point.len() {
        return Err(Error::InvalidParameter(format!("multi-index {alpha:?} at a {}-point", point.len())));
    }
    let inf = point.iter().fold(1f64, |m, x| m.max(x.abs()));
    let h = if order == 3 { 1e-3 } else { 1e-4 } * inf;
    let mut terms: Vec<(Vec<f64>, f64)> = vec![(point.to_vec(), 1.0)];
    for (i, &k) in alpha.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let mut next = Vec::new();
        for (p, w) in &terms {
            for &(o, sw) in stencil(k) {
                let mut q = p.clone();
                q[i] += o * h;
                next.push((q, w * sw));
            }
        }
        terms = next;
    }
    let mut s = 0.0;
    for (p, w) in terms {
        s += w * f(&p)?;
    }
    Ok(s / h.powi(order as i32))
}

/// The oracle for a single expression. Steps are `1e-4·max(1, |point|∞)` up to
/// order 2 and `1e-3·max(1, |point|∞)` at order 3.
pub fn fd_partials(expr: &Expression, point: &[f64], alpha: &[u8]) -> Result<f64> {
    fd_partial_with(&|p| Ok(expr.eval_f64(p)?), point, alpha)
}

fn unit(n: usize, a: usize, b: Option<usize>) -> Vec<u8> {
    let mut alpha = vec![0; n];
    alpha[a] += 1;
    if let Some(b) = b {
        alpha[b] += 1;
    }
    alpha
}

/// Curvature at one point from finite differences of the metric components.
#[derive(Debug, Clone)]
pub struct FdCurvature {
    pub christoffel: TensorValue,
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub scalar: f64,
    pub weyl: Option<TensorValue>,
    pub cotton: Option<TensorValue>,
}

struct Local {
    g: DMatrix<f64>,
    christoffel: TensorValue,
    riemann: TensorValue,
    ricci: TensorValue,
    scalar: f64,
}

fn component(chart: &MetricSpec, a: usize, b: usize, p: &[f64]) -> Result<f64> {
    match chart.component(a, b) {
        Some(e) => Ok(e.eval_f64(p)?),
        None => Ok(0.0),
    }
}

fn local(chart: &MetricSpec, p: &[f64]) -> Result<Local> {
    let n = chart.dim();
    let mut g = DMatrix::zeros(n, n);
    let mut dg = vec![0.0; n * n * n];
    let mut ddg = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in a..n {
            let f = |q: &[f64]| component(chart, a, b, q);
            let v = f(p)?;
            g[(a, b)] = v;
            g[(b, a)] = v;
            for c in 0..n {
                let d1 = fd_partial_with(&f, p, &unit(n, c, None))?;
                dg[(c * n + a) * n + b] = d1;
                dg[(c * n + b) * n + a] = d1;
                for e in c..n {
                    let d2 = fd_partial_with(&f, p, &unit(n, c, Some(e)))?;
                    for (x, y) in [(c, e), (e, c)] {
                        ddg[((x * n + y) * n + a) * n + b] = d2;
                        ddg[((x * n + y) * n + b) * n + a] = d2;
                    }
                }
            }
        }
    }
    let gi = g.clone().try_inverse().ok_or_else(|| Error::NotPositiveDefinite {
        point: p.to_vec(),
        reason: "singular metric in the oracle".into(),
    })?;
    let dg_at = |c: usize, a: usize, b: usize| dg[(c * n + a) * n + b];
    let ddg_at = |c: usize, e: usize, a: usize, b: usize| ddg[((c * n + e) * n + a) * n + b];
    // Γ_eac = ½(∂_a g_ec + ∂_c g_ea − ∂_e g_ac) and its derivative along b.
    let low = |e: usize, a: usize, c: usize| 0.5 * (dg_at(a, e, c) + dg_at(c, e, a) - dg_at(e, a, c));
    let dlow = |b: usize, e: usize, a: usize, c: usize| 0.5 * (ddg_at(b, a, e, c) + ddg_at(b, c, e, a) - ddg_at(b, e, a, c));
    let christoffel = Tensor::from_fn(n, &[Up, Down, Down], |i| (0..n).map(|e| gi[(i[0], e)] * low(e, i[1], i[2])).sum());
    let dgi = |b: usize, d: usize, e: usize| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s -= gi[(d, p)] * dg_at(b, p, q) * gi[(q, e)];
            }
        }
        s
    };
    let dgamma = |b: usize, d: usize, a: usize, c: usize| -> f64 { (0..n).map(|e| dgi(b, d, e) * low(e, a, c) + gi[(d, e)] * dlow(b, e, a, c)).sum() };
    let gam = |d: usize, a: usize, c: usize| christoffel.at(&[d, a, c]);
    let up = Tensor::from_fn(n, &[Up, Down, Down, Down], |i| {
        let (d, a, b, c) = (i[0], i[1], i[2], i[3]);
        let mut r = dgamma(b, d, a, c) - dgamma(a, d, b, c);
        for e in 0..n {
            r += gam(e, a, c) * gam(d, b, e) - gam(e, b, c) * gam(d, a, e);
        }
        r
    });
    let riemann = Tensor::from_fn(n, &[Down, Down, Down, Down], |i| (0..n).map(|e| g[(i[3], e)] * up.at(&[e, i[0], i[1], i[2]])).sum());
    let ricci = Tensor::from_fn(n, &[Down, Down], |i| {
        let mut s = 0.0;
        for b in 0..n {
            for d in 0..n {
                s += gi[(b, d)] * riemann.at(&[i[0], b, i[1], d]);
            }
        }
        s
    });
    let mut scalar = 0.0;
    for a in 0..n {
        for c in 0..n {
            scalar += gi[(a, c)] * ricci.at(&[a, c]);
        }
    }
    Ok(Local { g, christoffel, riemann, ricci, scalar })
}

/// Finite-difference curvature at `point`. Cotton uses a further central
/// difference of the oracle's own Ricci tensor.
pub fn fd_curvature(chart: &MetricSpec, point: &[f64]) -> Result<FdCurvature> {
    let n = chart.dim();
    let nf = n as f64;
    let l = local(chart, point)?;
    let g = |a: usize, b: usize| l.g[(a, b)];
    let weyl = (n >= 4).then(|| {
        Tensor::from_fn(n, &[Down, Down, Down, Down], |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let ric = |x: usize, y: usize| l.ricci.at(&[x, y]);
            l.riemann.at(i) + l.scalar / ((nf - 1.0) * (nf - 2.0)) * (g(a, c) * g(b, d) - g(a, d) * g(b, c))
                - (ric(a, c) * g(b, d) - ric(a, d) * g(b, c) + ric(b, d) * g(a, c) - ric(b, c) * g(a, d)) / (nf - 2.0)
        })
    });
    let cotton = if n >= 3 {
        let inf = point.iter().fold(1f64, |m, x| m.max(x.abs()));
        let h = 1e-3 * inf;
        let mut dric = vec![0.0; n * n * n];
        let mut dscalar = vec![0.0; n];
        for c in 0..n {
            let mut plus = point.to_vec();
            let mut minus = point.to_vec();
            plus[c] += h;
            minus[c] -= h;
            let (lp, lm) = (local(chart, &plus)?, local(chart, &minus)?);
            for a in 0..n {
                for b in 0..n {
                    dric[(a * n + b) * n + c] = (lp.ricci.at(&[a, b]) - lm.ricci.at(&[a, b])) / (2.0 * h);
                }
            }
            dscalar[c] = (lp.scalar - lm.scalar) / (2.0 * h);
        }
        let gam = |d: usize, a: usize, c: usize| l.christoffel.at(&[d, a, c]);
        let nabla_ric = |a: usize, b: usize, c: usize| -> f64 {
            dric[(a * n + b) * n + c] - (0..n).map(|e| gam(e, c, a) * l.ricci.at(&[e, b]) + gam(e, c, b) * l.ricci.at(&[a, e])).sum::<f64>()
        };
        Some(Tensor::from_fn(n, &[Down, Down, Down], |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            nabla_ric(a, b, c) - nabla_ric(a, c, b) - (dscalar[c] * g(a, b) - dscalar[b] * g(a, c)) / (2.0 * (nf - 1.0))
        }))
    } else {
        None
    };
    Ok(FdCurvature {
        christoffel: l.christoffel,
        riemann: l.riemann,
        ricci: l.ricci,
        scalar: l.scalar,
        weyl,
        cotton,
    })
}

/// `max |jet − fd| / (1 + |fd|)` over the components of two tensors.
pub fn relative_gap(jet: &TensorValue, fd: &TensorValue) -> f64 {
    jet.data().iter().zip(fd.data()).fold(0.0, |m, (a, b)| m.max((a - b).abs() / (1.0 + b.abs())))
}

/// Per-quantity gaps between the jet pipeline and the oracle at one point.
pub fn compare(pack: &CurvaturePack, fd: &FdCurvature) -> Result<Vec<(&'static str, f64)>> {
    let mut out = vec![
        ("christoffel", relative_gap(&pack.christoffel, &fd.christoffel)),
        ("riemann", relative_gap(&pack.riemann, &fd.riemann)),
        ("ricci", relative_gap(&pack.ricci, &fd.ricci)),
        ("scalar", (pack.scalar - fd.scalar).abs() / (1.0 + fd.scalar.abs())),
    ];
    if let (Some(w), Some(f)) = (&pack.weyl, &fd.weyl) {
        out.push(("weyl", relative_gap(w, f)));
    }
    if let (Some(c), Some(f)) = (&pack.cotton, &fd.cotton) {
        out.push(("cotton", relative_gap(c, f)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::random_chart;

    #[test]
    fn stencils_on_known_functions() {
        let e = Expression::parse("x^2", &["x"]).unwrap();
        assert!((fd_partials(&e, &[0.4], &[2]).unwrap() - 2.0).abs() < 1e-6);
        let e = Expression::parse("sin(t)", &["t"]).unwrap();
        assert!((fd_partials(&e, &[0.7], &[3]).unwrap() + 0.7f64.cos()).abs() < 1e-3);
        let e = Expression::parse("x*y", &["x", "y"]).unwrap();
        assert!((fd_partials(&e, &[0.3, -2.0], &[1, 1]).unwrap() - 1.0).abs() < 1e-6);
        assert!(fd_partials(&e, &[0.3, -2.0], &[2, 2]).is_err());
    }

    #[test]
    fn oracle_values_on_closed_forms() {
        let s2 = MetricSpec::parse(&["th", "ph"], &[(0, 0, "1"), (1, 1, "sin(th)^2")], vec![(0.3, 2.8), (-1.0, 1.0)]).unwrap();
        let fd = fd_curvature(&s2, &[1.0, 0.2]).unwrap();
        assert!((fd.riemann.at(&[0, 1, 0, 1]) - 1f64.sin().powi(2)).abs() < 1e-6);
        assert!((fd.christoffel.at(&[0, 1, 1]) + 1f64.sin() * 1f64.cos()).abs() < 1e-7);
        assert!((fd.scalar - 2.0).abs() < 1e-6);
    }

    #[test]
    fn jets_match_oracle() {
        for n in [3, 4] {
            let chart = random_chart(n, 40 + n as u64).unwrap();
            for p in chart.sample_points(2, 9) {
                let pack = CurvaturePack::compute(&chart, &p).unwrap();
                let fd = fd_curvature(&chart, &p).unwrap();
                for (name, gap) in compare(&pack, &fd).unwrap() {
                    assert!(gap < 1e-4, "n={n} {name}: {gap}");
                }
            }
        }
    }
}
