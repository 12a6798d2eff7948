//! Level-set geometry of the potential.
//!
//! The unit normal is `n = ∇f/|∇f|` and the second fundamental form is
//! `h = −P(∇²f)P/|∇f|` with `P = g − n⊗n`; `H = tr h`. Everything is written
//! with contractions against `n` and `P`, so it holds in any chart. The
//! literal coordinate identities are checked separately on charts whose
//! first coordinate is `f` itself.

use crate::chart::{MetricSpec, PotentialSpec};
use crate::curvature::{contract4, CurvaturePack};
use crate::error::{Error, Result};
use crate::quasi_einstein::{qe_gate_bound, residual_from, PotentialData, QE_GATE};
use crate::report::{Assert, CheckReport, ReportBuilder, Tolerances};
use crate::sampling::{par_map, SplitMix64};
use crate::tensor::{Down, Tensor, TensorValue, Up};

pub const LCF_GATE: &str = "lcf";
/// `|∇f|` below this is treated as a critical point.
pub const REGULAR_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct LevelSetFrame {
    pub point: Vec<f64>,
    /// `∇^a f`.
    pub grad_f: Vec<f64>,
    pub grad_norm_sq: f64,
    pub grad_norm: f64,
    /// `n_a`.
    pub normal: Vec<f64>,
    /// `n^a`.
    pub normal_up: Vec<f64>,
    /// `P_ab = g_ab − n_a n_b`.
    pub projector: TensorValue,
    /// `P^a_b = δ^a_b − n^a n_b`.
    pub mixed: TensorValue,
    /// Coordinate 0 is `f`: `df = dx⁰` and `g^0j = 0`.
    pub is_adapted_chart: bool,
}

impl LevelSetFrame {
    pub fn new(pack: &CurvaturePack, pd: &PotentialData) -> Result<Self> {
        let n = pack.dim();
        let grad_norm = pd.grad_norm_sq.sqrt();
        let scale = 1f64.max(pd.df.max_abs());
        if !(grad_norm > REGULAR_THRESHOLD * scale) {
            return Err(Error::CriticalPoint(grad_norm, pack.point.clone()));
        }
        let normal: Vec<f64> = pd.df.data().iter().map(|x| x / grad_norm).collect();
        let normal_up: Vec<f64> = pd.grad.data().iter().map(|x| x / grad_norm).collect();
        let g = &pack.metric.g;
        let projector = Tensor::from_fn(n, &[Down, Down], |i| g.at(i) - normal[i[0]] * normal[i[1]]);
        let mixed = Tensor::from_fn(n, &[Up, Down], |i| {
            (if i[0] == i[1] { 1.0 } else { 0.0 }) - normal_up[i[0]] * normal[i[1]]
        });
        let gi = &pack.metric.g_inv;
        let is_adapted_chart = (pd.df.at(&[0]) - 1.0).abs() < 1e-12
            && (1..n).all(|j| pd.df.at(&[j]).abs() < 1e-12 && gi.at(&[0, j]).abs() < 1e-10 * gi.max_abs());
        Ok(LevelSetFrame {
            point: pack.point.clone(),
            grad_f: pd.grad.data().to_vec(),
            grad_norm_sq: pd.grad_norm_sq,
            grad_norm,
            normal,
            normal_up,
            projector,
            mixed,
            is_adapted_chart,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Tangential part `P^a_b v^b` of a vector.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|a| (0..n).map(|b| self.mixed.at(&[a, b]) * v[b]).sum()).collect()
    }

    /// `P(T)P` for a covariant 2-tensor: `P^c_a T_cd P^d_b`.
    pub fn project2(&self, t: &TensorValue) -> TensorValue {
        let n = self.dim();
        let m = &self.mixed;
        Tensor::from_fn(n, &[Down, Down], |i| {
            let mut s = 0.0;
            for c in 0..n {
                let pc = m.at(&[c, i[0]]);
                if pc == 0.0 {
                    continue;
                }
                for d in 0..n {
                    s += pc * t.at(&[c, d]) * m.at(&[d, i[1]]);
                }
            }
            s
        })
    }

    /// Tangential part of a covector: `α_b P^b_a`.
    pub fn project_covector(&self, alpha: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|a| (0..n).map(|b| alpha[b] * self.mixed.at(&[b, a])).sum()).collect()
    }

    /// `P² = P`, `Pn = 0`, `tr P = n − 1`.
    pub fn algebra_defect(&self) -> f64 {
        let n = self.dim();
        let m = &self.mixed;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let sq: f64 = (0..n).map(|c| m.at(&[a, c]) * m.at(&[c, b])).sum();
                worst = worst.max((sq - m.at(&[a, b])).abs());
            }
            let pn: f64 = (0..n).map(|c| m.at(&[a, c]) * self.normal_up[c]).sum();
            worst = worst.max(pn.abs());
        }
        let tr: f64 = (0..n).map(|a| m.at(&[a, a])).sum();
        worst.max((tr - (n as f64 - 1.0)).abs())
    }
}

/// Everything the level-set checks need at one point.
#[derive(Debug, Clone)]
pub struct LevelPoint {
    pub pack: CurvaturePack,
    pub pd: PotentialData,
    pub frame: LevelSetFrame,
    pub pot: PotentialSpec,
}

impl LevelPoint {
    pub fn compute(chart: &MetricSpec, pot: &PotentialSpec, point: &[f64]) -> Result<Self> {
        let pot = pot.bound_to(chart)?;
        let pack = CurvaturePack::compute(chart, point)?;
        let pd = PotentialData::compute(&pack, &pot)?;
        let frame = LevelSetFrame::new(&pack, &pd)?;
        Ok(LevelPoint { pack, pd, frame, pot })
    }

    pub fn dim(&self) -> usize {
        self.pack.dim()
    }

    /// `h = −P(∇²f)P/|∇f|`.
    pub fn second_fundamental_form(&self) -> TensorValue {
        self.frame.project2(&self.pd.hessian).scaled(-1.0 / self.frame.grad_norm)
    }

    /// `P(Ric − λg)P/|∇f|`, equal to `h` for quasi-Einstein data.
    pub fn second_fundamental_form_from_ricci(&self) -> TensorValue {
        let t = self.pack.ricci.sub(&self.pack.metric.g.scaled(self.pot.lambda)).expect("same shape");
        self.frame.project2(&t).scaled(1.0 / self.frame.grad_norm)
    }

    pub fn mean_curvature(&self) -> f64 {
        let h = self.second_fundamental_form();
        h.raise_lower(0, &self.pack.metric).and_then(|t| t.contract(0, 1)).expect("rank 2").data()[0]
    }

    /// `Ric(n, n)`.
    pub fn ricci_nn(&self) -> f64 {
        bilinear(&self.pack.ricci, &self.frame.normal_up, &self.frame.normal_up)
    }

    /// `|h − (H/(n−1)) P|∞`.
    pub fn umbilicity_defect(&self) -> f64 {
        let k = self.mean_curvature() / (self.dim() as f64 - 1.0);
        self.second_fundamental_form().max_abs_diff(&self.frame.projector.scaled(k)).expect("same shape")
    }

    /// Intrinsic sectional curvature of the level set through the plane
    /// spanned by the tangential parts of `u` and `v` (Gauss equation).
    pub fn fiber_sectional_curvature(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let (e1, e2) = self.tangent_orthonormal_pair(u, v)?;
        let h = self.second_fundamental_form();
        let ambient = contract4(&self.pack.riemann, &e1, &e2, &e1, &e2);
        Ok(ambient + bilinear(&h, &e1, &e1) * bilinear(&h, &e2, &e2) - bilinear(&h, &e1, &e2).powi(2))
    }

    /// `(2/((n−1)(n−2))) H|∇f| + (2/(n−2)) λ − R/((n−1)(n−2)) + H²/(n−1)²`,
    /// the fiber curvature of an umbilic level set of an LCF quasi-Einstein metric.
    pub fn fiber_sectional_closed_form(&self) -> f64 {
        let n = self.dim() as f64;
        let h = self.mean_curvature();
        2.0 / ((n - 1.0) * (n - 2.0)) * h * self.frame.grad_norm + 2.0 / (n - 2.0) * self.pot.lambda
            - self.pack.scalar / ((n - 1.0) * (n - 2.0))
            + h * h / ((n - 1.0) * (n - 1.0))
    }

    /// Project onto the level set and Gram–Schmidt in `g`.
    pub fn tangent_orthonormal_pair(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = &self.pack.metric;
        let u = self.frame.project(u);
        let uu = m.inner(&u, &u);
        let v = self.frame.project(v);
        let vv = m.inner(&v, &v);
        if uu <= 1e-24 || vv <= 1e-24 {
            return Err(Error::DegeneratePlane);
        }
        let e1: Vec<f64> = u.iter().map(|x| x / uu.sqrt()).collect();
        let c = m.inner(&e1, &v);
        let w: Vec<f64> = v.iter().zip(&e1).map(|(x, e)| x - c * e).collect();
        let ww = m.inner(&w, &w);
        if ww <= 1e-12 * vv {
            return Err(Error::DegeneratePlane);
        }
        Ok((e1, w.iter().map(|x| x / ww.sqrt()).collect()))
    }

    /// `H` from `(R − Ric(n,n) − (n−1)λ)/|∇f|`.
    pub fn mean_curvature_formula(&self) -> f64 {
        let n = self.dim() as f64;
        (self.pack.scalar - self.ricci_nn() - (n - 1.0) * self.pot.lambda) / self.frame.grad_norm
    }

    /// `|P(Ric n)|`: the mixed normal-tangential Ricci components.
    pub fn tangential_ricci(&self) -> f64 {
        let n = self.dim();
        let ric_n: Vec<f64> = (0..n).map(|a| (0..n).map(|b| self.pack.ricci.at(&[a, b]) * self.frame.normal_up[b]).sum()).collect();
        max_abs(&self.frame.project_covector(&ric_n))
    }

    pub fn tangential_grad_scalar(&self) -> f64 {
        max_abs(&self.frame.project_covector(self.pack.grad_scalar.data()))
    }

    pub fn tangential_grad_norm_sq(&self) -> f64 {
        max_abs(&self.frame.project_covector(self.pd.grad_of_grad_norm_sq().data()))
    }

    /// `(μ(n−2)+1)/(n−1)`, the `C(n, ·, n)` coefficient.
    pub fn cotton_normal_coefficient(&self) -> f64 {
        let n = self.dim() as f64;
        (self.pot.mu * (n - 2.0) + 1.0) / (n - 1.0)
    }

    /// `(μ(n−2)+1)/(n−2)`, the `C(·, ·, n)` coefficient.
    pub fn cotton_tangential_coefficient(&self) -> f64 {
        let n = self.dim() as f64;
        (self.pot.mu * (n - 2.0) + 1.0) / (n - 2.0)
    }

    /// Right-hand side of `C(n, X, n) = ((μ(n−2)+1)/(n−1)) |∇f| Ric(n, X)` as a tangential covector.
    pub fn cotton_normal_rhs(&self) -> Vec<f64> {
        let n = self.dim();
        let k = self.cotton_normal_coefficient() * self.frame.grad_norm;
        if k == 0.0 {
            return vec![0.0; n];
        }
        let ric_n: Vec<f64> = (0..n).map(|a| (0..n).map(|b| self.pack.ricci.at(&[a, b]) * self.frame.normal_up[b]).sum()).collect();
        self.frame.project_covector(&ric_n).iter().map(|x| k * x).collect()
    }

    /// `C(n, X, n)` for tangential `X`, from the Cotton tensor.
    pub fn cotton_normal_lhs(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let c = self.pack.cotton()?;
        let nu = &self.frame.normal_up;
        let raw: Vec<f64> = (0..n)
            .map(|b| {
                let mut s = 0.0;
                for a in 0..n {
                    for cc in 0..n {
                        s += nu[a] * c.at(&[a, b, cc]) * nu[cc];
                    }
                }
                s
            })
            .collect();
        Ok(self.frame.project_covector(&raw))
    }

    /// Right-hand side of `C(X, Y, n) = ((μ(n−2)+1)/(n−2)) |∇f|² (h − H P/(n−1))(X, Y)`.
    pub fn cotton_tangential_rhs(&self) -> TensorValue {
        let k = self.cotton_tangential_coefficient() * self.frame.grad_norm_sq;
        if k == 0.0 {
            return Tensor::zeros(self.dim(), &[Down, Down]);
        }
        let traceless = self
            .second_fundamental_form()
            .sub(&self.frame.projector.scaled(self.mean_curvature() / (self.dim() as f64 - 1.0)))
            .expect("same shape");
        traceless.scaled(k)
    }

    /// `P^a_e P^b_f C_abc n^c`.
    pub fn cotton_tangential_lhs(&self) -> Result<TensorValue> {
        let n = self.dim();
        let c = self.pack.cotton()?;
        let nu = &self.frame.normal_up;
        let raw = Tensor::from_fn(n, &[Down, Down], |i| (0..n).map(|cc| c.at(&[i[0], i[1], cc]) * nu[cc]).sum());
        Ok(self.frame.project2(&raw))
    }
}

/// `T(u, v)` for a covariant 2-tensor.
pub fn bilinear(t: &TensorValue, u: &[f64], v: &[f64]) -> f64 {
    let n = t.dim();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            s += t.at(&[a, b]) * u[a] * v[b];
        }
    }
    s
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn frame(chart: &MetricSpec, pot: &PotentialSpec, point: &[f64]) -> Result<LevelSetFrame> {
    Ok(LevelPoint::compute(chart, pot, point)?.frame)
}

pub fn second_fundamental_form(chart: &MetricSpec, pot: &PotentialSpec, point: &[f64]) -> Result<TensorValue> {
    Ok(LevelPoint::compute(chart, pot, point)?.second_fundamental_form())
}

pub fn mean_curvature(chart: &MetricSpec, pot: &PotentialSpec, point: &[f64]) -> Result<f64> {
    Ok(LevelPoint::compute(chart, pot, point)?.mean_curvature())
}

pub fn umbilicity_defect(chart: &MetricSpec, pot: &PotentialSpec, point: &[f64]) -> Result<f64> {
    Ok(LevelPoint::compute(chart, pot, point)?.umbilicity_defect())
}

pub fn fiber_sectional_curvature(chart: &MetricSpec, pot: &PotentialSpec, point: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    LevelPoint::compute(chart, pot, point)?.fiber_sectional_curvature(u, v)
}

/// Conformal-flatness gate value at a point: Cotton norm for `n = 3`, the
/// larger of the Weyl and Cotton norms for `n >= 4`, with its scale.
pub fn lcf_gate_value(pack: &CurvaturePack) -> Result<(f64, f64)> {
    let m = &pack.metric;
    let cotton = pack.cotton()?.norm(m);
    let weyl = pack.weyl.as_ref().map_or(0.0, |w| w.norm(m));
    let scale = pack.riemann.norm(m).max(pack.grad_ricci.norm(m));
    Ok((weyl.max(cotton), scale))
}

fn record_gates(b: &mut ReportBuilder, lp: &LevelPoint, tol: &Tolerances, qe_required: bool, lcf_required: bool) -> Result<()> {
    let (r, rs) = residual_from(&lp.pack, &lp.pd, &lp.pot);
    b.gate(QE_GATE, r.max_abs(), qe_gate_bound(tol, rs), qe_required);
    let (l, ls) = lcf_gate_value(&lp.pack)?;
    b.gate(LCF_GATE, l, tol.lcf_gate() * ls.max(1.0), lcf_required);
    Ok(())
}

/// A chart whose first coordinate is the potential: `f = x⁰`, `g_0j ≡ 0`.
#[derive(Debug, Clone)]
pub struct AdaptedChartSpec {
    chart: MetricSpec,
    pot: PotentialSpec,
}

impl AdaptedChartSpec {
    pub fn new(chart: MetricSpec, pot: PotentialSpec) -> Result<Self> {
        let pot = pot.bound_to(&chart)?;
        if !pot.f.is_coordinate(0) {
            return Err(Error::NotAdapted(format!(
                "f = {} is not the first coordinate `{}`",
                pot.f,
                chart.coordinates()[0]
            )));
        }
        let n = chart.dim();
        let probes = chart.sample_points(20, 0x5eed);
        for j in 1..n {
            if let Some(e) = chart.component(0, j) {
                for p in &probes {
                    let v = e.eval_f64(p)?;
                    if v != 0.0 {
                        return Err(Error::NotAdapted(format!(
                            "g_0{j} = {e} is {v} at {p:?}, cross terms must vanish identically"
                        )));
                    }
                }
            }
        }
        Ok(AdaptedChartSpec { chart, pot })
    }

    pub fn chart(&self) -> &MetricSpec {
        &self.chart
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.pot
    }
}

/// The six adapted-coordinate identities at one point, as `(name, defect, scale)`.
///
/// With `N = |∇f|² = g^00` and indices `0` (the `f` direction) and `i, j`
/// (level-set coordinates), all derivatives covariant:
///   id1   ∇_j N = −2N R_0j
///   id1.2 ∇_0 N = −2N R_00 + 2μN + 2λ
///   id2   ∇_j R = 2(1−μ) N R_0j
///   id2.2 ∇_0 R = 2(1−μ) N R_00 − 2(n−1)μλ + 2μR
///   id3   ∇_0 R_j0 − ∇_j R_00 = μ R_0j
///   id3.2 ∇_0 R_ij − ∇_j R_i0 = (μ + 1/(n−2)) R_ij + N R_00 g_ij/(n−2)
///                               − R g_ij/((n−1)(n−2)) − λμ g_ij      (needs W = 0)
pub fn adapted_identity_defects(lp: &LevelPoint) -> Vec<(&'static str, f64, f64)> {
    let n = lp.dim();
    let nf = n as f64;
    let (mu, lambda) = (lp.pot.mu, lp.pot.lambda);
    let nn = lp.frame.grad_norm_sq;
    let ric = &lp.pack.ricci;
    let dric = &lp.pack.grad_ricci;
    let dr = &lp.pack.grad_scalar;
    let g = &lp.pack.metric.g;
    let r = lp.pack.scalar;
    let dn = lp.pd.grad_of_grad_norm_sq();
    let r00 = ric.at(&[0, 0]);

    let mut out = Vec::new();
    let mut push = |name, pairs: Vec<(f64, f64)>| {
        let defect = pairs.iter().fold(0f64, |m, (l, r)| m.max((l - r).abs()));
        let scale = pairs.iter().fold(0f64, |m, (l, r)| m.max(l.abs()).max(r.abs()));
        out.push((name, defect, scale));
    };
    push("id1", (1..n).map(|j| (dn.at(&[j]), -2.0 * nn * ric.at(&[0, j]))).collect());
    push("id1.2", vec![(dn.at(&[0]), -2.0 * nn * r00 + 2.0 * mu * nn + 2.0 * lambda)]);
    push("id2", (1..n).map(|j| (dr.at(&[j]), 2.0 * (1.0 - mu) * nn * ric.at(&[0, j]))).collect());
    push(
        "id2.2",
        vec![(dr.at(&[0]), 2.0 * (1.0 - mu) * nn * r00 - 2.0 * (nf - 1.0) * mu * lambda + 2.0 * mu * r)],
    );
    push(
        "id3",
        (1..n).map(|j| (dric.at(&[j, 0, 0]) - dric.at(&[0, 0, j]), mu * ric.at(&[0, j]))).collect(),
    );
    let mut pairs = Vec::new();
    for i in 1..n {
        for j in 1..n {
            let lhs = dric.at(&[i, j, 0]) - dric.at(&[i, 0, j]);
            let gij = g.at(&[i, j]);
            let rhs = (mu + 1.0 / (nf - 2.0)) * ric.at(&[i, j]) + nn * r00 * gij / (nf - 2.0)
                - r * gij / ((nf - 1.0) * (nf - 2.0))
                - lambda * mu * gij;
            pairs.push((lhs, rhs));
        }
    }
    push("id3.2", pairs);
    out
}

pub fn check_adapted_identities(
    adapted: &AdaptedChartSpec,
    points: &[Vec<f64>],
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    let chart = adapted.chart();
    if chart.dim() < 3 {
        return Err(Error::DimensionTooSmall(chart.dim(), 3));
    }
    let lps = par_map(points, |p| LevelPoint::compute(chart, adapted.potential(), p))?;
    let mut b = ReportBuilder::new("identities", source, seed, tol);
    for lp in &lps {
        if !lp.frame.is_adapted_chart {
            return Err(Error::NotAdapted(format!("df ≠ dx⁰ or g^0j ≠ 0 at {:?}", lp.pack.point)));
        }
        record_gates(&mut b, lp, &tol, true, false)?;
        let i = b.point(&lp.pack.point, Some(lp.pd.value));
        for (name, v, s) in adapted_identity_defects(lp) {
            let assert = if name == "id3.2" { Assert::Gated(vec![LCF_GATE.into()]) } else { Assert::Always };
            b.declare(name, tol.proof_chain(), assert);
            b.defect(i, name, v, s);
        }
        b.declare("g00_vs_grad_norm_sq", tol.frame(), Assert::Always);
        let g00 = lp.pack.metric.g_inv.at(&[0, 0]);
        b.defect(i, "g00_vs_grad_norm_sq", (g00 - lp.frame.grad_norm_sq).abs(), g00.abs());
    }
    Ok(b.finish())
}

/// The two Cotton displays and their defects at one point.
pub fn cotton_display_defects(lp: &LevelPoint) -> Result<[(&'static str, f64, f64); 2]> {
    let l0 = lp.cotton_normal_lhs()?;
    let r0 = lp.cotton_normal_rhs();
    let l1 = lp.cotton_tangential_lhs()?;
    let r1 = lp.cotton_tangential_rhs();
    Ok([
        ("cotton_normal", max_abs_diff(&l0, &r0), max_abs(&l0).max(max_abs(&r0))),
        ("cotton_tangential", l1.max_abs_diff(&r1)?, l1.max_abs().max(r1.max_abs())),
    ])
}

pub fn cotton_component_checks(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    points: &[Vec<f64>],
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    let lps = par_map(points, |p| LevelPoint::compute(chart, pot, p))?;
    let mut b = ReportBuilder::new("cotton-components", source, seed, tol);
    b.declare("cotton_normal", tol.proof_chain(), Assert::Always);
    b.declare("cotton_tangential", tol.proof_chain(), Assert::Gated(vec![LCF_GATE.into()]));
    for lp in &lps {
        record_gates(&mut b, lp, &tol, true, false)?;
        let i = b.point(&lp.pack.point, Some(lp.pd.value));
        for (name, v, s) in cotton_display_defects(lp)? {
            b.defect(i, name, v, s);
        }
    }
    Ok(b.finish())
}

/// Points on one level set `f = level`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSample {
    pub level: f64,
    pub points: Vec<Vec<f64>>,
}

/// Level values, points on each, and how many random tangent planes to probe per point.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub levels: Vec<LevelSample>,
    pub planes: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn all_points(&self) -> Vec<Vec<f64>> {
        self.levels.iter().flat_map(|l| l.points.iter().cloned()).collect()
    }
}

/// `count` points on `f = level` inside the chart's domain: random starts
/// pushed onto the level set by Newton steps along the coordinate gradient of `f`.
pub fn sample_level_set(chart: &MetricSpec, pot: &PotentialSpec, level: f64, count: usize, seed: u64) -> Result<LevelSample> {
    let pot = pot.bound_to(chart)?;
    let domain = chart.domain();
    let inside = |p: &[f64]| p.iter().zip(domain).all(|(x, (lo, hi))| x >= lo && x <= hi);
    let mut rng = SplitMix64::new(seed ^ level.to_bits().rotate_left(17));
    let mut points = Vec::with_capacity(count);
    let bound = 1e-12 * level.abs().max(1.0);
    for _ in 0..count * 50 {
        if points.len() == count {
            break;
        }
        let mut p = rng.point_in(domain);
        for _ in 0..60 {
            let j = pot.f.evaluate(&crate::jet::seed(&p)?)?;
            let r = j.value() - level;
            if r.abs() <= bound {
                break;
            }
            let grad: Vec<f64> = (0..p.len()).map(|i| j.d(i)).collect();
            let g2: f64 = grad.iter().map(|x| x * x).sum();
            if !(g2 > 1e-20) {
                break;
            }
            for (x, g) in p.iter_mut().zip(&grad) {
                *x -= r * g / g2;
            }
            if !inside(&p) {
                break;
            }
        }
        if inside(&p) && matches!(pot.f.eval_f64(&p), Ok(v) if (v - level).abs() <= bound) {
            points.push(p);
        }
    }
    if points.len() < count {
        return Err(Error::NoLevelSets(format!("found {} of {count} points on f = {level} inside the domain", points.len())));
    }
    Ok(LevelSample { level, points })
}

/// Values of `f` at `count` seeded sample points: level sets known to meet the domain.
pub fn default_levels(chart: &MetricSpec, pot: &PotentialSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    let pot = pot.bound_to(chart)?;
    chart.sample_points(count, seed).iter().map(|p| Ok(pot.f.eval_f64(p)?)).collect()
}

/// Random direction pairs for the fiber-curvature probes, reproducible per point.
fn plane_directions(n: usize, count: usize, seed: u64, level: usize, point: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mix = seed ^ ((level as u64) << 32) ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = SplitMix64::new(mix);
    (0..count).map(|_| (rng.unit_vector(n), rng.unit_vector(n))).collect()
}

fn verify_level(chart_points: &LevelSample, lps: &[LevelPoint]) -> Result<()> {
    for lp in lps {
        let scale = 1f64.max(chart_points.level.abs());
        if (lp.pd.value - chart_points.level).abs() > 1e-9 * scale {
            return Err(Error::NotOnLevelSet {
                level: chart_points.level,
                found: lp.pd.value,
                point: lp.pack.point.clone(),
            });
        }
    }
    Ok(())
}

const CHAIN: [&str; 4] = ["tangential_ricci", "tangential_grad_scalar", "tangential_grad_norm_sq", "umbilicity"];

fn level_report(
    b: &mut ReportBuilder,
    sample: &LevelSample,
    lps: &[LevelPoint],
    level_index: usize,
    plan: Option<&SamplePlan>,
    tol: &Tolerances,
) -> Result<()> {
    let n = lps.first().map_or(0, |l| l.dim());
    let mut fiber = Vec::new();
    for (k, lp) in lps.iter().enumerate() {
        record_gates(b, lp, tol, true, true)?;
        let i = b.point(&lp.pack.point, Some(sample.level));
        let rs = lp.pack.ricci.max_abs();
        b.defect(i, "tangential_ricci", lp.tangential_ricci(), rs);
        b.defect(i, "tangential_grad_scalar", lp.tangential_grad_scalar(), lp.pack.grad_scalar.max_abs());
        b.defect(i, "tangential_grad_norm_sq", lp.tangential_grad_norm_sq(), lp.pd.grad_of_grad_norm_sq().max_abs());
        let h = lp.second_fundamental_form();
        b.defect(i, "umbilicity", lp.umbilicity_defect(), h.max_abs());
        b.defect(i, "frame_algebra", lp.frame.algebra_defect(), 1.0);
        let hr = lp.second_fundamental_form_from_ricci();
        b.defect(i, "h_two_path", h.max_abs_diff(&hr)?, h.max_abs().max(hr.max_abs()));
        let (h1, h2) = (lp.mean_curvature(), lp.mean_curvature_formula());
        b.defect(i, "mean_curvature_two_path", (h1 - h2).abs(), h1.abs().max(h2.abs()));
        if let Some(plan) = plan {
            for (name, v, s) in cotton_display_defects(lp)? {
                b.defect(i, name, v, s);
            }
            if n >= 3 {
                let closed = lp.fiber_sectional_closed_form();
                let mut worst: f64 = 0.0;
                for (u, v) in plane_directions(n, plan.planes, plan.seed, level_index, k) {
                    let sec = lp.fiber_sectional_curvature(&u, &v)?;
                    worst = worst.max((sec - closed).abs());
                    fiber.push(sec);
                }
                b.defect(i, "fiber_curvature_two_path", worst, closed.abs());
            }
        }
    }
    let tag = |name: &str| format!("{name}@f={}", sample.level);
    let spread = |b: &mut ReportBuilder, name: &str, vals: Vec<f64>| b.spread(&tag(name), &vals, tol.proof_chain(), true);
    spread(b, "R", lps.iter().map(|l| l.pack.scalar).collect());
    spread(b, "grad_norm_sq", lps.iter().map(|l| l.frame.grad_norm_sq).collect());
    spread(b, "ricci_nn", lps.iter().map(|l| l.ricci_nn()).collect());
    spread(b, "H", lps.iter().map(|l| l.mean_curvature()).collect());
    if !fiber.is_empty() {
        spread(b, "fiber_sectional", fiber);
    }
    Ok(())
}

fn declare_chain(b: &mut ReportBuilder, tol: &Tolerances) {
    for name in CHAIN {
        b.declare(name, tol.proof_chain(), Assert::Always);
    }
    b.declare("frame_algebra", tol.frame(), Assert::Always);
    for name in ["h_two_path", "mean_curvature_two_path", "fiber_curvature_two_path"] {
        b.declare(name, tol.two_path(), Assert::Always);
    }
    b.declare("cotton_normal", tol.proof_chain(), Assert::Always);
    b.declare("cotton_tangential", tol.proof_chain(), Assert::Always);
}

/// Constancy of `R`, `|∇f|²`, `Ric(n,n)`, `H` on one level set and vanishing
/// of the tangential derivatives and mixed Ricci components.
pub fn check_level_set_constancy(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    sample: &LevelSample,
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    check_level_sets(chart, pot, std::slice::from_ref(sample), source, seed, tol)
}

pub fn check_level_sets(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    samples: &[LevelSample],
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("levelsets", source, seed, tol);
    declare_chain(&mut b, &tol);
    for (k, s) in samples.iter().enumerate() {
        let lps = par_map(&s.points, |p| LevelPoint::compute(chart, pot, p))?;
        verify_level(s, &lps)?;
        level_report(&mut b, s, &lps, k, None, &tol)?;
    }
    Ok(b.finish())
}

/// Aggregate numerical evidence that the metric is locally a warped product
/// with constant-curvature fibers around the sampled regular level sets.
pub fn theorem_verdict(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    plan: &SamplePlan,
    source: &str,
    tol: Tolerances,
) -> Result<CheckReport> {
    let n = chart.dim();
    if n < 3 {
        return Err(Error::DimensionTooSmall(n, 3));
    }
    if pot.is_special_mu(n) {
        return Err(Error::SpecialMu(pot.mu));
    }
    if plan.levels.is_empty() {
        return Err(Error::NoLevelSets("the sample plan has no level sets".into()));
    }
    let mut b = ReportBuilder::new("theorem", source, plan.seed, tol);
    declare_chain(&mut b, &tol);
    for (k, s) in plan.levels.iter().enumerate() {
        let lps = par_map(&s.points, |p| LevelPoint::compute(chart, pot, p))?;
        verify_level(s, &lps)?;
        level_report(&mut b, s, &lps, k, Some(plan), &tol)?;
    }
    for name in b.failed_required_gates() {
        b.note(format!("gate `{name}` failed: the theorem's hypotheses do not hold, conclusions are not asserted"));
    }
    Ok(b.finish())
}
