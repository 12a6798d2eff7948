//! The conformal change `g̃ = e^{−2f/(n−2)} g`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::adapted::{lcf_gate_value, LCF_GATE};
use crate::chart::{MetricSpec, PotentialSpec};
use crate::curvature::CurvaturePack;
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Expression};
use crate::quasi_einstein::{qe_gate_bound, residual_from, PotentialData, QE_GATE};
use crate::report::{Assert, CheckReport, ReportBuilder, Tolerances};
use crate::sampling::par_map;
use crate::scalar::Func;
use crate::tensor::{Down, Tensor, TensorValue};

/// `e^{−2f/(n−2)} g` as a new chart on the same coordinates.
pub fn conformal_metric(chart: &MetricSpec, f: &Expression) -> Result<MetricSpec> {
    let n = chart.dim();
    if n < 3 {
        return Err(Error::DimensionTooSmall(n, 3));
    }
    let f = f.with_coordinates(chart.coordinates().clone())?;
    let exponent = Expr::binary(BinOp::Mul, Expr::Num(-2.0 / (n as f64 - 2.0)), f.root().clone());
    let factor = Expression::from_expr(Expr::call(Func::Exp, exponent), chart.coordinates().clone())?;
    Ok(chart.map_components(|e| factor.times(e)))
}

/// Original and conformal curvature at one point.
#[derive(Debug, Clone)]
pub struct ConformalPoint {
    pub pack: CurvaturePack,
    pub pd: PotentialData,
    pub conformal: CurvaturePack,
    pot: PotentialSpec,
}

impl ConformalPoint {
    pub fn compute(chart: &MetricSpec, conformal: &MetricSpec, pot: &PotentialSpec, point: &[f64]) -> Result<Self> {
        let pack = CurvaturePack::compute(chart, point)?;
        let pd = PotentialData::compute(&pack, pot)?;
        let conformal = CurvaturePack::compute(conformal, point)?;
        Ok(ConformalPoint { pack, pd, conformal, pot: pot.clone() })
    }

    fn nf(&self) -> f64 {
        self.pack.dim() as f64
    }

    /// `Ric + ∇²f + df⊗df/(n−2) + (Δf − |∇f|²) g/(n−2)`.
    pub fn ricci_from_formula(&self) -> TensorValue {
        let k = 1.0 / (self.nf() - 2.0);
        let (pd, g) = (&self.pd, &self.pack.metric.g);
        let c = (pd.laplacian - pd.grad_norm_sq) * k;
        Tensor::from_fn(self.pack.dim(), &[Down, Down], |i| {
            let (a, b) = (i[0], i[1]);
            self.pack.ricci.at(i) + pd.hessian.at(i) + k * pd.df.at(&[a]) * pd.df.at(&[b]) + c * g.at(i)
        })
    }

    /// `α = μ + 1/(n−2)` and `β = (Δf − |∇f|² + (n−2)λ)/(n−2)` in `Ric̃ = α df⊗df + β g`.
    pub fn two_eigenvalue_coefficients(&self) -> (f64, f64) {
        let nf = self.nf();
        let alpha = self.pot.mu + 1.0 / (nf - 2.0);
        let beta = (self.pd.laplacian - self.pd.grad_norm_sq + (nf - 2.0) * self.pot.lambda) / (nf - 2.0);
        (alpha, beta)
    }

    pub fn two_eigenvalue_ricci(&self) -> TensorValue {
        let (alpha, beta) = self.two_eigenvalue_coefficients();
        let (df, g) = (&self.pd.df, &self.pack.metric.g);
        Tensor::from_fn(self.pack.dim(), &[Down, Down], |i| alpha * df.at(&[i[0]]) * df.at(&[i[1]]) + beta * g.at(i))
    }

    /// Eigenvalues of `g̃^{-1} Ric̃`, ascending.
    pub fn ricci_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.pack.dim();
        let gt = DMatrix::from_fn(n, n, |a, b| self.conformal.metric.g.at(&[a, b]));
        let chol = gt.cholesky().ok_or_else(|| Error::NotPositiveDefinite {
            point: self.pack.point.clone(),
            reason: "conformal metric".into(),
        })?;
        let l_inv = chol.l().try_inverse().expect("triangular with positive diagonal");
        let ric = DMatrix::from_fn(n, n, |a, b| self.conformal.ricci.at(&[a, b]));
        let m = &l_inv * ric * l_inv.transpose();
        let sym = (&m + m.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// `e^{2f/(n−2)}(α|∇f|² + β)` once and `e^{2f/(n−2)} β` with multiplicity `n − 1`, ascending.
    pub fn expected_eigenvalues(&self) -> Vec<f64> {
        let n = self.pack.dim();
        let (alpha, beta) = self.two_eigenvalue_coefficients();
        let w = (2.0 * self.pd.value / (self.nf() - 2.0)).exp();
        let mut ev = vec![w * beta; n - 1];
        ev.push(w * (alpha * self.pd.grad_norm_sq + beta));
        ev.sort_by(f64::total_cmp);
        ev
    }
}

fn points_for(chart: &MetricSpec, pot: &PotentialSpec, points: &[Vec<f64>]) -> Result<(PotentialSpec, Vec<ConformalPoint>)> {
    let pot = pot.bound_to(chart)?;
    let conformal = conformal_metric(chart, &pot.f)?;
    let cps = par_map(points, |p| ConformalPoint::compute(chart, &conformal, &pot, p))?;
    Ok((pot, cps))
}

fn qe_gate(b: &mut ReportBuilder, cp: &ConformalPoint, pot: &PotentialSpec, tol: &Tolerances, required: bool) {
    let (r, s) = residual_from(&cp.pack, &cp.pd, pot);
    b.gate(QE_GATE, r.max_abs(), qe_gate_bound(tol, s), required);
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn ricci_formula_defect(b: &mut ReportBuilder, i: usize, cp: &ConformalPoint) -> Result<()> {
    let f = cp.ricci_from_formula();
    let d = cp.conformal.ricci.max_abs_diff(&f)?;
    b.defect(i, "conformal_ricci", d, f.max_abs().max(cp.conformal.ricci.max_abs()));
    Ok(())
}

fn two_eigenvalue_defects(b: &mut ReportBuilder, i: usize, cp: &ConformalPoint) -> Result<()> {
    let model = cp.two_eigenvalue_ricci();
    b.defect(i, "two_eigenvalue_ricci", cp.conformal.ricci.max_abs_diff(&model)?, model.max_abs());
    let got = cp.ricci_eigenvalues()?;
    let want = cp.expected_eigenvalues();
    let d = got.iter().zip(&want).fold(0f64, |m, (x, y)| m.max((x - y).abs()));
    b.defect(i, "eigenvalue_structure", d, max_abs(&want));
    Ok(())
}

/// The conformal Ricci transformation law, which holds for any `f`.
pub fn check_conformal_ricci_formula(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    points: &[Vec<f64>],
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    let (_, cps) = points_for(chart, pot, points)?;
    let mut b = ReportBuilder::new("conformal-ricci", source, seed, tol);
    b.declare("conformal_ricci", tol.jet_identity(), Assert::Always);
    for cp in &cps {
        let i = b.point(&cp.pack.point, None);
        ricci_formula_defect(&mut b, i, cp)?;
    }
    Ok(b.finish())
}

/// `Ric̃ = α df⊗df + β g` and the matching spectrum of `g̃^{-1}Ric̃`.
pub fn check_two_eigenvalue_structure(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    points: &[Vec<f64>],
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    let (pot, cps) = points_for(chart, pot, points)?;
    let mut b = ReportBuilder::new("two-eigenvalue", source, seed, tol);
    b.declare("two_eigenvalue_ricci", tol.jet_identity(), Assert::Always);
    b.declare("eigenvalue_structure", tol.jet_identity(), Assert::Always);
    for cp in &cps {
        qe_gate(&mut b, cp, &pot, &tol, true);
        let i = b.point(&cp.pack.point, Some(cp.pd.value));
        two_eigenvalue_defects(&mut b, i, cp)?;
    }
    Ok(b.finish())
}

fn special_mu_section(b: &mut ReportBuilder, cps: &[ConformalPoint], tol: &Tolerances) -> Result<()> {
    b.declare("conformal_einstein", tol.jet_identity(), Assert::Always);
    b.declare("conformal_constant_curvature", tol.jet_identity(), Assert::Gated(vec![LCF_GATE.into()]));
    for cp in cps {
        let i = b.point(&cp.pack.point, Some(cp.pd.value));
        let c = &cp.conformal;
        b.defect(i, "conformal_einstein", c.einstein_defect(), c.ricci.max_abs());
        b.defect(i, "conformal_constant_curvature", c.constant_curvature_defect(), c.riemann.max_abs());
        let (l, s) = lcf_gate_value(&cp.pack)?;
        b.gate(LCF_GATE, l, tol.lcf_gate() * s.max(1.0), false);
    }
    let scalars: Vec<f64> = cps.iter().map(|cp| cp.conformal.scalar).collect();
    b.spread("conformal_scalar", &scalars, tol.schur(), true);
    Ok(())
}

/// At `μ = 1/(2−n)` the conformal metric is Einstein, and of constant curvature when `g` is LCF.
pub fn check_special_mu(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    points: &[Vec<f64>],
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    let n = chart.dim();
    if !pot.is_special_mu(n) {
        return Err(Error::NotSpecialMu { mu: pot.mu, expected: crate::chart::special_mu(n) });
    }
    let (pot, cps) = points_for(chart, pot, points)?;
    let mut b = ReportBuilder::new("special-mu", source, seed, tol);
    for cp in &cps {
        qe_gate(&mut b, cp, &pot, &tol, true);
    }
    special_mu_section(&mut b, &cps, &tol)?;
    Ok(b.finish())
}

/// Everything the `conformal` command reports: the transformation law, the
/// two-eigenvalue structure under the QE gate, and the special-μ conclusions
/// when `μ = 1/(2−n)`.
pub fn check_conformal(
    chart: &MetricSpec,
    pot: &PotentialSpec,
    points: &[Vec<f64>],
    source: &str,
    seed: u64,
    tol: Tolerances,
) -> Result<CheckReport> {
    let n = chart.dim();
    let (pot, cps) = points_for(chart, pot, points)?;
    let mut b = ReportBuilder::new("conformal", source, seed, tol);
    b.declare("conformal_ricci", tol.jet_identity(), Assert::Always);
    let gated = Assert::Gated(vec![QE_GATE.into()]);
    b.declare("two_eigenvalue_ricci", tol.jet_identity(), gated.clone());
    b.declare("eigenvalue_structure", tol.jet_identity(), gated);
    for cp in &cps {
        qe_gate(&mut b, cp, &pot, &tol, false);
        let i = b.point(&cp.pack.point, Some(cp.pd.value));
        ricci_formula_defect(&mut b, i, cp)?;
        two_eigenvalue_defects(&mut b, i, cp)?;
    }
    if b.gate_passed(QE_GATE) == Some(false) {
        b.note("not quasi-Einstein at the sampled points: only the transformation law is asserted");
    } else if pot.is_special_mu(n) {
        special_mu_section(&mut b, &cps, &tol)?;
    }
    Ok(b.finish())
}
