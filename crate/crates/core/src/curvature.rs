//! Metric → Christoffel → Riemann → Ricci → scalar → Weyl → Cotton at a point.
//!
//! Riemann follows `Riem(X,Y)Z = ∇_Y∇_X Z − ∇_X∇_Y Z + ∇_[X,Y] Z`, so in
//! components `R^d_abc = ∂_bΓ^d_ac − ∂_aΓ^d_bc + Γ^e_ac Γ^d_be − Γ^e_bc Γ^d_ae`
//! and `R_abcd = g_de R^e_abc`. With this sign the round sphere has
//! `R_abab > 0`, `Ric_ac = g^bd R_abcd` and `R = g^ac R_ac`.

use crate::chart::MetricSpec;
use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::report::{Assert, CheckReport, ReportBuilder, Tolerances};
use crate::sampling::par_map;
use crate::tensor::{covariant_derivative, Down, JetTensor, MetricAtPoint, Tensor, TensorValue, Up};

/// Everything curvature-related at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub point: Vec<f64>,
    pub metric: MetricAtPoint,
    /// `Γ^a_bc` stored `[a, b, c]`.
    pub christoffel: TensorValue,
    pub riemann: TensorValue,
    pub ricci: TensorValue,
    pub scalar: f64,
    /// Present for `n >= 4`.
    pub weyl: Option<TensorValue>,
    /// Present for `n >= 3`.
    pub cotton: Option<TensorValue>,
    /// `∇_c R_ab` stored `[a, b, c]`.
    pub grad_ricci: TensorValue,
    /// `∇_c R` stored `[c]`.
    pub grad_scalar: TensorValue,
    g_jets: JetTensor,
    weyl_jets: Option<JetTensor>,
}

fn matmul(a: &[Jet3], b: &[Jet3], n: usize) -> Vec<Jet3> {
    let mut out = vec![a[0].zero_like(); n * n];
    for i in 0..n {
        for j in 0..n {
            let acc = &mut out[i * n + j];
            for k in 0..n {
                acc.add_product(1.0, &a[i * n + k], &b[k * n + j]);
            }
        }
    }
    out
}

/// Jets of `g^ab` from jets of `g_ab` and the pointwise inverse.
///
/// With `g = g0 + E`, `E(p) = 0` and `X = g0⁻¹E`, the series
/// `(I + X)⁻¹ = I − X + X² − X³` is exact to order 3.
pub fn inverse_jets(g: &JetTensor, g0_inv: &TensorValue) -> JetTensor {
    let n = g.dim();
    let zero = g.data()[0].zero_like();
    let mut x = vec![zero.clone(); n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut e = g.get(&[k, j]).clone();
                e = e.add_constant(-e.value());
                x[i * n + j].add_scaled(g0_inv.at(&[i, k]), &e);
            }
        }
    }
    let x2 = matmul(&x, &x, n);
    let x3 = matmul(&x2, &x, n);
    let mut s = vec![zero.clone(); n * n];
    for k in 0..n * n {
        if k / n == k % n {
            s[k] = s[k].add_constant(1.0);
        }
        s[k].add_scaled(-1.0, &x[k]);
        s[k].add_scaled(1.0, &x2[k]);
        s[k].add_scaled(-1.0, &x3[k]);
    }
    Tensor::from_fn(n, &[Up, Up], |idx| {
        let mut acc = zero.clone();
        for k in 0..n {
            acc.add_scaled(g0_inv.at(&[k, idx[1]]), &s[idx[0] * n + k]);
        }
        acc
    })
}

/// `Γ^a_bc = ½ g^ad (∂_b g_dc + ∂_c g_bd − ∂_d g_bc)` as order-2 jets.
pub fn christoffel_jets(g: &JetTensor, g_inv: &JetTensor) -> Result<JetTensor> {
    let n = g.dim();
    let dg: Vec<Vec<Jet3>> = (0..n)
        .map(|c| g.data().iter().map(|j| j.derivative(c)).collect::<std::result::Result<_, _>>())
        .collect::<std::result::Result<_, _>>()?;
    let dgat = |c: usize, a: usize, b: usize| &dg[c][a * n + b];
    let lowered = Tensor::from_fn(n, &[Down, Down, Down], |i| {
        let (d, b, c) = (i[0], i[1], i[2]);
        let mut l = dgat(b, d, c).zero_like();
        l.add_scaled(0.5, dgat(b, d, c));
        l.add_scaled(0.5, dgat(c, b, d));
        l.add_scaled(-0.5, dgat(d, b, c));
        l
    });
    Ok(Tensor::from_fn(n, &[Up, Down, Down], |i| {
        let mut acc = lowered.data()[0].zero_like();
        for d in 0..n {
            acc.add_product(1.0, g_inv.get(&[i[0], d]), lowered.get(&[d, i[1], i[2]]));
        }
        acc
    }))
}

/// Lowered Riemann tensor as order-1 jets from order-2 Christoffel jets.
pub fn riemann_jets(gamma: &JetTensor, g: &JetTensor) -> Result<JetTensor> {
    let n = gamma.dim();
    let dgamma: Vec<Vec<Jet3>> = (0..n)
        .map(|c| gamma.data().iter().map(|j| j.derivative(c)).collect::<std::result::Result<_, _>>())
        .collect::<std::result::Result<_, _>>()?;
    let dga = |b: usize, d: usize, a: usize, c: usize| &dgamma[b][(d * n + a) * n + c];
    let gamma1 = gamma.map(|j| j.truncated(1));
    let g1 = g.map(|j| j.truncated(1));
    let up = Tensor::from_fn(n, &[Up, Down, Down, Down], |i| {
        let (d, a, b, c) = (i[0], i[1], i[2], i[3]);
        let mut r = dga(b, d, a, c).clone();
        r.add_scaled(-1.0, dga(a, d, b, c));
        for e in 0..n {
            r.add_product(1.0, gamma1.get(&[e, a, c]), gamma1.get(&[d, b, e]));
            r.add_product(-1.0, gamma1.get(&[e, b, c]), gamma1.get(&[d, a, e]));
        }
        r
    });
    Ok(Tensor::from_fn(n, &[Down, Down, Down, Down], |i| {
        let mut acc = up.data()[0].zero_like();
        for e in 0..n {
            acc.add_product(1.0, g1.get(&[i[3], e]), up.get(&[e, i[0], i[1], i[2]]));
        }
        acc
    }))
}

fn ricci_jets(riemann: &JetTensor, g_inv: &JetTensor) -> JetTensor {
    let n = riemann.dim();
    let gi = g_inv.map(|j| j.truncated(1));
    Tensor::from_fn(n, &[Down, Down], |i| {
        let mut acc = riemann.data()[0].zero_like();
        for b in 0..n {
            for d in 0..n {
                acc.add_product(1.0, gi.get(&[b, d]), riemann.get(&[i[0], b, i[1], d]));
            }
        }
        acc
    })
}

fn trace_jet(t: &JetTensor, g_inv: &JetTensor) -> Jet3 {
    let n = t.dim();
    let mut acc = t.data()[0].zero_like();
    for a in 0..n {
        for c in 0..n {
            acc.add_product(1.0, &g_inv.get(&[a, c]).truncated(1), t.get(&[a, c]));
        }
    }
    acc
}

/// `W_abcd = R_abcd + R/((n−1)(n−2))(g_ac g_bd − g_ad g_bc)
///   − 1/(n−2)(R_ac g_bd − R_ad g_bc + R_bd g_ac − R_bc g_ad)`.
fn weyl_jets(riem: &JetTensor, ric: &JetTensor, scalar: &Jet3, g: &JetTensor) -> JetTensor {
    let n = riem.dim();
    let nf = n as f64;
    let c1 = 1.0 / ((nf - 1.0) * (nf - 2.0));
    let c2 = 1.0 / (nf - 2.0);
    let g1 = g.map(|j| j.truncated(1));
    let gg = |x: usize, y: usize| g1.get(&[x, y]);
    let rc = |x: usize, y: usize| ric.get(&[x, y]);
    Tensor::from_fn(n, &[Down, Down, Down, Down], |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let mut w = riem.get(i).clone();
        let mut kn = scalar.zero_like();
        kn.add_product(1.0, gg(a, c), gg(b, d));
        kn.add_product(-1.0, gg(a, d), gg(b, c));
        w.add_product(c1, scalar, &kn);
        w.add_product(-c2, rc(a, c), gg(b, d));
        w.add_product(c2, rc(a, d), gg(b, c));
        w.add_product(-c2, rc(b, d), gg(a, c));
        w.add_product(c2, rc(b, c), gg(a, d));
        w
    })
}

impl CurvaturePack {
    pub fn compute(chart: &MetricSpec, point: &[f64]) -> Result<Self> {
        let metric = chart.metric_at(point)?;
        let g_jets = chart.metric_jets(point)?;
        let n = chart.dim();
        let g_inv = inverse_jets(&g_jets, &metric.g_inv);
        let gamma = christoffel_jets(&g_jets, &g_inv)?;
        let christoffel = gamma.map(Jet3::value);
        let riem = riemann_jets(&gamma, &g_jets)?;
        let ric = ricci_jets(&riem, &g_inv);
        let scalar = trace_jet(&ric, &g_inv);
        let weyl_jets = (n >= 4).then(|| weyl_jets(&riem, &ric, &scalar, &g_jets));
        let grad_ricci = covariant_derivative(&ric, &christoffel)?;
        let grad_scalar = covariant_derivative(&Tensor::from_vec(n, vec![], vec![scalar.clone()])?, &christoffel)?;
        let mut pack = CurvaturePack {
            point: point.to_vec(),
            metric,
            christoffel,
            riemann: riem.map(Jet3::value),
            ricci: ric.map(Jet3::value),
            scalar: scalar.value(),
            weyl: weyl_jets.as_ref().map(|w| w.map(Jet3::value)),
            cotton: None,
            grad_ricci,
            grad_scalar,
            g_jets,
            weyl_jets,
        };
        if n >= 3 {
            pack.cotton = Some(pack.cotton_from_gradients());
        }
        Ok(pack)
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `C_abc = ∇_cR_ab − ∇_bR_ac − (∇_cR g_ab − ∇_bR g_ac)/(2(n−1))`.
    fn cotton_from_gradients(&self) -> TensorValue {
        let n = self.dim();
        let k = 1.0 / (2.0 * (n as f64 - 1.0));
        let dric = &self.grad_ricci;
        let dr = &self.grad_scalar;
        let g = &self.metric.g;
        Tensor::from_fn(n, &[Down, Down, Down], |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            dric.at(&[a, b, c]) - dric.at(&[a, c, b]) - k * (dr.at(&[c]) * g.at(&[a, b]) - dr.at(&[b]) * g.at(&[a, c]))
        })
    }

    /// Covariant derivative of a jet-valued field at this point.
    pub fn nabla(&self, field: &JetTensor) -> Result<TensorValue> {
        covariant_derivative(field, &self.christoffel)
    }

    pub fn weyl(&self) -> Result<&TensorValue> {
        self.weyl.as_ref().ok_or(Error::WeylDimension)
    }

    pub fn cotton(&self) -> Result<&TensorValue> {
        self.cotton.as_ref().ok_or(Error::DimensionTooSmall(self.dim(), 3))
    }

    /// `∇_e W_abcd` stored `[a, b, c, d, e]`.
    pub fn grad_weyl(&self) -> Result<TensorValue> {
        let w = self.weyl_jets.as_ref().ok_or(Error::WeylDimension)?;
        self.nabla(w)
    }

    /// Divergence on the first slot, `∇^d W_dabc`.
    ///
    /// This is the contraction for which `∇^d W_dabc = −((n−3)/(n−2)) C_abc`
    /// holds with the Cotton tensor above; contracting the last slot instead
    /// gives `−((n−3)/(n−2)) C_cba`.
    pub fn weyl_divergence(&self) -> Result<TensorValue> {
        let dw = self.grad_weyl()?;
        let n = self.dim();
        let gi = &self.metric.g_inv;
        Ok(Tensor::from_fn(n, &[Down, Down, Down], |i| {
            let mut s = 0.0;
            for d in 0..n {
                for e in 0..n {
                    s += gi.at(&[d, e]) * dw.at(&[d, i[0], i[1], i[2], e]);
                }
            }
            s
        }))
    }

    /// `∇_c g_ab`; zero for the Levi-Civita connection.
    pub fn metric_compatibility(&self) -> Result<TensorValue> {
        self.nabla(&self.g_jets)
    }

    /// Sectional curvature of the plane spanned by `u`, `v`.
    pub fn sectional(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let num = contract4(&self.riemann, u, v, u, v);
        let m = &self.metric;
        let den = m.inner(u, u) * m.inner(v, v) - m.inner(u, v).powi(2);
        if den <= 1e-14 * m.inner(u, u) * m.inner(v, v) {
            return Err(Error::DegeneratePlane);
        }
        Ok(num / den)
    }

    /// `|Ric − (R/n) g|∞`.
    pub fn einstein_defect(&self) -> f64 {
        let n = self.dim();
        let k = self.scalar / n as f64;
        self.ricci.sub(&self.metric.g.scaled(k)).expect("same shape").max_abs()
    }

    /// `|R_abcd − R/(n(n−1)) (g_ac g_bd − g_ad g_bc)|∞`.
    pub fn constant_curvature_defect(&self) -> f64 {
        let n = self.dim();
        let k = self.scalar / (n as f64 * (n as f64 - 1.0));
        let g = &self.metric.g;
        let model = Tensor::from_fn(n, &[Down, Down, Down, Down], |i| {
            k * (g.at(&[i[0], i[2]]) * g.at(&[i[1], i[3]]) - g.at(&[i[0], i[3]]) * g.at(&[i[1], i[2]]))
        });
        self.riemann.max_abs_diff(&model).expect("same shape")
    }

    /// Metric norm of the conformal obstruction: Weyl for `n >= 4`, Cotton for `n = 3`.
    pub fn lcf_norm(&self) -> Result<f64> {
        match self.dim() {
            2 => Err(Error::DimensionTooSmall(2, 3)),
            3 => Ok(self.cotton()?.norm(&self.metric)),
            _ => Ok(self.weyl()?.norm(&self.metric)),
        }
    }
}

/// `T(u, v, w, z)` for a rank-4 covariant tensor.
pub fn contract4(t: &TensorValue, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
    let n = t.dim();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            let ab = u[a] * v[b];
            if ab == 0.0 {
                continue;
            }
            for c in 0..n {
                for d in 0..n {
                    s += ab * w[c] * z[d] * t.at(&[a, b, c, d]);
                }
            }
        }
    }
    s
}

pub fn christoffel(chart: &MetricSpec, point: &[f64]) -> Result<TensorValue> {
    let metric = chart.metric_at(point)?;
    let g = chart.metric_jets(point)?;
    let gi = inverse_jets(&g, &metric.g_inv);
    Ok(christoffel_jets(&g, &gi)?.map(Jet3::value))
}

pub fn riemann(chart: &MetricSpec, point: &[f64]) -> Result<TensorValue> {
    Ok(CurvaturePack::compute(chart, point)?.riemann)
}

pub fn ricci_scalar(chart: &MetricSpec, point: &[f64]) -> Result<(TensorValue, f64)> {
    let p = CurvaturePack::compute(chart, point)?;
    Ok((p.ricci, p.scalar))
}

pub fn weyl(chart: &MetricSpec, point: &[f64]) -> Result<TensorValue> {
    if chart.dim() < 4 {
        return Err(Error::WeylDimension);
    }
    Ok(CurvaturePack::compute(chart, point)?.weyl.expect("n >= 4"))
}

pub fn cotton(chart: &MetricSpec, point: &[f64]) -> Result<TensorValue> {
    if chart.dim() < 3 {
        return Err(Error::DimensionTooSmall(chart.dim(), 3));
    }
    Ok(CurvaturePack::compute(chart, point)?.cotton.expect("n >= 3"))
}

/// A named defect with the magnitude it is measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    pub name: &'static str,
    pub value: f64,
    pub scale: f64,
}

fn defect(name: &'static str, value: f64, scale: f64) -> Defect {
    Defect { name, value, scale }
}

/// `|∇^d W_dabc + ((n−3)/(n−2)) C_abc|∞`.
pub fn weyl_divergence_defect(pack: &CurvaturePack) -> Result<Defect> {
    let n = pack.dim() as f64;
    let div = pack.weyl_divergence()?;
    let c = pack.cotton()?;
    let rhs = c.scaled(-(n - 3.0) / (n - 2.0));
    Ok(defect("weyl_divergence", div.max_abs_diff(&rhs)?, div.max_abs().max(rhs.max_abs())))
}

/// Identities every metric satisfies; any violation is a pipeline bug.
pub fn universal_defects(pack: &CurvaturePack) -> Result<Vec<Defect>> {
    let n = pack.dim();
    let r = &pack.riemann;
    let rs = r.max_abs();
    let mut out = Vec::new();

    let gam = &pack.christoffel;
    let mut gsym: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                gsym = gsym.max((gam.at(&[a, b, c]) - gam.at(&[a, c, b])).abs());
            }
        }
    }
    out.push(defect("christoffel_symmetry", gsym, gam.max_abs()));

    let (mut anti_ab, mut anti_cd, mut pair, mut bianchi) = (0f64, 0f64, 0f64, 0f64);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = r.at(&[a, b, c, d]);
                    anti_ab = anti_ab.max((v + r.at(&[b, a, c, d])).abs());
                    anti_cd = anti_cd.max((v + r.at(&[a, b, d, c])).abs());
                    pair = pair.max((v - r.at(&[c, d, a, b])).abs());
                    bianchi = bianchi.max((v + r.at(&[b, c, a, d]) + r.at(&[c, a, b, d])).abs());
                }
            }
        }
    }
    out.push(defect("riemann_antisymmetry_ab", anti_ab, rs));
    out.push(defect("riemann_antisymmetry_cd", anti_cd, rs));
    out.push(defect("riemann_pair_symmetry", pair, rs));
    out.push(defect("first_bianchi", bianchi, rs));

    let ric = &pack.ricci;
    let mut rsym: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            rsym = rsym.max((ric.at(&[a, b]) - ric.at(&[b, a])).abs());
        }
    }
    out.push(defect("ricci_symmetry", rsym, ric.max_abs()));

    // contracted second Bianchi: ∇_b R = 2 g^ac ∇_c R_ab
    let gi = &pack.metric.g_inv;
    let mut schur: f64 = 0.0;
    let mut schur_scale = pack.grad_scalar.max_abs();
    for b in 0..n {
        let mut div = 0.0;
        for a in 0..n {
            for c in 0..n {
                div += gi.at(&[a, c]) * pack.grad_ricci.at(&[a, b, c]);
            }
        }
        schur_scale = schur_scale.max((2.0 * div).abs());
        schur = schur.max((pack.grad_scalar.at(&[b]) - 2.0 * div).abs());
    }
    out.push(defect("schur", schur, schur_scale));

    out.push(defect("metric_compatibility", pack.metric_compatibility()?.max_abs(), pack.metric.g.max_abs()));

    if let Some(w) = &pack.weyl {
        let mut tr: f64 = 0.0;
        for (s1, s2) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            tr = tr.max(w.raise_lower(s1, &pack.metric)?.contract(s1, s2)?.max_abs());
        }
        out.push(defect("weyl_trace", tr, rs));
        out.push(weyl_divergence_defect(pack)?);
    }
    if let Some(c) = &pack.cotton {
        let tr = c.raise_lower(0, &pack.metric)?.contract(0, 1)?.max_abs();
        let mut anti: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    anti = anti.max((c.at(&[a, b, cc]) + c.at(&[a, cc, b])).abs());
                }
            }
        }
        let cs = c.max_abs().max(pack.grad_ricci.max_abs());
        out.push(defect("cotton_trace", tr, cs));
        out.push(defect("cotton_antisymmetry", anti, cs));
    }
    Ok(out)
}

fn identity_tolerance(name: &str, tol: &Tolerances) -> f64 {
    match name {
        "schur" => tol.schur(),
        "weyl_divergence" => tol.weyl_divergence(),
        "metric_compatibility" => tol.symmetry(),
        _ => tol.symmetry(),
    }
}

/// Curvature norms (informational) plus the universal identities (asserted).
pub fn check_curvature(chart: &MetricSpec, points: &[Vec<f64>], source: &str, seed: u64, tol: Tolerances) -> Result<CheckReport> {
    let packs = par_map(points, |p| CurvaturePack::compute(chart, p))?;
    let mut b = ReportBuilder::new("curvature", source, seed, tol);
    for pack in &packs {
        let i = b.point(&pack.point, None);
        b.defect(i, "christoffel_max", pack.christoffel.max_abs(), 1.0);
        b.defect(i, "riemann_norm", pack.riemann.norm(&pack.metric), 1.0);
        b.defect(i, "ricci_norm", pack.ricci.norm(&pack.metric), 1.0);
        b.defect(i, "scalar_abs", pack.scalar.abs(), 1.0);
        if let Some(w) = &pack.weyl {
            b.defect(i, "weyl_norm", w.norm(&pack.metric), 1.0);
        }
        if let Some(c) = &pack.cotton {
            b.defect(i, "cotton_norm", c.norm(&pack.metric), 1.0);
        }
        for d in universal_defects(pack)? {
            b.declare(d.name, identity_tolerance(d.name, &tol), Assert::Always);
            b.defect(i, d.name, d.value, d.scale);
        }
    }
    b.spread("scalar", &packs.iter().map(|p| p.scalar).collect::<Vec<_>>(), f64::INFINITY, false);
    Ok(b.finish())
}

/// Local conformal flatness: Cotton (`n = 3`) or Weyl and Cotton (`n >= 4`).
pub fn check_lcf(chart: &MetricSpec, points: &[Vec<f64>], source: &str, seed: u64, tol: Tolerances) -> Result<CheckReport> {
    let n = chart.dim();
    if n < 3 {
        return Err(Error::DimensionTooSmall(n, 3));
    }
    let packs = par_map(points, |p| CurvaturePack::compute(chart, p))?;
    let mut b = ReportBuilder::new("lcf", source, seed, tol);
    if n >= 4 {
        b.declare("weyl_norm", tol.lcf_gate(), Assert::Always);
    }
    b.declare("cotton_norm", tol.lcf_gate(), Assert::Always);
    for pack in &packs {
        let i = b.point(&pack.point, None);
        let scale = pack.riemann.norm(&pack.metric);
        if let Some(w) = &pack.weyl {
            b.defect(i, "weyl_norm", w.norm(&pack.metric), scale);
        }
        let c = pack.cotton()?;
        b.defect(i, "cotton_norm", c.norm(&pack.metric), pack.grad_ricci.norm(&pack.metric));
    }
    Ok(b.finish())
}

/// `∇^d W_dabc = −((n−3)/(n−2)) C_abc` at each point.
pub fn check_weyl_divergence(chart: &MetricSpec, points: &[Vec<f64>], source: &str, seed: u64, tol: Tolerances) -> Result<CheckReport> {
    if chart.dim() < 4 {
        return Err(Error::WeylDimension);
    }
    let defects = par_map(points, |p| weyl_divergence_defect(&CurvaturePack::compute(chart, p)?))?;
    let mut b = ReportBuilder::new("weyl-divergence", source, seed, tol);
    b.declare("weyl_divergence", tol.weyl_divergence(), Assert::Always);
    for (p, d) in points.iter().zip(defects) {
        let i = b.point(p, None);
        b.defect(i, d.name, d.value, d.scale);
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SplitMix64;

    fn sphere2() -> MetricSpec {
        MetricSpec::parse(&["th", "ph"], &[(0, 0, "1"), (1, 1, "sin(th)^2")], vec![(0.2, 2.9), (-3.0, 3.0)]).unwrap()
    }

    fn hyperbolic3() -> MetricSpec {
        MetricSpec::parse(
            &["t", "x", "y"],
            &[(0, 0, "1"), (1, 1, "exp(2*t)"), (2, 2, "exp(2*t)")],
            vec![(-1.0, 1.0); 3],
        )
        .unwrap()
    }

    fn sphere3() -> MetricSpec {
        MetricSpec::parse(
            &["a", "b", "c"],
            &[(0, 0, "1"), (1, 1, "sin(a)^2"), (2, 2, "sin(a)^2*sin(b)^2")],
            vec![(0.3, 2.8), (0.3, 2.8), (-3.0, 3.0)],
        )
        .unwrap()
    }

    /// Polynomial-and-trig perturbation of the flat metric, diagonally dominant on [-1, 1]^n.
    pub(crate) fn random_metric(n: usize, seed: u64) -> MetricSpec {
        let mut rng = SplitMix64::new(seed);
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut entries = Vec::new();
        let mut c = || (rng.uniform(-1.0, 1.0) * 1000.0).round() / 1000.0;
        for a in 0..n {
            for b in a..n {
                let (i, j) = (a, (a + b + 1) % n);
                let s = if a == b {
                    format!("1 + 0.1*({})*x{i}^2 + 0.1*sin({}*x{j} + {}*x{i})", c(), c(), c())
                } else {
                    format!("0.05*({})*x{a}*x{b} + 0.05*cos({}*x{j}) + 0.02*({})*x{i}^3", c(), c(), c())
                };
                entries.push((a, b, s));
            }
        }
        let e: Vec<(usize, usize, &str)> = entries.iter().map(|(a, b, s)| (*a, *b, s.as_str())).collect();
        MetricSpec::parse(&refs, &e, vec![(-1.0, 1.0); n]).unwrap()
    }

    #[test]
    fn christoffel_examples() {
        let flat = MetricSpec::parse(&["x", "y"], &[(0, 0, "1"), (1, 1, "1")], vec![(0.0, 1.0); 2]).unwrap();
        assert_eq!(christoffel(&flat, &[0.3, 0.4]).unwrap().max_abs(), 0.0);
        let polar = MetricSpec::parse(&["r", "th"], &[(0, 0, "1"), (1, 1, "r^2")], vec![(0.5, 3.0), (-1.0, 1.0)]).unwrap();
        let g = christoffel(&polar, &[2.0, 0.5]).unwrap();
        assert!((g.at(&[0, 1, 1]) + 2.0).abs() < 1e-14);
        assert!((g.at(&[1, 0, 1]) - 0.5).abs() < 1e-14);
        let s = christoffel(&sphere2(), &[1.0, 0.3]).unwrap();
        assert!((s.at(&[0, 1, 1]) + 1f64.sin() * 1f64.cos()).abs() < 1e-14);
        assert!((s.at(&[0, 1, 1]) + 0.454649).abs() < 1e-6);
    }

    #[test]
    fn sphere_has_positive_sectional_curvature() {
        let r = riemann(&sphere2(), &[1.0, 0.0]).unwrap();
        let expected = 1f64.sin().powi(2);
        assert!((r.at(&[0, 1, 0, 1]) - expected).abs() < 1e-12);
        assert!((r.at(&[0, 1, 0, 1]) - 0.708073).abs() < 1e-6);
        let pack = CurvaturePack::compute(&sphere2(), &[1.0, 0.0]).unwrap();
        assert!((pack.sectional(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        // Ric = g, raising one slot gives δ
        let delta = pack.ricci.raise_lower(0, &pack.metric).unwrap();
        assert!((delta.at(&[0, 0]) - 1.0).abs() < 1e-12 && (delta.at(&[1, 1]) - 1.0).abs() < 1e-12);
        assert!(delta.at(&[0, 1]).abs() < 1e-12);
    }

    #[test]
    fn space_form_curvatures() {
        let mut rng = SplitMix64::new(3);
        for chart in [hyperbolic3(), sphere3()] {
            for p in chart.sample_points(10, 11) {
                let pack = CurvaturePack::compute(&chart, &p).unwrap();
                let k = pack.scalar / 6.0;
                assert!((k.abs() - 1.0).abs() < 1e-8);
                assert!(pack.constant_curvature_defect() < 1e-8);
                assert!(pack.einstein_defect() < 1e-8);
                let u = rng.unit_vector(3);
                let v = rng.unit_vector(3);
                assert!((pack.sectional(&u, &v).unwrap() - k).abs() < 1e-8);
                assert!(pack.cotton.as_ref().unwrap().max_abs() < 1e-8);
            }
        }
        let p = CurvaturePack::compute(&hyperbolic3(), &[0.4, 0.1, -0.2]).unwrap();
        assert!((p.scalar + 6.0).abs() < 1e-8);
        let s = CurvaturePack::compute(&sphere3(), &[1.0, 1.2, 0.0]).unwrap();
        assert!((s.scalar - 6.0).abs() < 1e-8);
        assert!(s.ricci.sub(&s.metric.g.scaled(2.0)).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn weyl_rejected_in_dimension_three() {
        assert!(matches!(weyl(&hyperbolic3(), &[0.0; 3]), Err(Error::WeylDimension)));
    }

    #[test]
    fn conformally_flat_metrics_have_no_obstruction() {
        let c4 = MetricSpec::parse(
            &["a", "b", "c", "d"],
            &[
                (0, 0, "exp(2*(0.3*a + b^2))"),
                (1, 1, "exp(2*(0.3*a + b^2))"),
                (2, 2, "exp(2*(0.3*a + b^2))"),
                (3, 3, "exp(2*(0.3*a + b^2))"),
            ],
            vec![(-1.0, 1.0); 4],
        )
        .unwrap();
        for p in c4.sample_points(5, 1) {
            let pack = CurvaturePack::compute(&c4, &p).unwrap();
            assert!(pack.weyl.as_ref().unwrap().max_abs() < 1e-8);
        }
        let u = "exp(2*(x + y^2 - 0.5*z))";
        let c3 = MetricSpec::parse(&["x", "y", "z"], &[(0, 0, u), (1, 1, u), (2, 2, u)], vec![(-1.0, 1.0); 3]).unwrap();
        for p in c3.sample_points(5, 2) {
            assert!(cotton(&c3, &p).unwrap().max_abs() < 1e-7);
        }
    }

    #[test]
    fn generic_three_metric_has_cotton() {
        let m = MetricSpec::parse(
            &["t", "x", "y"],
            &[(0, 0, "1"), (0, 1, "0.1*sin(x)"), (1, 1, "exp(2*t)"), (2, 2, "exp(4*t)")],
            vec![(-0.5, 0.5); 3],
        )
        .unwrap();
        let c = cotton(&m, &[0.1, 0.7, 0.2]).unwrap();
        assert!(c.max_abs() > 1e-3);
    }

    #[test]
    fn universal_identities_on_random_metrics() {
        for n in 2..=5 {
            let chart = random_metric(n, n as u64);
            for p in chart.sample_points(3, 5) {
                let pack = CurvaturePack::compute(&chart, &p).unwrap();
                for d in universal_defects(&pack).unwrap() {
                    let bound = if matches!(d.name, "schur" | "weyl_divergence") { 1e-6 } else { 1e-9 };
                    assert!(d.value <= bound * d.scale.max(1.0), "n={n} {}: {:e}", d.name, d.value);
                }
            }
        }
    }

    #[test]
    fn weyl_divergence_on_warped_sphere() {
        let m = MetricSpec::parse(
            &["t", "a", "b", "c", "d"],
            &[
                (0, 0, "1"),
                (1, 1, "cosh(t)^2"),
                (2, 2, "cosh(t)^2*sin(a)^2"),
                (3, 3, "cosh(t)^2*sin(a)^2*sin(b)^2"),
                (4, 4, "cosh(t)^2*sin(a)^2*sin(b)^2*sin(c)^2"),
            ],
            vec![(-1.0, 1.0), (0.3, 2.8), (0.3, 2.8), (0.3, 2.8), (-3.0, 3.0)],
        )
        .unwrap();
        let pts = m.sample_points(3, 0);
        let r = check_weyl_divergence(&m, &pts, "test", 0, Tolerances::default()).unwrap();
        assert!(r.passed(), "{}", r.render_human());
        let lcf = check_lcf(&m, &pts, "test", 0, Tolerances::default()).unwrap();
        assert!(lcf.passed(), "{}", lcf.render_human());
    }

    #[test]
    fn s2xs2_weyl_norm() {
        let m = MetricSpec::parse(
            &["a", "b", "c", "d"],
            &[(0, 0, "1"), (1, 1, "sin(a)^2"), (2, 2, "1"), (3, 3, "sin(c)^2")],
            vec![(0.3, 2.8), (-3.0, 3.0), (0.3, 2.8), (-3.0, 3.0)],
        )
        .unwrap();
        let pack = CurvaturePack::compute(&m, &[1.0, 0.2, 2.0, -0.4]).unwrap();
        let w = pack.lcf_norm().unwrap();
        assert!((w - 4.0 / 3f64.sqrt()).abs() < 1e-10, "{w}");
        let r = check_lcf(&m, &[pack.point.clone()], "s2xs2", 0, Tolerances::default()).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn weyl_divergence_slot_convention() {
        let chart = random_metric(4, 4);
        let p = chart.sample_points(1, 5).remove(0);
        let pack = CurvaturePack::compute(&chart, &p).unwrap();
        let dw = pack.grad_weyl().unwrap();
        let c = pack.cotton().unwrap();
        let gi = &pack.metric.g_inv;
        let mut last: f64 = 0.0;
        let mut literal: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    let mut s = 0.0;
                    for d in 0..4 {
                        for e in 0..4 {
                            s += gi.at(&[d, e]) * dw.at(&[a, b, cc, d, e]);
                        }
                    }
                    last = last.max((s + 0.5 * c.at(&[cc, b, a])).abs());
                    literal = literal.max((s + 0.5 * c.at(&[a, b, cc])).abs());
                }
            }
        }
        assert!(last < 1e-10);
        assert!(literal > 1e-4);
    }
}
