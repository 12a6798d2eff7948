//! Truncated multivariate Taylor arithmetic of total order 3.
//!
//! A [`Jet3`] stores the coefficients `∂^α u / α!` for every multi-index
//! with `|α| ≤ 3` in a dense array laid out by total degree: the constant,
//! then the `n` first-order coefficients in coordinate order, then the
//! second- and third-order ones. Products are plain truncated convolutions.
//!
//! Each jet also records the order up to which its coefficients are valid.
//! Differentiating a jet lowers that order by one, and arithmetic takes the
//! minimum of its operands, so reading a coefficient the pipeline never
//! computed is reported rather than silently returning zero.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

use crate::scalar::{DomainKind, Func, Scalar};

/// Total order carried by every jet.
pub const ORDER: usize = 3;
/// Largest supported number of variables.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet dimension {0} outside the supported range 1..={MAX_DIM}")]
    Dimension(usize),
    #[error("seeding needs at least two coordinates, got {0}")]
    TooFewCoordinates(usize),
    #[error("jet dimension mismatch ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("coefficient of order {requested} requested from a jet valid to order {available}")]
    InsufficientOrder { requested: usize, available: usize },
    #[error("multi-index {0:?} is not a valid index for this jet")]
    BadMultiIndex(Vec<u8>),
    #[error("{0}")]
    Domain(DomainKind),
}

/// Multi-index tables for one dimension.
#[derive(Debug)]
pub struct JetLayout {
    dim: usize,
    alphas: Vec<[u8; MAX_DIM]>,
    degree: Vec<u8>,
    /// Number of coefficients with degree ≤ k.
    degree_end: [usize; ORDER + 1],
    factorial: Vec<f64>,
    index: HashMap<[u8; MAX_DIM], usize>,
    /// Pairs (i, j) contributing to target k are `pairs[pair_start[k]..pair_start[k + 1]]`.
    pair_start: Vec<usize>,
    pairs: Vec<(u16, u16)>,
    /// `shift[d][β]` is the index of `β + e_d`, or `usize::MAX` when that exceeds the order.
    shift: Vec<Vec<usize>>,
}

impl JetLayout {
    fn build(dim: usize) -> JetLayout {
        let mut alphas = Vec::new();
        let mut degree = Vec::new();
        let mut degree_end = [0; ORDER + 1];
        for d in 0..=ORDER {
            // nondecreasing index tuples of length d
            let mut tuple = vec![0usize; d];
            loop {
                let mut a = [0u8; MAX_DIM];
                for &i in &tuple {
                    a[i] += 1;
                }
                alphas.push(a);
                degree.push(d as u8);
                // advance
                let mut k = d;
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    if tuple[k] + 1 < dim {
                        tuple[k] += 1;
                        for m in k + 1..d {
                            tuple[m] = tuple[k];
                        }
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
            degree_end[d] = alphas.len();
        }
        let index: HashMap<[u8; MAX_DIM], usize> =
            alphas.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        let factorial = alphas
            .iter()
            .map(|a| a.iter().map(|&k| (1..=k as u32).product::<u32>() as f64).product())
            .collect();
        let mut pair_start = Vec::with_capacity(alphas.len() + 1);
        let mut pairs = Vec::new();
        for target in &alphas {
            pair_start.push(pairs.len());
            for (i, a) in alphas.iter().enumerate() {
                if (0..MAX_DIM).all(|m| a[m] <= target[m]) {
                    let mut b = *target;
                    for m in 0..MAX_DIM {
                        b[m] -= a[m];
                    }
                    pairs.push((i as u16, index[&b] as u16));
                }
            }
        }
        pair_start.push(pairs.len());
        let shift = (0..dim)
            .map(|d| {
                alphas
                    .iter()
                    .map(|a| {
                        let mut b = *a;
                        b[d] += 1;
                        index.get(&b).copied().unwrap_or(usize::MAX)
                    })
                    .collect()
            })
            .collect();
        JetLayout {
            dim,
            alphas,
            degree,
            degree_end,
            factorial,
            index,
            pair_start,
            pairs,
            shift,
        }
    }

    /// Shared layout for `dim` variables.
    pub fn get(dim: usize) -> Result<&'static JetLayout, JetError> {
        static LAYOUTS: OnceLock<Vec<JetLayout>> = OnceLock::new();
        if dim == 0 || dim > MAX_DIM {
            return Err(JetError::Dimension(dim));
        }
        let all = LAYOUTS.get_or_init(|| (1..=MAX_DIM).map(JetLayout::build).collect());
        Ok(&all[dim - 1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored coefficients, `C(n + 3, 3)`.
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn multi_index(&self, k: usize) -> &[u8] {
        &self.alphas[k][..self.dim]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        if alpha.len() != self.dim {
            return None;
        }
        let mut a = [0u8; MAX_DIM];
        a[..self.dim].copy_from_slice(alpha);
        self.index.get(&a).copied()
    }
}

/// Truncated Taylor expansion of a scalar to total order 3.
#[derive(Clone)]
pub struct Jet3 {
    layout: &'static JetLayout,
    order: u8,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet3")
            .field("dim", &self.layout.dim)
            .field("order", &self.order)
            .field("coeffs", &&self.coeffs[..self.layout.degree_end[self.order as usize]])
            .finish()
    }
}

impl PartialEq for Jet3 {
    fn eq(&self, other: &Self) -> bool {
        self.layout.dim == other.layout.dim && self.order == other.order && self.coeffs == other.coeffs
    }
}

/// Seed jets for every coordinate at `point`: jet `i` is `x^i` expanded there.
pub fn seed(point: &[f64]) -> Result<Vec<Jet3>, JetError> {
    let n = point.len();
    if n < 2 {
        return Err(JetError::TooFewCoordinates(n));
    }
    (0..n).map(|i| Jet3::variable(n, i, point[i])).collect()
}

impl Jet3 {
    pub fn constant(dim: usize, c: f64) -> Result<Jet3, JetError> {
        let layout = JetLayout::get(dim)?;
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = c;
        Ok(Jet3 {
            layout,
            order: ORDER as u8,
            coeffs,
        })
    }

    pub fn variable(dim: usize, index: usize, value: f64) -> Result<Jet3, JetError> {
        let mut j = Jet3::constant(dim, value)?;
        if index >= dim {
            return Err(JetError::Dimension(index));
        }
        j.coeffs[1 + index] = 1.0;
        Ok(j)
    }

    pub fn zero_like(&self) -> Jet3 {
        Jet3 {
            layout: self.layout,
            order: ORDER as u8,
            coeffs: vec![0.0; self.layout.len()],
        }
    }

    pub fn layout(&self) -> &'static JetLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    /// Highest order whose coefficients are valid.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor-normalised coefficients in layout order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient `∂^α u / α!`.
    pub fn coefficient(&self, alpha: &[u8]) -> Result<f64, JetError> {
        let k = self
            .layout
            .index_of(alpha)
            .ok_or_else(|| JetError::BadMultiIndex(alpha.to_vec()))?;
        let deg = self.layout.degree[k] as usize;
        if deg > self.order() {
            return Err(JetError::InsufficientOrder {
                requested: deg,
                available: self.order(),
            });
        }
        Ok(self.coeffs[k])
    }

    /// Raw partial derivative `∂^α u`.
    pub fn partial(&self, alpha: &[u8]) -> Result<f64, JetError> {
        let c = self.coefficient(alpha)?;
        let k = self.layout.index_of(alpha).expect("checked above");
        Ok(c * self.layout.factorial[k])
    }

    /// First partial `∂_d u`; panics if the jet has order 0.
    pub fn d(&self, d: usize) -> f64 {
        assert!(self.order >= 1, "jet carries no first derivatives");
        self.coeffs[1 + d]
    }

    /// The jet of `∂_d u`, valid to one order less.
    pub fn derivative(&self, d: usize) -> Result<Jet3, JetError> {
        if self.order == 0 {
            return Err(JetError::InsufficientOrder {
                requested: 1,
                available: 0,
            });
        }
        if d >= self.dim() {
            return Err(JetError::Dimension(d));
        }
        let order = self.order - 1;
        let end = self.layout.degree_end[order as usize];
        let mut coeffs = vec![0.0; self.layout.len()];
        let shift = &self.layout.shift[d];
        for (k, c) in coeffs.iter_mut().enumerate().take(end) {
            let src = shift[k];
            *c = (self.layout.alphas[k][d] as f64 + 1.0) * self.coeffs[src];
        }
        Ok(Jet3 {
            layout: self.layout,
            order,
            coeffs,
        })
    }

    /// Drop coefficients above `order`.
    pub fn truncated(&self, order: usize) -> Jet3 {
        let order = order.min(self.order());
        let mut j = self.clone();
        let end = self.layout.degree_end[order];
        j.coeffs[end..].iter_mut().for_each(|c| *c = 0.0);
        j.order = order as u8;
        j
    }

    fn check(&self, other: &Jet3) -> Result<(), JetError> {
        if self.layout.dim != other.layout.dim {
            Err(JetError::DimensionMismatch(self.dim(), other.dim()))
        } else {
            Ok(())
        }
    }

    fn zip(&self, other: &Jet3, f: impl Fn(f64, f64) -> f64) -> Jet3 {
        let order = self.order.min(other.order);
        let end = self.layout.degree_end[order as usize];
        let mut coeffs = vec![0.0; self.layout.len()];
        for k in 0..end {
            coeffs[k] = f(self.coeffs[k], other.coeffs[k]);
        }
        Jet3 {
            layout: self.layout,
            order,
            coeffs,
        }
    }

    pub fn try_add(&self, other: &Jet3) -> Result<Jet3, JetError> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Jet3) -> Result<Jet3, JetError> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Jet3) -> Result<Jet3, JetError> {
        self.check(other)?;
        let order = self.order.min(other.order);
        let end = self.layout.degree_end[order as usize];
        let l = self.layout;
        let mut coeffs = vec![0.0; l.len()];
        for (k, c) in coeffs.iter_mut().enumerate().take(end) {
            let mut s = 0.0;
            for &(i, j) in &l.pairs[l.pair_start[k]..l.pair_start[k + 1]] {
                s += self.coeffs[i as usize] * other.coeffs[j as usize];
            }
            *c = s;
        }
        Ok(Jet3 {
            layout: l,
            order,
            coeffs,
        })
    }

    /// Quotient solved degree by degree, so the value part is exactly `a0 / b0`.
    pub fn try_div(&self, other: &Jet3) -> Result<Jet3, JetError> {
        self.check(other)?;
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(JetError::Domain(DomainKind::DivisionByZero));
        }
        let order = self.order.min(other.order);
        let end = self.layout.degree_end[order as usize];
        let l = self.layout;
        let mut q = vec![0.0; l.len()];
        for k in 0..end {
            let mut s = self.coeffs[k];
            for &(i, j) in &l.pairs[l.pair_start[k]..l.pair_start[k + 1]] {
                // pairs (q_i, b_j) with j ≠ 0; q_i already known since deg(i) < deg(k)
                if j != 0 {
                    s -= q[i as usize] * other.coeffs[j as usize];
                }
            }
            q[k] = s / b0;
        }
        Ok(Jet3 {
            layout: l,
            order,
            coeffs: q,
        })
    }

    /// `self += c * x`, in place.
    pub fn add_scaled(&mut self, c: f64, x: &Jet3) {
        assert_eq!(self.dim(), x.dim(), "jet dimension mismatch");
        self.order = self.order.min(x.order);
        let end = self.layout.degree_end[self.order as usize];
        for k in 0..end {
            self.coeffs[k] += c * x.coeffs[k];
        }
        self.coeffs[end..].iter_mut().for_each(|v| *v = 0.0);
    }

    /// `self += c * a * b`, in place, without allocating the product.
    pub fn add_product(&mut self, c: f64, a: &Jet3, b: &Jet3) {
        assert!(self.dim() == a.dim() && a.dim() == b.dim(), "jet dimension mismatch");
        self.order = self.order.min(a.order).min(b.order);
        let l = self.layout;
        let end = l.degree_end[self.order as usize];
        for k in 0..end {
            let mut s = 0.0;
            for &(i, j) in &l.pairs[l.pair_start[k]..l.pair_start[k + 1]] {
                s += a.coeffs[i as usize] * b.coeffs[j as usize];
            }
            self.coeffs[k] += c * s;
        }
        self.coeffs[end..].iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn scale(&self, c: f64) -> Jet3 {
        let mut j = self.clone();
        j.coeffs.iter_mut().for_each(|x| *x *= c);
        j
    }

    pub fn add_constant(&self, c: f64) -> Jet3 {
        let mut j = self.clone();
        j.coeffs[0] += c;
        j
    }

    /// `f(u)` given `f` and its first three derivatives at the value of `u`.
    pub fn compose(&self, derivs: [f64; 4]) -> Jet3 {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut out = self.zero_like();
        out.order = self.order;
        out.coeffs[0] = derivs[0];
        if self.order == 0 {
            return out;
        }
        let d2 = &delta * &delta;
        let d3 = &d2 * &delta;
        let end = self.layout.degree_end[self.order as usize];
        for k in 1..end {
            out.coeffs[k] = derivs[1] * delta.coeffs[k]
                + derivs[2] / 2.0 * d2.coeffs[k]
                + derivs[3] / 6.0 * d3.coeffs[k];
        }
        out
    }

    pub fn apply_func(&self, func: Func) -> Result<Jet3, JetError> {
        let derivs = func.derivatives(self.value()).map_err(JetError::Domain)?;
        Ok(self.compose(derivs))
    }
}

impl Add for &Jet3 {
    type Output = Jet3;
    /// Panics on dimension mismatch; use [`Jet3::try_add`] for a checked sum.
    fn add(self, rhs: &Jet3) -> Jet3 {
        self.try_add(rhs).expect("jet dimension mismatch")
    }
}

impl Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        self.try_sub(rhs).expect("jet dimension mismatch")
    }
}

impl Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        self.try_mul(rhs).expect("jet dimension mismatch")
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

fn kind(e: JetError) -> DomainKind {
    match e {
        JetError::Domain(k) => k,
        _ => DomainKind::DimensionMismatch,
    }
}

impl Scalar for Jet3 {
    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn constant_like(&self, c: f64) -> Self {
        let mut j = self.zero_like();
        j.coeffs[0] = c;
        j
    }

    fn add(&self, rhs: &Self) -> Result<Self, DomainKind> {
        self.try_add(rhs).map_err(kind)
    }

    fn sub(&self, rhs: &Self) -> Result<Self, DomainKind> {
        self.try_sub(rhs).map_err(kind)
    }

    fn mul(&self, rhs: &Self) -> Result<Self, DomainKind> {
        self.try_mul(rhs).map_err(kind)
    }

    fn div(&self, rhs: &Self) -> Result<Self, DomainKind> {
        self.try_div(rhs).map_err(kind)
    }

    fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    fn apply(&self, func: Func) -> Result<Self, DomainKind> {
        self.apply_func(func).map_err(kind)
    }
}
