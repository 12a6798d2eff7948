//! Dense pointwise tensors with per-slot variance.
//!
//! Components are stored row-major over the multi-index. Covariant
//! derivatives append the derivative index as the LAST slot, so
//! `(∇Ric)[a, b, c] = ∇_c R_ab`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::Jet3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn flipped(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

pub use Variance::{Down, Up};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<T>,
}

pub type TensorValue = Tensor<f64>;
pub type JetTensor = Tensor<Jet3>;

/// Decompose a flat index into a multi-index.
pub fn unflatten(mut flat: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

impl<T: Clone> Tensor<T> {
    pub fn from_vec(dim: usize, variance: Vec<Variance>, data: Vec<T>) -> Result<Self> {
        let expected = dim.pow(variance.len() as u32);
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "{} components for rank {} in dimension {dim}, expected {expected}",
                data.len(),
                variance.len()
            )));
        }
        Ok(Tensor { dim, variance, data })
    }

    pub fn from_fn(dim: usize, variance: &[Variance], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let rank = variance.len();
        let len = dim.pow(rank as u32);
        let mut idx = vec![0; rank];
        let data = (0..len)
            .map(|flat| {
                unflatten(flat, dim, &mut idx);
                f(&idx)
            })
            .collect();
        Tensor {
            dim,
            variance: variance.to_vec(),
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: T) {
        let k = self.flat_index(idx);
        self.data[k] = value;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl TensorValue {
    pub fn zeros(dim: usize, variance: &[Variance]) -> Self {
        Tensor::from_fn(dim, variance, |_| 0.0)
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Tensor {
            dim,
            variance: vec![],
            data: vec![value],
        }
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn same_shape(&self, other: &TensorValue) -> Result<()> {
        if self.dim != other.dim || self.variance != other.variance {
            return Err(Error::Shape(format!(
                "{:?} in dimension {} vs {:?} in dimension {}",
                self.variance, self.dim, other.variance, other.dim
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &TensorValue) -> Result<TensorValue> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn add(&self, other: &TensorValue) -> Result<TensorValue> {
        self.same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    fn zip_with(&self, other: &TensorValue, f: impl Fn(f64, f64) -> f64) -> TensorValue {
        Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> TensorValue {
        self.map(|x| c * x)
    }

    pub fn max_abs_diff(&self, other: &TensorValue) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Flip the variance of `slot` by contracting with `g` or `g⁻¹`.
    pub fn raise_lower(&self, slot: usize, metric: &MetricAtPoint) -> Result<TensorValue> {
        let rank = self.rank();
        if slot >= rank {
            return Err(Error::Slot { slot, rank });
        }
        let m = match self.variance[slot] {
            Down => &metric.g_inv,
            Up => &metric.g,
        };
        let n = self.dim;
        let mut variance = self.variance.clone();
        variance[slot] = variance[slot].flipped();
        let mut src = vec![0; rank];
        Ok(Tensor::from_fn(n, &variance, |idx| {
            src.copy_from_slice(idx);
            let mut s = 0.0;
            for e in 0..n {
                src[slot] = e;
                s += m.at(&[idx[slot], e]) * self.at(&src);
            }
            s
        }))
    }

    /// Sum over a pair of slots with opposite variance.
    pub fn contract(&self, slot_a: usize, slot_b: usize) -> Result<TensorValue> {
        let rank = self.rank();
        for s in [slot_a, slot_b] {
            if s >= rank {
                return Err(Error::Slot { slot: s, rank });
            }
        }
        if slot_a == slot_b {
            return Err(Error::Shape("cannot contract a slot with itself".into()));
        }
        if self.variance[slot_a] == self.variance[slot_b] {
            return Err(Error::SameVariance(slot_a, slot_b));
        }
        let n = self.dim;
        let variance: Vec<Variance> = (0..rank)
            .filter(|&s| s != slot_a && s != slot_b)
            .map(|s| self.variance[s])
            .collect();
        let mut full = vec![0; rank];
        Ok(Tensor::from_fn(n, &variance, |idx| {
            let mut it = idx.iter();
            for (s, v) in full.iter_mut().enumerate() {
                if s != slot_a && s != slot_b {
                    *v = *it.next().unwrap();
                }
            }
            let mut sum = 0.0;
            for e in 0..n {
                full[slot_a] = e;
                full[slot_b] = e;
                sum += self.at(&full);
            }
            sum
        }))
    }

    /// Full self-contraction `T_{..} T^{..}` with the metric, square-rooted.
    pub fn norm(&self, metric: &MetricAtPoint) -> f64 {
        let mut flipped = self.clone();
        for s in 0..self.rank() {
            flipped = flipped.raise_lower(s, metric).expect("slot in range");
        }
        let dot: f64 = self.data.iter().zip(&flipped.data).map(|(a, b)| a * b).sum();
        dot.max(0.0).sqrt()
    }
}

/// Metric, inverse metric and determinant at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: TensorValue,
    pub g_inv: TensorValue,
    pub det: f64,
}

impl MetricAtPoint {
    /// Validate symmetry and positive-definiteness (Cholesky) and invert.
    pub fn new(dim: usize, components: Vec<f64>, point: &[f64]) -> Result<Self> {
        let fail = |reason: String| Error::NotPositiveDefinite {
            point: point.to_vec(),
            reason,
        };
        if components.len() != dim * dim {
            return Err(Error::Shape("metric needs n*n components".into()));
        }
        let scale = components.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for a in 0..dim {
            for b in 0..a {
                if (components[a * dim + b] - components[b * dim + a]).abs() > 1e-12 * scale {
                    return Err(fail(format!("g[{a}][{b}] != g[{b}][{a}]")));
                }
            }
        }
        if components.iter().any(|x| !x.is_finite()) {
            return Err(fail("non-finite component".into()));
        }
        let m = DMatrix::from_row_slice(dim, dim, &components);
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| fail("Cholesky factorisation failed".into()))?;
        let inv = chol.inverse();
        let det = chol.determinant();
        if det <= 0.0 {
            return Err(fail(format!("determinant {det}")));
        }
        let product = &m * &inv;
        let inv_scale = inv.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        for a in 0..dim {
            for b in 0..dim {
                let target = if a == b { 1.0 } else { 0.0 };
                if (product[(a, b)] - target).abs() > 1e-10 * scale * inv_scale {
                    return Err(fail("inverse check failed (ill-conditioned metric)".into()));
                }
            }
        }
        let g = Tensor::from_vec(dim, vec![Down, Down], components)?;
        let g_inv = Tensor::from_fn(dim, &[Up, Up], |i| 0.5 * (inv[(i[0], i[1])] + inv[(i[1], i[0])]));
        Ok(MetricAtPoint { g, g_inv, det })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `g(u, v)` for contravariant component vectors.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += self.g.at(&[a, b]) * u[a] * v[b];
            }
        }
        s
    }

    /// `g⁻¹(α, β)` for covariant component vectors.
    pub fn inner_dual(&self, alpha: &[f64], beta: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += self.g_inv.at(&[a, b]) * alpha[a] * beta[b];
            }
        }
        s
    }

    pub fn raise(&self, alpha: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|a| (0..n).map(|b| self.g_inv.at(&[a, b]) * alpha[b]).sum())
            .collect()
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|a| (0..n).map(|b| self.g.at(&[a, b]) * v[b]).sum())
            .collect()
    }
}

/// `∇T` from jet-valued components and the Christoffel symbols `Γ^a_bc`
/// (stored `[a, b, c]`). The derivative slot is appended last.
pub fn covariant_derivative(field: &JetTensor, christoffel: &TensorValue) -> Result<TensorValue> {
    let n = field.dim();
    if christoffel.dim() != n || christoffel.variance() != [Up, Down, Down] {
        return Err(Error::Shape("christoffel symbols must be (up, down, down) in the field's dimension".into()));
    }
    if let Some(j) = field.data().iter().find(|j| j.order() == 0) {
        return Err(crate::jet::JetError::InsufficientOrder {
            requested: 1,
            available: j.order(),
        }
        .into());
    }
    let rank = field.rank();
    let mut variance = field.variance().to_vec();
    variance.push(Down);
    let mut src = vec![0; rank];
    Ok(Tensor::from_fn(n, &variance, |idx| {
        let (base, c) = idx.split_at(rank);
        let c = c[0];
        let mut v = field.get(base).d(c);
        for s in 0..rank {
            src.copy_from_slice(base);
            for e in 0..n {
                src[s] = e;
                let t = field.get(&src).value();
                v += match field.variance()[s] {
                    Up => christoffel.at(&[base[s], c, e]) * t,
                    Down => -christoffel.at(&[e, c, base[s]]) * t,
                };
            }
        }
        v
    }))
}
