//! Reproducible point sampling.

/// SplitMix64 generator (Steele, Lea & Flood constants).
///
/// Chosen because its output is fully specified by a 64-bit state and a few
/// integer operations, so sampled points are identical on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal sample (Box–Muller, cosine branch only).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn point_in(&mut self, domain: &[(f64, f64)]) -> Vec<f64> {
        domain.iter().map(|&(lo, hi)| self.uniform(lo, hi)).collect()
    }

    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}

/// Map over points in parallel, keeping input order; the first error wins.
pub fn par_map<P, T, E, F>(points: &[P], f: F) -> Result<Vec<T>, E>
where
    P: Sync,
    T: Send,
    E: Send,
    F: Fn(&P) -> Result<T, E> + Sync + Send,
{
    use rayon::prelude::*;
    points.par_iter().map(f).collect()
}
