use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed;

/// Dynamic target embeddings `rho` (T × V × D) and static context
/// embeddings `alpha` (V × D), stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingState {
    num_slices: usize,
    vocab_size: usize,
    dim: usize,
    rho: Vec<f64>,
    alpha: Vec<f64>,
}

impl EmbeddingState {
    pub fn zeros(num_slices: usize, vocab_size: usize, dim: usize) -> Self {
        EmbeddingState {
            num_slices,
            vocab_size,
            dim,
            rho: vec![0.0; num_slices * vocab_size * dim],
            alpha: vec![0.0; vocab_size * dim],
        }
    }

    pub fn from_parts(
        num_slices: usize,
        vocab_size: usize,
        dim: usize,
        rho: Vec<f64>,
        alpha: Vec<f64>,
    ) -> Result<Self> {
        if rho.len() != num_slices * vocab_size * dim || alpha.len() != vocab_size * dim {
            return Err(Error::Shape(format!(
                "expected rho {}x{}x{} and alpha {}x{}",
                num_slices, vocab_size, dim, vocab_size, dim
            )));
        }
        Ok(EmbeddingState {
            num_slices,
            vocab_size,
            dim,
            rho,
            alpha,
        })
    }

    /// Gaussian initialization with standard deviation `scale`. The same
    /// target vectors are used for every slice, so drift starts at zero.
    pub fn random(num_slices: usize, vocab_size: usize, dim: usize, scale: f64, seed: u64) -> Self {
        let mut rng = seed::rng_for(seed, "init");
        let mut state = EmbeddingState::zeros(1, vocab_size, dim);
        for x in state.rho.iter_mut().chain(state.alpha.iter_mut()) {
            let z: f64 = rng.sample(StandardNormal);
            *x = scale * z;
        }
        state.broadcast(num_slices)
    }

    /// Copy slice 0 into `num_slices` identical slices; alpha is shared.
    pub fn broadcast(&self, num_slices: usize) -> Self {
        let block = self.vocab_size * self.dim;
        let base = &self.rho[..block];
        let mut rho = Vec::with_capacity(num_slices * block);
        for _ in 0..num_slices {
            rho.extend_from_slice(base);
        }
        EmbeddingState {
            num_slices,
            vocab_size: self.vocab_size,
            dim: self.dim,
            rho,
            alpha: self.alpha.clone(),
        }
    }

    pub fn num_slices(&self) -> usize {
        self.num_slices
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Slice of `rho` used for data from corpus slice `t`: a single-slice
    /// (static) state serves every corpus slice.
    pub fn slice_for(&self, t: usize) -> usize {
        if self.num_slices == 1 {
            0
        } else {
            assert!(t < self.num_slices, "slice {t} out of range");
            t
        }
    }

    #[inline]
    fn rho_offset(&self, t: usize, v: usize) -> usize {
        (t * self.vocab_size + v) * self.dim
    }

    #[inline]
    pub fn rho(&self, t: usize, v: usize) -> &[f64] {
        let o = self.rho_offset(t, v);
        &self.rho[o..o + self.dim]
    }

    #[inline]
    pub fn rho_mut(&mut self, t: usize, v: usize) -> &mut [f64] {
        let o = self.rho_offset(t, v);
        &mut self.rho[o..o + self.dim]
    }

    #[inline]
    pub fn alpha(&self, v: usize) -> &[f64] {
        &self.alpha[v * self.dim..(v + 1) * self.dim]
    }

    #[inline]
    pub fn alpha_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.alpha[v * self.dim..(v + 1) * self.dim]
    }

    pub fn rho_data(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho_data_mut(&mut self) -> &mut [f64] {
        &mut self.rho
    }

    pub fn alpha_data(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_data_mut(&mut self) -> &mut [f64] {
        &mut self.alpha
    }

    pub fn is_finite(&self) -> bool {
        self.rho.iter().chain(&self.alpha).all(|x| x.is_finite())
    }

    /// Sum over words and consecutive slices of `||rho_v^(t) - rho_v^(t-1)||^2`.
    pub fn total_squared_drift(&self) -> f64 {
        let mut total = 0.0;
        for t in 1..self.num_slices {
            for v in 0..self.vocab_size {
                total += sq_dist(self.rho(t, v), self.rho(t - 1, v));
            }
        }
        total
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sq_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_copies_rows() {
        let s = EmbeddingState::random(1, 4, 3, 0.5, 1).broadcast(3);
        for t in 1..3 {
            for v in 0..4 {
                assert_eq!(s.rho(t, v), s.rho(0, v));
            }
        }
        assert_eq!(s.total_squared_drift(), 0.0);
    }

    #[test]
    fn from_parts_checks_shape() {
        assert!(EmbeddingState::from_parts(2, 3, 4, vec![0.0; 24], vec![0.0; 12]).is_ok());
        assert!(EmbeddingState::from_parts(2, 3, 4, vec![0.0; 23], vec![0.0; 12]).is_err());
    }
}
