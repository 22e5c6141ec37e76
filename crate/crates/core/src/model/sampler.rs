use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;

use crate::corpus::ContextBatch;
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_NEGATIVE_POWER: f64 = 0.75;

/// Draws negative center words from a smoothed unigram distribution.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    probabilities: Vec<f64>,
    dist: WeightedIndex<f64>,
    k: usize,
    rng: ChaCha8Rng,
}

/// Negative ids for every example of a batch, `k` per example.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeDraws {
    pub k: usize,
    pub ids: Vec<u32>,
}

impl NegativeDraws {
    pub fn for_example(&self, i: usize) -> &[u32] {
        &self.ids[i * self.k..(i + 1) * self.k]
    }

    /// No negatives at all (`k = 0`).
    pub fn none() -> Self {
        NegativeDraws { k: 0, ids: Vec::new() }
    }
}

impl NegativeSampler {
    /// Weights proportional to `freq^power`, renormalized.
    pub fn new(frequencies: &[f64], power: f64, k: usize, seed: u64) -> Result<Self> {
        let raw: Vec<f64> = frequencies.iter().map(|f| f.max(0.0).powf(power)).collect();
        let total: f64 = raw.iter().sum();
        if raw.iter().filter(|&&w| w > 0.0).count() < 2 || !total.is_finite() {
            return Err(Error::InvalidArgument(
                "negative sampling needs at least two words with positive weight".into(),
            ));
        }
        let probabilities: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let dist = WeightedIndex::new(&probabilities)
            .map_err(|e| Error::InvalidArgument(format!("bad sampling weights: {e}")))?;
        Ok(NegativeSampler {
            probabilities,
            dist,
            k,
            rng: seed::rng_for(seed, "negatives"),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Draw `k` negatives per example, redrawing any that equal the true
    /// center.
    pub fn draw(&mut self, batch: &ContextBatch) -> NegativeDraws {
        let mut ids = Vec::with_capacity(batch.len() * self.k);
        for &center in &batch.centers {
            for _ in 0..self.k {
                let neg = loop {
                    let cand = self.dist.sample(&mut self.rng) as u32;
                    if cand != center {
                        break cand;
                    }
                };
                ids.push(neg);
            }
        }
        NegativeDraws { k: self.k, ids }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_smoothed_and_normalized() {
        let s = NegativeSampler::new(&[0.5, 0.25, 0.25], 0.75, 3, 0).unwrap();
        let p = s.probabilities();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let ratio = p[0] / p[1];
        assert!((ratio - 2f64.powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn never_draws_the_center() {
        let mut s = NegativeSampler::new(&[0.9, 0.1], 0.75, 5, 1).unwrap();
        let batch = ContextBatch {
            slice: 0,
            window: 1,
            centers: vec![0, 1, 0],
            contexts: vec![1, 1, 0, 0, 1, 1],
            mask: vec![true; 6],
        };
        let draws = s.draw(&batch);
        for (i, &c) in batch.centers.iter().enumerate() {
            assert!(draws.for_example(i).iter().all(|&n| n != c));
        }
    }

    #[test]
    fn degenerate_vocabulary_rejected() {
        assert!(NegativeSampler::new(&[1.0], 0.75, 1, 0).is_err());
        assert!(NegativeSampler::new(&[1.0, 0.0], 0.75, 1, 0).is_err());
    }
}
