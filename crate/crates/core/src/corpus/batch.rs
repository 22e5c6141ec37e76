use log::warn;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Slice, Split, TimeSlicedCorpus};
use crate::error::{Error, Result};
use crate::seed;

/// Center words of slice `slice` with their `2 * window` context ids.
///
/// Context positions are ordered `-window..-1, +1..+window`. Positions
/// outside the center's document are masked and carry id 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextBatch {
    pub slice: usize,
    pub window: usize,
    pub centers: Vec<u32>,
    pub contexts: Vec<u32>,
    pub mask: Vec<bool>,
}

impl ContextBatch {
    pub fn new(slice: usize, window: usize) -> Self {
        ContextBatch {
            slice,
            window,
            centers: Vec::new(),
            contexts: Vec::new(),
            mask: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Context ids and mask of example `i`.
    pub fn context(&self, i: usize) -> (&[u32], &[bool]) {
        let w = 2 * self.window;
        (
            &self.contexts[i * w..(i + 1) * w],
            &self.mask[i * w..(i + 1) * w],
        )
    }

    /// Append the example centered at `pos` of `slice`.
    pub fn push_position(&mut self, slice: &Slice, pos: usize) {
        let (start, end) = slice.document_bounds(pos);
        self.centers.push(slice.tokens[pos]);
        let offsets = (1..=self.window)
            .rev()
            .map(|o| pos as isize - o as isize)
            .chain((1..=self.window).map(|o| (pos + o) as isize));
        for p in offsets {
            if p >= start as isize && p < end as isize {
                self.contexts.push(slice.tokens[p as usize]);
                self.mask.push(true);
            } else {
                self.contexts.push(0);
                self.mask.push(false);
            }
        }
    }

    /// Build a batch from explicit positions.
    pub fn from_positions(slice_index: usize, slice: &Slice, window: usize, positions: &[usize]) -> Self {
        let mut batch = ContextBatch::new(slice_index, window);
        for &pos in positions {
            batch.push_position(slice, pos);
        }
        batch
    }
}

/// Positions of `split` in `slice` whose window holds at least one token of
/// the same document. Single-token documents can never be predicted.
pub fn eligible_positions(slice: &Slice, split: Split, window: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for (d, &start) in slice.doc_starts.iter().enumerate() {
        let end = slice
            .doc_starts
            .get(d + 1)
            .map_or(slice.len(), |&e| e as usize);
        if end - (start as usize) < 2 || window == 0 {
            continue;
        }
        out.extend((start..end as u32).filter(|&p| slice.splits[p as usize] == split));
    }
    out
}

/// Endless stream of batches whose centers are drawn uniformly with
/// replacement from one split of one slice.
pub struct BatchStream<'a> {
    slice: &'a Slice,
    slice_index: usize,
    window: usize,
    batch_size: usize,
    positions: Vec<u32>,
    rng: ChaCha8Rng,
}

impl BatchStream<'_> {
    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    /// Draw the next batch. Returns `None` only for an empty split.
    pub fn next_batch(&mut self) -> Option<ContextBatch> {
        if self.positions.is_empty() {
            return None;
        }
        let mut batch = ContextBatch::new(self.slice_index, self.window);
        batch.centers.reserve(self.batch_size);
        for _ in 0..self.batch_size {
            let pos = self.positions[self.rng.random_range(0..self.positions.len())];
            batch.push_position(self.slice, pos as usize);
        }
        Some(batch)
    }
}

impl Iterator for BatchStream<'_> {
    type Item = ContextBatch;

    fn next(&mut self) -> Option<ContextBatch> {
        self.next_batch()
    }
}

/// Batches for slice `t`. The stream is empty (with a warning) when the
/// slice has no eligible position in `split`.
pub fn batches(
    corpus: &TimeSlicedCorpus,
    t: usize,
    window: usize,
    batch_size: usize,
    split: Split,
    seed: u64,
) -> Result<BatchStream<'_>> {
    if t >= corpus.num_slices() {
        return Err(Error::InvalidArgument(format!(
            "slice {t} out of range (T = {})",
            corpus.num_slices()
        )));
    }
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let slice = &corpus.slices[t];
    let positions = eligible_positions(slice, split, window);
    if positions.is_empty() {
        warn!("slice {t} has no {split} positions; batch stream is empty");
    }
    Ok(BatchStream {
        slice,
        slice_index: t,
        window,
        batch_size,
        positions,
        rng: seed::rng_indexed(seed, "batches", t as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Granularity;

    fn one_doc_slice(tokens: Vec<u32>) -> Slice {
        let n = tokens.len();
        Slice {
            tokens,
            splits: vec![Split::Train; n],
            doc_starts: vec![0],
        }
    }

    #[test]
    fn interior_center_has_full_window() {
        let s = one_doc_slice(vec![0, 1, 2]);
        let b = ContextBatch::from_positions(0, &s, 1, &[1]);
        assert_eq!(b.centers, vec![1]);
        assert_eq!(b.context(0), (&[0u32, 2][..], &[true, true][..]));
    }

    #[test]
    fn document_start_masks_left() {
        let s = Slice {
            tokens: vec![5, 6, 7, 8, 9],
            splits: vec![Split::Train; 5],
            doc_starts: vec![0, 2],
        };
        let b = ContextBatch::from_positions(0, &s, 2, &[2]);
        let (ids, mask) = b.context(0);
        assert_eq!(mask, &[false, false, true, true]);
        assert_eq!(&ids[2..], &[8, 9]);
    }

    #[test]
    fn mask_soundness_on_random_batches() {
        let s = Slice {
            tokens: (0..60).map(|i| i % 7).collect(),
            splits: vec![Split::Train; 60],
            doc_starts: vec![0, 3, 4, 20, 21, 45],
        };
        let corpus = TimeSlicedCorpus {
            vocab_size: 7,
            granularity: Granularity::Annual,
            slices: vec![s],
        };
        let mut stream = batches(&corpus, 0, 3, 64, Split::Train, 5).unwrap();
        // position 3 is a single-token document and never a center
        assert!(!stream.positions().contains(&3));
        let b = stream.next().unwrap();
        assert_eq!(b.len(), 64);
        assert!(b.mask.chunks(6).all(|m| m.iter().any(|&x| x)));
    }

    #[test]
    fn uniform_center_counts_within_five_sigma() {
        // 100 distinct words, one occurrence each, so center counts are
        // multinomial(n, 1/100) under uniform sampling.
        let words = 100usize;
        let s = one_doc_slice((0..words as u32).collect());
        let corpus = TimeSlicedCorpus {
            vocab_size: words,
            granularity: Granularity::Annual,
            slices: vec![s],
        };
        let n = 100_000;
        let mut counts = vec![0usize; words];
        for b in batches(&corpus, 0, 2, 1000, Split::Train, 9).unwrap().take(n / 1000) {
            for &c in &b.centers {
                counts[c as usize] += 1;
            }
        }
        let p = 1.0 / words as f64;
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (w, &c) in counts.iter().enumerate() {
            assert!((c as f64 - mean).abs() < 5.0 * sigma, "word {w}: {c}");
        }
    }

    #[test]
    fn empty_split_yields_nothing() {
        let corpus = TimeSlicedCorpus {
            vocab_size: 3,
            granularity: Granularity::Annual,
            slices: vec![one_doc_slice(vec![0, 1, 2])],
        };
        assert!(batches(&corpus, 0, 1, 8, Split::Test, 0).unwrap().next().is_none());
        assert!(batches(&corpus, 1, 1, 8, Split::Train, 0).is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        let corpus = TimeSlicedCorpus {
            vocab_size: 10,
            granularity: Granularity::Annual,
            slices: vec![one_doc_slice((0..10).collect())],
        };
        let a: Vec<_> = batches(&corpus, 0, 2, 16, Split::Train, 3).unwrap().take(4).collect();
        let b: Vec<_> = batches(&corpus, 0, 2, 16, Split::Train, 3).unwrap().take(4).collect();
        assert_eq!(a, b);
    }
}
