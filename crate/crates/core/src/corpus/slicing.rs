use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{DatedDocument, Vocabulary};
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_SUBSAMPLE_THRESHOLD: f64 = 1e-5;

/// Probability of keeping a token of relative frequency `freq`:
/// `min(1, sqrt(threshold / freq))`.
pub fn subsample_keep_probability(freq: f64, threshold: f64) -> Result<f64> {
    if !(freq > 0.0) || !freq.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "frequency must be positive, got {freq}"
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "subsampling threshold must be positive, got {threshold}"
        )));
    }
    Ok((threshold / freq).sqrt().min(1.0))
}

/// Calendar width of one time slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Granularity {
    Annual,
    Monthly,
    /// Fixed-length periods of this many days, counted from the earliest date.
    Days(u32),
}

impl Granularity {
    /// Slice index of `date` relative to `origin` (the earliest date).
    pub fn index(&self, origin: NaiveDate, date: NaiveDate) -> usize {
        match *self {
            Granularity::Annual => (date.year() - origin.year()) as usize,
            Granularity::Monthly => {
                let months = |d: NaiveDate| d.year() as i64 * 12 + d.month0() as i64;
                (months(date) - months(origin)) as usize
            }
            Granularity::Days(days) => ((date - origin).num_days() / i64::from(days)) as usize,
        }
    }

    /// Minibatches per slice used when the config does not say otherwise.
    pub fn default_minibatches(&self) -> usize {
        match self {
            Granularity::Annual => 1000,
            _ => 100,
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Granularity::Annual => write!(f, "annual"),
            Granularity::Monthly => write!(f, "monthly"),
            Granularity::Days(d) => write!(f, "days:{d}"),
        }
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annual" => Ok(Granularity::Annual),
            "monthly" => Ok(Granularity::Monthly),
            other => other
                .strip_prefix("days:")
                .and_then(|d| d.parse().ok())
                .filter(|&d: &u32| d > 0)
                .map(Granularity::Days)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown granularity {other}"))),
        }
    }
}

/// Which held-out partition a token position belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Split {
    Train = 0,
    Valid = 1,
    Test = 2,
}

impl Split {
    pub fn from_tag(tag: u8) -> Option<Split> {
        match tag {
            0 => Some(Split::Train),
            1 => Some(Split::Valid),
            2 => Some(Split::Test),
            _ => None,
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split {other}"))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

/// Token ids of one time slice, with document boundaries and split tags.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Slice {
    pub tokens: Vec<u32>,
    pub splits: Vec<Split>,
    /// Start offset of every non-empty document, strictly increasing.
    pub doc_starts: Vec<u32>,
}

impl Slice {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Half-open token range of the document containing `pos`.
    pub fn document_bounds(&self, pos: usize) -> (usize, usize) {
        let idx = self.doc_starts.partition_point(|&s| s as usize <= pos) - 1;
        let start = self.doc_starts[idx] as usize;
        let end = self
            .doc_starts
            .get(idx + 1)
            .map_or(self.tokens.len(), |&e| e as usize);
        (start, end)
    }

    pub fn split_count(&self, split: Split) -> usize {
        self.splits.iter().filter(|&&s| s == split).count()
    }
}

/// Token streams partitioned into chronological slices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSlicedCorpus {
    pub vocab_size: usize,
    pub granularity: Granularity,
    pub slices: Vec<Slice>,
}

impl TimeSlicedCorpus {
    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn split_tokens(&self, split: Split) -> usize {
        self.slices.iter().map(|s| s.split_count(split)).sum()
    }

    pub fn total_tokens(&self) -> usize {
        self.slices.iter().map(Slice::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SliceConfig {
    pub granularity: Granularity,
    /// `None` disables subsampling.
    pub subsample_threshold: Option<f64>,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            granularity: Granularity::Annual,
            subsample_threshold: Some(DEFAULT_SUBSAMPLE_THRESHOLD),
            valid_fraction: 0.1,
            test_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Bucket documents by date, map tokens to ids, subsample and tag splits.
///
/// Out-of-vocabulary tokens are dropped. Slices between the first and last
/// date that receive no document are kept empty so indices stay aligned with
/// the calendar.
pub fn slice(
    docs: &[DatedDocument],
    vocab: &Vocabulary,
    config: &SliceConfig,
) -> Result<TimeSlicedCorpus> {
    if config.valid_fraction < 0.0
        || config.test_fraction < 0.0
        || config.valid_fraction + config.test_fraction > 1.0
    {
        return Err(Error::InvalidArgument("split fractions must lie in [0, 1]".into()));
    }
    let Some(origin) = docs.iter().map(|d| d.date).min() else {
        return Ok(TimeSlicedCorpus {
            vocab_size: vocab.len(),
            granularity: config.granularity,
            slices: Vec::new(),
        });
    };
    let num_slices = docs
        .iter()
        .map(|d| config.granularity.index(origin, d.date))
        .max()
        .unwrap_or(0)
        + 1;

    let keep: Option<Vec<f64>> = match config.subsample_threshold {
        Some(threshold) => Some(
            vocab
                .frequencies()
                .into_iter()
                .map(|f| subsample_keep_probability(f, threshold))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };

    let mut rng = seed::rng_for(config.seed, "subsample");
    let mut slices = vec![Slice::default(); num_slices];
    for doc in docs {
        let slice = &mut slices[config.granularity.index(origin, doc.date)];
        let start = slice.tokens.len();
        for tok in &doc.tokens {
            let Some(id) = vocab.id(tok) else { continue };
            // One draw per in-vocabulary token keeps the stream aligned
            // whatever the keep probabilities are.
            let u: f64 = rng.random();
            if keep.as_ref().is_none_or(|k| u < k[id as usize]) {
                slice.tokens.push(id);
            }
        }
        if slice.tokens.len() > start {
            slice.doc_starts.push(start as u32);
        }
    }

    for (t, slice) in slices.iter_mut().enumerate() {
        if slice.is_empty() {
            warn!("slice {t} is empty");
        }
        slice.splits = assign_splits(slice.len(), config, t);
    }

    Ok(TimeSlicedCorpus {
        vocab_size: vocab.len(),
        granularity: config.granularity,
        slices,
    })
}

fn assign_splits(n: usize, config: &SliceConfig, t: usize) -> Vec<Split> {
    let n_valid = (config.valid_fraction * n as f64).round() as usize;
    let n_test = ((config.test_fraction * n as f64).round() as usize).min(n - n_valid);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut seed::rng_indexed(config.seed, "split", t as u64));
    let mut splits = vec![Split::Train; n];
    for &pos in &order[..n_valid] {
        splits[pos as usize] = Split::Valid;
    }
    for &pos in &order[n_valid..n_valid + n_test] {
        splits[pos as usize] = Split::Test;
    }
    splits
}
