//! Held-out log-likelihood of observed words, per slice.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{eligible_positions, ContextBatch, Split, TimeSlicedCorpus};
use crate::error::{Error, Result};
use crate::model::{loss_pos, EmbeddingState};

const CHUNK: usize = 4096;

/// Ratio of evaluated words to words per minibatch.
pub fn scale_factor(n_eval_tokens: usize, n_batch_tokens: usize) -> Result<f64> {
    if n_eval_tokens == 0 || n_batch_tokens == 0 {
        return Err(Error::InvalidArgument(format!(
            "scale factor needs positive counts, got {n_eval_tokens} / {n_batch_tokens}"
        )));
    }
    Ok(n_eval_tokens as f64 / n_batch_tokens as f64)
}

/// Scaled `L_pos` of one split, slice by slice.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalCurve {
    /// `None` for slices with no position in the split.
    pub per_slice: Vec<Option<f64>>,
    /// Mean over the slices that have a value.
    pub mean: f64,
    pub split: Split,
    pub scale: f64,
    /// Number of evaluated positions in each slice.
    pub counts: Vec<usize>,
}

fn slice_log_likelihood(state: &EmbeddingState, corpus: &TimeSlicedCorpus, t: usize, split: Split, window: usize) -> (usize, f64) {
    let slice = &corpus.slices[t];
    let positions = eligible_positions(slice, split, window);
    let mut sum = 0.0;
    for chunk in positions.chunks(CHUNK) {
        let mut batch = ContextBatch::new(t, window);
        for &p in chunk {
            batch.push_position(slice, p as usize);
        }
        sum += loss_pos(state, &batch);
    }
    (positions.len(), sum)
}

fn check_shape(state: &EmbeddingState, corpus: &TimeSlicedCorpus) -> Result<()> {
    if state.num_slices() != 1 && state.num_slices() != corpus.num_slices() {
        return Err(Error::Shape(format!(
            "model has {} slices, corpus {}",
            state.num_slices(),
            corpus.num_slices()
        )));
    }
    if state.vocab_size() != corpus.vocab_size {
        return Err(Error::Shape(format!(
            "model has {} words, corpus {}",
            state.vocab_size(),
            corpus.vocab_size
        )));
    }
    Ok(())
}

/// Evaluate every position of `split` with an explicit scale.
///
/// A single-slice state is applied to every slice of the corpus.
pub fn evaluate_with_scale(
    state: &EmbeddingState,
    corpus: &TimeSlicedCorpus,
    split: Split,
    window: usize,
    scale: f64,
) -> Result<EvalCurve> {
    check_shape(state, corpus)?;
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let sums: Vec<(usize, f64)> = (0..corpus.num_slices())
        .into_par_iter()
        .map(|t| slice_log_likelihood(state, corpus, t, split, window))
        .collect();
    let counts: Vec<usize> = sums.iter().map(|&(n, _)| n).collect();
    let per_slice: Vec<Option<f64>> = sums
        .iter()
        .map(|&(n, s)| (n > 0).then_some(scale * s))
        .collect();
    let mean = masked_mean(&per_slice)
        .ok_or_else(|| Error::InvalidArgument(format!("the {split} split is empty in every slice")))?;
    Ok(EvalCurve {
        per_slice,
        mean,
        split,
        scale,
        counts,
    })
}

/// Evaluate every position of `split`, scaled by the split size over
/// `batch_size`.
pub fn evaluate(
    state: &EmbeddingState,
    corpus: &TimeSlicedCorpus,
    split: Split,
    window: usize,
    batch_size: usize,
) -> Result<EvalCurve> {
    let n: usize = corpus
        .slices
        .iter()
        .map(|s| eligible_positions(s, split, window).len())
        .sum();
    let scale = scale_factor(n, batch_size)?;
    evaluate_with_scale(state, corpus, split, window, scale)
}

fn masked_mean(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

impl EvalCurve {
    /// TSV form: metadata comment lines, then `slice<TAB>value<TAB>positions`
    /// rows with `NA` for missing slices.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("#split\t{}\n#scale\t{}\n#mean\t{}\nslice\tvalue\tpositions\n", self.split, self.scale, self.mean);
        for (t, (v, n)) in self.per_slice.iter().zip(&self.counts).enumerate() {
            match v {
                Some(v) => writeln!(out, "{t}\t{v}\t{n}").unwrap(),
                None => writeln!(out, "{t}\tNA\t{n}").unwrap(),
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<EvalCurve> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |reason: &str| Error::format(path, reason.to_string());
        let mut split = None;
        let mut scale = None;
        let mut per_slice = Vec::new();
        let mut counts = Vec::new();
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta.split_once('\t').ok_or_else(|| bad("bad metadata line"))?;
                match key {
                    "split" => split = Some(value.parse::<Split>().map_err(|_| bad("bad split"))?),
                    "scale" => scale = Some(value.parse::<f64>().map_err(|_| bad("bad scale"))?),
                    _ => {}
                }
                continue;
            }
            if line.starts_with("slice\t") || line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 || fields[0].parse::<usize>() != Ok(per_slice.len()) {
                return Err(bad("expected slice, value and positions in slice order"));
            }
            per_slice.push(match fields[1] {
                "NA" => None,
                v => Some(v.parse::<f64>().map_err(|_| bad("bad value"))?),
            });
            counts.push(fields[2].parse::<usize>().map_err(|_| bad("bad position count"))?);
        }
        let mean = masked_mean(&per_slice).ok_or_else(|| bad("no values"))?;
        Ok(EvalCurve {
            per_slice,
            mean,
            split: split.ok_or_else(|| bad("missing split"))?,
            scale: scale.ok_or_else(|| bad("missing scale"))?,
            counts,
        })
    }
}

/// Curves ranked by mean, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    pub split: Split,
    pub rows: Vec<(String, f64)>,
}

/// Rank named curves by their mean. All curves must come from the same
/// split of the same corpus.
pub fn compare(curves: &[(String, EvalCurve)]) -> Result<Ranking> {
    let Some((_, first)) = curves.first() else {
        return Err(Error::InvalidArgument("nothing to compare".into()));
    };
    for (name, c) in curves {
        if c.split != first.split {
            return Err(Error::InvalidArgument(format!("{name} was evaluated on {}, not {}", c.split, first.split)));
        }
        if c.counts != first.counts {
            return Err(Error::InvalidArgument(format!("{name} was evaluated on a different corpus")));
        }
    }
    let mut rows: Vec<(String, f64)> = curves.iter().map(|(n, c)| (n.clone(), c.mean)).collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));
    Ok(Ranking { split: first.split, rows })
}

impl Ranking {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("rank\tname\tmean\n");
        for (i, (name, mean)) in self.rows.iter().enumerate() {
            writeln!(out, "{}\t{name}\t{mean}", i + 1).unwrap();
        }
        out
    }

    /// Aligned plain-text table; the best row is wrapped in `**`.
    pub fn to_text(&self) -> String {
        let cells: Vec<(String, String)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, (name, mean))| {
                let mean = format!("{mean:.4}");
                if i == 0 {
                    (format!("**{name}**"), format!("**{mean}**"))
                } else {
                    (name.clone(), mean)
                }
            })
            .collect();
        let w_name = cells.iter().map(|c| c.0.len()).max().unwrap_or(0).max(4);
        let w_mean = cells.iter().map(|c| c.1.len()).max().unwrap_or(0).max(4);
        let mut out = format!("{:<w_name$}  {:>w_mean$}   ({})\n", "name", "mean", self.split);
        for (name, mean) in cells {
            writeln!(out, "{name:<w_name$}  {mean:>w_mean$}").unwrap();
        }
        out
    }
}
