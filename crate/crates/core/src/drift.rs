//! Per-word drift of target vectors relative to a base slice.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{dot, sq_dist, sq_norm, EmbeddingState};

/// Distance used to measure drift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DriftMetric {
    #[default]
    Euclidean,
    /// `1 - cos`; zero-norm rows count as distance 1.
    Cosine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub t0: usize,
    /// `d[v][t]`, distance between the vectors of `v` at `t` and `t0`.
    pub d: Vec<Vec<f64>>,
    /// Drift at the last slice.
    pub total: Vec<f64>,
    /// Mean drift over every slice other than `t0`.
    pub mean: Vec<f64>,
    /// `mean / total`, `None` when the total drift is zero.
    pub normalized: Vec<Option<f64>>,
}

fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = (sq_norm(a) * sq_norm(b)).sqrt();
    if n == 0.0 {
        1.0
    } else {
        1.0 - dot(a, b) / n
    }
}

pub fn drift_report(state: &EmbeddingState, t0: usize) -> Result<DriftReport> {
    drift_report_with(state, t0, DriftMetric::Euclidean)
}

pub fn drift_report_with(state: &EmbeddingState, t0: usize, metric: DriftMetric) -> Result<DriftReport> {
    let nt = state.num_slices();
    if t0 >= nt {
        return Err(Error::InvalidArgument(format!("base slice {t0} out of range (T = {nt})")));
    }
    let d: Vec<Vec<f64>> = (0..state.vocab_size())
        .map(|v| {
            let base = state.rho(t0, v);
            (0..nt)
                .map(|t| match metric {
                    DriftMetric::Euclidean => sq_dist(state.rho(t, v), base).sqrt(),
                    DriftMetric::Cosine if t == t0 => 0.0,
                    DriftMetric::Cosine => cosine_distance(state.rho(t, v), base),
                })
                .collect()
        })
        .collect();
    let total: Vec<f64> = d.iter().map(|row| row[nt - 1]).collect();
    let mean: Vec<f64> = d
        .iter()
        .map(|row| {
            if nt < 2 {
                0.0
            } else {
                row.iter().enumerate().filter(|&(t, _)| t != t0).map(|(_, x)| x).sum::<f64>() / (nt - 1) as f64
            }
        })
        .collect();
    let normalized = mean
        .iter()
        .zip(&total)
        .map(|(&m, &tot)| (tot > 0.0).then(|| m / tot))
        .collect();
    Ok(DriftReport {
        t0,
        d,
        total,
        mean,
        normalized,
    })
}

impl DriftReport {
    pub fn vocab_size(&self) -> usize {
        self.d.len()
    }

    pub fn num_slices(&self) -> usize {
        self.d.first().map_or(0, Vec::len)
    }

    /// Drift of every word at slice `t`.
    pub fn at(&self, t: usize) -> Vec<f64> {
        self.d.iter().map(|row| row[t]).collect()
    }

    /// `word<TAB>total<TAB>mean<TAB>normalized<TAB>d_0 ... d_{T-1}` rows.
    pub fn to_tsv(&self, vocab: &Vocabulary) -> String {
        let mut out = String::from("word\ttotal\tmean\tnormalized\tdrift\n");
        for (v, row) in self.d.iter().enumerate() {
            let norm = self.normalized[v].map_or("NA".to_string(), |x| x.to_string());
            write!(out, "{}\t{}\t{}\t{norm}\t", vocab.word(v), self.total[v], self.mean[v]).unwrap();
            let ds: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&ds.join(" "));
            out.push('\n');
        }
        out
    }
}

fn by_total_desc(report: &DriftReport) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..report.vocab_size()).collect();
    ids.sort_by(|&a, &b| {
        report.total[b]
            .partial_cmp(&report.total[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    ids
}

/// The `k` words with the largest total drift, ties broken by lower id.
pub fn top_drifting(report: &DriftReport, k: usize) -> Result<Vec<(usize, f64)>> {
    if k > report.vocab_size() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds vocabulary size {}", report.vocab_size())));
    }
    Ok(by_total_desc(report).into_iter().take(k).map(|v| (v, report.total[v])).collect())
}

/// Mean normalized drift of the top-k drifting words for each `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSummary {
    /// `(k, mean normalized drift, words averaged)`.
    pub rows: Vec<(usize, f64, usize)>,
    /// Words left out because their total drift is zero.
    pub excluded: usize,
}

pub fn normalized_drift_summary(report: &DriftReport, ks: &[usize]) -> Result<NormalizedSummary> {
    let nv = report.vocab_size();
    if let Some(&k) = ks.iter().find(|&&k| k > nv) {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds vocabulary size {nv}")));
    }
    let ranked: Vec<f64> = by_total_desc(report)
        .into_iter()
        .filter_map(|v| report.normalized[v])
        .collect();
    if ranked.is_empty() {
        return Err(Error::DegenerateReport);
    }
    let rows = ks
        .iter()
        .map(|&k| {
            let top = &ranked[..k.min(ranked.len())];
            let mean = if top.is_empty() {
                f64::NAN
            } else {
                top.iter().sum::<f64>() / top.len() as f64
            };
            (k, mean, top.len())
        })
        .collect();
    Ok(NormalizedSummary {
        rows,
        excluded: nv - ranked.len(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BinScale {
    #[default]
    Linear,
    /// Log-spaced edges from the smallest positive drift; zero drifts fall
    /// in the first bin.
    Log,
}

pub const DEFAULT_BINS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub t: usize,
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Bin edges shared by every slice of the report, so histograms of
/// different slices are comparable.
pub fn histogram_edges(report: &DriftReport, bins: usize, scale: BinScale) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let values = report.d.iter().flatten().copied();
    let max = values.clone().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok((0..=bins).map(|i| i as f64).collect());
    }
    Ok(match scale {
        BinScale::Linear => (0..=bins).map(|i| max * i as f64 / bins as f64).collect(),
        BinScale::Log => {
            let min = values.filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
            let (lo, hi) = (min.ln(), max.ln());
            let mut edges: Vec<f64> = (0..=bins)
                .map(|i| (lo + (hi - lo) * i as f64 / bins as f64).exp())
                .collect();
            edges[0] = 0.0;
            edges[bins] = max;
            edges
        }
    })
}

/// Histogram of the drift of every word at slice `t` over `edges`. Values
/// beyond the last edge go to the last bin, so counts sum to V.
pub fn drift_histogram(report: &DriftReport, t: usize, edges: &[f64]) -> Result<Histogram> {
    if t == report.t0 || t >= report.num_slices() {
        return Err(Error::InvalidArgument(format!("slice {t} is the base slice or out of range")));
    }
    if edges.len() < 2 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0; bins];
    for x in report.at(t) {
        let i = edges[1..bins].partition_point(|&e| e <= x);
        counts[i] += 1;
    }
    Ok(Histogram {
        t,
        edges: edges.to_vec(),
        counts,
    })
}

/// `t<TAB>bin_low<TAB>bin_high<TAB>count` rows for every histogram.
pub fn histograms_tsv(hists: &[Histogram]) -> String {
    let mut out = String::from("t\tbin_low\tbin_high\tcount\n");
    for h in hists {
        for (i, c) in h.counts.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}\t{c}", h.t, h.edges[i], h.edges[i + 1]).unwrap();
        }
    }
    out
}

/// Median drift over all words at slice `t`.
pub fn median_drift(report: &DriftReport, t: usize) -> f64 {
    let mut xs = report.at(t);
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// The `m` words closest to `word` by cosine of their target vectors at
/// slice `t`, ties broken by lower id. Zero-norm candidates are skipped.
pub fn nearest_neighbors(state: &EmbeddingState, word: usize, t: usize, m: usize) -> Result<Vec<(usize, f64)>> {
    if word >= state.vocab_size() || t >= state.num_slices() {
        return Err(Error::InvalidArgument(format!("word {word} or slice {t} out of range")));
    }
    let q = state.rho(t, word);
    let qn = sq_norm(q).sqrt();
    if qn == 0.0 {
        return Err(Error::ZeroNorm(format!("#{word}")));
    }
    let mut scored: Vec<(usize, f64)> = (0..state.vocab_size())
        .filter(|&v| v != word)
        .filter_map(|v| {
            let r = state.rho(t, v);
            let n = sq_norm(r).sqrt();
            (n > 0.0).then(|| (v, dot(q, r) / (qn * n)))
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    scored.truncate(m);
    Ok(scored)
}
