//! Synthetic dated corpora with planted semantic behaviors.
//!
//! Words are split into clusters. Every sentence has `2C + 1` tokens drawn
//! from one cluster, so any token can be a center with a full window. A
//! planted word only occurs at the center of its own sentences, whose
//! context comes from its source or target cluster depending on its
//! behavior and the slice.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::DatedDocument;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Behavior {
    /// Context moves from source to target linearly over the slices.
    Monotone,
    /// Target context at one slice only.
    Spike(usize),
    Stable,
}

impl Behavior {
    /// Probability that a sentence at slice `t` uses the target cluster.
    pub fn target_probability(&self, t: usize, num_slices: usize) -> f64 {
        match *self {
            Behavior::Monotone if num_slices > 1 => t as f64 / (num_slices - 1) as f64,
            Behavior::Monotone => 0.0,
            Behavior::Spike(s) => f64::from(u8::from(s == t)),
            Behavior::Stable => 0.0,
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::Monotone => f.write_str("monotone"),
            Behavior::Spike(t) => write!(f, "spike:{t}"),
            Behavior::Stable => f.write_str("stable"),
        }
    }
}

impl FromStr for Behavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monotone" => Ok(Behavior::Monotone),
            "stable" => Ok(Behavior::Stable),
            _ => s
                .strip_prefix("spike:")
                .and_then(|t| t.parse().ok())
                .map(Behavior::Spike)
                .ok_or_else(|| Error::Synth(format!("unknown behavior {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Planted {
    pub word: usize,
    pub behavior: Behavior,
    pub source: usize,
    pub target: usize,
}

/// A contiguous block of word ids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster {
    pub size: usize,
    /// Probability that a context token comes from the cluster rather than
    /// uniformly from all unplanted words.
    pub affinity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub vocab_size: usize,
    pub num_slices: usize,
    pub tokens_per_slice: usize,
    /// Context half-width; sentences have `2 * window + 1` tokens.
    pub window: usize,
    /// Cluster sizes must add up to `vocab_size`.
    pub clusters: Vec<Cluster>,
    pub planted: Vec<Planted>,
    pub seed: u64,
    /// Slice `t` is dated January 1st of `base_year + t`.
    pub base_year: i32,
    /// Second language with the same clusters; planted words keep their
    /// behavior unless overridden here.
    pub mirror: Option<Vec<Planted>>,
}

impl SynthSpec {
    /// `num_clusters` clusters of near-equal size with full affinity.
    pub fn uniform(vocab_size: usize, num_slices: usize, tokens_per_slice: usize, num_clusters: usize, window: usize, seed: u64) -> Self {
        let clusters = (0..num_clusters)
            .map(|c| Cluster {
                size: vocab_size / num_clusters + usize::from(c < vocab_size % num_clusters),
                affinity: 1.0,
            })
            .collect();
        SynthSpec {
            vocab_size,
            num_slices,
            tokens_per_slice,
            window,
            clusters,
            planted: Vec::new(),
            seed,
            base_year: 2000,
            mirror: None,
        }
    }

    /// Cluster index of every word.
    pub fn membership(&self) -> Vec<usize> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(c, cl)| std::iter::repeat_n(c, cl.size))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Synth(m));
        if self.vocab_size == 0 || self.num_slices == 0 || self.window == 0 {
            return bad("vocabulary, slices and window must be positive".into());
        }
        if self.clusters.iter().map(|c| c.size).sum::<usize>() != self.vocab_size {
            return bad(format!("cluster sizes do not add up to {}", self.vocab_size));
        }
        if let Some(c) = self.clusters.iter().find(|c| !(0.0..=1.0).contains(&c.affinity)) {
            return bad(format!("affinity {} outside [0, 1]", c.affinity));
        }
        let membership = self.membership();
        let nc = self.clusters.len();
        for list in std::iter::once(&self.planted).chain(self.mirror.as_ref()) {
            for p in list {
                if p.word >= self.vocab_size {
                    return bad(format!("planted word {} is not in the vocabulary", p.word));
                }
                if p.source >= nc || p.target >= nc {
                    return bad(format!("planted word {} names a missing cluster", p.word));
                }
                if let Behavior::Spike(t) = p.behavior {
                    if t >= self.num_slices {
                        return bad(format!("spike slice {t} out of range"));
                    }
                }
            }
        }
        let planted: Vec<usize> = self.planted.iter().map(|p| p.word).collect();
        if let Some(mirror) = &self.mirror {
            if let Some(p) = mirror.iter().find(|p| !planted.contains(&p.word)) {
                return bad(format!("override for word {} which is not planted", p.word));
            }
        }
        let sentence = 2 * self.window + 1;
        for c in 0..nc {
            let free = (0..self.vocab_size)
                .filter(|&v| membership[v] == c && !planted.contains(&v))
                .count();
            if free < sentence {
                return bad(format!(
                    "cluster {c} has {free} unplanted words, fewer than the sentence length {sentence}"
                ));
            }
        }
        Ok(())
    }
}

/// Name of word `v` in language `lang` (0 source, 1 mirror).
pub fn word_name(lang: usize, v: usize) -> String {
    let prefix = if lang == 0 { 'w' } else { 'y' };
    format!("{prefix}{v:04}")
}

/// One generated language.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    /// One document per sentence.
    pub documents: Vec<DatedDocument>,
    /// Per slice and planted word: sentences drawn from the target cluster
    /// and total sentences.
    pub target_counts: Vec<HashMap<usize, (usize, usize)>>,
    pub truth: Vec<(String, Behavior, usize, usize)>,
}

impl SynthCorpus {
    /// `word<TAB>behavior<TAB>source<TAB>target` rows.
    pub fn truth_tsv(&self) -> String {
        let mut out = String::from("word\tbehavior\tsource\ttarget\n");
        for (w, b, s, t) in &self.truth {
            writeln!(out, "{w}\t{b}\t{s}\t{t}").unwrap();
        }
        out
    }

    /// `date<TAB>text` lines ready for ingestion.
    pub fn corpus_text(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            writeln!(out, "{}\t{}", d.date.format("%Y-%m-%d"), d.tokens.join(" ")).unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthOutput {
    pub source: SynthCorpus,
    pub mirror: Option<SynthCorpus>,
    /// `(source word, mirror word)` for every word when mirrored.
    pub lexicon: Vec<(String, String)>,
}

struct Pools {
    by_cluster: Vec<Vec<usize>>,
    all: Vec<usize>,
}

fn context(rng: &mut ChaCha8Rng, pools: &Pools, cluster: usize, affinity: f64, n: usize, out: &mut Vec<usize>) {
    let pool = &pools.by_cluster[cluster];
    for i in sample(rng, pool.len(), n) {
        out.push(pool[i]);
    }
    let start = out.len() - n;
    for slot in &mut out[start..] {
        if affinity < 1.0 && !rng.random_bool(affinity) {
            *slot = pools.all[rng.random_range(0..pools.all.len())];
        }
    }
}

fn generate_language(spec: &SynthSpec, planted: &[Planted], lang: usize, label: &str) -> SynthCorpus {
    let membership = spec.membership();
    let is_planted: HashMap<usize, Planted> = planted.iter().map(|p| (p.word, *p)).collect();
    let mut by_cluster = vec![Vec::new(); spec.clusters.len()];
    for v in 0..spec.vocab_size {
        if !is_planted.contains_key(&v) {
            by_cluster[membership[v]].push(v);
        }
    }
    let all: Vec<usize> = by_cluster.iter().flatten().copied().collect();
    let pools = Pools { by_cluster, all };
    let cluster_weights: Vec<usize> = pools.by_cluster.iter().map(Vec::len).collect();
    let total_weight: usize = cluster_weights.iter().sum();

    let len = 2 * spec.window + 1;
    let per_word = ((spec.tokens_per_slice as f64 / spec.vocab_size as f64).round() as usize).max(1);
    let planted_sentences = per_word * planted.len();
    let ordinary = (spec.tokens_per_slice as f64 / len as f64).round() as usize;
    let ordinary = ordinary.saturating_sub(planted_sentences);

    let slices: Vec<(Vec<DatedDocument>, HashMap<usize, (usize, usize)>)> = (0..spec.num_slices)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_indexed(spec.seed, label, t as u64);
            let date = NaiveDate::from_ymd_opt(spec.base_year + t as i32, 1, 1).unwrap();
            let mut sentences: Vec<Vec<usize>> = Vec::with_capacity(ordinary + planted_sentences);
            let mut counts = HashMap::new();
            for _ in 0..ordinary {
                let mut pick = rng.random_range(0..total_weight);
                let mut c = 0;
                while pick >= cluster_weights[c] {
                    pick -= cluster_weights[c];
                    c += 1;
                }
                let mut s = Vec::with_capacity(len);
                context(&mut rng, &pools, c, spec.clusters[c].affinity, len, &mut s);
                sentences.push(s);
            }
            for p in planted {
                let q = p.behavior.target_probability(t, spec.num_slices);
                let mut hits = 0;
                for _ in 0..per_word {
                    let to_target = rng.random_bool(q);
                    hits += usize::from(to_target);
                    let c = if to_target { p.target } else { p.source };
                    let mut s = Vec::with_capacity(len);
                    context(&mut rng, &pools, c, spec.clusters[c].affinity, 2 * spec.window, &mut s);
                    s.insert(spec.window, p.word);
                    sentences.push(s);
                }
                counts.insert(p.word, (hits, per_word));
            }
            // interleave planted sentences with the rest
            for i in (1..sentences.len()).rev() {
                let j = rng.random_range(0..=i);
                sentences.swap(i, j);
            }
            let docs = sentences
                .into_iter()
                .map(|s| DatedDocument {
                    date,
                    tokens: s.into_iter().map(|v| word_name(lang, v)).collect(),
                })
                .collect();
            (docs, counts)
        })
        .collect();

    let truth = (0..spec.vocab_size)
        .map(|v| match is_planted.get(&v) {
            Some(p) => (word_name(lang, v), p.behavior, p.source, p.target),
            None => (word_name(lang, v), Behavior::Stable, membership[v], membership[v]),
        })
        .collect();
    let (documents, target_counts): (Vec<_>, Vec<_>) = slices.into_iter().unzip();
    SynthCorpus {
        documents: documents.into_iter().flatten().collect(),
        target_counts,
        truth,
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let source = generate_language(spec, &spec.planted, 0, "synth");
    let (mirror, lexicon) = match &spec.mirror {
        None => (None, Vec::new()),
        Some(overrides) => {
            let planted: Vec<Planted> = spec
                .planted
                .iter()
                .map(|p| *overrides.iter().find(|o| o.word == p.word).unwrap_or(p))
                .collect();
            let corpus = generate_language(spec, &planted, 1, "synth-mirror");
            let lexicon = (0..spec.vocab_size).map(|v| (word_name(0, v), word_name(1, v))).collect();
            (Some(corpus), lexicon)
        }
    };
    Ok(SynthOutput {
        source,
        mirror,
        lexicon,
    })
}

fn parse_planted(value: &str) -> Result<Planted> {
    let f: Vec<&str> = value.split_whitespace().collect();
    let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Synth(format!("bad number {s:?} in {value:?}")));
    if f.len() != 4 {
        return Err(Error::Synth(format!("expected `word behavior source target`, got {value:?}")));
    }
    Ok(Planted {
        word: num(f[0])?,
        behavior: f[1].parse()?,
        source: num(f[2])?,
        target: num(f[3])?,
    })
}

/// Parse a spec from `key = value` lines.
///
/// Keys: `vocab_size`, `num_slices`, `tokens_per_slice`, `window`, `seed`,
/// `base_year`, `clusters` (count of equal clusters), `affinity` (applied to
/// every cluster), `planted = word behavior source target` (repeatable),
/// `mirror = true` and `mirror_override = word behavior source target`
/// (repeatable). Behaviors are `monotone`, `stable` or `spike:T`.
pub fn parse_spec(text: &str) -> Result<SynthSpec> {
    let mut map: HashMap<&str, &str> = HashMap::new();
    let mut planted = Vec::new();
    let mut overrides = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Synth(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "planted" => planted.push(parse_planted(v)?),
            "mirror_override" => overrides.push(parse_planted(v)?),
            "vocab_size" | "num_slices" | "tokens_per_slice" | "window" | "seed" | "base_year" | "clusters" | "affinity" | "mirror" => {
                map.insert(k, v);
            }
            other => return Err(Error::Synth(format!("line {}: unknown key {other}", i + 1))),
        }
    }
    fn get<T: FromStr>(map: &HashMap<&str, &str>, key: &str, default: Option<T>) -> Result<T> {
        match map.get(key) {
            Some(v) => v.parse().map_err(|_| Error::Synth(format!("bad value {v:?} for {key}"))),
            None => default.ok_or_else(|| Error::Synth(format!("missing key {key}"))),
        }
    }
    let mut spec = SynthSpec::uniform(
        get(&map, "vocab_size", None)?,
        get(&map, "num_slices", None)?,
        get(&map, "tokens_per_slice", None)?,
        get(&map, "clusters", Some(10))?,
        get(&map, "window", Some(4))?,
        get(&map, "seed", Some(0))?,
    );
    if spec.clusters.is_empty() {
        return Err(Error::Synth("need at least one cluster".into()));
    }
    let affinity: f64 = get(&map, "affinity", Some(1.0))?;
    spec.clusters.iter_mut().for_each(|c| c.affinity = affinity);
    spec.base_year = get(&map, "base_year", Some(2000))?;
    spec.planted = planted;
    if get(&map, "mirror", Some(false))? {
        spec.mirror = Some(overrides);
    } else if !overrides.is_empty() {
        return Err(Error::Synth("mirror_override without mirror = true".into()));
    }
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        let mut s = SynthSpec::uniform(60, 5, 3000, 4, 2, 1);
        s.planted = vec![
            Planted {
                word: 0,
                behavior: Behavior::Monotone,
                source: 0,
                target: 1,
            },
            Planted {
                word: 20,
                behavior: Behavior::Spike(2),
                source: 1,
                target: 3,
            },
        ];
        s
    }

    fn cluster_of(word: &str) -> usize {
        word[1..].parse::<usize>().unwrap() / 15
    }

    #[test]
    fn no_planted_words_means_all_stable() {
        let s = SynthSpec::uniform(30, 2, 500, 3, 2, 0);
        let out = generate(&s).unwrap();
        assert_eq!(out.source.truth.len(), 30);
        assert!(out.source.truth.iter().all(|r| r.1 == Behavior::Stable && r.2 == r.3));
        assert!(out.source.truth_tsv().starts_with("word\tbehavior\tsource\ttarget\nw0000\tstable\t0\t0\n"));
    }

    #[test]
    fn sentences_have_fixed_length_and_slice_sizes_are_close() {
        let out = generate(&small()).unwrap();
        for t in 0..5 {
            let year = 2000 + t;
            let tokens: usize = out
                .source
                .documents
                .iter()
                .filter(|d| d.date == NaiveDate::from_ymd_opt(year, 1, 1).unwrap())
                .map(|d| d.tokens.len())
                .sum();
            assert!((tokens as f64 - 3000.0).abs() <= 30.0, "{tokens}");
        }
        assert!(out.source.documents.iter().all(|d| d.tokens.len() == 5));
    }

    #[test]
    fn mixing_law_boundaries() {
        let out = generate(&small()).unwrap();
        let sentences_of = |t: usize, w: &str| -> Vec<Vec<String>> {
            let date = NaiveDate::from_ymd_opt(2000 + t as i32, 1, 1).unwrap();
            out.source
                .documents
                .iter()
                .filter(|d| d.date == date && d.tokens[2] == w)
                .map(|d| d.tokens.clone())
                .collect()
        };
        for s in sentences_of(0, "w0000") {
            assert!(s.iter().enumerate().all(|(i, w)| i == 2 || cluster_of(w) == 0));
        }
        for s in sentences_of(4, "w0000") {
            assert!(s.iter().enumerate().all(|(i, w)| i == 2 || cluster_of(w) == 1));
        }
        assert_eq!(out.source.target_counts[2][&20], (50, 50));
        assert_eq!(out.source.target_counts[3][&20].0, 0);
        // the planted word never appears outside its own sentences
        assert!(out.source.documents.iter().all(|d| d.tokens.iter().enumerate().all(|(i, w)| i == 2 || w != "w0000")));
    }

    #[test]
    fn halfway_mixing_is_binomial() {
        let mut s = SynthSpec::uniform(40, 11, 40_000, 2, 2, 5);
        s.planted = vec![Planted {
            word: 3,
            behavior: Behavior::Monotone,
            source: 0,
            target: 1,
        }];
        let out = generate(&s).unwrap();
        let (hits, n) = out.source.target_counts[5][&3];
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((hits as f64 - n as f64 / 2.0).abs() <= 3.0 * sigma, "{hits}/{n}");
    }

    #[test]
    fn deterministic_and_mirrored() {
        let mut s = small();
        s.mirror = Some(vec![Planted {
            word: 0,
            behavior: Behavior::Stable,
            source: 0,
            target: 0,
        }]);
        let a = generate(&s).unwrap();
        assert_eq!(a, generate(&s).unwrap());
        let m = a.mirror.unwrap();
        assert_eq!(m.truth[0].1, Behavior::Stable);
        assert_eq!(m.truth[20].1, Behavior::Spike(2));
        assert_eq!(a.lexicon[7], ("w0007".to_string(), "y0007".to_string()));
        assert!(m.documents[0].tokens[0].starts_with('y'));
    }

    #[test]
    fn impossible_specs_are_rejected() {
        let s = SynthSpec::uniform(12, 2, 100, 4, 2, 0);
        assert!(matches!(generate(&s), Err(Error::Synth(_))));
        let mut s = small();
        s.planted[0].target = 9;
        assert!(generate(&s).is_err());
    }

    #[test]
    fn parses_key_value_specs() {
        let text = "vocab_size = 60\nnum_slices = 5\ntokens_per_slice = 3000\nclusters = 4\nwindow = 2\nseed = 1\n\
                    planted = 0 monotone 0 1\nplanted = 20 spike:2 1 3 # transient\n";
        assert_eq!(parse_spec(text).unwrap(), small());
        assert!(parse_spec("vocab_size = 10").is_err());
        assert!(parse_spec(&format!("{text}colour = red\n")).is_err());
    }
}
