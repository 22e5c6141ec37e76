use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

const STOPLIST_EN: &str = include_str!("../../stoplists/en.txt");
const STOPLIST_FR: &str = include_str!("../../stoplists/fr.txt");

/// Words excluded from the vocabulary.
pub type Stoplist = BTreeSet<String>;

fn parse_stoplist(text: &str) -> Stoplist {
    text.lines()
        .map(str::trim)
        .filter(|w| !w.is_empty() && !w.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Shipped stoplist for `lang` ("en" or "fr").
pub fn default_stoplist(lang: &str) -> Option<Stoplist> {
    match lang {
        "en" => Some(parse_stoplist(STOPLIST_EN)),
        "fr" => Some(parse_stoplist(STOPLIST_FR)),
        _ => None,
    }
}

/// Load a one-word-per-line stoplist file.
pub fn read_stoplist(path: impl AsRef<Path>) -> Result<Stoplist> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stoplist(&text))
}

/// The `V` most frequent non-stopword types with their corpus counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
    counts: Vec<u64>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Build from words in rank order. `total_tokens` is the corpus size the
    /// counts are relative to (it includes stopwords and dropped types).
    pub fn from_counts(entries: Vec<(String, u64)>, total_tokens: u64) -> Result<Self> {
        let mut ids = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let sum: u64 = entries.iter().map(|(_, c)| c).sum();
        if sum > total_tokens {
            return Err(Error::InvalidArgument(format!(
                "vocabulary counts sum to {sum} but total is {total_tokens}"
            )));
        }
        for (word, count) in entries {
            if count == 0 {
                return Err(Error::InvalidArgument(format!("word {word} has zero count")));
            }
            if ids.insert(word.clone(), words.len() as u32).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate word {word}")));
            }
            words.push(word);
            counts.push(count);
        }
        Ok(Vocabulary {
            words,
            ids,
            counts,
            total_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Relative corpus frequency of word `id`.
    pub fn freq(&self, id: usize) -> f64 {
        self.counts[id] as f64 / self.total_tokens as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|id| self.freq(id)).collect()
    }

    /// Write `word<TAB>count` lines in rank order, preceded by a
    /// `#total_tokens` header line.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "#total_tokens\t{}", self.total_tokens).map_err(io)?;
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{word}\t{count}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        let mut total = None;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, format!("line {}: expected word<TAB>count", n + 1)))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::format(path, format!("line {}: bad count", n + 1)))?;
            if key == "#total_tokens" {
                total = Some(value);
            } else {
                entries.push((key.to_string(), value));
            }
        }
        let total = total.unwrap_or_else(|| entries.iter().map(|(_, c)| c).sum());
        Vocabulary::from_counts(entries, total).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Keep the `v_max` most frequent words not in `stoplist`.
///
/// Ties are broken lexicographically. Frequencies are relative to every
/// token seen, including stopwords and words that do not make the cut.
pub fn build_vocabulary<I, D>(docs: I, v_max: usize, stoplist: &Stoplist) -> Result<Vocabulary>
where
    I: IntoIterator<Item = D>,
    D: AsRef<[String]>,
{
    if v_max == 0 {
        return Err(Error::InvalidArgument("v_max must be at least 1".into()));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for doc in docs {
        for tok in doc.as_ref() {
            total += 1;
            if let Some(c) = counts.get_mut(tok.as_str()) {
                *c += 1;
            } else {
                counts.insert(tok.clone(), 1);
            }
        }
    }
    let mut ranked: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(w, _)| !stoplist.contains(w))
        .collect();
    ranked.sort_unstable_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));
    if ranked.len() < v_max {
        warn!(
            "only {} eligible word types, fewer than the requested {}",
            ranked.len(),
            v_max
        );
    }
    ranked.truncate(v_max);
    Vocabulary::from_counts(ranked, total)
}
