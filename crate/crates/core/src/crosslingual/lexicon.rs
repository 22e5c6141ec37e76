use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Word pairs between a source and a target vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct BilingualLexicon {
    /// `(source id, target id)` in file order.
    pub pairs: Vec<(u32, u32)>,
    /// The same pairs as words.
    pub words: Vec<(String, String)>,
    /// Fraction of the source vocabulary with a pairing.
    pub coverage_src: f64,
    /// Fraction of the target vocabulary with a pairing.
    pub coverage_tgt: f64,
    /// Input pairs dropped because a word is out of vocabulary.
    pub missing: usize,
    /// Input pairs dropped because their source word was already paired.
    pub duplicates: usize,
}

impl BilingualLexicon {
    /// Resolve word pairs against both vocabularies. Pairs with an unknown
    /// word are dropped; a source word keeps its first pairing.
    pub fn from_words<I, S, T>(entries: I, src: &Vocabulary, tgt: &Vocabulary) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut pairs = Vec::new();
        let mut words = Vec::new();
        let mut seen = HashSet::new();
        let (mut missing, mut duplicates) = (0, 0);
        for (s, t) in entries {
            let (s, t) = (s.as_ref(), t.as_ref());
            let (Some(si), Some(ti)) = (src.id(s), tgt.id(t)) else {
                missing += 1;
                continue;
            };
            if !seen.insert(si) {
                duplicates += 1;
                continue;
            }
            pairs.push((si, ti));
            words.push((s.to_string(), t.to_string()));
        }
        let tgt_words: HashSet<u32> = pairs.iter().map(|p| p.1).collect();
        BilingualLexicon {
            coverage_src: seen.len() as f64 / src.len().max(1) as f64,
            coverage_tgt: tgt_words.len() as f64 / tgt.len().max(1) as f64,
            pairs,
            words,
            missing,
            duplicates,
        }
    }

    /// Read `src<TAB>tgt` lines. Blank lines and `#` comments are skipped.
    pub fn read(path: impl AsRef<Path>, src: &Vocabulary, tgt: &Vocabulary) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (s, t) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, format!("line {}: expected src<TAB>tgt", i + 1)))?;
            entries.push((s.trim().to_string(), t.trim().to_string()));
        }
        let lex = BilingualLexicon::from_words(entries, src, tgt);
        if lex.missing > 0 || lex.duplicates > 0 {
            warn!(
                "{}: dropped {} pairs with unknown words and {} duplicate source words",
                path.display(),
                lex.missing,
                lex.duplicates
            );
        }
        Ok(lex)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, t) in &self.words {
            writeln!(out, "{s}\t{t}").unwrap();
        }
        out
    }
}
