//! Text embedding files.
//!
//! Target file: header `V D T`, then one `word<TAB>t<TAB>x_1 ... x_D` row per
//! slice and word (slice-major). Context file: header `V D`, then
//! `word<TAB>x_1 ... x_D`. Floats use the shortest round-trip decimal form,
//! so reading a file back restores the state bit for bit.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::EmbeddingState;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const RHO_FILE: &str = "rho.tsv";
pub const ALPHA_FILE: &str = "alpha.tsv";

fn push_floats(line: &mut String, xs: &[f64]) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        write!(line, "{x}").unwrap();
    }
}

pub fn rho_to_string(state: &EmbeddingState, vocab: &Vocabulary) -> String {
    let mut out = format!("{} {} {}\n", state.vocab_size(), state.dim(), state.num_slices());
    for t in 0..state.num_slices() {
        for v in 0..state.vocab_size() {
            write!(out, "{}\t{}\t", vocab.word(v), t).unwrap();
            push_floats(&mut out, state.rho(t, v));
            out.push('\n');
        }
    }
    out
}

pub fn alpha_to_string(state: &EmbeddingState, vocab: &Vocabulary) -> String {
    let mut out = format!("{} {}\n", state.vocab_size(), state.dim());
    for v in 0..state.vocab_size() {
        write!(out, "{}\t", vocab.word(v)).unwrap();
        push_floats(&mut out, state.alpha(v));
        out.push('\n');
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Write `rho.tsv` and `alpha.tsv` into `dir`.
pub fn write_embeddings(dir: impl AsRef<Path>, state: &EmbeddingState, vocab: &Vocabulary) -> Result<()> {
    let dir = dir.as_ref();
    if state.vocab_size() != vocab.len() {
        return Err(Error::Shape(format!(
            "state has {} words, vocabulary {}",
            state.vocab_size(),
            vocab.len()
        )));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_text(&dir.join(RHO_FILE), &rho_to_string(state, vocab))?;
    write_text(&dir.join(ALPHA_FILE), &alpha_to_string(state, vocab))
}

fn parse_floats(field: &str, dim: usize, path: &Path, line: usize) -> Result<Vec<f64>> {
    let xs: Vec<f64> = field
        .split(' ')
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::format(path, format!("line {line}: bad float")))?;
    if xs.len() != dim {
        return Err(Error::format(path, format!("line {line}: expected {dim} values")));
    }
    Ok(xs)
}

fn header(lines: &mut impl Iterator<Item = std::io::Result<String>>, path: &Path, n: usize) -> Result<Vec<usize>> {
    let first = lines
        .next()
        .ok_or_else(|| Error::format(path, "empty file"))?
        .map_err(|e| Error::io(path, e))?;
    let fields: Vec<usize> = first
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::format(path, "bad header"))?;
    if fields.len() != n {
        return Err(Error::format(path, "bad header"));
    }
    Ok(fields)
}

/// Read a state written by [`write_embeddings`]. Words are resolved through
/// `vocab`, so the rows may appear in any order.
pub fn read_embeddings(dir: impl AsRef<Path>, vocab: &Vocabulary) -> Result<EmbeddingState> {
    let dir = dir.as_ref();
    let rho_path = dir.join(RHO_FILE);
    let alpha_path = dir.join(ALPHA_FILE);

    let file = File::open(&rho_path).map_err(|e| Error::io(&rho_path, e))?;
    let mut lines = BufReader::new(file).lines();
    let h = header(&mut lines, &rho_path, 3)?;
    let (nv, dim, nt) = (h[0], h[1], h[2]);
    if nv != vocab.len() {
        return Err(Error::format(&rho_path, format!("{nv} words but vocabulary has {}", vocab.len())));
    }
    let mut state = EmbeddingState::zeros(nt, nv, dim);
    let mut seen = vec![false; nt * nv];
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(&rho_path, e))?;
        let lineno = i + 2;
        let mut parts = line.splitn(3, '\t');
        let (Some(word), Some(t), Some(xs)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::format(&rho_path, format!("line {lineno}: expected 3 fields")));
        };
        let v = vocab
            .id(word)
            .ok_or_else(|| Error::format(&rho_path, format!("line {lineno}: unknown word {word}")))?
            as usize;
        let t: usize = t
            .parse()
            .ok()
            .filter(|&t| t < nt)
            .ok_or_else(|| Error::format(&rho_path, format!("line {lineno}: bad slice")))?;
        state.rho_mut(t, v).copy_from_slice(&parse_floats(xs, dim, &rho_path, lineno)?);
        seen[t * nv + v] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::format(&rho_path, "missing rows"));
    }

    let file = File::open(&alpha_path).map_err(|e| Error::io(&alpha_path, e))?;
    let mut lines = BufReader::new(file).lines();
    let h = header(&mut lines, &alpha_path, 2)?;
    if h != [nv, dim] {
        return Err(Error::format(&alpha_path, "header disagrees with rho file"));
    }
    let mut seen = vec![false; nv];
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(&alpha_path, e))?;
        let lineno = i + 2;
        let (word, xs) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(&alpha_path, format!("line {lineno}: expected 2 fields")))?;
        let v = vocab
            .id(word)
            .ok_or_else(|| Error::format(&alpha_path, format!("line {lineno}: unknown word {word}")))?
            as usize;
        state.alpha_mut(v).copy_from_slice(&parse_floats(xs, dim, &alpha_path, lineno)?);
        seen[v] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::format(&alpha_path, "missing rows"));
    }
    Ok(state)
}
