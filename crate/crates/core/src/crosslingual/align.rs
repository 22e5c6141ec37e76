//! Orthogonal map between two embedding spaces.
//!
//! `map.bin` layout (little-endian): `b"DLA1"`, `u32` D, D×D `f64` row-major,
//! `f64` residual, `u32` pair count, then each pair as two length-prefixed
//! UTF-8 words.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::BilingualLexicon;
use crate::error::{Error, Result};
use crate::model::{sq_norm, EmbeddingState};

pub const MAP_MAGIC: &[u8; 4] = b"DLA1";

/// Smallest singular value of the cross-covariance, relative to the
/// largest, below which the fit is refused.
const RANK_TOLERANCE: f64 = 1e-12;

/// Scale every target and context row to unit length. Zero context rows
/// are left as they are.
pub fn normalize(state: &EmbeddingState) -> Result<EmbeddingState> {
    let mut out = state.clone();
    for t in 0..state.num_slices() {
        for v in 0..state.vocab_size() {
            let n = sq_norm(state.rho(t, v)).sqrt();
            if n == 0.0 {
                return Err(Error::ZeroNorm(format!("#{v} at slice {t}")));
            }
            out.rho_mut(t, v).iter_mut().for_each(|x| *x /= n);
        }
    }
    for v in 0..state.vocab_size() {
        let n = sq_norm(state.alpha(v)).sqrt();
        if n > 0.0 {
            out.alpha_mut(v).iter_mut().for_each(|x| *x /= n);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentMap {
    /// Maps a source vector `x` to `q * x` in target space.
    pub q: DMatrix<f64>,
    /// Mean of `||q x - y||^2` over the lexicon, on unit vectors.
    pub residual: f64,
    /// Word pairs the map was fit on.
    pub lexicon: Vec<(String, String)>,
}

fn unit_row(state: &EmbeddingState, v: u32, word: &str) -> Result<DVector<f64>> {
    let x = state.rho(0, v as usize);
    let n = sq_norm(x).sqrt();
    if n == 0.0 {
        return Err(Error::ZeroNorm(word.to_string()));
    }
    Ok(DVector::from_iterator(x.len(), x.iter().map(|a| a / n)))
}

/// Least-squares orthogonal map from the first slice of `src` onto the first
/// slice of `tgt`, fit on unit-normalized lexicon vectors.
pub fn fit_alignment(src: &EmbeddingState, tgt: &EmbeddingState, lexicon: &BilingualLexicon) -> Result<AlignmentMap> {
    let dim = src.dim();
    if tgt.dim() != dim {
        return Err(Error::Shape(format!("source dimension {dim}, target {}", tgt.dim())));
    }
    if lexicon.len() < dim {
        return Err(Error::Underdetermined {
            pairs: lexicon.len(),
            dim,
        });
    }
    let mut xs = Vec::with_capacity(lexicon.len());
    let mut ys = Vec::with_capacity(lexicon.len());
    let mut cross = DMatrix::<f64>::zeros(dim, dim);
    for (&(s, t), (sw, tw)) in lexicon.pairs.iter().zip(&lexicon.words) {
        let x = unit_row(src, s, sw)?;
        let y = unit_row(tgt, t, tw)?;
        cross.ger(1.0, &y, &x, 1.0);
        xs.push(x);
        ys.push(y);
    }
    let svd = cross.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(Error::RankDeficient(smin));
    }
    let q = svd.u.unwrap() * svd.v_t.unwrap();
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (&q * x - y).norm_squared())
        .sum::<f64>()
        / xs.len() as f64;
    Ok(AlignmentMap {
        q,
        residual,
        lexicon: lexicon.words.clone(),
    })
}

impl AlignmentMap {
    /// `||q^T q - I||_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.q.nrows();
        (self.q.transpose() * &self.q - DMatrix::<f64>::identity(n, n)).norm()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAP_MAGIC);
        let dim = self.q.nrows();
        out.extend_from_slice(&(dim as u32).to_le_bytes());
        for i in 0..dim {
            for j in 0..dim {
                out.extend_from_slice(&self.q[(i, j)].to_le_bytes());
            }
        }
        out.extend_from_slice(&self.residual.to_le_bytes());
        out.extend_from_slice(&(self.lexicon.len() as u32).to_le_bytes());
        for (s, t) in &self.lexicon {
            for w in [s, t] {
                out.extend_from_slice(&(w.len() as u32).to_le_bytes());
                out.extend_from_slice(w.as_bytes());
            }
        }
        out
    }

    pub fn decode(buf: &[u8], path: &Path) -> Result<AlignmentMap> {
        if buf.len() < 4 || &buf[..4] != MAP_MAGIC {
            return Err(Error::format(path, "not an alignment map (bad magic, expected DLA1)"));
        }
        let truncated = || Error::format(path, "truncated alignment map");
        let mut pos = 4;
        let mut take = |n: usize| -> Result<&[u8]> {
            let end = pos + n;
            let s = buf.get(pos..end).ok_or_else(truncated)?;
            pos = end;
            Ok(s)
        };
        let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let vals = take(dim.checked_mul(dim).and_then(|n| n.checked_mul(8)).ok_or_else(truncated)?)?;
        let q = DMatrix::from_row_iterator(dim, dim, vals.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())));
        let residual = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let n = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut lexicon = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let mut word = || -> Result<String> {
                let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
                String::from_utf8(take(len)?.to_vec()).map_err(|_| Error::format(path, "word is not UTF-8"))
            };
            let s = word()?;
            let t = word()?;
            lexicon.push((s, t));
        }
        if pos != buf.len() {
            return Err(Error::format(path, "trailing bytes after alignment map"));
        }
        Ok(AlignmentMap { q, residual, lexicon })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<AlignmentMap> {
        let path = path.as_ref();
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        AlignmentMap::decode(&buf, path)
    }
}

/// Left-multiply every target and context row by the map.
pub fn apply_alignment(map: &AlignmentMap, state: &EmbeddingState) -> Result<EmbeddingState> {
    let dim = state.dim();
    if map.q.nrows() != dim {
        return Err(Error::Shape(format!("map is {0}x{0}, state dimension {dim}", map.q.nrows())));
    }
    let mut out = state.clone();
    let rotate = |x: &mut [f64]| {
        let y = &map.q * DVector::from_column_slice(x);
        x.copy_from_slice(y.as_slice());
    };
    out.rho_data_mut().chunks_exact_mut(dim).for_each(rotate);
    out.alpha_data_mut().chunks_exact_mut(dim).for_each(rotate);
    Ok(out)
}
