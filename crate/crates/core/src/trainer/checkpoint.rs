//! Binary checkpoint.
//!
//! Layout (little-endian): `b"DLK1"`, `u32` length + UTF-8 config text,
//! `u32` completed epochs, `u32` T, V, D, the target then context values as
//! `f64`, `u32` metric row count with rows of `u32` epoch, `u32` slice and
//! three `f64`, then `u32` validation row count with rows of `u32` epoch,
//! `u32` slice and one `f64` (NaN for a missing value).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::TrainingConfig;
use crate::error::{Error, Result};
use crate::model::EmbeddingState;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"DLK1";

/// Per-slice training losses, averaged over the slice's batches. The prior
/// column holds the prior terms attributed to that slice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricRow {
    pub epoch: usize,
    pub slice: usize,
    pub l_pos: f64,
    pub l_neg: f64,
    pub l_prior: f64,
}

/// Scaled validation `L_pos` of one slice after an epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidRow {
    pub epoch: usize,
    pub slice: usize,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub state: EmbeddingState,
    pub config: TrainingConfig,
    /// Completed epochs.
    pub epoch: usize,
    pub metrics: Vec<MetricRow>,
    pub validation: Vec<ValidRow>,
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.buf.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<usize> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Option<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8)?)?;
        Some(
            bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect(),
        )
    }
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        let text = self.config.to_text();
        put_u32(&mut out, text.len());
        out.extend_from_slice(text.as_bytes());
        put_u32(&mut out, self.epoch);
        let s = &self.state;
        put_u32(&mut out, s.num_slices());
        put_u32(&mut out, s.vocab_size());
        put_u32(&mut out, s.dim());
        for &x in s.rho_data().iter().chain(s.alpha_data()) {
            put_f64(&mut out, x);
        }
        put_u32(&mut out, self.metrics.len());
        for m in &self.metrics {
            put_u32(&mut out, m.epoch);
            put_u32(&mut out, m.slice);
            put_f64(&mut out, m.l_pos);
            put_f64(&mut out, m.l_neg);
            put_f64(&mut out, m.l_prior);
        }
        put_u32(&mut out, self.validation.len());
        for v in &self.validation {
            put_u32(&mut out, v.epoch);
            put_u32(&mut out, v.slice);
            put_f64(&mut out, v.value.unwrap_or(f64::NAN));
        }
        out
    }

    /// Decode a checkpoint; `path` is only used in error messages.
    pub fn decode(buf: &[u8], path: &Path) -> Result<Checkpoint> {
        if buf.len() < 4 || &buf[..4] != CHECKPOINT_MAGIC {
            return Err(Error::format(path, "not a checkpoint (bad magic, expected DLK1)"));
        }
        let truncated = || Error::format(path, "truncated checkpoint");
        let mut r = Reader { buf, pos: 4 };
        let n = r.u32().ok_or_else(truncated)?;
        let text = std::str::from_utf8(r.take(n).ok_or_else(truncated)?)
            .map_err(|_| Error::format(path, "config is not UTF-8"))?;
        let config = TrainingConfig::from_text(text).map_err(|e| Error::format(path, e.to_string()))?;
        let epoch = r.u32().ok_or_else(truncated)?;
        let (nt, nv, dim) = (
            r.u32().ok_or_else(truncated)?,
            r.u32().ok_or_else(truncated)?,
            r.u32().ok_or_else(truncated)?,
        );
        let rho = r.f64s(nt * nv * dim).ok_or_else(truncated)?;
        let alpha = r.f64s(nv * dim).ok_or_else(truncated)?;
        let state = EmbeddingState::from_parts(nt, nv, dim, rho, alpha)?;
        let n = r.u32().ok_or_else(truncated)?;
        let mut metrics = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            metrics.push(MetricRow {
                epoch: r.u32().ok_or_else(truncated)?,
                slice: r.u32().ok_or_else(truncated)?,
                l_pos: r.f64().ok_or_else(truncated)?,
                l_neg: r.f64().ok_or_else(truncated)?,
                l_prior: r.f64().ok_or_else(truncated)?,
            });
        }
        let n = r.u32().ok_or_else(truncated)?;
        let mut validation = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let epoch = r.u32().ok_or_else(truncated)?;
            let slice = r.u32().ok_or_else(truncated)?;
            let value = r.f64().ok_or_else(truncated)?;
            validation.push(ValidRow {
                epoch,
                slice,
                value: (!value.is_nan()).then_some(value),
            });
        }
        if r.pos != buf.len() {
            return Err(Error::format(path, "trailing bytes after checkpoint"));
        }
        Ok(Checkpoint {
            state,
            config,
            epoch,
            metrics,
            validation,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let path = path.as_ref();
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::decode(&buf, path)
    }

    /// `epoch<TAB>slice<TAB>l_pos<TAB>l_neg<TAB>l_prior` lines.
    pub fn metrics_tsv(&self) -> String {
        let mut out = String::new();
        for m in &self.metrics {
            writeln!(out, "{}\t{}\t{}\t{}\t{}", m.epoch, m.slice, m.l_pos, m.l_neg, m.l_prior).unwrap();
        }
        out
    }

    /// `epoch<TAB>slice<TAB>value` lines, `NA` for slices without
    /// validation positions.
    pub fn validation_tsv(&self) -> String {
        let mut out = String::new();
        for v in &self.validation {
            match v.value {
                Some(x) => writeln!(out, "{}\t{}\t{x}", v.epoch, v.slice).unwrap(),
                None => writeln!(out, "{}\t{}\tNA", v.epoch, v.slice).unwrap(),
            }
        }
        out
    }
}
