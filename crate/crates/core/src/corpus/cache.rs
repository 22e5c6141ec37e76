//! Binary cache of a sliced corpus.
//!
//! Layout (little-endian): `b"DLC1"`, `u32` V, `u32` T, then for every slice
//! `u32` n, n × `u32` token ids, n × `u8` split tags, `u32` m, m × `u32`
//! document start offsets. A trailer holds the granularity as `u8` kind
//! (0 annual, 1 monthly, 2 days) and `u32` period length.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Granularity, Slice, Split, TimeSlicedCorpus};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"DLC1";

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn encode(corpus: &TimeSlicedCorpus) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    put_u32(&mut out, corpus.vocab_size as u32);
    put_u32(&mut out, corpus.slices.len() as u32);
    for s in &corpus.slices {
        put_u32(&mut out, s.tokens.len() as u32);
        for &id in &s.tokens {
            put_u32(&mut out, id);
        }
        out.extend(s.splits.iter().map(|&t| t as u8));
        put_u32(&mut out, s.doc_starts.len() as u32);
        for &d in &s.doc_starts {
            put_u32(&mut out, d);
        }
    }
    let (kind, param) = match corpus.granularity {
        Granularity::Annual => (0u8, 0),
        Granularity::Monthly => (1, 0),
        Granularity::Days(d) => (2, d),
    };
    out.push(kind);
    put_u32(&mut out, param);
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.buf.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }
}

pub fn decode(buf: &[u8], path: &Path) -> Result<TimeSlicedCorpus> {
    let bad = |reason: &str| Error::format(path, reason.to_string());
    if buf.len() < 4 || &buf[..4] != CACHE_MAGIC {
        return Err(bad("not a corpus cache (bad magic, expected DLC1)"));
    }
    let mut cur = Cursor { buf, pos: 4 };
    let truncated = || bad("truncated corpus cache");
    let vocab_size = cur.u32().ok_or_else(truncated)? as usize;
    let num_slices = cur.u32().ok_or_else(truncated)? as usize;
    let mut slices = Vec::with_capacity(num_slices.min(1 << 16));
    for _ in 0..num_slices {
        let n = cur.u32().ok_or_else(truncated)? as usize;
        let tokens: Vec<u32> = cur
            .take(n.checked_mul(4).ok_or_else(truncated)?)
            .ok_or_else(truncated)?
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        if tokens.iter().any(|&id| id as usize >= vocab_size) {
            return Err(bad("token id out of vocabulary range"));
        }
        let splits = cur
            .take(n)
            .ok_or_else(truncated)?
            .iter()
            .map(|&t| Split::from_tag(t))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("invalid split tag"))?;
        let m = cur.u32().ok_or_else(truncated)? as usize;
        let doc_starts: Vec<u32> = (0..m)
            .map(|_| cur.u32())
            .collect::<Option<_>>()
            .ok_or_else(truncated)?;
        let sorted = doc_starts.windows(2).all(|w| w[0] < w[1]);
        let anchored = doc_starts.first().is_none_or(|&s| s == 0) && (n == 0 || m > 0);
        if !sorted || !anchored || doc_starts.last().is_some_and(|&s| s as usize >= n) {
            return Err(bad("invalid document offsets"));
        }
        slices.push(Slice {
            tokens,
            splits,
            doc_starts,
        });
    }
    let kind = cur.take(1).ok_or_else(truncated)?[0];
    let param = cur.u32().ok_or_else(truncated)?;
    let granularity = match (kind, param) {
        (0, _) => Granularity::Annual,
        (1, _) => Granularity::Monthly,
        (2, d) if d > 0 => Granularity::Days(d),
        _ => return Err(bad("invalid granularity")),
    };
    if cur.pos != buf.len() {
        return Err(bad("trailing bytes after corpus cache"));
    }
    Ok(TimeSlicedCorpus {
        vocab_size,
        granularity,
        slices,
    })
}

pub fn write_cache(corpus: &TimeSlicedCorpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(&encode(corpus))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_cache(path: impl AsRef<Path>) -> Result<TimeSlicedCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    decode(&buf, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_slice() -> impl Strategy<Value = Slice> {
        prop::collection::vec((0u32..50, 0u8..3), 0..40).prop_flat_map(|toks| {
            let n = toks.len();
            let starts = if n == 0 {
                Just(vec![]).boxed()
            } else {
                prop::collection::btree_set(1..n.max(2) as u32, 0..4)
                    .prop_map(move |s| {
                        std::iter::once(0)
                            .chain(s.into_iter().filter(|&x| (x as usize) < n))
                            .collect()
                    })
                    .boxed()
            };
            starts.prop_map(move |doc_starts| Slice {
                tokens: toks.iter().map(|t| t.0).collect(),
                splits: toks.iter().map(|t| Split::from_tag(t.1).unwrap()).collect(),
                doc_starts,
            })
        })
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(slices in prop::collection::vec(arb_slice(), 0..4), days in 0u32..4) {
            let granularity = match days {
                0 => Granularity::Annual,
                1 => Granularity::Monthly,
                d => Granularity::Days(d),
            };
            let corpus = TimeSlicedCorpus { vocab_size: 50, granularity, slices };
            let bytes = encode(&corpus);
            prop_assert_eq!(decode(&bytes, Path::new("x")).unwrap(), corpus);
        }
    }

    #[test]
    fn bad_magic_names_file() {
        let err = decode(b"NOPE\0\0\0\0", Path::new("corrupt.dlc")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("corrupt.dlc") && msg.contains("magic"), "{msg}");
    }

    #[test]
    fn truncation_detected() {
        let corpus = TimeSlicedCorpus {
            vocab_size: 3,
            granularity: Granularity::Annual,
            slices: vec![Slice {
                tokens: vec![0, 1, 2],
                splits: vec![Split::Train; 3],
                doc_starts: vec![0],
            }],
        };
        let bytes = encode(&corpus);
        assert!(decode(&bytes[..bytes.len() - 3], Path::new("x")).is_err());
    }
}
