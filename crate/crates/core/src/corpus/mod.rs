//! Corpus ingestion, vocabulary, time slicing and context batches.

mod batch;
mod cache;
mod ingest;
mod slicing;
mod vocab;

pub use batch::{batches, eligible_positions, BatchStream, ContextBatch};
pub use cache::{decode as decode_cache, encode as encode_cache, read_cache, write_cache, CACHE_MAGIC};
pub use ingest::{ingest, ingest_reader, parse_line, tokenize, DatedDocument, IngestReport, DEFAULT_DATE_FORMAT};
pub use slicing::{
    slice, subsample_keep_probability, Granularity, Slice, SliceConfig, Split, TimeSlicedCorpus,
    DEFAULT_SUBSAMPLE_THRESHOLD,
};
pub use vocab::{build_vocabulary, default_stoplist, read_stoplist, Stoplist, Vocabulary};
