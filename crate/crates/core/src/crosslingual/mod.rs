//! Supervised alignment of two languages and cross-lingual drift.

mod align;
mod classify;
mod lexicon;
mod project;

pub use align::{apply_alignment, fit_alignment, normalize, AlignmentMap, MAP_MAGIC};
pub use classify::{
    classify, classify_record, cross_drift, read_records, records_tsv, BehaviorClass, Classification,
    CrossDriftRecord, CutRule, Thresholds,
};
pub use lexicon::BilingualLexicon;
pub use project::{project_2d, projection_points, Projection, ProjectionSource};
