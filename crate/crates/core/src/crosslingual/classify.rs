use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{dot, sq_dist, sq_norm, EmbeddingState};

/// Drift of one translation pair within and across two aligned models.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossDriftRecord {
    pub src: String,
    pub tgt: String,
    /// Euclidean drift of the source word between the two slices.
    pub drift_src: f64,
    pub drift_tgt: f64,
    /// Cosine between the pair's vectors at the first slice.
    pub sim_first: f64,
    pub sim_last: f64,
    /// `|sim_last - sim_first|`.
    pub sim_drift: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let n = (sq_norm(a) * sq_norm(b)).sqrt();
    if n == 0.0 {
        0.0
    } else {
        (dot(a, b) / n).clamp(-1.0, 1.0)
    }
}

/// Records for every pair whose words are in both vocabularies, plus the
/// number of pairs skipped.
pub fn cross_drift<S: AsRef<str>, T: AsRef<str>>(
    src: (&EmbeddingState, &Vocabulary),
    tgt: (&EmbeddingState, &Vocabulary),
    pairs: &[(S, T)],
    t0: usize,
    t_last: usize,
) -> Result<(Vec<CrossDriftRecord>, usize)> {
    let (sm, sv) = src;
    let (tm, tv) = tgt;
    if sm.dim() != tm.dim() {
        return Err(Error::Shape(format!("source dimension {}, target {}", sm.dim(), tm.dim())));
    }
    for m in [sm, tm] {
        if t0 >= m.num_slices() || t_last >= m.num_slices() {
            return Err(Error::InvalidArgument(format!(
                "slices {t0} and {t_last} must be below {}",
                m.num_slices()
            )));
        }
    }
    let mut records = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for (s, t) in pairs {
        let (s, t) = (s.as_ref(), t.as_ref());
        let (Some(si), Some(ti)) = (sv.id(s), tv.id(t)) else {
            skipped += 1;
            continue;
        };
        let (si, ti) = (si as usize, ti as usize);
        let sim_first = cosine(sm.rho(t0, si), tm.rho(t0, ti));
        let sim_last = cosine(sm.rho(t_last, si), tm.rho(t_last, ti));
        records.push(CrossDriftRecord {
            src: s.to_string(),
            tgt: t.to_string(),
            drift_src: sq_dist(sm.rho(t_last, si), sm.rho(t0, si)).sqrt(),
            drift_tgt: sq_dist(tm.rho(t_last, ti), tm.rho(t0, ti)).sqrt(),
            sim_first,
            sim_last,
            sim_drift: (sim_last - sim_first).abs(),
        });
    }
    Ok((records, skipped))
}

const RECORD_HEADER: &str = "src\ttgt\tdrift_src\tdrift_tgt\tsim_first\tsim_last\tsim_drift";

pub fn records_tsv(records: &[CrossDriftRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.src, r.tgt, r.drift_src, r.drift_tgt, r.sim_first, r.sim_last, r.sim_drift
        )
        .unwrap();
    }
    out
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<CrossDriftRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || line == RECORD_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(Error::format(path, format!("line {}: expected 7 fields", i + 1)));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::format(path, format!("line {}: bad number {s:?}", i + 1)))
        };
        out.push(CrossDriftRecord {
            src: f[0].to_string(),
            tgt: f[1].to_string(),
            drift_src: num(f[2])?,
            drift_tgt: num(f[3])?,
            sim_first: num(f[4])?,
            sim_last: num(f[5])?,
            sim_drift: num(f[6])?,
        });
    }
    Ok(out)
}

/// Cross-lingual behavior of a translation pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BehaviorClass {
    /// Both words drift and stay as similar or grow closer.
    CoDrift,
    /// Both words drift and grow apart.
    DivergentDrift,
    /// Only the source word drifts.
    SingleDriftSrc,
    /// Only the target word drifts.
    SingleDriftTgt,
    Stable,
}

impl BehaviorClass {
    pub const ALL: [BehaviorClass; 5] = [
        BehaviorClass::CoDrift,
        BehaviorClass::DivergentDrift,
        BehaviorClass::SingleDriftSrc,
        BehaviorClass::SingleDriftTgt,
        BehaviorClass::Stable,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BehaviorClass::CoDrift => "1",
            BehaviorClass::DivergentDrift => "2",
            BehaviorClass::SingleDriftSrc => "3a",
            BehaviorClass::SingleDriftTgt => "3b",
            BehaviorClass::Stable => "4",
        }
    }

    fn index(self) -> usize {
        BehaviorClass::ALL.iter().position(|&c| c == self).unwrap()
    }
}

impl fmt::Display for BehaviorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How the three cuts are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum CutRule {
    /// Mean of each quantity over the records.
    #[default]
    Mean,
    /// Nearest-rank percentile in `[0, 100]` of each quantity.
    Percentile(f64),
    Fixed(Thresholds),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub drift_src: f64,
    pub drift_tgt: f64,
    pub sim_drift: f64,
}

fn percentile(values: &mut [f64], p: f64) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let rank = ((p / 100.0) * values.len() as f64).ceil() as usize;
    values[rank.clamp(1, values.len()) - 1]
}

impl CutRule {
    pub fn thresholds(&self, records: &[CrossDriftRecord]) -> Result<Thresholds> {
        if records.is_empty() {
            return Err(Error::InvalidArgument("no records to classify".into()));
        }
        let column = |f: fn(&CrossDriftRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
        let cols = [column(|r| r.drift_src), column(|r| r.drift_tgt), column(|r| r.sim_drift)];
        let cut = |mut c: Vec<f64>| match *self {
            CutRule::Mean => c.iter().sum::<f64>() / c.len() as f64,
            CutRule::Percentile(p) => percentile(&mut c, p),
            CutRule::Fixed(_) => unreachable!(),
        };
        Ok(match *self {
            CutRule::Fixed(t) => t,
            CutRule::Percentile(p) if !(0.0..=100.0).contains(&p) => {
                return Err(Error::InvalidArgument(format!("percentile {p} outside [0, 100]")))
            }
            _ => {
                let [a, b, c] = cols;
                Thresholds {
                    drift_src: cut(a),
                    drift_tgt: cut(b),
                    sim_drift: cut(c),
                }
            }
        })
    }
}

/// Class of one record under the given cuts.
pub fn classify_record(r: &CrossDriftRecord, cuts: &Thresholds) -> BehaviorClass {
    let src = r.drift_src > cuts.drift_src;
    let tgt = r.drift_tgt > cuts.drift_tgt;
    match (src, tgt) {
        (true, true) if r.sim_first - r.sim_last > cuts.sim_drift => BehaviorClass::DivergentDrift,
        (true, true) => BehaviorClass::CoDrift,
        (true, false) => BehaviorClass::SingleDriftSrc,
        (false, true) => BehaviorClass::SingleDriftTgt,
        (false, false) => BehaviorClass::Stable,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub cuts: Thresholds,
    pub classes: Vec<BehaviorClass>,
    /// Share of each class, in [`BehaviorClass::ALL`] order.
    pub proportions: [f64; 5],
}

impl Classification {
    pub fn counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for c in &self.classes {
            counts[c.index()] += 1;
        }
        counts
    }

    pub fn proportion(&self, class: BehaviorClass) -> f64 {
        self.proportions[class.index()]
    }

    /// `src<TAB>tgt<TAB>class` rows.
    pub fn to_tsv(&self, records: &[CrossDriftRecord]) -> String {
        let mut out = String::from("src\ttgt\tclass\n");
        for (r, c) in records.iter().zip(&self.classes) {
            writeln!(out, "{}\t{}\t{c}", r.src, r.tgt).unwrap();
        }
        out
    }

    /// `class<TAB>count<TAB>proportion` rows.
    pub fn summary_tsv(&self) -> String {
        let mut out = String::from("class\tcount\tproportion\n");
        for (c, (n, p)) in BehaviorClass::ALL.iter().zip(self.counts().iter().zip(&self.proportions)) {
            writeln!(out, "{c}\t{n}\t{p}").unwrap();
        }
        out
    }
}

/// Assign every record a class. The last non-empty class takes the
/// remainder of the proportions, so they sum to exactly one.
pub fn classify(records: &[CrossDriftRecord], rule: CutRule) -> Result<Classification> {
    let cuts = rule.thresholds(records)?;
    let classes: Vec<BehaviorClass> = records.iter().map(|r| classify_record(r, &cuts)).collect();
    let mut c = Classification {
        cuts,
        classes,
        proportions: [0.0; 5],
    };
    let counts = c.counts();
    let n = records.len() as f64;
    let last = counts.iter().rposition(|&k| k > 0).unwrap();
    let mut sum = 0.0;
    for i in 0..last {
        c.proportions[i] = counts[i] as f64 / n;
        sum += c.proportions[i];
    }
    c.proportions[last] = 1.0 - sum;
    Ok(c)
}
