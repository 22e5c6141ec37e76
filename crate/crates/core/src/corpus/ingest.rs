use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use log::warn;

use crate::error::{Error, Result};

pub const DEFAULT_DATE_FORMAT: &str = "%Y-%m-%d";

/// One dated record of the input corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatedDocument {
    pub date: NaiveDate,
    pub tokens: Vec<String>,
}

/// Documents read from one source plus line accounting.
#[derive(Clone, Debug, Default)]
pub struct IngestReport {
    pub documents: Vec<DatedDocument>,
    pub total_lines: usize,
    pub malformed: usize,
}

/// Lowercase, split on whitespace and strip punctuation at token edges.
///
/// Inner punctuation is kept, so `al-qaïda` and `e-mail` stay single tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|tok| !tok.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Parse one `date<TAB>text` record. Returns `None` for malformed lines.
pub fn parse_line(line: &str, date_format: &str) -> Option<DatedDocument> {
    let (date, text) = line.split_once('\t')?;
    let date = NaiveDate::parse_from_str(date.trim(), date_format).ok()?;
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return None;
    }
    Some(DatedDocument { date, tokens })
}

/// Read documents from any buffered reader. `source` names the input in errors.
pub fn ingest_reader<R: BufRead>(
    reader: R,
    date_format: &str,
    source: &Path,
) -> Result<IngestReport> {
    let mut report = IngestReport::default();
    let mut first_bad = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        report.total_lines += 1;
        match parse_line(line.trim_end_matches('\r'), date_format) {
            Some(doc) => report.documents.push(doc),
            None => {
                if report.malformed == 0 {
                    first_bad = lineno + 1;
                }
                report.malformed += 1;
            }
        }
    }

    if report.malformed * 2 > report.total_lines {
        return Err(Error::TooManyMalformed {
            path: source.to_path_buf(),
            malformed: report.malformed,
            total: report.total_lines,
            first_bad,
        });
    }
    if report.malformed > 0 {
        warn!(
            "{}: skipped {} malformed line(s), first at line {}",
            source.display(),
            report.malformed,
            first_bad
        );
    }
    Ok(report)
}

/// Read a line-delimited `YYYY-MM-DD<TAB>text` file.
pub fn ingest(path: impl AsRef<Path>, date_format: &str) -> Result<IngestReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(BufReader::new(file), date_format, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<IngestReport> {
        ingest_reader(text.as_bytes(), DEFAULT_DATE_FORMAT, Path::new("mem"))
    }

    #[test]
    fn parses_a_record() {
        let doc = parse_line("1987-01-01\thello world", DEFAULT_DATE_FORMAT).unwrap();
        assert_eq!(doc.date, NaiveDate::from_ymd_opt(1987, 1, 1).unwrap());
        assert_eq!(doc.tokens, vec!["hello", "world"]);
    }

    #[test]
    fn empty_line_counts_as_malformed() {
        let report = read("1987-01-01\ta b\n\n1987-01-02\tc\n").unwrap();
        assert_eq!(report.documents.len(), 2);
        assert_eq!(report.malformed, 1);
    }

    #[test]
    fn keeps_file_order() {
        let report = read("1990-05-01\tthird\n1987-01-01\tfirst\n1988-01-01\tsecond\n").unwrap();
        let words: Vec<_> = report
            .documents
            .iter()
            .map(|d| d.tokens[0].as_str())
            .collect();
        assert_eq!(words, ["third", "first", "second"]);
    }

    #[test]
    fn mostly_garbage_is_fatal() {
        let err = read("junk\nmore junk\n1987-01-01\tok\n").unwrap_err();
        assert!(matches!(err, Error::TooManyMalformed { malformed: 2, .. }));
    }

    #[test]
    fn tokenizer_strips_edges_only() {
        assert_eq!(
            tokenize("  \"Al-Qaïda,\" said (Bush)... e-mail!"),
            vec!["al-qaïda", "said", "bush", "e-mail"]
        );
        assert!(tokenize("-- ... !!").is_empty());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = ingest("/nonexistent/driftlab/input.tsv", DEFAULT_DATE_FORMAT).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
