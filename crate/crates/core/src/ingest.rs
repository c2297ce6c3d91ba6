//! Loading name-frequency tables and pair records from CSV.
//!
//! Rows are never repaired: a malformed row is counted under a rejection
//! reason and dropped. Reading is a single streaming pass; only the
//! aggregate is held in memory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use rustc_hash::FxHashMap;
use serde::Serialize;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::pairs::{JointBuilder, JointDist};

/// Canonical form of a name: accents stripped, uppercased, whitespace
/// trimmed and collapsed. Hyphens and apostrophes are kept, so
/// `JEAN-PIERRE` and `JEAN PIERRE` stay distinct.
pub fn normalize_name(raw: &str) -> String {
    let stripped: String = raw.nfd().filter(|c| !is_combining_mark(*c)).collect();
    // Uppercasing can reintroduce decomposable characters (e.g. ǰ → J̌).
    let upper: String = stripped
        .to_uppercase()
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .collect();
    upper.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    /// Too few fields for the required columns.
    MalformedRow,
    InvalidUtf8,
    /// Frequency-table label is empty after normalization.
    EmptyLabel,
    /// A pair record has an empty first or last name after normalization.
    EmptyField,
    NonIntegerCount,
    NegativeCount,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Row accounting for one load. `rows_read = rows_kept + rows_rejected`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub rows_kept: u64,
    pub rows_rejected: u64,
    pub rejection_reasons: BTreeMap<String, u64>,
}

impl IngestReport {
    fn keep(&mut self) {
        self.rows_read += 1;
        self.rows_kept += 1;
    }

    fn reject(&mut self, reason: RejectReason) {
        self.rows_read += 1;
        self.rows_rejected += 1;
        *self.rejection_reasons.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn rejected_for(&self, reason: RejectReason) -> u64 {
        self.rejection_reasons.get(&reason.to_string()).copied().unwrap_or(0)
    }
}

/// Labels with merged counts, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub report: IngestReport,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::FileUnreadable {
            path: path.to_path_buf(),
            source,
        })
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(input)
}

fn locate_columns<R: Read>(
    rdr: &mut csv::Reader<R>,
    origin: &Path,
    wanted: &[&str],
) -> Result<Vec<usize>> {
    let headers = match rdr.byte_headers() {
        Ok(h) => h.clone(),
        Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => {
            return Err(Error::FileUnreadable {
                path: origin.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let names: Vec<String> = headers
        .iter()
        .map(|h| {
            String::from_utf8_lossy(h)
                .trim_start_matches('\u{feff}')
                .trim()
                .to_ascii_lowercase()
        })
        .collect();
    let mut found = Vec::with_capacity(wanted.len());
    let mut missing = Vec::new();
    for w in wanted {
        match names.iter().position(|n| n == w) {
            Some(i) => found.push(i),
            None => missing.push(*w),
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(Error::MissingHeader {
            path: origin.to_path_buf(),
            missing: missing.join(","),
        })
    }
}

fn field(rec: &csv::ByteRecord, i: usize) -> std::result::Result<&str, RejectReason> {
    let bytes = rec.get(i).ok_or(RejectReason::MalformedRow)?;
    std::str::from_utf8(bytes).map_err(|_| RejectReason::InvalidUtf8)
}

fn parse_count(raw: &str) -> std::result::Result<u64, RejectReason> {
    let s = raw.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    if let Ok(v) = s.parse::<i128>() {
        return match v {
            v if v < 0 => Err(RejectReason::NegativeCount),
            // "-0", "+0"
            0 => Ok(0),
            _ => Err(RejectReason::NonIntegerCount),
        };
    }
    match s.parse::<f64>() {
        Ok(v) if v < 0.0 => Err(RejectReason::NegativeCount),
        _ => Err(RejectReason::NonIntegerCount),
    }
}

/// Reads a `label,count` table from any reader; `origin` names it in errors.
pub fn read_frequency_table<R: Read>(input: R, origin: &Path) -> Result<FrequencyTable> {
    let mut rdr = csv_reader(input);
    let cols = locate_columns(&mut rdr, origin, &["label", "count"])?;
    let (label_col, count_col) = (cols[0], cols[1]);

    let mut report = IngestReport::default();
    let mut index: FxHashMap<String, usize> = FxHashMap::default();
    let mut labels = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    let mut rec = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut rec)? {
        let row = (|| {
            let label = normalize_name(field(&rec, label_col)?);
            let count = parse_count(field(&rec, count_col)?)?;
            if label.is_empty() {
                return Err(RejectReason::EmptyLabel);
            }
            Ok((label, count))
        })();
        match row {
            Ok((label, count)) => {
                report.keep();
                match index.get(&label) {
                    Some(&i) => counts[i] += count,
                    None => {
                        index.insert(label.clone(), labels.len());
                        labels.push(label);
                        counts.push(count);
                    }
                }
            }
            Err(reason) => report.reject(reason),
        }
    }
    Ok(FrequencyTable {
        labels,
        counts,
        report,
    })
}

/// Loads a UTF-8 CSV with header `label,count`; extra columns are ignored.
pub fn load_frequency_table(path: impl AsRef<Path>) -> Result<FrequencyTable> {
    let path = path.as_ref();
    read_frequency_table(open(path)?, path)
}

/// Reads `first,last` pair records from any reader.
pub fn read_pair_records<R: Read>(input: R, origin: &Path) -> Result<(JointDist, IngestReport)> {
    let mut rdr = csv_reader(input);
    let cols = locate_columns(&mut rdr, origin, &["first", "last"])?;
    let (first_col, last_col) = (cols[0], cols[1]);

    let mut report = IngestReport::default();
    let mut builder = JointBuilder::new();
    let mut rec = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut rec)? {
        let row = (|| {
            let first = normalize_name(field(&rec, first_col)?);
            let last = normalize_name(field(&rec, last_col)?);
            if first.is_empty() || last.is_empty() {
                return Err(RejectReason::EmptyField);
            }
            Ok((first, last))
        })();
        match row {
            Ok((first, last)) => {
                report.keep();
                builder.add(&first, &last);
            }
            Err(reason) => report.reject(reason),
        }
    }
    if report.rows_kept == 0 {
        return Err(Error::EmptyAfterCleaning(PathBuf::from(origin)));
    }
    Ok((builder.build()?, report))
}

/// Loads voter-file-style records; columns other than `first` and `last`
/// (such as a birth date) are ignored.
pub fn load_pair_records(path: impl AsRef<Path>) -> Result<(JointDist, IngestReport)> {
    let path = path.as_ref();
    read_pair_records(open(path)?, path)
}
