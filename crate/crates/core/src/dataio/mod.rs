//! Loading, validation, and (re)serialization of the external inputs:
//! survey CSVs, emission factor tables, station coordinates.
//!
//! All loaders are strict: a malformed row is an error naming the file and
//! line, not a silently skipped record. Loaded objects are sorted into a
//! canonical order, so a survey written back out with the `write_*`
//! functions and reloaded compares equal to the original.

mod factors;
mod stations;
mod survey;
mod validate;

pub use factors::{load_factor_tables, write_factor_tables, FactorTables, GasolineFactor};
pub use stations::{load_stations, write_stations, Station, StationSet};
pub use survey::{
    load_survey, write_survey, BodyStyle, FuelType, HouseholdRecord, OdometerReading, RawSurvey,
    SurveyIndex, SurveyPaths, TripDayRecord, VehicleRecord,
};
pub use validate::{validate_dataset, Issue, IssueCategory, Severity, ValidationReport};

use std::path::PathBuf;

/// Errors raised while loading external inputs.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file}:{line}: {reason}")]
    MalformedRow {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("{file}:{line}: {reason}")]
    DanglingReference {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("{file}:{line}: duplicate key {key}")]
    DuplicateKey {
        file: String,
        line: u64,
        key: String,
    },
    #[error("{file}:{line}: negative rate {value}")]
    NegativeRate { file: String, line: u64, value: f64 },
    #[error("{file}: missing `# ldt_split_threshold_lb=<pounds>` header comment")]
    MissingLdtThreshold { file: String },
}

/// Shared CSV-reading plumbing: opens `path`, checks the header row
/// matches `expected` exactly, and returns each data record with the line
/// number it started on. `#` lines are treated as comments (the gasoline
/// factor file carries its threshold in one).
pub(crate) fn read_rows(
    path: &std::path::Path,
    expected: &[&str],
) -> Result<Vec<(u64, csv::StringRecord)>, DataError> {
    let file_label = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => DataError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => DataError::MalformedRow {
                file: file_label.clone(),
                line: 1,
                reason: e.to_string(),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| DataError::MalformedRow {
            file: file_label.clone(),
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(DataError::MalformedRow {
            file: file_label,
            line: 1,
            reason: format!(
                "header mismatch: expected `{}`, got `{}`",
                expected.join(","),
                got.join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            DataError::MalformedRow {
                file: file_label.clone(),
                line,
                reason: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != expected.len() {
            return Err(DataError::MalformedRow {
                file: file_label.clone(),
                line,
                reason: format!("expected {} fields, got {}", expected.len(), record.len()),
            });
        }
        rows.push((line, record));
    }
    Ok(rows)
}

/// Field-level parse helpers that keep file/line context on every error.
pub(crate) struct FieldCtx<'a> {
    pub file: &'a str,
    pub line: u64,
}

impl FieldCtx<'_> {
    pub(crate) fn bad(&self, reason: String) -> DataError {
        DataError::MalformedRow {
            file: self.file.to_string(),
            line: self.line,
            reason,
        }
    }

    pub(crate) fn f64(&self, name: &str, raw: &str) -> Result<f64, DataError> {
        let v: f64 = raw
            .parse()
            .map_err(|_| self.bad(format!("{name}: `{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.bad(format!("{name}: `{raw}` is not finite")));
        }
        Ok(v)
    }

    pub(crate) fn integer(&self, name: &str, raw: &str) -> Result<i64, DataError> {
        raw.parse()
            .map_err(|_| self.bad(format!("{name}: `{raw}` is not an integer")))
    }

    pub(crate) fn nonempty(&self, name: &str, raw: &str) -> Result<String, DataError> {
        if raw.is_empty() {
            return Err(self.bad(format!("{name} must not be empty")));
        }
        Ok(raw.to_string())
    }

    pub(crate) fn wave(&self, raw: &str) -> Result<u8, DataError> {
        match self.integer("wave", raw)? {
            1 => Ok(1),
            2 => Ok(2),
            other => Err(self.bad(format!("wave must be 1 or 2, got {other}"))),
        }
    }

    pub(crate) fn day_index(&self, raw: &str) -> Result<u8, DataError> {
        match self.integer("day_index", raw)? {
            d @ 1..=7 => Ok(d as u8),
            other => Err(self.bad(format!("day_index must be in 1..=7, got {other}"))),
        }
    }
}
