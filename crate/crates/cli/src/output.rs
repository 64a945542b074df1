//! Curve tables in CSV and JSON, and crash-safe file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use star_noma::mc::{AnalyticValue, SweepCell};

use crate::error::CliError;

pub const CSV_HEADER: [&str; 10] = [
    "axis_value",
    "user",
    "ber_mc",
    "ci_low",
    "ci_high",
    "ber_closed_form",
    "ber_numeric",
    "ber_asymptotic",
    "trials",
    "errors",
];

pub const NO_FLOOR: &str = "no-floor";
pub const NOT_APPLICABLE: &str = "na";
pub const FAILED: &str = "err";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One table cell: a number or one of the marker strings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Field {
    Real(f64),
    Count(u64),
    Marker(&'static str),
}

impl Field {
    fn real(v: f64) -> Field {
        if v.is_finite() {
            Field::Real(v)
        } else {
            Field::Marker(FAILED)
        }
    }

    fn analytic(v: &AnalyticValue) -> Field {
        match v {
            AnalyticValue::Value(x) => Field::real(*x),
            AnalyticValue::NoFloor => Field::Marker(NO_FLOOR),
            AnalyticValue::NotApplicable => Field::Marker(NOT_APPLICABLE),
            AnalyticValue::Failed(_) => Field::Marker(FAILED),
        }
    }

    /// Text for CSV: shortest round-trip exponent form for BER-like values.
    pub fn render(&self) -> String {
        match self {
            Field::Real(v) => format!("{v:e}"),
            Field::Count(n) => n.to_string(),
            Field::Marker(s) => (*s).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub axis_value: f64,
    pub user: usize,
    pub ber_mc: Field,
    pub ci_low: Field,
    pub ci_high: Field,
    pub ber_closed_form: Field,
    pub ber_numeric: Field,
    pub ber_asymptotic: Field,
    pub trials: Field,
    pub errors: Field,
}

impl Row {
    pub fn from_cell(cell: &SweepCell) -> Row {
        let a = &cell.analytic;
        let (ber_mc, ci_low, ci_high, trials, errors) = match &cell.mc {
            Ok(e) => (
                Field::real(e.ber),
                Field::real(e.ci_low),
                Field::real(e.ci_high),
                Field::Count(e.trials),
                Field::Count(e.errors),
            ),
            Err(_) => {
                let f = Field::Marker(FAILED);
                (f, f, f, f, f)
            }
        };
        Row {
            axis_value: cell.axis_value,
            user: cell.user,
            ber_mc,
            ci_low,
            ci_high,
            ber_closed_form: Field::analytic(&a.closed_form),
            ber_numeric: Field::analytic(&a.numeric),
            ber_asymptotic: Field::analytic(&a.asymptotic),
            trials,
            errors,
        }
    }

    fn record(&self) -> [String; 10] {
        [
            self.axis_value.to_string(),
            self.user.to_string(),
            self.ber_mc.render(),
            self.ci_low.render(),
            self.ci_high.render(),
            self.ber_closed_form.render(),
            self.ber_numeric.render(),
            self.ber_asymptotic.render(),
            self.trials.render(),
            self.errors.render(),
        ]
    }
}

pub fn to_csv(rows: &[Row]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Runtime(format!("csv encoding: {e}"));
    w.write_record(CSV_HEADER).map_err(fail)?;
    for row in rows {
        w.write_record(row.record()).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(format!("csv encoding: {e}")))
}

pub fn to_json(rows: &[Row]) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(rows).map_err(|e| CliError::Runtime(format!("json encoding: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

pub fn encode(rows: &[Row], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

/// An output file reserved before the run: a temporary sibling is created up
/// front, so an unwritable location fails early, and renamed into place on
/// commit, so readers never see a half-written file.
#[derive(Debug)]
pub struct PendingFile {
    path: PathBuf,
    tmp: tempfile::NamedTempFile,
}

impl PendingFile {
    pub fn reserve(path: &Path) -> Result<Self, CliError> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        if !dir.is_dir() {
            return Err(CliError::Output {
                path: path.to_path_buf(),
                reason: format!("directory {} does not exist", dir.display()),
            });
        }
        if path.is_dir() {
            return Err(CliError::Output {
                path: path.to_path_buf(),
                reason: "is a directory".into(),
            });
        }
        let tmp = tempfile::Builder::new()
            .prefix(".star-noma-")
            .tempfile_in(&dir)
            .map_err(|e| CliError::Output {
                path: path.to_path_buf(),
                reason: e.kind().to_string(),
            })?;
        Ok(PendingFile {
            path: path.to_path_buf(),
            tmp,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn commit(mut self, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let fail = |e: std::io::Error, path: &Path| CliError::Output {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        self.tmp.write_all(bytes).map_err(|e| fail(e, &self.path))?;
        self.tmp.flush().map_err(|e| fail(e, &self.path))?;
        self.tmp.persist(&self.path).map_err(|e| fail(e.error, &self.path))?;
        Ok(self.path)
    }
}
