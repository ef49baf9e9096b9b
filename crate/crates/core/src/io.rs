//! CSV event logs, sweep tables and pair files.
//!
//! Reals are written with 9 significant digits (shortest form, like C's
//! `%.9g`), so files are stable byte for byte across runs and platforms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::postselect::SweepRow;
use crate::protocols::{SettingPair, SettingsQuadruple, SpreadsheetRow, TrialRecord};

pub const TRIAL_HEADER: [&str; 7] = ["trial", "setting_a_rad", "setting_b_rad", "x1", "x2", "t1", "t2"];
pub const SPREADSHEET_HEADER: [&str; 9] = [
    "trial", "x_a1", "x_a1p", "x_a2", "x_a2p", "t_a1", "t_a1p", "t_a2", "t_a2p",
];
pub const SWEEP_HEADER: [&str; 9] = [
    "window_over_T",
    "E_ab",
    "E_abp",
    "E_apb",
    "E_apbp",
    "S",
    "retention_min",
    "S_fixed",
    "status",
];
const MISSING: &str = "NA";

/// `x` rounded to 9 significant digits (round-half-even on the exact binary
/// value), trailing zeros removed; exponent form outside `[1e-5, 1e9)`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return MISSING.into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return format!("{}e{exp}", trim_fraction(mantissa));
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn finish(path: &Path, w: csv::Writer<BufWriter<File>>) -> Result<()> {
    let mut inner = w
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trial_events(path: &Path, trials: &[TrialRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TRIAL_HEADER).map_err(|e| csv_err(path, e))?;
    for t in trials {
        w.write_record([
            t.trial_index.to_string(),
            format_real(t.setting_a),
            format_real(t.setting_b),
            t.x1.to_string(),
            t.x2.to_string(),
            format_real(t.t1),
            format_real(t.t2),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

pub fn write_spreadsheet_events(path: &Path, rows: &[SpreadsheetRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SPREADSHEET_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.trial_index.to_string(),
            r.x_a1.to_string(),
            r.x_a1p.to_string(),
            r.x_a2.to_string(),
            r.x_a2p.to_string(),
            format_real(r.t_a1),
            format_real(r.t_a1p),
            format_real(r.t_a2),
            format_real(r.t_a2p),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

/// Sweep table as CSV text. `S` is the largest `|S|` over the sign
/// placements, `S_fixed` the statistic with the minus on `(a1', a2')`. Rows
/// where some setting pair kept nothing carry `NA` and status
/// `insufficient_data`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format {
        path: SWEEP_FILE_LABEL.into(),
        message: e.to_string(),
    };
    w.write_record(SWEEP_HEADER).map_err(fail)?;
    for row in rows {
        let mut rec = vec![format_real(row.window_over_t)];
        match &row.report {
            Some(r) => {
                rec.extend(r.e_values().map(format_real));
                rec.push(format_real(r.s_max_over_sign_placements));
                rec.push(format_real(row.retention_min()));
                rec.push(format_real(r.s_value));
                rec.push("ok".into());
            }
            None => {
                rec.extend(std::iter::repeat_n(MISSING.to_string(), 5));
                rec.push(format_real(row.retention_min()));
                rec.push(MISSING.into());
                rec.push("insufficient_data".into());
            }
        }
        w.write_record(&rec).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format {
        path: SWEEP_FILE_LABEL.into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

const SWEEP_FILE_LABEL: &str = "<sweep>";

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    std::fs::write(path, sweep_csv(rows)?).map_err(|e| Error::io(path, e))
}

fn reader(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: format!(
            "line {}: column {}: cannot parse `{raw}`",
            rec.position().map_or(0, |p| p.line()),
            i + 1
        ),
    })
}

fn check_header(path: &Path, rdr: &mut csv::Reader<File>, want: &[&str]) -> Result<()> {
    let got = rdr.headers().map_err(|e| csv_err(path, e))?;
    if got.iter().ne(want.iter().copied()) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("unexpected header {:?}", got.iter().collect::<Vec<_>>()),
        });
    }
    Ok(())
}

/// Reads a trial event log. Setting pairs are recovered by matching the
/// logged angles against `settings` (first match wins when angles coincide).
pub fn read_trial_events(path: &Path, settings: &SettingsQuadruple) -> Result<Vec<TrialRecord>> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &TRIAL_HEADER)?;
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-8 * (1.0 + y.abs());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let (a, b): (f64, f64) = (field(path, &rec, 1)?, field(path, &rec, 2)?);
        let pair = SettingPair::ALL
            .into_iter()
            .find(|&p| {
                let (sa, sb) = settings.angles(p);
                close(a, sa) && close(b, sb)
            })
            .ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                message: format!("settings ({a}, {b}) are not in the configured quadruple"),
            })?;
        out.push(TrialRecord {
            trial_index: field(path, &rec, 0)?,
            pair,
            setting_a: a,
            setting_b: b,
            x1: field(path, &rec, 3)?,
            x2: field(path, &rec, 4)?,
            t1: field(path, &rec, 5)?,
            t2: field(path, &rec, 6)?,
        });
    }
    Ok(out)
}

pub fn read_spreadsheet_events(path: &Path) -> Result<Vec<SpreadsheetRow>> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &SPREADSHEET_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        out.push(SpreadsheetRow {
            trial_index: field(path, &rec, 0)?,
            x_a1: field(path, &rec, 1)?,
            x_a1p: field(path, &rec, 2)?,
            x_a2: field(path, &rec, 3)?,
            x_a2p: field(path, &rec, 4)?,
            t_a1: field(path, &rec, 5)?,
            t_a1p: field(path, &rec, 6)?,
            t_a2: field(path, &rec, 7)?,
            t_a2p: field(path, &rec, 8)?,
        });
    }
    Ok(out)
}

/// One parsed line of a sweep table; `None` where `NA` was written.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepLine {
    pub window_over_t: f64,
    pub e: Option<[f64; 4]>,
    pub s: Option<f64>,
    pub retention_min: f64,
    pub s_fixed: Option<f64>,
    pub sufficient: bool,
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepLine>> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &SWEEP_HEADER)?;
    let opt = |rec: &csv::StringRecord, i: usize| -> Result<Option<f64>> {
        if rec.get(i) == Some(MISSING) {
            Ok(None)
        } else {
            field(path, rec, i).map(Some)
        }
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let e = [opt(&rec, 1)?, opt(&rec, 2)?, opt(&rec, 3)?, opt(&rec, 4)?];
        out.push(SweepLine {
            window_over_t: field(path, &rec, 0)?,
            e: e.iter().all(Option::is_some).then(|| e.map(Option::unwrap)),
            s: opt(&rec, 5)?,
            retention_min: field(path, &rec, 6)?,
            s_fixed: opt(&rec, 7)?,
            sufficient: rec.get(8) == Some("ok"),
        });
    }
    Ok(out)
}

/// Reads `(x, y)` outcome pairs. A leading non-numeric line is taken as a
/// header.
pub fn read_pairs(path: &Path) -> Result<Vec<(i8, i8)>> {
    let mut rdr = reader(path, false)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if i == 0 && rec.get(0).is_some_and(|f| f.parse::<i8>().is_err()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("line {}: expected two columns", i + 1),
            });
        }
        out.push((field(path, &rec, 0)?, field(path, &rec, 1)?));
    }
    Ok(out)
}
