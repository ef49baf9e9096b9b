//! C interface to the `eprb` simulator.
//!
//! Configurations and run summaries are opaque handles created and destroyed
//! through this API. Fallible calls return an [`EprbStatus`]; the message of
//! the most recent failure on the calling thread is available from
//! [`eprb_last_error`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use libc::{c_char, c_double, c_int, size_t};

use eprb::config::{parse_config, ExperimentConfig};
use eprb::experiment::{execute, run_experiment, summary_json, with_threads, RunSummary};
use eprb::postselect::acceptance_probability;
use eprb::stats::ChshReport;
use eprb::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Parse = 4,
    NoData = 5,
    Domain = 6,
    DegenerateModel = 7,
    Model = 8,
    Io = 9,
    Format = 10,
    OutOfRange = 11,
    Panic = 12,
}

impl From<&Error> for EprbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) => EprbStatus::Config,
            Error::Parse { .. } => EprbStatus::Parse,
            Error::NoData(_) => EprbStatus::NoData,
            Error::Domain(_) => EprbStatus::Domain,
            Error::DegenerateModel(_) => EprbStatus::DegenerateModel,
            Error::Model(_) => EprbStatus::Model,
            Error::Io { .. } => EprbStatus::Io,
            Error::Format { .. } => EprbStatus::Format,
        }
    }
}

/// Parsed experiment configuration.
pub struct EprbConfig(ExperimentConfig);

/// Statistics of one completed run.
pub struct EprbSummary(RunSummary);

/// One row of the window sweep. When `sufficient` is 0 some setting pair
/// kept no trials and the correlation fields are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EprbWindowRow {
    pub window_over_t: c_double,
    pub e_ab: c_double,
    pub e_abp: c_double,
    pub e_apb: c_double,
    pub e_apbp: c_double,
    /// largest |S| over the four sign placements
    pub s: c_double,
    /// S with the minus sign on (a1', a2')
    pub s_fixed: c_double,
    pub s_standard_error: c_double,
    pub retention_min: c_double,
    pub sufficient: c_int,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: EprbStatus, message: impl Into<String>) -> EprbStatus {
    set_error(message);
    status
}

fn fail_with(e: &Error) -> EprbStatus {
    fail(EprbStatus::from(e), e.to_string())
}

fn guard(f: impl FnOnce() -> EprbStatus) -> EprbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(EprbStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, EprbStatus> {
    if s.is_null() {
        return Err(fail(EprbStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(EprbStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn row_from_report(window_over_t: f64, report: Option<&ChshReport>, retention_min: f64) -> EprbWindowRow {
    match report {
        Some(r) => {
            let [e_ab, e_abp, e_apb, e_apbp] = r.e_values();
            EprbWindowRow {
                window_over_t,
                e_ab,
                e_abp,
                e_apb,
                e_apbp,
                s: r.s_max_over_sign_placements,
                s_fixed: r.s_value,
                s_standard_error: r.s_standard_error,
                retention_min,
                sufficient: 1,
            }
        }
        None => EprbWindowRow {
            window_over_t,
            e_ab: f64::NAN,
            e_abp: f64::NAN,
            e_apb: f64::NAN,
            e_apbp: f64::NAN,
            s: f64::NAN,
            s_fixed: f64::NAN,
            s_standard_error: f64::NAN,
            retention_min,
            sufficient: 0,
        },
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eprb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Sawtooth correlation of the unselected model at settings `a`, `b`.
#[no_mangle]
pub extern "C" fn eprb_sawtooth(a: c_double, b: c_double) -> c_double {
    eprb::sawtooth_oracle(a, b)
}

/// Singlet-state correlation `-cos 2(a - b)`.
#[no_mangle]
pub extern "C" fn eprb_quantum(a: c_double, b: c_double) -> c_double {
    eprb::quantum_correlation(a, b)
}

/// Probability that a pair with squared sines `s1_sq`, `s2_sq` passes a
/// window of width `w` (in units of the time scale) when `r ~ U[r_min, 1]`.
///
/// # Safety
/// `out` must be NULL or point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn eprb_acceptance(
    s1_sq: c_double,
    s2_sq: c_double,
    w: c_double,
    r_min: c_double,
    out: *mut c_double,
) -> EprbStatus {
    guard(|| {
        if out.is_null() {
            return fail(EprbStatus::NullPointer, "null output pointer");
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(s1_sq) || !unit(s2_sq) || !(w >= 0.0 && w.is_finite()) || !(0.0..1.0).contains(&r_min) {
            return fail(EprbStatus::Domain, "argument outside its domain");
        }
        *out = acceptance_probability(s1_sq, s2_sq, w, r_min);
        EprbStatus::Ok
    })
}

/// Default configuration.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_config_default(out: *mut *mut EprbConfig) -> EprbStatus {
    guard(|| {
        if out.is_null() {
            return fail(EprbStatus::NullPointer, "null output pointer");
        }
        *out = Box::into_raw(Box::new(EprbConfig(ExperimentConfig::default())));
        EprbStatus::Ok
    })
}

/// Parses a `key = value` configuration document.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` must point to writable
/// storage for one pointer. On failure `*out` is left untouched.
#[no_mangle]
pub unsafe extern "C" fn eprb_config_parse(text: *const c_char, out: *mut *mut EprbConfig) -> EprbStatus {
    guard(|| {
        if out.is_null() {
            return fail(EprbStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_config(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(EprbConfig(cfg)));
                EprbStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn eprb_config_set_seed(config: *mut EprbConfig, seed: u64) -> EprbStatus {
    guard(|| match config.as_mut() {
        Some(c) => {
            c.0.seed = seed;
            EprbStatus::Ok
        }
        None => fail(EprbStatus::NullPointer, "null config"),
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn eprb_config_set_n_per_setting(config: *mut EprbConfig, n: size_t) -> EprbStatus {
    guard(|| match config.as_mut() {
        Some(_) if n == 0 => fail(EprbStatus::Config, "n_per_setting must be at least 1"),
        Some(c) => {
            c.0.n_per_setting = n;
            EprbStatus::Ok
        }
        None => fail(EprbStatus::NullPointer, "null config"),
    })
}

/// Sets the directory [`eprb_run_to_dir`] writes into.
///
/// # Safety
/// `config` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn eprb_config_set_output_dir(config: *mut EprbConfig, dir: *const c_char) -> EprbStatus {
    guard(|| {
        let Some(c) = config.as_mut() else {
            return fail(EprbStatus::NullPointer, "null config");
        };
        match read_str(dir) {
            Ok("") => fail(EprbStatus::Config, "empty output directory"),
            Ok(d) => {
                c.0.output_dir = PathBuf::from(d);
                EprbStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eprb_config_free(config: *mut EprbConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn run_with(
    config: *const EprbConfig,
    threads: size_t,
    out: *mut *mut EprbSummary,
    write_files: bool,
) -> EprbStatus {
    guard(|| {
        if out.is_null() {
            return fail(EprbStatus::NullPointer, "null output pointer");
        }
        let Some(cfg) = config.as_ref() else {
            return fail(EprbStatus::NullPointer, "null config");
        };
        let threads = (threads > 0).then_some(threads);
        let result = if write_files {
            run_experiment(&cfg.0, threads)
        } else {
            with_threads(threads, || execute(&cfg.0)).and_then(|r| r.map(|(s, _)| s))
        };
        match result {
            Ok(summary) => {
                *out = Box::into_raw(Box::new(EprbSummary(summary)));
                EprbStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Runs the experiment in memory. `threads == 0` uses the default pool.
///
/// # Safety
/// `config` must be a live handle and `out` must point to writable storage
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_run(
    config: *const EprbConfig,
    threads: size_t,
    out: *mut *mut EprbSummary,
) -> EprbStatus {
    run_with(config, threads, out, false)
}

/// Like [`eprb_run`], and also writes `events.csv`, `sweep.csv` and
/// `summary.json` to the configured output directory.
///
/// # Safety
/// Same as [`eprb_run`].
#[no_mangle]
pub unsafe extern "C" fn eprb_run_to_dir(
    config: *const EprbConfig,
    threads: size_t,
    out: *mut *mut EprbSummary,
) -> EprbStatus {
    run_with(config, threads, out, true)
}

/// Number of generated events, or 0 for a NULL handle.
///
/// # Safety
/// `summary` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eprb_summary_event_count(summary: *const EprbSummary) -> size_t {
    summary.as_ref().map_or(0, |s| s.0.event_count)
}

/// Number of sweep rows, or 0 for a NULL handle.
///
/// # Safety
/// `summary` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eprb_summary_window_count(summary: *const EprbSummary) -> size_t {
    summary.as_ref().map_or(0, |s| s.0.windows.len())
}

/// Copies sweep row `index` into `*out`.
///
/// # Safety
/// `summary` must be a live handle and `out` must point to writable storage
/// for one row.
#[no_mangle]
pub unsafe extern "C" fn eprb_summary_window(
    summary: *const EprbSummary,
    index: size_t,
    out: *mut EprbWindowRow,
) -> EprbStatus {
    guard(|| {
        let (Some(s), false) = (summary.as_ref(), out.is_null()) else {
            return fail(EprbStatus::NullPointer, "null argument");
        };
        let Some(row) = s.0.windows.get(index) else {
            return fail(
                EprbStatus::OutOfRange,
                format!("window {index} of {}", s.0.windows.len()),
            );
        };
        *out = row_from_report(row.window_over_t, row.report.as_ref(), row.retention_min());
        EprbStatus::Ok
    })
}

/// The statistics without any window, as a row with `window_over_t = NaN`
/// and `retention_min = 1`.
///
/// # Safety
/// `summary` must be a live handle and `out` must point to writable storage
/// for one row.
#[no_mangle]
pub unsafe extern "C" fn eprb_summary_unselected(summary: *const EprbSummary, out: *mut EprbWindowRow) -> EprbStatus {
    guard(|| {
        let (Some(s), false) = (summary.as_ref(), out.is_null()) else {
            return fail(EprbStatus::NullPointer, "null argument");
        };
        *out = row_from_report(f64::NAN, Some(&s.0.unselected), 1.0);
        EprbStatus::Ok
    })
}

/// The `summary.json` document. Release it with [`eprb_string_free`].
///
/// # Safety
/// `summary` must be a live handle and `out` must point to writable storage
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn eprb_summary_json(summary: *const EprbSummary, out: *mut *mut c_char) -> EprbStatus {
    guard(|| {
        let (Some(s), false) = (summary.as_ref(), out.is_null()) else {
            return fail(EprbStatus::NullPointer, "null argument");
        };
        match summary_json(&s.0) {
            Ok(text) => {
                *out = CString::new(text).map_or(ptr::null_mut(), CString::into_raw);
                EprbStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `summary` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eprb_summary_free(summary: *mut EprbSummary) {
    if !summary.is_null() {
        drop(Box::from_raw(summary));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eprb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
