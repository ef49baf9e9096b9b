use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use eprb_ffi::*;

fn last_error() -> String {
    let p = eprb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut EprbConfig {
    let text = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { eprb_config_parse(text.as_ptr(), &mut cfg) };
    assert_eq!(status, EprbStatus::Ok, "{}", last_error());
    cfg
}

#[test]
fn oracles_match_core() {
    assert_eq!(eprb_sawtooth(0.0, std::f64::consts::FRAC_PI_8), -0.5);
    assert_eq!(eprb_quantum(0.3, 0.3), -1.0);
    let mut p = f64::NAN;
    assert_eq!(unsafe { eprb_acceptance(1.0, 1.0, 0.1, 0.0, &mut p) }, EprbStatus::Ok);
    assert!((p - 0.19).abs() < 1e-12);
}

#[test]
fn acceptance_rejects_bad_arguments() {
    let mut p = 0.0;
    assert_eq!(unsafe { eprb_acceptance(1.5, 1.0, 0.1, 0.0, &mut p) }, EprbStatus::Domain);
    assert_eq!(unsafe { eprb_acceptance(1.0, 1.0, 0.1, 1.0, &mut p) }, EprbStatus::Domain);
    assert_eq!(
        unsafe { eprb_acceptance(1.0, 1.0, 0.1, 0.0, ptr::null_mut()) },
        EprbStatus::NullPointer
    );
}

#[test]
fn parse_error_reports_line_and_key() {
    let text = CString::new("seed = 1\nr_min = 2\n").unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { eprb_config_parse(text.as_ptr(), &mut cfg) };
    assert_eq!(status, EprbStatus::Parse);
    assert!(cfg.is_null());
    let msg = last_error();
    assert!(msg.contains("line 2") && msg.contains("r_min"), "{msg}");
}

#[test]
fn invalid_utf8_is_reported() {
    let bytes = [b's', 0xff, 0];
    let mut cfg = ptr::null_mut();
    let status = unsafe { eprb_config_parse(bytes.as_ptr().cast(), &mut cfg) };
    assert_eq!(status, EprbStatus::InvalidUtf8);
}

#[test]
fn run_and_read_rows() {
    let cfg = parse("seed = 5\nn_per_setting = 2000\nwindows = 0.01, 0.1, 1\n");
    let mut summary = ptr::null_mut();
    assert_eq!(unsafe { eprb_run(cfg, 2, &mut summary) }, EprbStatus::Ok);
    unsafe {
        assert_eq!(eprb_summary_event_count(summary), 8000);
        assert_eq!(eprb_summary_window_count(summary), 3);
        let mut row = std::mem::zeroed::<EprbWindowRow>();
        assert_eq!(eprb_summary_window(summary, 2, &mut row), EprbStatus::Ok);
        assert_eq!(row.window_over_t, 1.0);
        assert_eq!(row.sufficient, 1);
        assert_eq!(row.retention_min, 1.0);
        let mut full = std::mem::zeroed::<EprbWindowRow>();
        assert_eq!(eprb_summary_unselected(summary, &mut full), EprbStatus::Ok);
        assert_eq!(full.s, row.s);
        assert!(full.window_over_t.is_nan());
        assert_eq!(eprb_summary_window(summary, 3, &mut row), EprbStatus::OutOfRange);

        let mut json = ptr::null_mut();
        assert_eq!(eprb_summary_json(summary, &mut json), EprbStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"event_count\": 8000"));
        eprb_string_free(json);
        eprb_summary_free(summary);
        eprb_config_free(cfg);
    }
}

#[test]
fn setters_and_thread_independence() {
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(eprb_config_default(&mut cfg), EprbStatus::Ok);
        assert_eq!(eprb_config_set_seed(cfg, 11), EprbStatus::Ok);
        assert_eq!(eprb_config_set_n_per_setting(cfg, 0), EprbStatus::Config);
        assert_eq!(eprb_config_set_n_per_setting(cfg, 1500), EprbStatus::Ok);
        let json = |threads| {
            let mut s = ptr::null_mut();
            assert_eq!(eprb_run(cfg, threads, &mut s), EprbStatus::Ok);
            let mut j = ptr::null_mut();
            assert_eq!(eprb_summary_json(s, &mut j), EprbStatus::Ok);
            let out = CStr::from_ptr(j).to_bytes().to_vec();
            eprb_string_free(j);
            eprb_summary_free(s);
            out
        };
        assert_eq!(json(1), json(4));
        eprb_config_free(cfg);
    }
}

#[test]
fn run_to_dir_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse("n_per_setting = 500\n");
    let out = CString::new(dir.path().join("run").to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(eprb_config_set_output_dir(cfg, out.as_ptr()), EprbStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(eprb_run_to_dir(cfg, 0, &mut s), EprbStatus::Ok);
        eprb_summary_free(s);
        eprb_config_free(cfg);
    }
    for f in ["events.csv", "sweep.csv", "summary.json"] {
        assert!(dir.path().join("run").join(f).is_file(), "{f}");
    }
}

#[test]
fn null_handles() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(eprb_run(ptr::null(), 0, &mut s), EprbStatus::NullPointer);
        assert_eq!(eprb_summary_window_count(ptr::null()), 0);
        eprb_summary_free(ptr::null_mut());
        eprb_config_free(ptr::null_mut());
        eprb_string_free(ptr::null_mut());
    }
}

fn target_dir() -> PathBuf {
    // tests live in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn c_program_links_against_header() {
    if !have_cc() {
        eprintln!("no C compiler on PATH; skipping");
        return;
    }
    let lib = target_dir().join("libeprb_ffi.a");
    if !lib.is_file() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "eprb.h"
int main(void) {
    EprbConfig *cfg = NULL;
    EprbSummary *sum = NULL;
    EprbWindowRow row;
    if (eprb_config_parse("n_per_setting = 1000\nwindows = 1\n", &cfg) != EPRB_STATUS_OK) return 3;
    if (eprb_run(cfg, 1, &sum) != EPRB_STATUS_OK) return 4;
    if (eprb_summary_window(sum, 0, &row) != EPRB_STATUS_OK) return 5;
    if (eprb_config_parse("bogus", &cfg) != EPRB_STATUS_PARSE) return 6;
    printf("%zu %.3f %s\n", eprb_summary_event_count(sum), eprb_sawtooth(0.0, 0.0), eprb_last_error());
    eprb_summary_free(sum);
    eprb_config_free(cfg);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("4000 -1.000 line 1"), "{text}");
}
