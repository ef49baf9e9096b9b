//! Acceptance suite. Run with `cargo test -p eprb --test acceptance`.
//!
//! Prints one `PASS`/`FAIL` line per criterion and exits non-zero if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_8, PI};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};

use eprb::config::{parse_config, ExperimentConfig};
use eprb::experiment::{run_experiment, EVENTS_FILE, SUMMARY_FILE, SWEEP_FILE};
use eprb::postselect::{coincidence_filter, toy_postselect, window_sweep_trials, CoincidenceWindow, ToyCriterion};
use eprb::protocols::{
    augmented_instrument_run, run_protocol1, run_protocol2, simulate_setting_pair, ContextTable,
    SettingPair, SettingsQuadruple, SettingsSchedule,
};
use eprb::stats::{
    build_contextual_model, chsh, compare_distributions, estimate_trials, full_spreadsheet_report,
    gill_conjecture_experiment, locate_boundary_settings, GillProtocol,
};
use eprb::substream::derive_seed;
use eprb::{quantum_correlation, sawtooth_oracle, ModelConfig};

/// `max |S|` of the contextual model at `W = 0.001 T` with the default
/// settings and `d = 2`, from the acceptance-probability quadrature.
const FROZEN_SMALL_WINDOW_S: f64 = 2.7929038525;
const FROZEN_WINDOW_OVER_T: f64 = 0.001;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    let within = took <= limit;
    Verdict {
        pass: v.pass && within,
        detail: format!(
            "{}; {:.1} s (limit {} s{})",
            v.detail,
            took.as_secs_f64(),
            limit.as_secs(),
            if within { "" } else { ", EXCEEDED" }
        ),
    }
}

fn c1_spreadsheet_bound() -> Verdict {
    let model = ModelConfig::default();
    let settings = SettingsQuadruple::default();
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    for n_rows in [10usize, 1_000, 100_000] {
        for k in 0..50 {
            let seed = derive_seed(0xC1, k);
            let rows = run_protocol2(n_rows, &settings, &model, seed).unwrap();
            if let Some(r) = rows.iter().find(|r| r.chsh_term().abs() != 2) {
                return verdict(false, format!("row {} has term {}", r.trial_index, r.chsh_term()));
            }
            let report = full_spreadsheet_report(&rows).unwrap();
            worst = worst.max(report.s_max_over_sign_placements);
            if report.s_max_over_sign_placements > 2.0 {
                return verdict(
                    false,
                    format!("n_rows {n_rows} seed {seed}: |S| = {}", report.s_max_over_sign_placements),
                );
            }
            runs += 1;
        }
    }
    verdict(true, format!("{runs} runs, every row ±2, largest |S| {worst}"))
}

fn c2_violation_fraction() -> Verdict {
    let (found, best) = locate_boundary_settings(8);
    let d = SettingsQuadruple::default();
    let settings = found
        .iter()
        .copied()
        .find(|s| (s.a1p - d.a1p).abs() < 1e-12 && (s.a2 - d.a2).abs() < 1e-12 && (s.a2p - d.a2p).abs() < 1e-12);
    let Some(settings) = settings else {
        return verdict(false, "default quadruple not among boundary settings");
    };
    if best > 2.0 + 1e-12 {
        return verdict(false, format!("oracle max |S| {best} exceeds 2"));
    }
    let m = 1000;
    let out = gill_conjecture_experiment(
        m,
        10_000,
        &settings,
        SettingsSchedule::Block,
        GillProtocol::P1,
        &ModelConfig::default(),
        0xC2,
    )
    .unwrap();
    let band = 3.0 * (0.25 / m as f64).sqrt();
    let band_100 = 3.0 * (0.25 / 100.0f64).sqrt();
    let inside = (out.violation_fraction - 0.5).abs() <= band;
    let reported_inside = (0.54f64 - 0.5).abs() <= band_100;
    verdict(
        inside && reported_inside,
        format!(
            "{m} runs: fraction {:.4} vs 0.5 ± {band:.4}; 54/100 within 0.5 ± {band_100:.2}: {reported_inside}",
            out.violation_fraction
        ),
    )
}

fn c3_sawtooth_shape() -> Verdict {
    let model = ModelConfig::default();
    let n = 100_000;
    let mut worst_z: f64 = 0.0;
    let mut bad = Vec::new();
    for k in 0..16u64 {
        let delta = k as f64 * PI / 16.0;
        let trials = simulate_setting_pair(n, 0.0, delta, &model, 0xC3, k * n as u64).unwrap();
        let est = estimate_trials(&trials).unwrap();
        let oracle = sawtooth_oracle(0.0, delta);
        let se = est.standard_error();
        let diff = (est.e_value - oracle).abs();
        if se > 0.0 {
            worst_z = worst_z.max(diff / se);
        }
        if diff > 3.0 * se + 1e-12 {
            bad.push(format!("k={k}: E={:.4} oracle {oracle:.4} se {se:.4}", est.e_value));
        }
    }
    let trials = simulate_setting_pair(n, 0.0, FRAC_PI_8, &model, 0xC3, 16 * n as u64).unwrap();
    let est = estimate_trials(&trials).unwrap();
    let qz = (est.e_value - quantum_correlation(0.0, FRAC_PI_8)).abs() / est.standard_error();
    verdict(
        bad.is_empty() && qz > 5.0,
        format!(
            "16 points, worst |z| to sawtooth {worst_z:.2}; distance to quantum at π/8 {qz:.1} SE{}",
            if bad.is_empty() { String::new() } else { format!("; off: {}", bad.join(", ")) }
        ),
    )
}

fn c4_window_effect() -> Verdict {
    let model = ModelConfig::default();
    let settings = SettingsQuadruple::default();
    let windows_over_t = [0.00025, 0.001, 0.008, 0.064, 0.25, 1.0];
    let windows: Vec<_> = windows_over_t
        .iter()
        .map(|w| CoincidenceWindow::from_fraction(*w, model.time_scale).unwrap())
        .collect();
    let frozen_window = CoincidenceWindow::from_fraction(FROZEN_WINDOW_OVER_T, model.time_scale).unwrap();
    let e = SettingPair::ALL.map(|p| {
        let (a, b) = settings.angles(p);
        build_contextual_model(a, b, frozen_window, &model, 36_000).unwrap().correlation()
    });
    let (_, oracle_s) = chsh(e[0], e[1], e[2], e[3]).unwrap();
    if (oracle_s - FROZEN_SMALL_WINDOW_S).abs() > 1e-9 {
        return verdict(false, format!("quadrature now gives {oracle_s}, frozen {FROZEN_SMALL_WINDOW_S}"));
    }
    let trials = run_protocol1(1_000_000, &settings, SettingsSchedule::Block, &model, 0xC4).unwrap();
    let rows = window_sweep_trials(&trials, &windows, model.time_scale).unwrap();
    let sufficient: Vec<_> = rows
        .iter()
        .filter(|r| r.min_retained() >= 1000 && r.report.is_some())
        .collect();
    let Some(smallest) = sufficient.first() else {
        return verdict(false, "no window retains 1000 coincidences per setting");
    };
    let s: Vec<f64> = sufficient
        .iter()
        .map(|r| r.report.as_ref().unwrap().s_max_over_sign_placements)
        .collect();
    // rows are in ascending W, so |S| must strictly decrease along them
    let monotone = s.windows(2).all(|p| p[0] > p[1]);
    let report = smallest.report.as_ref().unwrap();
    let s_small = report.s_max_over_sign_placements;
    let at_frozen = (smallest.window_over_t - FROZEN_WINDOW_OVER_T).abs() < 1e-15;
    let z = (s_small - FROZEN_SMALL_WINDOW_S).abs() / report.s_standard_error;
    let listing: Vec<String> = rows
        .iter()
        .map(|r| {
            let s = r
                .report
                .as_ref()
                .map_or("NA".into(), |rep| format!("{:.4}", rep.s_max_over_sign_placements));
            format!("{}:{}({})", r.window_over_t, s, r.min_retained())
        })
        .collect();
    verdict(
        monotone && s_small > 2.0 && at_frozen && z <= 3.0,
        format!(
            "W/T:|S|(min kept) {}; monotone {monotone}; smallest sufficient W/T {} |S| {s_small:.4} vs frozen {FROZEN_SMALL_WINDOW_S} ({z:.2} SE)",
            listing.join(" "),
            smallest.window_over_t
        ),
    )
}

fn c5_contextual_model() -> Verdict {
    let model = ModelConfig::default();
    let combos = [
        (0.0, FRAC_PI_8, 0.01),
        (0.0, 3.0 * FRAC_PI_8, 0.05),
        (PI / 4.0, FRAC_PI_8, 0.25),
        (PI / 4.0, 3.0 * FRAC_PI_8, 0.01),
        (0.3, 1.1, 0.05),
        (0.7, 0.7, 0.02),
    ];
    let n = 1_000_000;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, &(alpha, beta, w)) in combos.iter().enumerate() {
        let window = CoincidenceWindow::from_fraction(w, model.time_scale).unwrap();
        let predicted = build_contextual_model(alpha, beta, window, &model, 3600)
            .map(|m| eprb::stats::contextual_model_predict(&m))
            .unwrap();
        let trials = simulate_setting_pair(n, alpha, beta, &model, 0xC5, k as u64 * n as u64).unwrap();
        let kept = coincidence_filter(&trials, window);
        let est = estimate_trials(&kept.retained).unwrap();
        let tv = compare_distributions(&predicted, &est.distribution()).unwrap();
        worst = worst.max(tv);
        parts.push(format!("{tv:.4}"));
    }
    verdict(worst <= 0.02, format!("TV per combo [{}], max {worst:.4}", parts.join(", ")))
}

fn c6_toy_selection() -> Verdict {
    let mut runner = TestRunner::new(PtConfig {
        cases: 1000,
        failure_persistence: None,
        ..PtConfig::default()
    });
    let pm = prop_oneof![Just(1i8), Just(-1i8)];
    let samples = prop::collection::vec((pm.clone(), pm), 1..200);
    let result = runner.run(&samples, |samples| {
        for criterion in [ToyCriterion::SumPlusTwo, ToyCriterion::SumMinusTwo, ToyCriterion::SumZero] {
            let allowed = |x: i8, y: i8| match criterion {
                ToyCriterion::SumPlusTwo => (x, y) == (1, 1),
                ToyCriterion::SumMinusTwo => (x, y) == (-1, -1),
                ToyCriterion::SumZero => x != y,
            };
            let expected: Vec<_> = samples.iter().copied().filter(|&(x, y)| allowed(x, y)).collect();
            match toy_postselect(&samples, criterion) {
                Ok(sel) => prop_assert_eq!(&sel.retained, &expected),
                Err(eprb::Error::NoData(_)) => prop_assert!(expected.is_empty()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => verdict(true, "1000 random samples, three criteria, retained sets exact"),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn c7_bound_tightness() -> Verdict {
    let model = ModelConfig::default();
    let settings = SettingsQuadruple::default();
    let run = |table: &ContextTable, seed| {
        let trials =
            augmented_instrument_run(2000, &settings, SettingsSchedule::Random, &model, table, seed).unwrap();
        eprb::stats::ChshReport::from_trials(&trials, None).unwrap()
    };
    let maximal = run(&ContextTable::maximal(), 0xC7);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let table = ContextTable::random(derive_seed(0xC7, k), 1 + (k as usize % 8));
        worst = worst.max(run(&table, derive_seed(0xC70, k)).s_max_over_sign_placements);
    }
    verdict(
        maximal.s_value == 4.0 && worst <= 4.0,
        format!("demonstration S = {}; largest |S| over 100 random tables {worst}", maximal.s_value),
    )
}

fn c8_reproducibility() -> Verdict {
    let configs = [
        "seed = 17\nprotocol = p1\nn_per_setting = 20000\n",
        "seed = 18\nprotocol = p2\nn_per_setting = 5000\nwindows = 0.01, 0.1, 1\n",
        "seed = 19\nprotocol = p2-extracted\nschedule = random\nn_per_setting = 8000\nr_min = 0.25\n",
    ];
    let tmp = tempfile::tempdir().unwrap();
    for (k, text) in configs.iter().enumerate() {
        let base: ExperimentConfig = parse_config(text).unwrap();
        let mut outputs = Vec::new();
        for (tag, threads) in [("serial", Some(1)), ("parallel", Some(8)), ("again", None)] {
            let mut cfg = base.clone();
            cfg.output_dir = tmp.path().join(format!("{k}-{tag}"));
            run_experiment(&cfg, threads).unwrap();
            let read = |f: &str| std::fs::read(cfg.output_dir.join(f)).unwrap();
            outputs.push((read(EVENTS_FILE), read(SUMMARY_FILE), read(SWEEP_FILE)));
        }
        if outputs.windows(2).any(|p| p[0] != p[1]) {
            return verdict(false, format!("config {k} differs between runs"));
        }
    }
    verdict(true, "3 configs, serial / 8 threads / default pool byte-identical")
}

type Criterion = (&'static str, u64, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 spreadsheet CHSH bound", 30, c1_spreadsheet_bound),
        ("2 violation fraction", 300, c2_violation_fraction),
        ("3 unselected sawtooth", 60, c3_sawtooth_shape),
        ("4 window effect", 600, c4_window_effect),
        ("5 contextual model", 300, c5_contextual_model),
        ("6 toy post-selection", 60, c6_toy_selection),
        ("7 S = 4 bound", 60, c7_bound_tightness),
        ("8 reproducibility", 120, c8_reproducibility),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let v = timed(Duration::from_secs(limit), f);
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
