//! Generation → window sweep → statistics, and the files a run leaves behind.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Protocol, ResponseKind};
use crate::error::{Error, Result};
use crate::io;
use crate::postselect::{window_sweep, window_sweep_trials, SweepRow};
use crate::protocols::{
    augmented_instrument_run, extract_observed, run_protocol1, run_protocol2, ContextTable,
    LocalModelResponse, SettingPair, SpreadsheetRow, TrialRecord,
};
use crate::stats::{full_spreadsheet_report, ChshReport, ReferenceCurves};

pub const EVENTS_FILE: &str = "events.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Generated data of one run.
#[derive(Debug, Clone, PartialEq)]
pub enum Events {
    Trials(Vec<TrialRecord>),
    Spreadsheet(Vec<SpreadsheetRow>),
}

impl Events {
    pub fn len(&self) -> usize {
        match self {
            Events::Trials(t) => t.len(),
            Events::Spreadsheet(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// What `summary.json` holds. Wall-clock time is kept out of the file so
/// that identical configurations give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub event_count: usize,
    /// Estimates without any window. For Protocol 2 these are the full
    /// spreadsheet columns.
    pub unselected: ChshReport,
    pub windows: Vec<SweepRow>,
    pub reference: ReferenceCurves,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

/// Runs `f` on a dedicated pool of `threads` workers (`None`: rayon's
/// default). Output never depends on the thread count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Everything except writing files.
pub fn execute(config: &ExperimentConfig) -> Result<(RunSummary, Events)> {
    config.validate()?;
    let started = Instant::now();
    let model = config.model();
    let windows = config.coincidence_windows();
    let n = config.n_per_setting;

    let (events, unselected, rows) = match config.protocol {
        Protocol::P2 => {
            let sheet = run_protocol2(4 * n, &config.settings, &model, config.seed)?;
            // every row is observed under every setting pair
            let per_setting: [Vec<TrialRecord>; 4] = SettingPair::ALL.map(|p| {
                sheet
                    .iter()
                    .map(|r| {
                        let (x1, x2, t1, t2) = r.observe(p);
                        let (a, b) = config.settings.angles(p);
                        TrialRecord {
                            trial_index: r.trial_index,
                            pair: p,
                            setting_a: a,
                            setting_b: b,
                            x1,
                            x2,
                            t1,
                            t2,
                        }
                    })
                    .collect()
            });
            let rows = window_sweep(
                [&per_setting[0], &per_setting[1], &per_setting[2], &per_setting[3]],
                &windows,
                model.time_scale,
            )?;
            let full = full_spreadsheet_report(&sheet)?;
            (Events::Spreadsheet(sheet), full, rows)
        }
        protocol => {
            let trials = match protocol {
                Protocol::P1 => run_protocol1(n, &config.settings, config.schedule, &model, config.seed)?,
                Protocol::P2Extracted => {
                    let sheet = run_protocol2(4 * n, &config.settings, &model, config.seed)?;
                    extract_observed(&sheet, &config.settings, config.schedule, config.seed)?
                }
                Protocol::Augmented => match config.response {
                    ResponseKind::Local => augmented_instrument_run(
                        n,
                        &config.settings,
                        config.schedule,
                        &model,
                        &LocalModelResponse,
                        config.seed,
                    )?,
                    ResponseKind::Maximal => augmented_instrument_run(
                        n,
                        &config.settings,
                        config.schedule,
                        &model,
                        &ContextTable::maximal(),
                        config.seed,
                    )?,
                },
                Protocol::P2 => unreachable!(),
            };
            let unselected = ChshReport::from_trials(&trials, None)?;
            let rows = window_sweep_trials(&trials, &windows, model.time_scale)?;
            (Events::Trials(trials), unselected, rows)
        }
    };

    let summary = RunSummary {
        config: config.clone(),
        event_count: events.len(),
        unselected,
        windows: rows,
        reference: ReferenceCurves::at(&config.settings),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((summary, events))
}

/// Executes `config` and writes `events.csv`, `summary.json` and
/// `sweep.csv` into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunSummary> {
    let (summary, events) = with_threads(threads, || execute(config))??;
    let dir = config.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match &events {
        Events::Trials(t) => io::write_trial_events(&dir.join(EVENTS_FILE), t)?,
        Events::Spreadsheet(r) => io::write_spreadsheet_events(&dir.join(EVENTS_FILE), r)?,
    }
    write_summary(&dir.join(SUMMARY_FILE), &summary)?;
    io::write_sweep(&dir.join(SWEEP_FILE), &summary.windows)?;
    Ok(summary)
}

/// `summary.json` text: pretty JSON with a trailing newline.
pub fn summary_json(summary: &RunSummary) -> Result<String> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| Error::Format {
        path: SUMMARY_FILE.into(),
        message: e.to_string(),
    })?;
    text.push('\n');
    Ok(text)
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    std::fs::write(path, summary_json(summary)?).map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// The sweep as plot-ready CSV text, one row per window in sweep order.
pub fn emit_sweep_plot_data(summary: &RunSummary) -> Result<String> {
    io::sweep_csv(&summary.windows)
}
