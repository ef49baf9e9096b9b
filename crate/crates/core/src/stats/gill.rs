//! Repeated finite-sample CHSH experiments without post-selection.
//!
//! For data with predetermined outcomes, the chance that a finite sample
//! exceeds the classical boundary is conjectured to be at most one half.
//! At settings where the expected statistic sits exactly on the boundary the
//! violation fraction is a fair coin.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ChshReport, CorrelationEstimate};
use crate::error::{Error, Result};
use crate::model::{quantum_correlation, sawtooth_oracle, ModelConfig};
use crate::protocols::{
    extract_observed, run_protocol1, run_protocol2, SettingPair, SettingsQuadruple,
    SettingsSchedule, SpreadsheetRow,
};
use crate::substream::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GillProtocol {
    /// A fresh pair per trial.
    P1,
    /// Two entries picked from each spreadsheet row.
    P2Extracted,
    /// All four spreadsheet columns over all rows.
    P2Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GillOutcome {
    /// Fraction of runs with `max |S| > 2` over the sign placements.
    pub violation_fraction: f64,
    /// Fraction of runs with the fixed-placement `S ≥ 2`.
    pub one_sided_fraction: f64,
    pub runs: Vec<ChshReport>,
}

/// CHSH over the full columns of a spreadsheet. Every row contributes ±2,
/// so `|S| ≤ 2` for every placement.
pub fn full_spreadsheet_report(rows: &[SpreadsheetRow]) -> Result<ChshReport> {
    if rows.is_empty() {
        return Err(Error::NoData("spreadsheet has no rows".into()));
    }
    let mut counts = [[0u64; 4]; 4];
    for row in rows {
        for p in SettingPair::ALL {
            let (x1, x2, _, _) = row.observe(p);
            counts[p.index()][super::joint_cell(x1, x2)] += 1;
        }
    }
    let est = counts.map(|c| CorrelationEstimate::from_counts(c[0], c[1], c[2], c[3]).expect("rows"));
    Ok(ChshReport::from_estimates(est, None))
}

/// One unselected experiment of `4 * n_per_setting` trials.
pub fn single_run(
    n_per_setting: usize,
    settings: &SettingsQuadruple,
    schedule: SettingsSchedule,
    protocol: GillProtocol,
    model: &ModelConfig,
    seed: u64,
) -> Result<ChshReport> {
    match protocol {
        GillProtocol::P1 => {
            let trials = run_protocol1(n_per_setting, settings, schedule, model, seed)?;
            ChshReport::from_trials(&trials, None)
        }
        GillProtocol::P2Extracted => {
            let rows = run_protocol2(4 * n_per_setting, settings, model, seed)?;
            let trials = extract_observed(&rows, settings, schedule, seed)?;
            ChshReport::from_trials(&trials, None)
        }
        GillProtocol::P2Full => {
            let rows = run_protocol2(4 * n_per_setting, settings, model, seed)?;
            full_spreadsheet_report(&rows)
        }
    }
}

/// Runs `m_runs` independent experiments, run `k` seeded with
/// `derive_seed(seed, k)`, and counts those beyond the classical boundary.
pub fn gill_conjecture_experiment(
    m_runs: usize,
    n_per_setting: usize,
    settings: &SettingsQuadruple,
    schedule: SettingsSchedule,
    protocol: GillProtocol,
    model: &ModelConfig,
    seed: u64,
) -> Result<GillOutcome> {
    if m_runs == 0 {
        return Err(Error::Config("need at least one run".into()));
    }
    let runs = (0..m_runs as u64)
        .into_par_iter()
        .map(|k| single_run(n_per_setting, settings, schedule, protocol, model, derive_seed(seed, k)))
        .collect::<Result<Vec<_>>>()?;
    let m = runs.len() as f64;
    let violation_fraction = runs.iter().filter(|r| r.violates_classical_bound()).count() as f64 / m;
    let one_sided_fraction = runs.iter().filter(|r| r.s_value >= 2.0).count() as f64 / m;
    Ok(GillOutcome {
        violation_fraction,
        one_sided_fraction,
        runs,
    })
}

/// The four reference correlations at a settings quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCurves {
    pub sawtooth: [f64; 4],
    pub quantum: [f64; 4],
    pub sawtooth_s: f64,
    pub sawtooth_s_max: f64,
    pub quantum_s: f64,
    pub quantum_s_max: f64,
}

impl ReferenceCurves {
    pub fn at(settings: &SettingsQuadruple) -> Self {
        let eval = |f: fn(f64, f64) -> f64| {
            SettingPair::ALL.map(|p| {
                let (a, b) = settings.angles(p);
                f(a, b)
            })
        };
        let sawtooth = eval(sawtooth_oracle);
        let quantum = eval(quantum_correlation);
        let (sawtooth_s, sawtooth_s_max) =
            super::chsh(sawtooth[0], sawtooth[1], sawtooth[2], sawtooth[3]).expect("oracle in range");
        let (quantum_s, quantum_s_max) =
            super::chsh(quantum[0], quantum[1], quantum[2], quantum[3]).expect("in range");
        Self {
            sawtooth,
            quantum,
            sawtooth_s,
            sawtooth_s_max,
            quantum_s,
            quantum_s_max,
        }
    }
}

/// Grid search for quadruples whose unselected sawtooth statistic sits on
/// the classical boundary, `max |S| = 2`.
///
/// Angles run over `kπ/grid`, `k = 0..grid`, with `a1 = 0` fixed since only
/// differences matter. Returns every boundary quadruple and the largest
/// `max |S|` seen, which never exceeds 2 for this local model.
pub fn locate_boundary_settings(grid: usize) -> (Vec<SettingsQuadruple>, f64) {
    let step = PI / grid as f64;
    let mut found = Vec::new();
    let mut best = 0.0f64;
    for i in 0..grid {
        for j in 0..grid {
            for k in 0..grid {
                let s = SettingsQuadruple {
                    a1: 0.0,
                    a1p: i as f64 * step,
                    a2: j as f64 * step,
                    a2p: k as f64 * step,
                };
                let smax = ReferenceCurves::at(&s).sawtooth_s_max;
                best = best.max(smax);
                if (smax - 2.0).abs() < 1e-9 {
                    found.push(s);
                }
            }
        }
    }
    (found, best)
}
