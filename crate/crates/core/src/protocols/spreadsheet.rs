use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pair_state, SettingPair, SettingsQuadruple, SettingsSchedule, TrialRecord};
use crate::error::{Error, Result};
use crate::model::{measure, ModelConfig};

/// One counterfactual line: outcomes and delays of one pair at all four
/// settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadsheetRow {
    pub trial_index: u64,
    pub x_a1: i8,
    pub x_a1p: i8,
    pub x_a2: i8,
    pub x_a2p: i8,
    pub t_a1: f64,
    pub t_a1p: f64,
    pub t_a2: f64,
    pub t_a2p: f64,
}

impl SpreadsheetRow {
    /// `x_a1 x_a2 + x_a1 x_a2' + x_a1' x_a2 - x_a1' x_a2'`, always ±2.
    pub fn chsh_term(&self) -> i32 {
        let (a, ap, b, bp) = (
            i32::from(self.x_a1),
            i32::from(self.x_a1p),
            i32::from(self.x_a2),
            i32::from(self.x_a2p),
        );
        a * b + a * bp + ap * b - ap * bp
    }

    /// The four outcomes packed as bits (bit set for -1), in column order.
    pub fn sign_pattern(&self) -> u8 {
        [self.x_a1, self.x_a1p, self.x_a2, self.x_a2p]
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &x)| acc | (u8::from(x < 0) << i))
    }

    /// `(x1, x2, t1, t2)` as observed under setting pair `pair`.
    pub fn observe(&self, pair: SettingPair) -> (i8, i8, f64, f64) {
        let (x1, t1) = if pair.alice_primed() {
            (self.x_a1p, self.t_a1p)
        } else {
            (self.x_a1, self.t_a1)
        };
        let (x2, t2) = if pair.bob_primed() {
            (self.x_a2p, self.t_a2p)
        } else {
            (self.x_a2, self.t_a2)
        };
        (x1, x2, t1, t2)
    }

    /// Products `x·y` for the four setting pairs, in [`SettingPair::ALL`] order.
    pub fn products(&self) -> [i8; 4] {
        SettingPair::ALL.map(|p| {
            let (x1, x2, _, _) = self.observe(p);
            x1 * x2
        })
    }
}

/// Protocol 2: every pair is measured at all four settings.
pub fn run_protocol2(
    n_rows: usize,
    settings: &SettingsQuadruple,
    model: &ModelConfig,
    seed: u64,
) -> Result<Vec<SpreadsheetRow>> {
    if n_rows == 0 {
        return Err(Error::Config("n_rows must be at least 1".into()));
    }
    model.validate()?;
    Ok((0..n_rows as u64)
        .into_par_iter()
        .map(|i| {
            let st = pair_state(seed, i, model.r_min);
            let alice = |a| measure(st.phi, &model.station(a), st.r1);
            let bob = |b| measure(st.phi_second(), &model.station(b), st.r2);
            let (e1, e1p) = (alice(settings.a1), alice(settings.a1p));
            let (e2, e2p) = (bob(settings.a2), bob(settings.a2p));
            SpreadsheetRow {
                trial_index: i,
                x_a1: e1.outcome,
                x_a1p: e1p.outcome,
                x_a2: e2.outcome,
                x_a2p: e2p.outcome,
                t_a1: e1.delay,
                t_a1p: e1p.delay,
                t_a2: e2.delay,
                t_a2p: e2p.delay,
            }
        })
        .collect())
}

/// Picks, from every row, the two entries a real experiment would have
/// observed under the scheduled setting pair.
///
/// The block schedule needs a multiple of four rows. Setting choices come
/// from the same substreams Protocol 1 uses, so extracting from a Protocol 2
/// spreadsheet reproduces the Protocol 1 run with the same seed.
pub fn extract_observed(
    rows: &[SpreadsheetRow],
    settings: &SettingsQuadruple,
    schedule: SettingsSchedule,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if rows.is_empty() {
        return Err(Error::NoData("spreadsheet has no rows".into()));
    }
    if schedule == SettingsSchedule::Block && !rows.len().is_multiple_of(4) {
        return Err(Error::Config(format!(
            "block extraction needs a multiple of 4 rows, got {}",
            rows.len()
        )));
    }
    let n = (rows.len() / 4) as u64;
    Ok(rows
        .par_iter()
        .map(|row| {
            let pair = schedule.pair_for(row.trial_index, n, seed);
            let (a, b) = settings.angles(pair);
            let (x1, x2, t1, t2) = row.observe(pair);
            TrialRecord {
                trial_index: row.trial_index,
                pair,
                setting_a: a,
                setting_b: b,
                x1,
                x2,
                t1,
                t2,
            }
        })
        .collect())
}
