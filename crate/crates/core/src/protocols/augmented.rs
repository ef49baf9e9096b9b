//! Pair variables augmented with instrument microstates.
//!
//! Outcomes come from a response map of the pair's hidden state, the
//! microstates `λa`, `λb` of the two instruments at the moment of
//! measurement, and the setting. Once the response is allowed to depend on
//! the measurement context no common spreadsheet exists and the only bound
//! left on the CHSH combination is `|S| ≤ 4`.

use rand::Rng;
use rayon::prelude::*;

use super::{observe, pair_state, SettingPair, SettingsQuadruple, SettingsSchedule, TrialRecord};
use crate::error::{Error, Result};
use crate::model::{ModelConfig, PairState};
use crate::substream::{Purpose, SubstreamKey};

/// Microstates of the two instruments during one trial, each in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentState {
    pub lambda_a: f64,
    pub lambda_b: f64,
}

impl InstrumentState {
    pub fn sample(seed: u64, index: u64) -> Self {
        let mut rng = SubstreamKey::new(seed, Purpose::Instrument, index).rng();
        Self {
            lambda_a: rng.gen(),
            lambda_b: rng.gen(),
        }
    }
}

/// Everything a response map may look at for one trial.
#[derive(Debug, Clone, Copy)]
pub struct ResponseContext<'a> {
    pub pair_state: PairState,
    pub instruments: InstrumentState,
    pub setting_pair: SettingPair,
    pub angle_a: f64,
    pub angle_b: f64,
    pub model: &'a ModelConfig,
}

/// A deterministic map to the two outcomes of one trial.
///
/// Implementations may return any integer; values other than ±1 are
/// rejected by [`augmented_instrument_run`].
pub trait Response: Sync {
    fn respond(&self, ctx: &ResponseContext<'_>) -> (i32, i32);
}

/// The sign-threshold model itself, ignoring the instrument variables.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalModelResponse;

impl Response for LocalModelResponse {
    fn respond(&self, ctx: &ResponseContext<'_>) -> (i32, i32) {
        let settings = SettingsQuadruple {
            a1: ctx.angle_a,
            a1p: ctx.angle_a,
            a2: ctx.angle_b,
            a2p: ctx.angle_b,
        };
        let rec = observe(0, SettingPair::Ab, &settings, &ctx.pair_state, ctx.model);
        (i32::from(rec.x1), i32::from(rec.x2))
    }
}

/// Outcome table indexed by the realized setting pair and by a bucket of
/// Alice's instrument microstate.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextTable {
    entries: [Vec<(i32, i32)>; 4],
}

impl ContextTable {
    /// Every setting pair must have the same, nonzero number of buckets.
    pub fn new(entries: [Vec<(i32, i32)>; 4]) -> Result<Self> {
        let k = entries[0].len();
        if k == 0 || entries.iter().any(|e| e.len() != k) {
            return Err(Error::Config(
                "context table needs the same nonzero bucket count for every setting pair".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// Outcomes that make every CHSH term maximal: equal outcomes for the
    /// three `+` pairs, opposite outcomes for `(a1', a2')`. Yields `S = 4`.
    pub fn maximal() -> Self {
        Self {
            entries: [
                vec![(1, 1)],
                vec![(1, 1)],
                vec![(1, 1)],
                vec![(1, -1)],
            ],
        }
    }

    /// A table with `buckets` uniformly random ±1 entries per setting pair.
    pub fn random(seed: u64, buckets: usize) -> Self {
        let mut rng = SubstreamKey::new(seed, Purpose::Run, buckets as u64).rng();
        let mut pick = || if rng.gen::<bool>() { 1 } else { -1 };
        let entries = std::array::from_fn(|_| (0..buckets.max(1)).map(|_| (pick(), pick())).collect());
        Self { entries }
    }

    pub fn buckets(&self) -> usize {
        self.entries[0].len()
    }
}

impl Response for ContextTable {
    fn respond(&self, ctx: &ResponseContext<'_>) -> (i32, i32) {
        let row = &self.entries[ctx.setting_pair.index()];
        let bucket = ((ctx.instruments.lambda_a * row.len() as f64) as usize).min(row.len() - 1);
        row[bucket]
    }
}

/// Runs `4 * n_per_setting` trials whose outcomes come from `response`.
///
/// Delays are the model's delays for the same pair state, so the records
/// stay usable for window post-selection. Instrument microstates come from
/// their own substreams, independent of the pair stream.
pub fn augmented_instrument_run<R: Response + ?Sized>(
    n_per_setting: usize,
    settings: &SettingsQuadruple,
    schedule: SettingsSchedule,
    model: &ModelConfig,
    response: &R,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if n_per_setting == 0 {
        return Err(Error::Config("n_per_setting must be at least 1".into()));
    }
    model.validate()?;
    let n = n_per_setting as u64;
    (0..4 * n)
        .into_par_iter()
        .map(|i| {
            let pair = schedule.pair_for(i, n, seed);
            let state = pair_state(seed, i, model.r_min);
            let mut rec = observe(i, pair, settings, &state, model);
            let ctx = ResponseContext {
                pair_state: state,
                instruments: InstrumentState::sample(seed, i),
                setting_pair: pair,
                angle_a: rec.setting_a,
                angle_b: rec.setting_b,
                model,
            };
            let (x1, x2) = response.respond(&ctx);
            rec.x1 = checked_outcome(x1, i)?;
            rec.x2 = checked_outcome(x2, i)?;
            Ok(rec)
        })
        .collect()
}

fn checked_outcome(x: i32, trial: u64) -> Result<i8> {
    match x {
        1 => Ok(1),
        -1 => Ok(-1),
        other => Err(Error::Model(format!(
            "response returned {other} at trial {trial}; outcomes must be -1 or +1"
        ))),
    }
}
