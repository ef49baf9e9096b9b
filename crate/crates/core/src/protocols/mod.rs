//! Generation protocols.
//!
//! Protocol 1 draws a fresh pair for every trial and measures it once per
//! side with the scheduled setting pair. Protocol 2 measures every pair at
//! all four settings, producing a counterfactual spreadsheet. Both draw the
//! pair of trial `i` from the substream `(seed, Pair, i)`, so a spreadsheet
//! row and the Protocol 1 trial with the same index describe the same pair.

mod augmented;
mod spreadsheet;

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{measure, sample_pair_unchecked, ModelConfig, PairState};
use crate::substream::{Purpose, SubstreamKey};

pub use augmented::{
    augmented_instrument_run, ContextTable, InstrumentState, LocalModelResponse, Response,
    ResponseContext,
};
pub use spreadsheet::{extract_observed, run_protocol2, SpreadsheetRow};

/// Alice's two settings and Bob's two settings, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingsQuadruple {
    pub a1: f64,
    pub a1p: f64,
    pub a2: f64,
    pub a2p: f64,
}

impl Default for SettingsQuadruple {
    /// `(0, π/4, π/8, 3π/8)`: optimal for the quantum curve and on the
    /// classical boundary for the sawtooth under the best sign placement.
    fn default() -> Self {
        Self {
            a1: 0.0,
            a1p: FRAC_PI_4,
            a2: FRAC_PI_8,
            a2p: 3.0 * FRAC_PI_8,
        }
    }
}

impl SettingsQuadruple {
    pub fn angles(&self, pair: SettingPair) -> (f64, f64) {
        let a = if pair.alice_primed() { self.a1p } else { self.a1 };
        let b = if pair.bob_primed() { self.a2p } else { self.a2 };
        (a, b)
    }
}

/// One of the four setting pairs, in the block order of Protocol 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SettingPair {
    /// `(a1, a2)`
    Ab,
    /// `(a1, a2')`
    Abp,
    /// `(a1', a2)`
    Apb,
    /// `(a1', a2')`
    Apbp,
}

impl SettingPair {
    pub const ALL: [SettingPair; 4] = [
        SettingPair::Ab,
        SettingPair::Abp,
        SettingPair::Apb,
        SettingPair::Apbp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn alice_primed(self) -> bool {
        matches!(self, SettingPair::Apb | SettingPair::Apbp)
    }

    pub fn bob_primed(self) -> bool {
        matches!(self, SettingPair::Abp | SettingPair::Apbp)
    }
}

/// How setting pairs are assigned to trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingsSchedule {
    /// Four consecutive blocks of `n` trials, one per setting pair.
    #[default]
    Block,
    /// An independent uniform choice among the four pairs for every trial.
    Random,
}

impl SettingsSchedule {
    /// Setting pair of trial `index` in a run of `4 * n_per_setting` trials.
    pub fn pair_for(self, index: u64, n_per_setting: u64, seed: u64) -> SettingPair {
        match self {
            SettingsSchedule::Block => {
                let block = (index / n_per_setting.max(1)).min(3) as usize;
                SettingPair::ALL[block]
            }
            SettingsSchedule::Random => {
                let mut rng = SubstreamKey::new(seed, Purpose::Settings, index).rng();
                SettingPair::ALL[rng.gen_range(0..4)]
            }
        }
    }
}

/// One observed trial: the setting pair used, two outcomes, two delays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub pair: SettingPair,
    pub setting_a: f64,
    pub setting_b: f64,
    pub x1: i8,
    pub x2: i8,
    pub t1: f64,
    pub t2: f64,
}

/// The hidden state of pair `index` under `seed`.
///
/// Trial records do not carry φ or r; this regenerates them from the keyed
/// substream for auditing and histogram checks.
pub fn pair_state(seed: u64, index: u64, r_min: f64) -> PairState {
    let mut rng = SubstreamKey::new(seed, Purpose::Pair, index).rng();
    sample_pair_unchecked(&mut rng, r_min)
}

pub(crate) fn observe(
    trial_index: u64,
    pair: SettingPair,
    settings: &SettingsQuadruple,
    state: &PairState,
    model: &ModelConfig,
) -> TrialRecord {
    let (a, b) = settings.angles(pair);
    let alice = measure(state.phi, &model.station(a), state.r1);
    let bob = measure(state.phi_second(), &model.station(b), state.r2);
    TrialRecord {
        trial_index,
        pair,
        setting_a: a,
        setting_b: b,
        x1: alice.outcome,
        x2: bob.outcome,
        t1: alice.delay,
        t2: bob.delay,
    }
}

/// Protocol 1: `4 * n_per_setting` trials, each on a fresh pair.
pub fn run_protocol1(
    n_per_setting: usize,
    settings: &SettingsQuadruple,
    schedule: SettingsSchedule,
    model: &ModelConfig,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if n_per_setting == 0 {
        return Err(Error::Config("n_per_setting must be at least 1".into()));
    }
    model.validate()?;
    let n = n_per_setting as u64;
    Ok((0..4 * n)
        .into_par_iter()
        .map(|i| {
            let pair = schedule.pair_for(i, n, seed);
            observe(i, pair, settings, &pair_state(seed, i, model.r_min), model)
        })
        .collect())
}

/// `n` Protocol 1 trials at a single setting pair `(a, b)`, using pair
/// substreams `offset..offset + n`.
pub fn simulate_setting_pair(
    n: usize,
    a: f64,
    b: f64,
    model: &ModelConfig,
    seed: u64,
    offset: u64,
) -> Result<Vec<TrialRecord>> {
    model.validate()?;
    let settings = SettingsQuadruple {
        a1: a,
        a1p: a,
        a2: b,
        a2p: b,
    };
    Ok((offset..offset + n as u64)
        .into_par_iter()
        .map(|i| {
            observe(
                i,
                SettingPair::Ab,
                &settings,
                &pair_state(seed, i, model.r_min),
                model,
            )
        })
        .collect())
}

/// Splits trial records into the four per-setting sequences, keeping order.
pub fn split_by_setting(trials: &[TrialRecord]) -> [Vec<TrialRecord>; 4] {
    let mut out: [Vec<TrialRecord>; 4] = Default::default();
    for t in trials {
        out[t.pair.index()].push(*t);
    }
    out
}
