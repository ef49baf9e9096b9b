//! Keyed pseudo-random substreams.
//!
//! Every random draw in the simulator comes from a stream identified by
//! `(global seed, purpose, index)`. The global seed and purpose select a
//! ChaCha8 key; the index selects one of its 2^64 independent streams. Two
//! computations that ask for the same key see the same numbers no matter
//! which thread runs them or in what order, which is what lets Protocol 1,
//! Protocol 2 and the spreadsheet extraction share pair states exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Hidden state of an emitted pair (φ, r1, r2).
    Pair,
    /// Choice of setting pair under the random schedule.
    Settings,
    /// Microstates of the two measuring instruments.
    Instrument,
    /// Seeds of independent repetitions of a whole experiment.
    Run,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Pair => 0x7061_6972,
            Purpose::Settings => 0x7365_7474,
            Purpose::Instrument => 0x696e_7374,
            Purpose::Run => 0x7275_6e73,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubstreamKey {
    pub seed: u64,
    pub purpose: Purpose,
    pub index: u64,
}

impl SubstreamKey {
    pub fn new(seed: u64, purpose: Purpose, index: u64) -> Self {
        Self {
            seed,
            purpose,
            index,
        }
    }

    /// A fresh generator positioned at the start of this substream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.seed ^ self.purpose.tag().rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.index);
        rng
    }
}

/// Seed for repetition `run` of an experiment with base seed `seed`.
pub fn derive_seed(seed: u64, run: u64) -> u64 {
    use rand::RngCore;
    SubstreamKey::new(seed, Purpose::Run, run).rng().next_u64()
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
