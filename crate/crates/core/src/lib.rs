//! Event-by-event simulation of idealized EPRB experiments.
//!
//! Each emitted pair carries a polarization angle and two delay parameters.
//! Both stations compute a predetermined outcome and a setting-dependent
//! registration delay; coincidence windows on the delay difference then
//! post-select the sample. The crate generates the data under two protocols,
//! applies the windows, estimates correlations and CHSH statistics, and
//! compares them with analytic references and with the contextual model that
//! reproduces the post-selected distribution.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model;
pub mod postselect;
pub mod protocols;
pub mod stats;
pub mod substream;

pub use error::{Error, Result};
pub use model::{
    measure, quantum_correlation, sample_pair, sawtooth_oracle, DetectionEvent, ModelConfig,
    PairState, StationConfig,
};
