//! Correlation estimates, CHSH statistics, the repeated-experiment violation
//! fraction and the contextual model of post-selected data.

mod contextual;
mod estimate;
mod gill;

pub use contextual::{
    build_contextual_model, contextual_model_predict, ContextualModel, ModelCell, DEFAULT_BINS,
};
pub(crate) use estimate::joint_cell;
pub use estimate::{
    chsh, compare_distributions, estimate_correlation, estimate_trials, ChshReport,
    CorrelationEstimate,
};
pub use gill::{
    full_spreadsheet_report, gill_conjecture_experiment, locate_boundary_settings, single_run,
    GillOutcome, GillProtocol, ReferenceCurves,
};
