//! Seeded per-trial streams, estimators, run configuration, JSON-lines logs
//! and the run driver.

mod config;
mod estimate;
mod log;
mod runner;
mod stream;

pub use config::{CatalogChoice, ConfigError, EventLayout, OutputFormat, ProtocolName, RunConfig, TeleportMode};
pub use estimate::{
    chsh_estimator, corrected_bloch_estimate, fidelity_estimator, mean_estimate, CompensatedSum, EstimateWithError,
    EstimationError, PAULI_SETTINGS,
};
pub use log::{
    read_log, read_log_from, read_shards, write_log, write_log_to, write_summary_csv, LogError, LogHeader, LogLine,
    LogWriter, RunLog, RunSummary, LOG_FORMAT_VERSION,
};
pub use runner::{run, run_with, RunError, DEFAULT_IN_STATE, DEFAULT_T0};
pub use stream::{derive_stream, TrialRng};
