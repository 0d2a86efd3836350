//! Monte Carlo experiment engine: SNR sweeps, ML oracle comparison and
//! result files.

mod config;
mod oracle;
mod record;
mod sweep;
mod train;

pub use config::{
    Detector, ExperimentConfig, StoppingRule, SystemConfig, VariantSpec, CONFIG_SCHEMA, MIN_REPORTED_ERRORS,
};
pub use oracle::{compare_oracle, OracleConfig, OracleReport};
pub use record::{read_csv, wilson_interval, write_csv, BerRecord, CSV_HEADER, Z95};
pub use sweep::{frame_rng, record_label, run_sweep};
pub use train::{run_online_training, OptimizerKind, TrainingConfig, TrainingOutcome};
