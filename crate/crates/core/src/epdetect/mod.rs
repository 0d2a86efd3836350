//! EP-based MIMO detection: EPNet with per-layer trainable damping, the
//! linear MMSE and exhaustive ML baselines, and the JDD receiver loop.

mod ep;
mod jdd;
mod linalg;
mod ml;
mod table;

pub use ep::{
    cavity, damp, discrete_moments, ep_global_moments, ep_layer, epnet_detect, epnet_detect_from, mmse_detect,
    refine_pair, DampingSchedule, EpConfig, EpOutput, EpPair, EpState, GlobalMoments, LayerOutput, PreparedModel,
    DEFAULT_MIN_VAR,
};
pub use jdd::{initial_priors, jdd_receive, jdd_stage, modulate_codeword, FrameLayout, JddReceiver, StageOutput};
pub use ml::{ml_detect, ML_SEARCH_LIMIT};
pub use table::{reference_schedule, DampingTable, TableEntry, REFERENCE_8X8_16QAM, TABLE_SCHEMA};
