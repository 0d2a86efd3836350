//! Learned optimization of EPNet damping factors: a coordinatewise LSTM
//! optimizer meta-trained on random quadratics, then applied online to the
//! detector loss.

mod adam;
mod lstm;
mod meta;
mod online;

pub use adam::Adam;
pub use lstm::{lstm_step, LstmOptimizerParams, LstmState, StepCache, GRAD_CLIP, HIDDEN, LAYERS, OUTPUT_SCALE, PARAM_COUNT, THETA_SCHEMA};
pub use meta::{
    apply_optimizer, meta_loss_and_grad, meta_train, meta_train_from, quad_grad, MetaTrainConfig, MetaTrainReport,
    QuadraticTask, Trajectory,
};
pub use online::{
    coded_frame, DEFAULT_LOSS_SCALE, epnet_loss, epnet_loss_and_grad, online_train, train_schedule, uncoded_dataset, CodedFrame,
    EpnetDataset, OnlineOptimizer, OnlineReport, OnlineTrainConfig, TrainingSample,
};
