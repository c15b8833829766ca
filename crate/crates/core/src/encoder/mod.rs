//! Trainable sparse document encoder.

mod negatives;
mod optim;
mod params;
mod rank;
mod train;

pub use params::{encode, encode_all, Checkpoint, EncoderParams, Init, ParamGrads};
pub use optim::{Optimizer, OptimizerState};
pub use rank::{candidates, rank_loss, RankLossOutput};
pub use train::{
    objective, refresh_penalties, train, train_step, DfSnapshot, LogEntry, Objective, Penalty,
    PenaltyCurve, Refresh, Regularizer, StepRecord, TrainBatch, TrainConfig, TrainLog,
    TrainingData,
};
