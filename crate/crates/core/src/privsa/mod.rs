//! Stage-one training: DP-SGD on the structure-aware objective
//! `L_CE + lambda(t) * L_KL` against a frozen reference snapshot.

mod schedule;
mod train;

pub use schedule::{lambda_at, LambdaSchedule};
pub use train::{
    privsa_train, privsa_train_from, sampling_rate_for, snapshot_reference, ReferenceModel, StepRecord,
    TrainConfig, TrainTrace,
};

use crate::lm::LmError;
use crate::privacy::PrivacyError;

#[derive(Debug, thiserror::Error)]
pub enum PrivsaError {
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("record {index} has empty code")]
    EmptySnippet { index: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
}
