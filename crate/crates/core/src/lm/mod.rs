//! Compact autoregressive language model with hand-derived gradients.

mod checkpoint;
mod loss;
mod model;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointStamp};
pub use loss::{
    accumulate_gradient, kl_divergence, per_sample_gradient, sequence_nll, structural_kl,
    LossBreakdown, PairTokens,
};
pub use model::{context_at, forward, init_params, Layout, LmConfig, LmParams, ProbDist, INIT_SCALE};
pub use train::{train_plain, PlainTrainConfig};

use crate::corpus::TokenId;

#[derive(Debug, thiserror::Error)]
pub enum LmError {
    #[error("invalid model config: {0}")]
    InvalidConfig(&'static str),
    #[error("parameter vector has {found} entries, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("parameters contain non-finite values")]
    NonFinite,
    #[error("probabilities must be non-negative and sum to 1")]
    NotADistribution,
    #[error("context has {found} tokens, expected {expected}")]
    ContextLength { expected: usize, found: usize },
    #[error("token id {0} is outside the vocabulary")]
    TokenOutOfRange(TokenId),
    #[error("snippet has no tokens")]
    EmptySnippet,
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}
