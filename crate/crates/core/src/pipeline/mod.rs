//! End-to-end orchestration of the two-stage workflow and its baselines.

mod config;
mod run;
mod secret;

pub use config::{derive_seed, Mode, PipelineConfig, SamplingKind};
pub use run::{
    run_baseline, run_pipeline, run_privcode, train_junior, CheckpointRecord, DatasetSizes, Postcondition, RunReport, StagePrivacy,
    StageTiming, FILE_D, FILE_D_E, FILE_D_F, FILE_JUNIOR, FILE_PREMIUM, FILE_PROMPTS, FILE_REPORT, FILE_TIMINGS,
};
pub use secret::{mask_pii, mask_token, SecretDetector, SecretMatch};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("stage {stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    pub(crate) fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
        move |e| PipelineError::Stage {
            stage,
            message: e.to_string(),
        }
    }
}
