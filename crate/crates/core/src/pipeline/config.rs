//! Flat TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::filters::RoundTripConfig;
use crate::lm::{LmConfig, PlainTrainConfig};
use crate::minilang::ExecBudget;
use crate::privacy::Conversion;
use crate::privsa::LambdaSchedule;
use crate::synth::{SamplingConfig, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    PrivCode,
    Dpft,
    Jft,
    NonDpft,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::PrivCode => "privcode",
            Mode::Dpft => "dpft",
            Mode::Jft => "jft",
            Mode::NonDpft => "nondpft",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "privcode" => Ok(Mode::PrivCode),
            "dpft" => Ok(Mode::Dpft),
            "jft" => Ok(Mode::Jft),
            "nondpft" => Ok(Mode::NonDpft),
            other => Err(format!("unknown mode {other:?} (expected privcode, dpft, jft or nondpft)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingKind {
    Greedy,
    TopK,
    Temperature,
}

fn d_f64<const N: u32, const D: u32>() -> f64 {
    N as f64 / D as f64
}

/// Every key the config file may contain. Paths are relative to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Seed for model initialization and public pretraining. Defaults to
    /// `seed`; fixing it lets runs with different seeds share one
    /// pretrained starting point.
    #[serde(default)]
    pub model_seed: Option<u64>,

    pub dataset: PathBuf,
    pub tasks: PathBuf,
    #[serde(default)]
    pub public_corpus: Option<PathBuf>,
    #[serde(default)]
    pub canaries: Option<PathBuf>,
    /// Inject the canaries into the sensitive dataset before training.
    #[serde(default)]
    pub inject_canaries: bool,
    /// Reuse pretrained checkpoints across runs. Not part of the config hash.
    #[serde(default, skip_serializing)]
    pub pretrain_cache: Option<PathBuf>,

    pub junior_embed_dim: usize,
    pub junior_context_window: usize,
    pub junior_hidden_dim: usize,
    pub premium_embed_dim: usize,
    pub premium_context_window: usize,
    pub premium_hidden_dim: usize,

    #[serde(default)]
    pub pretrain_epochs: usize,
    #[serde(default = "default_batch")]
    pub pretrain_batch_size: usize,
    #[serde(default = "d_f64::<1, 2>")]
    pub pretrain_learning_rate: f64,

    #[serde(default = "d_f64::<1, 1>")]
    pub dp_clip_norm: f64,
    #[serde(default = "d_f64::<1, 100000>")]
    pub dp_delta: f64,
    #[serde(default = "d_f64::<4, 1>")]
    pub dp_target_epsilon: f64,
    /// Fixed noise multiplier; calibrated to `dp_target_epsilon` when absent.
    #[serde(default)]
    pub dp_noise_scale: Option<f64>,
    #[serde(default = "default_steps")]
    pub dp_steps: usize,
    pub dp_expected_batch: usize,
    #[serde(default = "d_f64::<1, 2>")]
    pub dp_learning_rate: f64,
    #[serde(default)]
    pub conversion: Conversion,

    #[serde(default = "d_f64::<1000, 1>")]
    pub lambda_max: f64,
    #[serde(default = "d_f64::<1, 100>")]
    pub lambda_min: f64,
    #[serde(default = "d_f64::<1, 100>")]
    pub lambda_decay: f64,
    #[serde(default = "default_interval")]
    pub lambda_interval: usize,

    #[serde(default = "default_one")]
    pub samples_per_prompt: usize,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingKind,
    #[serde(default = "d_f64::<1, 1>")]
    pub temperature: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,

    #[serde(default = "d_f64::<88, 100>")]
    pub round_trip_threshold: f64,
    #[serde(default = "default_one")]
    pub summaries_per_snippet: usize,
    #[serde(default = "default_exec_steps")]
    pub exec_max_steps: u64,
    #[serde(default = "default_exec_output")]
    pub exec_max_output: usize,

    #[serde(default = "default_finetune_epochs")]
    pub finetune_epochs: usize,
    #[serde(default = "default_batch")]
    pub finetune_batch_size: usize,
    #[serde(default = "d_f64::<1, 2>")]
    pub finetune_learning_rate: f64,

    #[serde(default = "default_max_tokens")]
    pub eval_max_tokens: usize,
    #[serde(default = "default_audit_samples")]
    pub audit_samples: usize,
    #[serde(default = "d_f64::<1, 1>")]
    pub audit_temperature: f64,
}

fn default_batch() -> usize {
    16
}
fn default_steps() -> usize {
    100
}
fn default_interval() -> usize {
    20
}
fn default_one() -> usize {
    1
}
fn default_sampling() -> SamplingKind {
    SamplingKind::Temperature
}
fn default_top_k() -> usize {
    40
}
fn default_max_tokens() -> usize {
    crate::synth::DEFAULT_MAX_TOKENS
}
fn default_exec_steps() -> u64 {
    100_000
}
fn default_exec_output() -> usize {
    64 * 1024
}
fn default_finetune_epochs() -> usize {
    10
}
fn default_audit_samples() -> usize {
    500
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses the file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        fix(&mut self.tasks);
        for p in [&mut self.public_corpus, &mut self.canaries, &mut self.pretrain_cache]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    pub fn model_seed(&self) -> u64 {
        self.model_seed.unwrap_or(self.seed)
    }

    pub fn junior(&self) -> LmConfig {
        LmConfig::byte_level(
            self.junior_embed_dim,
            self.junior_context_window,
            self.junior_hidden_dim,
            derive_seed(self.model_seed(), "junior-init"),
        )
    }

    pub fn premium(&self) -> LmConfig {
        LmConfig::byte_level(
            self.premium_embed_dim,
            self.premium_context_window,
            self.premium_hidden_dim,
            derive_seed(self.model_seed(), "premium-init"),
        )
    }

    pub fn schedule(&self) -> LambdaSchedule {
        LambdaSchedule {
            lambda_max: self.lambda_max,
            lambda_min: self.lambda_min,
            decay_rate: self.lambda_decay,
            step_interval: self.lambda_interval,
        }
    }

    pub fn sampling(&self) -> SamplingConfig {
        let strategy = match self.sampling {
            SamplingKind::Greedy => Strategy::Greedy,
            SamplingKind::TopK => Strategy::TopK { k: self.top_k },
            SamplingKind::Temperature => Strategy::Temperature {
                temperature: self.temperature,
            },
        };
        SamplingConfig {
            strategy,
            max_tokens: self.max_tokens,
            seed: derive_seed(self.seed, "generate"),
        }
    }

    pub fn round_trip(&self) -> RoundTripConfig {
        RoundTripConfig {
            threshold: self.round_trip_threshold,
            summaries_per_snippet: self.summaries_per_snippet,
        }
    }

    pub fn exec_budget(&self) -> ExecBudget {
        ExecBudget {
            max_steps: self.exec_max_steps,
            max_output_bytes: self.exec_max_output,
        }
    }

    pub fn pretrain(&self, label: &str) -> PlainTrainConfig {
        PlainTrainConfig {
            epochs: self.pretrain_epochs,
            batch_size: self.pretrain_batch_size,
            learning_rate: self.pretrain_learning_rate,
            seed: derive_seed(self.model_seed(), label),
        }
    }

    pub fn finetune(&self, label: &str) -> PlainTrainConfig {
        PlainTrainConfig {
            epochs: self.finetune_epochs,
            batch_size: self.finetune_batch_size,
            learning_rate: self.finetune_learning_rate,
            seed: derive_seed(self.seed, label),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        let (j, p) = (self.junior(), self.premium());
        if j.validate().is_err() || p.validate().is_err() {
            return bad("model dimensions must be at least 1");
        }
        if p.num_params() <= j.num_params() {
            return bad("the premium model must have more parameters than the junior model");
        }
        if self.dp_expected_batch == 0 || self.dp_steps == 0 {
            return bad("dp_expected_batch and dp_steps must be at least 1");
        }
        if !(self.dp_clip_norm > 0.0) || !(self.dp_delta > 0.0 && self.dp_delta < 1.0) {
            return bad("dp_clip_norm must be positive and dp_delta in (0, 1)");
        }
        if self.dp_noise_scale.is_none() && !(self.dp_target_epsilon > 0.0) {
            return bad("dp_target_epsilon must be positive");
        }
        if let Some(s) = self.dp_noise_scale {
            if !(s > 0.0) {
                return bad("dp_noise_scale must be positive");
            }
        }
        for (name, v) in [
            ("dp_learning_rate", self.dp_learning_rate),
            ("finetune_learning_rate", self.finetune_learning_rate),
            ("pretrain_learning_rate", self.pretrain_learning_rate),
            ("audit_temperature", self.audit_temperature),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PipelineError::Config(format!("{name} must be positive")));
            }
        }
        if self.finetune_batch_size == 0 || self.pretrain_batch_size == 0 || self.samples_per_prompt == 0 {
            return bad("batch sizes and samples_per_prompt must be at least 1");
        }
        if self.inject_canaries && self.canaries.is_none() {
            return bad("inject_canaries needs a canaries file");
        }
        if self.eval_max_tokens == 0 {
            return bad("eval_max_tokens must be at least 1");
        }
        self.schedule()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.sampling()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.round_trip().validate().map_err(PipelineError::Config)?;
        ExecBudget::new(self.exec_max_steps, self.exec_max_output)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of the config. Paths enter as
    /// file names only, so the hash does not depend on where the run lives.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        let name_only = |p: &mut PathBuf| {
            if let Some(n) = p.file_name() {
                *p = PathBuf::from(n);
            }
        };
        name_only(&mut canonical.dataset);
        name_only(&mut canonical.tasks);
        for p in [&mut canonical.public_corpus, &mut canonical.canaries].into_iter().flatten() {
            name_only(p);
        }
        canonical.pretrain_cache = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Independent sub-seed for a named purpose.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}
