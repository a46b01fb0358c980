//! Prompted code generation from a trained model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{CodeSnippet, TokenId, Vocabulary, BOS, EOS, PAD, SEP};
use crate::lm::{context_at, forward, LmConfig, LmError, LmParams, ProbDist};

pub const DEFAULT_MAX_TOKENS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    TopK { k: usize },
    Temperature { temperature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    pub max_tokens: usize,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn greedy(max_tokens: usize) -> Self {
        Self {
            strategy: Strategy::Greedy,
            max_tokens,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), LmError> {
        let ok = self.max_tokens >= 1
            && match self.strategy {
                Strategy::Greedy => true,
                Strategy::TopK { k } => k >= 1,
                Strategy::Temperature { temperature } => temperature > 0.0 && temperature.is_finite(),
            };
        if ok {
            Ok(())
        } else {
            Err(LmError::InvalidConfig("sampling needs max_tokens >= 1, k >= 1, temperature > 0"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Eos,
    MaxTokens,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub prompt: String,
    pub snippet: CodeSnippet,
    /// Byte tokens written into the snippet (EOS is not counted).
    pub tokens_emitted: usize,
    pub stop_reason: StopReason,
}

/// Tokens the generator may emit: every byte and EOS.
fn emittable(id: usize) -> bool {
    let id = id as TokenId;
    id != BOS && id != PAD && id != SEP
}

/// Picks the next token from `dist`. BOS, PAD and SEP are never chosen; ties
/// go to the lowest id.
pub fn sample_token<R: Rng + ?Sized>(dist: &ProbDist, strategy: &Strategy, rng: &mut R) -> TokenId {
    let p = dist.as_slice();
    let candidates: Vec<usize> = (0..p.len()).filter(|&i| emittable(i)).collect();
    match *strategy {
        Strategy::Greedy => {
            let mut best = candidates[0];
            for &i in &candidates {
                if p[i] > p[best] {
                    best = i;
                }
            }
            best as TokenId
        }
        Strategy::TopK { k } => {
            let mut ranked = candidates;
            // stable sort keeps lower ids first among equal probabilities
            ranked.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
            ranked.truncate(k.max(1));
            let weights: Vec<f64> = ranked.iter().map(|&i| p[i]).collect();
            ranked[pick(&weights, rng)] as TokenId
        }
        Strategy::Temperature { temperature } => {
            let logs: Vec<f64> = candidates.iter().map(|&i| p[i].ln() / temperature).collect();
            let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
            candidates[pick(&weights, rng)] as TokenId
        }
    }
}

/// Inverse-CDF draw over unnormalized non-negative weights. Falls back to
/// the first index when all weights are zero.
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>();
    if !(total > 0.0) {
        return 0;
    }
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // rounding left target at the very top; take the last positive weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Samples one snippet for `prompt`. Stochastic strategies draw from a
/// stream seeded by `sampling.seed`.
pub fn generate(
    params: &LmParams,
    cfg: &LmConfig,
    prompt: &str,
    sampling: &SamplingConfig,
) -> Result<GenerationRecord, LmError> {
    complete(params, cfg, prompt, "", sampling)
}

/// Like [`generate`], but the snippet starts with `prefix`, which is fed to
/// the model instead of sampled. The returned snippet includes the prefix;
/// `tokens_emitted` does not count it.
pub fn complete(
    params: &LmParams,
    cfg: &LmConfig,
    prompt: &str,
    prefix: &str,
    sampling: &SamplingConfig,
) -> Result<GenerationRecord, LmError> {
    sampling.validate()?;
    params.check(cfg)?;
    if cfg.vocab_size != Vocabulary::SIZE {
        return Err(LmError::InvalidConfig("generation needs the byte-level vocabulary"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut seq = vec![BOS];
    seq.extend(Vocabulary.tokenize(prompt));
    seq.push(SEP);
    seq.extend(Vocabulary.tokenize(prefix));
    let mut bytes = prefix.as_bytes().to_vec();
    let mut stop_reason = StopReason::MaxTokens;
    for _ in 0..sampling.max_tokens {
        let ctx = context_at(&seq, seq.len(), cfg.context_window);
        let dist = forward(params, cfg, &ctx)?;
        let tok = sample_token(&dist, &sampling.strategy, &mut rng);
        if tok == EOS {
            stop_reason = StopReason::Eos;
            break;
        }
        bytes.push(tok as u8);
        seq.push(tok);
    }
    Ok(GenerationRecord {
        prompt: prompt.to_string(),
        tokens_emitted: bytes.len() - prefix.len(),
        snippet: CodeSnippet::minilang(String::from_utf8_lossy(&bytes).into_owned()),
        stop_reason,
    })
}

/// Seed for one record, a function of the master seed, the prompt text, how
/// many equal prompts came before it, and the sample index. Reordering the
/// prompt list therefore reorders the records without changing any of them.
pub fn record_seed(master: u64, prompt: &str, occurrence: usize, sample: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((prompt.len() as u64).to_le_bytes());
    h.update(prompt.as_bytes());
    h.update((occurrence as u64).to_le_bytes());
    h.update((sample as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// `samples_per_prompt` records per prompt, prompt-major.
pub fn batch_generate(
    params: &LmParams,
    cfg: &LmConfig,
    prompts: &[String],
    sampling: &SamplingConfig,
    samples_per_prompt: usize,
) -> Result<Vec<GenerationRecord>, LmError> {
    let mut seen = std::collections::HashMap::<&str, usize>::new();
    let mut out = Vec::with_capacity(prompts.len() * samples_per_prompt);
    for prompt in prompts {
        let occurrence = seen.entry(prompt.as_str()).or_insert(0);
        for s in 0..samples_per_prompt {
            let per_record = SamplingConfig {
                seed: record_seed(sampling.seed, prompt, *occurrence, s),
                ..*sampling
            };
            out.push(generate(params, cfg, prompt, &per_record)?);
        }
        *occurrence += 1;
    }
    Ok(out)
}
