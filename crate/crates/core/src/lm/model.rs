//! Fixed-window neural language model.
//!
//! The last `context_window` tokens are embedded, concatenated, passed
//! through one tanh layer and projected to vocabulary logits. All parameters
//! live in one flat `f64` vector so gradients, clipping and noise operate on
//! a single buffer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LmError;
use crate::corpus::{TokenId, Vocabulary, PAD};

pub const INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LmConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub context_window: usize,
    pub hidden_dim: usize,
    pub seed: u64,
}

impl LmConfig {
    /// Byte-level model over the full 260-token vocabulary.
    pub fn byte_level(embed_dim: usize, context_window: usize, hidden_dim: usize, seed: u64) -> Self {
        Self {
            vocab_size: Vocabulary::SIZE,
            embed_dim,
            context_window,
            hidden_dim,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), LmError> {
        if self.vocab_size == 0 || self.embed_dim == 0 || self.context_window == 0 || self.hidden_dim == 0
        {
            return Err(LmError::InvalidConfig("all dimensions must be at least 1"));
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        let emb = 0;
        let w1 = emb + self.vocab_size * self.embed_dim;
        let b1 = w1 + self.input_dim() * self.hidden_dim;
        let w2 = b1 + self.hidden_dim;
        let b2 = w2 + self.hidden_dim * self.vocab_size;
        let len = b2 + self.vocab_size;
        Layout {
            emb,
            w1,
            b1,
            w2,
            b2,
            len,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.context_window * self.embed_dim
    }

    pub fn num_params(&self) -> usize {
        self.layout().len
    }
}

/// Offsets of each parameter segment in the flat vector.
///
/// `emb` is `V x d` row-major by token, `w1` is `(w*d) x h` row-major by
/// input feature, `w2` is `h x V` row-major by hidden unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub emb: usize,
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmParams {
    pub values: Vec<f64>,
}

impl LmParams {
    pub fn zeros(cfg: &LmConfig) -> Self {
        Self {
            values: vec![0.0; cfg.num_params()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check(&self, cfg: &LmConfig) -> Result<(), LmError> {
        if self.values.len() != cfg.num_params() {
            return Err(LmError::ShapeMismatch {
                expected: cfg.num_params(),
                found: self.values.len(),
            });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(LmError::NonFinite);
        }
        Ok(())
    }
}

/// Uniform in `[-INIT_SCALE, INIT_SCALE]`, seeded by `cfg.seed`.
pub fn init_params(cfg: &LmConfig) -> LmParams {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    LmParams {
        values: (0..cfg.num_params())
            .map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE))
            .collect(),
    }
}

/// A next-token distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist(Vec<f64>);

impl ProbDist {
    pub fn new(probs: Vec<f64>) -> Result<Self, LmError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(LmError::NotADistribution);
        }
        Ok(Self(probs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Lowest id among the maxima.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Intermediate values of one forward pass, kept for backprop.
#[derive(Debug, Clone)]
pub(crate) struct Activations {
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub log_z: f64,
    /// `log softmax(logits)`
    pub log_probs: Vec<f64>,
    pub probs: Vec<f64>,
}

pub(crate) fn forward_activations(
    params: &[f64],
    cfg: &LmConfig,
    context: &[TokenId],
) -> Result<Activations, LmError> {
    let l = cfg.layout();
    let (d, h, v) = (cfg.embed_dim, cfg.hidden_dim, cfg.vocab_size);
    if context.len() != cfg.context_window {
        return Err(LmError::ContextLength {
            expected: cfg.context_window,
            found: context.len(),
        });
    }
    let mut input = Vec::with_capacity(cfg.input_dim());
    for &tok in context {
        let t = tok as usize;
        if t >= v {
            return Err(LmError::TokenOutOfRange(tok));
        }
        input.extend_from_slice(&params[l.emb + t * d..l.emb + (t + 1) * d]);
    }

    let mut hidden = params[l.b1..l.b1 + h].to_vec();
    for (i, &x) in input.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let row = &params[l.w1 + i * h..l.w1 + (i + 1) * h];
        for (acc, w) in hidden.iter_mut().zip(row) {
            *acc += x * w;
        }
    }
    hidden.iter_mut().for_each(|a| *a = a.tanh());

    let mut logits = params[l.b2..l.b2 + v].to_vec();
    for (j, &z) in hidden.iter().enumerate() {
        if z == 0.0 {
            continue;
        }
        let row = &params[l.w2 + j * v..l.w2 + (j + 1) * v];
        for (acc, w) in logits.iter_mut().zip(row) {
            *acc += z * w;
        }
    }

    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = logits.iter().map(|x| (x - max).exp()).sum();
    let log_z = max + sum_exp.ln();
    let log_probs: Vec<f64> = logits.iter().map(|x| x - log_z).collect();
    let probs: Vec<f64> = log_probs.iter().map(|lp| lp.exp()).collect();
    Ok(Activations {
        input,
        hidden,
        logits,
        log_z,
        log_probs,
        probs,
    })
}

/// Next-token distribution for a context of exactly `context_window` tokens.
pub fn forward(params: &LmParams, cfg: &LmConfig, context: &[TokenId]) -> Result<ProbDist, LmError> {
    let act = forward_activations(&params.values, cfg, context)?;
    let sum: f64 = act.probs.iter().sum();
    // exp of log-softmax can drift from 1 by a few ulps; renormalize
    Ok(ProbDist(act.probs.iter().map(|p| p / sum).collect()))
}

/// The `w` tokens preceding `pos`, left-padded with PAD.
pub fn context_at(seq: &[TokenId], pos: usize, window: usize) -> Vec<TokenId> {
    let mut ctx = vec![PAD; window];
    let take = pos.min(window);
    ctx[window - take..].copy_from_slice(&seq[pos - take..pos]);
    ctx
}
