//! Cross-entropy, structural KL and their analytic gradients.

use super::model::{context_at, forward_activations, Activations, LmConfig, LmParams, ProbDist};
use super::LmError;
use crate::corpus::{PromptCodePair, TokenId, Vocabulary};
use crate::minilang::{structural_offsets, StructuralSpan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub ce: f64,
    pub kl: f64,
    pub lambda: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(ce: f64, kl: f64, lambda: f64) -> Self {
        Self {
            ce,
            kl,
            lambda,
            total: ce + lambda * kl,
        }
    }
}

/// A pair joined into one token sequence, with the positions that carry loss.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTokens {
    pub seq: Vec<TokenId>,
    /// Index of the first snippet token in `seq`.
    pub start: usize,
}

impl PairTokens {
    pub fn new(pair: &PromptCodePair) -> Self {
        let (seq, start) = Vocabulary.join_pair(&pair.prompt, pair.code());
        Self { seq, start }
    }

    /// Target positions for the CE term: every snippet byte plus EOS.
    pub fn loss_positions(&self) -> std::ops::Range<usize> {
        self.start..self.seq.len()
    }

    /// Target positions for the KL term: structural byte offsets mapped into
    /// the sequence. Offsets past the snippet are ignored.
    pub fn structural_positions(&self, spans: &[StructuralSpan]) -> Vec<usize> {
        let snippet_len = self.seq.len() - self.start - 1;
        structural_offsets(spans)
            .into_iter()
            .filter(|&o| o < snippet_len)
            .map(|o| self.start + o)
            .collect()
    }
}

/// `KL(P || Q)` in nats. Terms with `P = 0` contribute nothing.
pub fn kl_divergence(p: &ProbDist, q: &ProbDist) -> f64 {
    p.as_slice()
        .iter()
        .zip(q.as_slice())
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).ln())
        .sum::<f64>()
        .max(0.0)
}

/// Log-ratio `ln P_k - ln Q_k`, taken from the logits so that two large
/// log-normalizers cancel before rounding rather than after.
fn log_ratio(a: &Activations, b: &Activations, k: usize) -> f64 {
    (a.logits[k] - b.logits[k]) - (a.log_z - b.log_z)
}

fn kl_between(a: &Activations, b: &Activations) -> f64 {
    let mut kl = 0.0;
    for k in 0..a.probs.len() {
        kl += a.probs[k] * log_ratio(a, b, k);
    }
    kl.max(0.0)
}

/// Mean next-token NLL over the snippet positions, and the model's
/// distribution at each of those positions.
pub fn sequence_nll(
    params: &LmParams,
    cfg: &LmConfig,
    pair: &PromptCodePair,
) -> Result<(f64, Vec<ProbDist>), LmError> {
    if pair.code().is_empty() {
        return Err(LmError::EmptySnippet);
    }
    let toks = PairTokens::new(pair);
    let mut total = 0.0;
    let mut dists = Vec::new();
    for pos in toks.loss_positions() {
        let ctx = context_at(&toks.seq, pos, cfg.context_window);
        let act = forward_activations(&params.values, cfg, &ctx)?;
        total -= act.log_probs[toks.seq[pos] as usize];
        dists.push(ProbDist::new(act.probs)?);
    }
    let n = toks.loss_positions().len() as f64;
    Ok(((total / n).max(0.0), dists))
}

/// Mean `KL(P_j || P_rf)` over the structural positions of the snippet,
/// evaluated with the full prompt-and-snippet context. Zero when there are
/// no structural positions.
pub fn structural_kl(
    params_j: &LmParams,
    params_rf: &LmParams,
    cfg: &LmConfig,
    pair: &PromptCodePair,
    spans: &[StructuralSpan],
) -> Result<f64, LmError> {
    let toks = PairTokens::new(pair);
    let positions = toks.structural_positions(spans);
    if positions.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for &pos in &positions {
        let ctx = context_at(&toks.seq, pos, cfg.context_window);
        let a = forward_activations(&params_j.values, cfg, &ctx)?;
        let b = forward_activations(&params_rf.values, cfg, &ctx)?;
        sum += kl_between(&a, &b);
    }
    Ok(sum / positions.len() as f64)
}

/// Gradient of `L_CE + lambda * L_KL` with respect to `params_j`.
pub fn per_sample_gradient(
    params_j: &LmParams,
    params_rf: &LmParams,
    cfg: &LmConfig,
    pair: &PromptCodePair,
    spans: &[StructuralSpan],
    lambda: f64,
) -> Result<(Vec<f64>, LossBreakdown), LmError> {
    let mut grad = vec![0.0; params_j.len()];
    let loss = accumulate_gradient(params_j, Some(params_rf), cfg, pair, spans, lambda, 1.0, &mut grad)?;
    Ok((grad, loss))
}

/// Adds `scale` times the gradient of the per-sample objective into `out`.
///
/// With `params_rf = None` or `lambda = 0` only the CE term is evaluated and
/// the reference model is never touched.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_gradient(
    params_j: &LmParams,
    params_rf: Option<&LmParams>,
    cfg: &LmConfig,
    pair: &PromptCodePair,
    spans: &[StructuralSpan],
    lambda: f64,
    scale: f64,
    out: &mut [f64],
) -> Result<LossBreakdown, LmError> {
    if pair.code().is_empty() {
        return Err(LmError::EmptySnippet);
    }
    if out.len() != params_j.len() {
        return Err(LmError::ShapeMismatch {
            expected: params_j.len(),
            found: out.len(),
        });
    }
    let toks = PairTokens::new(pair);
    let kl_positions = match params_rf {
        Some(_) if lambda != 0.0 => toks.structural_positions(spans),
        _ => Vec::new(),
    };
    let n_ce = toks.loss_positions().len() as f64;
    let n_kl = kl_positions.len() as f64;

    let mut ce = 0.0;
    let mut kl = 0.0;
    let mut dlogits = vec![0.0; cfg.vocab_size];
    let mut kl_iter = kl_positions.iter().peekable();
    for pos in toks.loss_positions() {
        let ctx = context_at(&toks.seq, pos, cfg.context_window);
        let act = forward_activations(&params_j.values, cfg, &ctx)?;
        let target = toks.seq[pos] as usize;
        ce -= act.log_probs[target];
        for (d, p) in dlogits.iter_mut().zip(&act.probs) {
            *d = p / n_ce;
        }
        dlogits[target] -= 1.0 / n_ce;

        if kl_iter.peek() == Some(&&pos) {
            kl_iter.next();
            let rf = forward_activations(&params_rf.expect("checked above").values, cfg, &ctx)?;
            let here = kl_between(&act, &rf);
            kl += here;
            // dKL/dz_k = P_k (ln P_k - ln Q_k - KL)
            let w = lambda / n_kl;
            for k in 0..cfg.vocab_size {
                let u = log_ratio(&act, &rf, k);
                dlogits[k] += w * act.probs[k] * (u - here);
            }
        }
        backprop(&params_j.values, cfg, &ctx, &act, &dlogits, scale, out);
    }
    let kl = if n_kl > 0.0 { kl / n_kl } else { 0.0 };
    Ok(LossBreakdown::new((ce / n_ce).max(0.0), kl, lambda))
}

fn backprop(
    params: &[f64],
    cfg: &LmConfig,
    ctx: &[TokenId],
    act: &super::model::Activations,
    dlogits: &[f64],
    scale: f64,
    out: &mut [f64],
) {
    let l = cfg.layout();
    let (d, h, v) = (cfg.embed_dim, cfg.hidden_dim, cfg.vocab_size);

    let mut dhidden = vec![0.0; h];
    for (b, g) in out[l.b2..l.b2 + v].iter_mut().zip(dlogits) {
        *b += scale * g;
    }
    for j in 0..h {
        let w_row = &params[l.w2 + j * v..l.w2 + (j + 1) * v];
        let zj = scale * act.hidden[j];
        let g_row = &mut out[l.w2 + j * v..l.w2 + (j + 1) * v];
        let mut acc = 0.0;
        for k in 0..v {
            g_row[k] += zj * dlogits[k];
            acc += w_row[k] * dlogits[k];
        }
        dhidden[j] = acc;
    }

    let dpre: Vec<f64> = dhidden
        .iter()
        .zip(&act.hidden)
        .map(|(g, z)| g * (1.0 - z * z))
        .collect();
    for (b, g) in out[l.b1..l.b1 + h].iter_mut().zip(&dpre) {
        *b += scale * g;
    }
    for (i, &x) in act.input.iter().enumerate() {
        let w_row = &params[l.w1 + i * h..l.w1 + (i + 1) * h];
        let sx = scale * x;
        let mut acc = 0.0;
        {
            let g_row = &mut out[l.w1 + i * h..l.w1 + (i + 1) * h];
            for j in 0..h {
                g_row[j] += sx * dpre[j];
                acc += w_row[j] * dpre[j];
            }
        }
        let slot = i / d;
        let tok = ctx[slot] as usize;
        out[l.emb + tok * d + i % d] += scale * acc;
    }
}
