use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schedule::{lambda_at, LambdaSchedule};
use super::PrivsaError;
use crate::corpus::Dataset;
use crate::lm::{accumulate_gradient, init_params, LmConfig, LmParams};
use crate::minilang::{extract_structural_tokens, StructuralSpan};
use crate::privacy::{epsilon_for, poisson_sample, ClippedSum, Conversion, DpConfig, PrivacyReport};

/// A parameter snapshot that is never updated after creation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel(LmParams);

impl ReferenceModel {
    pub fn params(&self) -> &LmParams {
        &self.0
    }
}

pub fn snapshot_reference(params: &LmParams) -> ReferenceModel {
    ReferenceModel(params.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub schedule: LambdaSchedule,
    pub dp: DpConfig,
    pub learning_rate: f64,
    pub conversion: Conversion,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PrivsaError> {
        self.schedule.validate()?;
        self.dp.validate()?;
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(PrivsaError::InvalidConfig("learning rate must be positive".into()));
        }
        Ok(())
    }

    /// Expected batch size `q * n`, used as the update denominator.
    pub fn expected_batch(&self, n: usize) -> f64 {
        (self.dp.sampling_rate * n as f64).max(1.0)
    }
}

/// `q = L / N`, capped at 1.
pub fn sampling_rate_for(expected_batch: usize, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (expected_batch as f64 / n as f64).min(1.0)
}

/// Batch-averaged losses and gradient-norm statistics for one step.
/// Empty batches record zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub lambda: f64,
    pub batch_size: usize,
    pub ce: f64,
    pub kl: f64,
    pub total: f64,
    pub grad_norm_mean: f64,
    pub grad_norm_max: f64,
    pub clipped_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub steps: Vec<StepRecord>,
    pub privacy: PrivacyReport,
}

/// Trains from freshly initialized weights.
pub fn privsa_train(
    ds: &Dataset,
    cfg: &TrainConfig,
    lm_cfg: &LmConfig,
) -> Result<(LmParams, TrainTrace), PrivsaError> {
    privsa_train_from(ds, cfg, lm_cfg, init_params(lm_cfg))
}

/// Trains starting from `start`, which also becomes the frozen reference.
///
/// Each step draws a Poisson batch, then (if `noise_scale > 0`) one normal
/// per parameter, all from a single stream seeded by `dp.rng_seed`. The sum
/// of clipped gradients plus noise is divided by the expected batch size,
/// so empty batches still apply a noise-only update.
pub fn privsa_train_from(
    ds: &Dataset,
    cfg: &TrainConfig,
    lm_cfg: &LmConfig,
    start: LmParams,
) -> Result<(LmParams, TrainTrace), PrivsaError> {
    cfg.validate()?;
    lm_cfg.validate()?;
    start.check(lm_cfg)?;
    if ds.is_empty() {
        return Err(PrivsaError::EmptyDataset);
    }
    if let Some(index) = ds.pairs.iter().position(|p| p.code().is_empty()) {
        return Err(PrivsaError::EmptySnippet { index });
    }
    // unparseable snippets train with no structural positions
    let spans: Vec<Vec<StructuralSpan>> = ds
        .pairs
        .iter()
        .map(|p| extract_structural_tokens(p.code()).unwrap_or_default())
        .collect();

    let reference = snapshot_reference(&start);
    let mut params = start;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.dp.rng_seed);
    let denom = cfg.expected_batch(ds.len());
    let mut grad = vec![0.0; params.len()];
    let mut steps = Vec::with_capacity(cfg.dp.max_steps);

    for t in 0..cfg.dp.max_steps {
        let batch = poisson_sample(ds.len(), cfg.dp.sampling_rate, &mut rng);
        let lambda = lambda_at(t, &cfg.schedule);
        let mut acc = ClippedSum::new(params.len(), cfg.dp.clip_norm)?;
        let (mut ce, mut kl, mut norm_sum, mut norm_max, mut clipped) = (0.0, 0.0, 0.0, 0.0f64, 0usize);
        for &i in &batch {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = accumulate_gradient(
                &params,
                Some(reference.params()),
                lm_cfg,
                &ds.pairs[i],
                &spans[i],
                lambda,
                1.0,
                &mut grad,
            )?;
            let norm = acc.add(&mut grad)?;
            ce += loss.ce;
            kl += loss.kl;
            norm_sum += norm;
            norm_max = norm_max.max(norm);
            if norm > cfg.dp.clip_norm {
                clipped += 1;
            }
        }
        let update = acc.finish(cfg.dp.noise_scale, denom, &mut rng)?;
        for (p, u) in params.values.iter_mut().zip(&update) {
            *p -= cfg.learning_rate * u;
        }
        let b = batch.len().max(1) as f64;
        let (ce, kl) = (ce / b, kl / b);
        steps.push(StepRecord {
            t,
            lambda,
            batch_size: batch.len(),
            ce,
            kl,
            total: ce + lambda * kl,
            grad_norm_mean: norm_sum / b,
            grad_norm_max: norm_max,
            clipped_fraction: clipped as f64 / b,
        });
    }
    if params.values.iter().any(|v| !v.is_finite()) {
        return Err(PrivsaError::InvalidConfig("training diverged to non-finite parameters".into()));
    }

    let privacy = if cfg.dp.max_steps == 0 {
        PrivacyReport::zero(cfg.dp.delta)
    } else if cfg.dp.noise_scale == 0.0 {
        PrivacyReport::unbounded(cfg.dp.delta)
    } else {
        epsilon_for(cfg.dp.sampling_rate, cfg.dp.noise_scale, cfg.dp.max_steps, cfg.dp.delta, cfg.conversion)?
    };
    Ok((params, TrainTrace { steps, privacy }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PromptCodePair;
    use crate::lm::{sequence_nll, structural_kl, PlainTrainConfig};

    fn tiny_ds() -> Dataset {
        Dataset::new(
            "t",
            vec![
                PromptCodePair::new("add", "def add(a, b):\n    return a + b\n"),
                PromptCodePair::new("loop", "for i in range(3):\n    print(i)\n"),
                PromptCodePair::new("broken", "def (:\n"),
            ],
        )
    }

    fn lm() -> LmConfig {
        LmConfig::byte_level(4, 4, 8, 7)
    }

    fn cfg(steps: usize, sigma: f64, q: f64, schedule: LambdaSchedule) -> TrainConfig {
        TrainConfig {
            schedule,
            dp: DpConfig {
                clip_norm: 1.0,
                noise_scale: sigma,
                sampling_rate: q,
                max_steps: steps,
                delta: 1e-5,
                rng_seed: 3,
            },
            learning_rate: 0.2,
            conversion: Conversion::Classic,
        }
    }

    #[test]
    fn zero_steps_changes_nothing() {
        let (p, trace) = privsa_train(&tiny_ds(), &cfg(0, 1.0, 0.5, LambdaSchedule::default()), &lm()).unwrap();
        assert_eq!(p, init_params(&lm()));
        assert_eq!(trace.privacy.epsilon, 0.0);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn noiseless_full_batch_matches_plain_sgd() {
        // with an effectively infinite clip norm, sigma = 0, lambda = 0 and
        // q = 1 each step is a full-batch mean-gradient step
        let ds = tiny_ds();
        let mut c = cfg(5, 0.0, 1.0, LambdaSchedule::disabled());
        c.dp.clip_norm = 1e12;
        let (dp, trace) = privsa_train(&ds, &c, &lm()).unwrap();
        assert!(trace.privacy.epsilon.is_infinite());

        let mut plain = init_params(&lm());
        crate::lm::train_plain(
            &mut plain,
            &lm(),
            &ds,
            &PlainTrainConfig {
                epochs: 5,
                batch_size: ds.len(),
                learning_rate: 0.2,
                seed: 0,
            },
        )
        .unwrap();
        for (a, b) in dp.values.iter().zip(&plain.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn trace_follows_schedule_and_identity() {
        let s = LambdaSchedule::default();
        let (_, trace) = privsa_train(&tiny_ds(), &cfg(100, 1.0, 0.5, s), &lm()).unwrap();
        assert_eq!(trace.steps.len(), 100);
        for r in &trace.steps {
            assert_eq!(r.lambda, lambda_at(r.t, &s));
            assert!((r.total - (r.ce + r.lambda * r.kl)).abs() <= 1e-9 * r.total.abs().max(1.0));
        }
        // reference equals the start point, so the first non-empty step has no KL
        let first = trace.steps.iter().find(|r| r.batch_size > 0).unwrap();
        if first.t == 0 {
            assert_eq!(first.kl, 0.0);
        }
        let expected = epsilon_for(0.5, 1.0, 100, 1e-5, Conversion::Classic).unwrap();
        assert_eq!(trace.privacy, expected);
    }

    #[test]
    fn deterministic_and_reference_frozen() {
        let c = cfg(10, 0.8, 0.6, LambdaSchedule::default());
        let start = init_params(&lm());
        let reference = snapshot_reference(&start);
        let (a, ta) = privsa_train_from(&tiny_ds(), &c, &lm(), start.clone()).unwrap();
        let (b, tb) = privsa_train_from(&tiny_ds(), &c, &lm(), start.clone()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        assert_eq!(reference.params(), &start);
        let pair = &tiny_ds().pairs[0];
        let spans = extract_structural_tokens(pair.code()).unwrap();
        assert_eq!(structural_kl(&start, reference.params(), &lm(), pair, &spans).unwrap(), 0.0);
        assert!(structural_kl(&a, reference.params(), &lm(), pair, &spans).unwrap() > 0.0);
    }

    #[test]
    fn learns_without_noise() {
        let ds = tiny_ds();
        // lambda = 1000 would pin every position inside the function body to
        // the reference, so use a mild schedule here
        let schedule = LambdaSchedule {
            lambda_max: 1.0,
            ..LambdaSchedule::default()
        };
        let mut c = cfg(40, 0.0, 1.0, schedule);
        c.learning_rate = 1.0;
        let before = sequence_nll(&init_params(&lm()), &lm(), &ds.pairs[0]).unwrap().0;
        let (p, _) = privsa_train(&ds, &c, &lm()).unwrap();
        let after = sequence_nll(&p, &lm(), &ds.pairs[0]).unwrap().0;
        assert!(after < before, "{before} -> {after}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = cfg(1, 1.0, 0.5, LambdaSchedule::default());
        assert!(matches!(privsa_train(&Dataset::new("e", vec![]), &c, &lm()), Err(PrivsaError::EmptyDataset)));
        let ds = Dataset::new("e", vec![PromptCodePair::new("p", "")]);
        assert!(matches!(privsa_train(&ds, &c, &lm()), Err(PrivsaError::EmptySnippet { index: 0 })));
    }
}
