//! Ordinary (non-private) minibatch SGD on the cross-entropy loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::accumulate_gradient;
use super::model::{LmConfig, LmParams};
use super::LmError;
use crate::corpus::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlainTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

/// Trains `params` in place and returns the mean CE loss of each epoch.
///
/// Records are reshuffled every epoch; pairs with empty code are skipped.
pub fn train_plain(
    params: &mut LmParams,
    cfg: &LmConfig,
    ds: &Dataset,
    tc: &PlainTrainConfig,
) -> Result<Vec<f64>, LmError> {
    params.check(cfg)?;
    if tc.batch_size == 0 || !(tc.learning_rate > 0.0) {
        return Err(LmError::InvalidConfig("batch size and learning rate must be positive"));
    }
    let usable: Vec<usize> = (0..ds.len()).filter(|&i| !ds.pairs[i].code().is_empty()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut order = usable.clone();
    let mut grad = vec![0.0; params.len()];
    let mut history = Vec::with_capacity(tc.epochs);
    for _ in 0..tc.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(tc.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let loss = accumulate_gradient(params, None, cfg, &ds.pairs[i], &[], 0.0, scale, &mut grad)?;
                epoch_loss += loss.ce;
            }
            for (p, g) in params.values.iter_mut().zip(&grad) {
                *p -= tc.learning_rate * g;
            }
        }
        history.push(if usable.is_empty() { 0.0 } else { epoch_loss / usable.len() as f64 });
    }
    Ok(history)
}
