//! Per-sample clipping, Poisson subsampling, Gaussian noising.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::PrivacyError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    pub clip_norm: f64,
    /// Noise multiplier: the per-coordinate noise std is `noise_scale * clip_norm`.
    pub noise_scale: f64,
    pub sampling_rate: f64,
    pub max_steps: usize,
    pub delta: f64,
    pub rng_seed: u64,
}

impl DpConfig {
    pub fn validate(&self) -> Result<(), PrivacyError> {
        if !(self.clip_norm > 0.0) || !self.clip_norm.is_finite() {
            return Err(PrivacyError::InvalidClipNorm);
        }
        if !(self.noise_scale >= 0.0) || !self.noise_scale.is_finite() {
            return Err(PrivacyError::InvalidParameter("noise scale must be >= 0".into()));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return Err(PrivacyError::InvalidParameter("sampling rate must be in (0, 1]".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(PrivacyError::InvalidParameter("delta must be in (0, 1)".into()));
        }
        Ok(())
    }
}

pub fn l2_norm(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scales `g` by `1 / max(1, |g| / c)` in place and returns the pre-clip norm.
pub fn clip_in_place(g: &mut [f64], c: f64) -> Result<f64, PrivacyError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(PrivacyError::InvalidClipNorm);
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(PrivacyError::NonFiniteGradient);
    }
    let norm = l2_norm(g);
    if norm > c {
        let factor = c / norm;
        g.iter_mut().for_each(|x| *x *= factor);
        // rounding can leave the result a hair above c
        let after = l2_norm(g);
        if after > c {
            let fix = c / after;
            g.iter_mut().for_each(|x| *x *= fix);
        }
    }
    Ok(norm)
}

pub fn clip_gradient(g: &[f64], c: f64) -> Result<Vec<f64>, PrivacyError> {
    let mut out = g.to_vec();
    clip_in_place(&mut out, c)?;
    Ok(out)
}

/// Includes each of `0..n` independently with probability `q`.
pub fn poisson_sample<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Vec<usize> {
    (0..n).filter(|_| rng.random::<f64>() < q).collect()
}

/// Running sum of clipped per-sample gradients.
#[derive(Debug, Clone)]
pub struct ClippedSum {
    sum: Vec<f64>,
    clip_norm: f64,
    count: usize,
}

impl ClippedSum {
    pub fn new(dim: usize, clip_norm: f64) -> Result<Self, PrivacyError> {
        if !(clip_norm > 0.0) || !clip_norm.is_finite() {
            return Err(PrivacyError::InvalidClipNorm);
        }
        Ok(Self {
            sum: vec![0.0; dim],
            clip_norm,
            count: 0,
        })
    }

    /// Clips `g` (in place) and adds it. Returns the pre-clip norm.
    pub fn add(&mut self, g: &mut [f64]) -> Result<f64, PrivacyError> {
        if g.len() != self.sum.len() {
            return Err(PrivacyError::LengthMismatch {
                expected: self.sum.len(),
                found: g.len(),
            });
        }
        let norm = clip_in_place(g, self.clip_norm)?;
        for (s, x) in self.sum.iter_mut().zip(g.iter()) {
            *s += x;
        }
        self.count += 1;
        Ok(norm)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `(sum + N(0, (sigma * C)^2 I)) / denominator`. One normal draw per
    /// coordinate in index order; none when `sigma == 0`.
    pub fn finish<R: Rng + ?Sized>(
        mut self,
        sigma: f64,
        denominator: f64,
        rng: &mut R,
    ) -> Result<Vec<f64>, PrivacyError> {
        if !(denominator > 0.0) {
            return Err(PrivacyError::InvalidParameter("denominator must be positive".into()));
        }
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma * self.clip_norm)
                .map_err(|e| PrivacyError::InvalidParameter(e.to_string()))?;
            for s in self.sum.iter_mut() {
                *s += normal.sample(rng);
            }
        } else if sigma < 0.0 || !sigma.is_finite() {
            return Err(PrivacyError::InvalidParameter("noise scale must be >= 0".into()));
        }
        self.sum.iter_mut().for_each(|s| *s /= denominator);
        Ok(self.sum)
    }
}

/// Mean of already clipped gradients plus Gaussian noise of std `sigma * c`
/// on the sum.
pub fn noisy_aggregate<R: Rng + ?Sized>(
    clipped: &[Vec<f64>],
    c: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>, PrivacyError> {
    let first = clipped.first().ok_or(PrivacyError::EmptyBatch)?;
    let mut acc = ClippedSum::new(first.len(), c)?;
    for g in clipped {
        if g.len() != first.len() {
            return Err(PrivacyError::LengthMismatch {
                expected: first.len(),
                found: g.len(),
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(PrivacyError::NonFiniteGradient);
        }
        for (s, x) in acc.sum.iter_mut().zip(g) {
            *s += x;
        }
        acc.count += 1;
    }
    acc.finish(sigma, clipped.len() as f64, rng)
}

/// Clip each per-sample gradient, noisy-aggregate, and take one SGD step.
pub fn dp_sgd_step<R: Rng + ?Sized>(
    params: &mut [f64],
    per_sample_grads: &[Vec<f64>],
    cfg: &DpConfig,
    lr: f64,
    rng: &mut R,
) -> Result<(), PrivacyError> {
    cfg.validate()?;
    if per_sample_grads.is_empty() {
        return Err(PrivacyError::EmptyBatch);
    }
    let mut acc = ClippedSum::new(params.len(), cfg.clip_norm)?;
    for g in per_sample_grads {
        acc.add(&mut g.clone())?;
    }
    let update = acc.finish(cfg.noise_scale, per_sample_grads.len() as f64, rng)?;
    for (p, u) in params.iter_mut().zip(&update) {
        *p -= lr * u;
    }
    Ok(())
}
