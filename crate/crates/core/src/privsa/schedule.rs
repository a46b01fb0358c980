use serde::{Deserialize, Serialize};

use super::PrivsaError;

/// Exponentially decaying KL weight, held constant on plateaus of
/// `step_interval` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub decay_rate: f64,
    pub step_interval: usize,
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        Self {
            lambda_max: 1000.0,
            lambda_min: 0.01,
            decay_rate: 0.01,
            step_interval: 20,
        }
    }
}

impl LambdaSchedule {
    /// A schedule that switches the KL term off.
    pub fn disabled() -> Self {
        Self {
            lambda_max: 0.0,
            lambda_min: 0.0,
            decay_rate: 1.0,
            step_interval: 1,
        }
    }

    pub fn validate(&self) -> Result<(), PrivsaError> {
        let ok = self.lambda_min >= 0.0
            && self.lambda_max >= self.lambda_min
            && self.lambda_max.is_finite()
            && self.decay_rate > 0.0
            && self.decay_rate.is_finite()
            && self.step_interval >= 1;
        if ok {
            Ok(())
        } else {
            Err(PrivsaError::InvalidConfig(format!("bad lambda schedule {self:?}")))
        }
    }
}

/// `lambda_min + (lambda_max - lambda_min) * exp(-decay_rate * t')` with
/// `t' = floor(t / step_interval) * step_interval`.
pub fn lambda_at(t: usize, s: &LambdaSchedule) -> f64 {
    let plateau_start = (t / s.step_interval) * s.step_interval;
    let decayed = (s.lambda_max - s.lambda_min) * (-s.decay_rate * plateau_start as f64).exp();
    (s.lambda_min + decayed).clamp(s.lambda_min, s.lambda_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let s = LambdaSchedule::default();
        assert_eq!(lambda_at(0, &s), 1000.0);
        assert_eq!(lambda_at(19, &s), 1000.0);
        // 0.01 + 999.99 * exp(-0.2), evaluated independently at high precision
        assert!((lambda_at(20, &s) - 818.732_565_770_451_1).abs() < 1e-6, "{}", lambda_at(20, &s));
        assert!((lambda_at(100_000, &s) - 0.01).abs() < 1e-9);
    }

    #[test]
    fn piecewise_constant_and_non_increasing() {
        let s = LambdaSchedule::default();
        let mut prev = f64::INFINITY;
        for t in 0..2000 {
            let l = lambda_at(t, &s);
            assert!(l <= prev && l >= s.lambda_min && l <= s.lambda_max);
            if t % s.step_interval != 0 {
                assert_eq!(l, prev);
            }
            prev = l;
        }
    }

    #[test]
    fn disabled_is_zero() {
        assert_eq!(lambda_at(0, &LambdaSchedule::disabled()), 0.0);
        assert!(LambdaSchedule::disabled().validate().is_ok());
    }
}
