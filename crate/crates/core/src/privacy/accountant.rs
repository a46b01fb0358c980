//! Rényi-DP accounting for the Poisson-subsampled Gaussian mechanism.

use serde::{Deserialize, Serialize};

use super::PrivacyError;

pub const SIGMA_SEARCH_MIN: f64 = 0.05;
pub const SIGMA_SEARCH_MAX: f64 = 100.0;

/// Cumulative RDP at each order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdpCurve {
    pub orders: Vec<u32>,
    pub rdp_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    /// Infinite for runs without a guarantee; serialized as `"inf"`.
    #[serde(with = "epsilon_serde")]
    pub epsilon: f64,
    pub delta: f64,
    pub best_order: u32,
}

impl PrivacyReport {
    /// Report for a run that consumed no budget.
    pub fn zero(delta: f64) -> Self {
        Self {
            epsilon: 0.0,
            delta,
            best_order: 0,
        }
    }

    /// Report for a run with no privacy guarantee.
    pub fn unbounded(delta: f64) -> Self {
        Self {
            epsilon: f64::INFINITY,
            delta,
            best_order: 0,
        }
    }
}

mod epsilon_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad epsilon {t:?}"))),
        }
    }
}

/// RDP to (ε, δ) conversion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conversion {
    /// `ε = RDP(α) + ln(1/δ) / (α - 1)`
    #[default]
    Classic,
    /// `ε = RDP(α) + ln((α - 1)/α) - (ln δ + ln α) / (α - 1)`
    Improved,
}

/// Integer orders 2 through 256.
pub fn default_orders() -> Vec<u32> {
    (2..=256).collect()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Single-step RDP at integer order `alpha`, computed as the log of the
/// binomial expansion of the privacy-loss moment, summed in log space.
fn rdp_one_step(q: f64, sigma: f64, alpha: u32) -> f64 {
    let a = alpha as f64;
    if q >= 1.0 {
        return a / (2.0 * sigma * sigma);
    }
    let ln_q = q.ln();
    let ln_1mq = (-q).ln_1p();
    let mut ln_binom = 0.0;
    let mut acc = f64::NEG_INFINITY;
    for k in 0..=alpha {
        if k > 0 {
            ln_binom += ((alpha - k + 1) as f64).ln() - (k as f64).ln();
        }
        let kf = k as f64;
        let term = ln_binom + (a - kf) * ln_1mq + kf * ln_q + kf * (kf - 1.0) / (2.0 * sigma * sigma);
        acc = log_add(acc, term);
    }
    (acc / (a - 1.0)).max(0.0)
}

pub fn rdp_subsampled_gaussian(
    q: f64,
    sigma: f64,
    steps: usize,
    orders: &[u32],
) -> Result<RdpCurve, PrivacyError> {
    if !(sigma > 0.0) {
        return Err(PrivacyError::SigmaZero);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(PrivacyError::InvalidParameter(format!("sampling rate {q} not in (0, 1]")));
    }
    if orders.is_empty() || orders.iter().any(|&a| a < 2) {
        return Err(PrivacyError::InvalidParameter("orders must be integers >= 2".into()));
    }
    let rdp_values = orders
        .iter()
        .map(|&a| if steps == 0 { 0.0 } else { steps as f64 * rdp_one_step(q, sigma, a) })
        .collect();
    Ok(RdpCurve {
        orders: orders.to_vec(),
        rdp_values,
    })
}

pub fn rdp_to_eps(curve: &RdpCurve, delta: f64) -> Result<PrivacyReport, PrivacyError> {
    rdp_to_eps_with(curve, delta, Conversion::Classic)
}

pub fn rdp_to_eps_with(
    curve: &RdpCurve,
    delta: f64,
    conversion: Conversion,
) -> Result<PrivacyReport, PrivacyError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PrivacyError::InvalidParameter(format!("delta {delta} not in (0, 1)")));
    }
    if curve.orders.is_empty() || curve.orders.len() != curve.rdp_values.len() {
        return Err(PrivacyError::InvalidParameter("malformed RDP curve".into()));
    }
    let mut best = PrivacyReport {
        epsilon: f64::INFINITY,
        delta,
        best_order: curve.orders[0],
    };
    for (&alpha, &rdp) in curve.orders.iter().zip(&curve.rdp_values) {
        let a = alpha as f64;
        let eps = match conversion {
            Conversion::Classic => rdp + (1.0 / delta).ln() / (a - 1.0),
            Conversion::Improved => rdp + ((a - 1.0) / a).ln() - (delta.ln() + a.ln()) / (a - 1.0),
        };
        if eps < best.epsilon {
            best.epsilon = eps;
            best.best_order = alpha;
        }
    }
    best.epsilon = best.epsilon.max(0.0);
    Ok(best)
}

/// ε after `steps` subsampled Gaussian steps, over the default order grid.
pub fn epsilon_for(
    q: f64,
    sigma: f64,
    steps: usize,
    delta: f64,
    conversion: Conversion,
) -> Result<PrivacyReport, PrivacyError> {
    let curve = rdp_subsampled_gaussian(q, sigma, steps, &default_orders())?;
    rdp_to_eps_with(&curve, delta, conversion)
}

/// Smallest σ (to within 1e-4) whose ε does not exceed `target_eps`,
/// found by bisection on `[SIGMA_SEARCH_MIN, SIGMA_SEARCH_MAX]`.
pub fn calibrate_sigma(
    q: f64,
    steps: usize,
    delta: f64,
    target_eps: f64,
    conversion: Conversion,
) -> Result<f64, PrivacyError> {
    if !(target_eps > 0.0) {
        return Err(PrivacyError::InvalidParameter("target epsilon must be positive".into()));
    }
    let eps = |s: f64| epsilon_for(q, s, steps, delta, conversion).map(|r| r.epsilon);
    if eps(SIGMA_SEARCH_MAX)? > target_eps {
        return Err(PrivacyError::Unreachable {
            target: target_eps,
            max_sigma: SIGMA_SEARCH_MAX,
        });
    }
    if eps(SIGMA_SEARCH_MIN)? <= target_eps {
        return Ok(SIGMA_SEARCH_MIN);
    }
    let (mut lo, mut hi) = (SIGMA_SEARCH_MIN, SIGMA_SEARCH_MAX);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if eps(mid)? <= target_eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
