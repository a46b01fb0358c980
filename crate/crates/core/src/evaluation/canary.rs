//! Canary injection and verbatim leakage counting.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, PromptCodePair};
use crate::synth::GenerationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiiCategory {
    Email,
    Name,
    IpAddress,
    Password,
    Username,
}

impl PiiCategory {
    pub const ALL: [PiiCategory; 5] = [
        PiiCategory::Email,
        PiiCategory::Name,
        PiiCategory::IpAddress,
        PiiCategory::Password,
        PiiCategory::Username,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanarySpec {
    pub category: PiiCategory,
    pub pii_string: String,
    pub sample: PromptCodePair,
    pub repetition_rate: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CanaryError {
    #[error("{category:?} canary string {pii:?} already occurs in the dataset")]
    PiiCollision { category: PiiCategory, pii: String },
    #[error("{category:?} canary string {pii:?} does not occur in its own sample code")]
    NotInSample { category: PiiCategory, pii: String },
    #[error("canary file: {0}")]
    Io(#[from] std::io::Error),
    #[error("canary file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Inserts `repetition_rate` copies of each canary at seeded random
/// positions. The relative order of the original records is preserved.
pub fn inject_canaries(ds: &Dataset, specs: &[CanarySpec], seed: u64) -> Result<Dataset, CanaryError> {
    for spec in specs {
        let err = |pii: &str| (spec.category, pii.to_string());
        if spec.pii_string.is_empty() || !spec.sample.code().contains(&spec.pii_string) {
            let (category, pii) = err(&spec.pii_string);
            return Err(CanaryError::NotInSample { category, pii });
        }
        let collides = ds
            .pairs
            .iter()
            .any(|p| p.code().contains(&spec.pii_string) || p.prompt.contains(&spec.pii_string));
        if collides {
            let (category, pii) = err(&spec.pii_string);
            return Err(CanaryError::PiiCollision { category, pii });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = ds.pairs.clone();
    for spec in specs {
        for _ in 0..spec.repetition_rate {
            let at = rng.random_range(0..=pairs.len());
            pairs.insert(at, spec.sample.clone());
        }
    }
    Ok(Dataset::new(ds.id.clone(), pairs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryLeak {
    pub category: PiiCategory,
    pub pii_string: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub generations: usize,
    pub counts: Vec<CategoryLeak>,
    /// Categories (out of all five) with at least one occurrence.
    pub leakage_rate: f64,
}

impl LeakageReport {
    pub fn count(&self, category: PiiCategory) -> usize {
        self.counts.iter().filter(|c| c.category == category).map(|c| c.count).sum()
    }
}

/// Non-overlapping substring counts of every canary string across all
/// generated snippets.
pub fn measure_leakage(generations: &[GenerationRecord], specs: &[CanarySpec]) -> LeakageReport {
    let counts: Vec<CategoryLeak> = specs
        .iter()
        .map(|s| CategoryLeak {
            category: s.category,
            pii_string: s.pii_string.clone(),
            count: if s.pii_string.is_empty() {
                0
            } else {
                generations.iter().map(|g| g.snippet.source.matches(s.pii_string.as_str()).count()).sum()
            },
        })
        .collect();
    let leaked = PiiCategory::ALL
        .iter()
        .filter(|cat| counts.iter().any(|c| c.category == **cat && c.count > 0))
        .count();
    LeakageReport {
        generations: generations.len(),
        counts,
        leakage_rate: leaked as f64 / PiiCategory::ALL.len() as f64,
    }
}

/// A JSON array of canary specs.
pub fn load_canaries(path: impl AsRef<Path>) -> Result<Vec<CanarySpec>, CanaryError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
