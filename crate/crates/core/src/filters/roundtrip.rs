use serde::{Deserialize, Serialize};

use super::similarity::{token_match_similarity, SimilarityScore};
use crate::corpus::Dataset;
use crate::minilang::summarize_ast;

pub const DEFAULT_THRESHOLD: f64 = 0.88;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTripConfig {
    pub threshold: f64,
    pub summaries_per_snippet: usize,
}

impl Default for RoundTripConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            summaries_per_snippet: 1,
        }
    }
}

impl RoundTripConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.threshold) || self.summaries_per_snippet == 0 {
            return Err(format!("round-trip config out of range: {self:?}"));
        }
        Ok(())
    }
}

/// Produces natural-language descriptions of a snippet.
pub trait Summarizer {
    /// Up to `n` summaries; an empty list means the snippet could not be
    /// summarized.
    fn summarize(&self, code: &str, n: usize) -> Vec<String>;
}

/// The deterministic syntax-tree template summarizer. All `n` summaries are
/// identical.
#[derive(Debug, Clone, Copy, Default)]
pub struct AstSummarizer;

impl Summarizer for AstSummarizer {
    fn summarize(&self, code: &str, n: usize) -> Vec<String> {
        match summarize_ast(code) {
            Ok(s) => vec![s; n],
            Err(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripLog {
    pub index: usize,
    /// The summary that scored best, if any.
    pub summary: Option<String>,
    pub score: Option<SimilarityScore>,
    pub kept: bool,
}

pub fn round_trip_validate(ds: &Dataset, cfg: &RoundTripConfig) -> (Dataset, Vec<RoundTripLog>) {
    round_trip_validate_with(ds, cfg, &AstSummarizer)
}

/// Keeps a pair when the best F1 between any of its summaries and its prompt
/// is strictly above the threshold.
pub fn round_trip_validate_with(
    ds: &Dataset,
    cfg: &RoundTripConfig,
    summarizer: &dyn Summarizer,
) -> (Dataset, Vec<RoundTripLog>) {
    let mut kept = Vec::new();
    let mut log = Vec::with_capacity(ds.len());
    for (index, pair) in ds.pairs.iter().enumerate() {
        let mut best: Option<(String, SimilarityScore)> = None;
        for summary in summarizer.summarize(pair.code(), cfg.summaries_per_snippet.max(1)) {
            if let Ok(score) = token_match_similarity(&summary, &pair.prompt) {
                if best.as_ref().is_none_or(|(_, b)| score.f1 > b.f1) {
                    best = Some((summary, score));
                }
            }
        }
        let keep = best.as_ref().is_some_and(|(_, s)| s.f1 > cfg.threshold);
        if keep {
            kept.push(pair.clone());
        }
        let (summary, score) = match best {
            Some((s, sc)) => (Some(s), Some(sc)),
            None => (None, None),
        };
        log.push(RoundTripLog {
            index,
            summary,
            score,
            kept: keep,
        });
    }
    (Dataset::new(ds.id.clone(), kept), log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PromptCodePair;
    use proptest::prelude::*;

    fn ds() -> Dataset {
        Dataset::new(
            "rt",
            vec![
                PromptCodePair::new(
                    "defines function add with 2 parameters; returns an expression",
                    "def add(a, b):\n    return a + b\n",
                ),
                PromptCodePair::new("add two numbers", "def add(a, b):\n    return a + b\n"),
                PromptCodePair::new("zzz qqq", "print(1)\n"),
                PromptCodePair::new("print one", "def (:\n"),
            ],
        )
    }

    #[test]
    fn boundaries() {
        let d = ds();
        let (all, log) = round_trip_validate(&d, &RoundTripConfig { threshold: 0.0, summaries_per_snippet: 1 });
        // "zzz qqq" shares nothing with its summary and the broken snippet
        // has none, so both drop even at zero
        assert_eq!(all.len(), 2);
        assert_eq!(log[2].score.unwrap().f1, 0.0);
        assert!(log[3].score.is_none());
        let (none, _) = round_trip_validate(&d, &RoundTripConfig { threshold: 1.0, summaries_per_snippet: 1 });
        assert!(none.is_empty());
        let (strict, _) = round_trip_validate(&d, &RoundTripConfig::default());
        assert_eq!(strict.pairs, vec![d.pairs[0].clone()]);
    }

    struct Fixed(Vec<&'static str>);
    impl Summarizer for Fixed {
        fn summarize(&self, _: &str, n: usize) -> Vec<String> {
            self.0.iter().take(n).map(|s| s.to_string()).collect()
        }
    }

    #[test]
    fn max_pools_over_summaries() {
        let d = Dataset::new("p", vec![PromptCodePair::new("sort a list", "x = 1\n")]);
        let s = Fixed(vec!["unrelated words", "sort a list"]);
        let cfg = RoundTripConfig { threshold: 0.9, summaries_per_snippet: 2 };
        let (kept, log) = round_trip_validate_with(&d, &cfg, &s);
        assert_eq!(kept.len(), 1);
        assert_eq!(log[0].summary.as_deref(), Some("sort a list"));
        let one = RoundTripConfig { summaries_per_snippet: 1, ..cfg };
        assert!(round_trip_validate_with(&d, &one, &s).0.is_empty());
    }

    proptest! {
        #[test]
        fn monotone_in_threshold(
            prompts in proptest::collection::vec("[a-z ]{0,20}[a-z]", 1..12),
            lo in 0.0f64..1.0,
            hi in 0.0f64..1.0,
        ) {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let codes = ["def f(a):\n    return a\n", "for i in range(2):\n    print(i)\n", "x = 1\nprint(x)\n"];
            let d = Dataset::new("r", prompts.iter().enumerate().map(|(i, p)| PromptCodePair::new(p.clone(), codes[i % 3])).collect());
            let (a, _) = round_trip_validate(&d, &RoundTripConfig { threshold: hi, summaries_per_snippet: 1 });
            let (b, _) = round_trip_validate(&d, &RoundTripConfig { threshold: lo, summaries_per_snippet: 1 });
            prop_assert!(a.pairs.iter().all(|p| b.pairs.contains(p)));
        }
    }
}
