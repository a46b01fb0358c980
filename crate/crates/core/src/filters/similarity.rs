//! Greedy token matching over character-trigram vectors.
//!
//! Each whitespace-delimited word is lowercased, wrapped as `^word$`, and
//! represented by the counts of its character trigrams. Precision is the
//! mean over the first text's words of the best cosine against any word of
//! the second text; recall is the same in the other direction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("text contains no words")]
pub struct EmptyText;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

type Trigrams = BTreeMap<String, u32>;

fn word_vectors(text: &str) -> Vec<Trigrams> {
    text.split_whitespace()
        .map(|w| {
            let chars: Vec<char> = std::iter::once('^')
                .chain(w.to_lowercase().chars())
                .chain(std::iter::once('$'))
                .collect();
            let mut v = Trigrams::new();
            for win in chars.windows(3) {
                *v.entry(win.iter().collect()).or_insert(0) += 1;
            }
            v
        })
        .collect()
}

fn cosine(a: &Trigrams, b: &Trigrams) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(k, x)| b.get(k).map(|y| (*x as f64) * (*y as f64)))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    let na: f64 = a.values().map(|x| (*x as f64).powi(2)).sum();
    let nb: f64 = b.values().map(|x| (*x as f64).powi(2)).sum();
    (dot / (na * nb).sqrt()).min(1.0)
}

fn greedy(from: &[Trigrams], to: &[Trigrams]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|a| to.iter().map(|b| cosine(a, b)).fold(0.0, f64::max))
        .sum();
    total / from.len() as f64
}

pub fn token_match_similarity(a: &str, b: &str) -> Result<SimilarityScore, EmptyText> {
    let (va, vb) = (word_vectors(a), word_vectors(b));
    if va.is_empty() || vb.is_empty() {
        return Err(EmptyText);
    }
    let precision = greedy(&va, &vb);
    let recall = greedy(&vb, &va);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(SimilarityScore { precision, recall, f1 })
}
