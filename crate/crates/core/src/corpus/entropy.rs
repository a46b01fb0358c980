use thiserror::Error;

use super::dataset::Dataset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("corpus contains no tokens")]
pub struct EmptyCorpus;

/// Shannon entropy in bits per token of the byte distribution over `texts`.
pub fn text_entropy<'a, I>(texts: I) -> Result<f64, EmptyCorpus>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts = [0u64; 256];
    let mut total = 0u64;
    for text in texts {
        for &b in text.as_bytes() {
            counts[b as usize] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(EmptyCorpus);
    }
    let n = total as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    // -0.0 for a single-symbol corpus
    Ok(h.max(0.0))
}

/// Entropy of the snippet token stream of a dataset, in bits per token.
pub fn corpus_entropy(ds: &Dataset) -> Result<f64, EmptyCorpus> {
    text_entropy(ds.pairs.iter().map(|p| p.snippet.source.as_str()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PromptCodePair, Vocabulary};

    fn ds(codes: &[&str]) -> Dataset {
        Dataset::new("e", codes.iter().map(|c| PromptCodePair::new("p", *c)).collect())
    }

    #[test]
    fn degenerate_and_uniform() {
        assert_eq!(corpus_entropy(&ds(&["aaaa", "aa"])).unwrap(), 0.0);
        assert_eq!(corpus_entropy(&ds(&["abcd", "dcba"])).unwrap(), 2.0);
    }

    #[test]
    fn empty_corpus_errors() {
        assert_eq!(corpus_entropy(&Dataset::default()), Err(EmptyCorpus));
    }

    #[test]
    fn bounded_and_permutation_invariant() {
        let a = ds(&["def f():\n    return 1", "x = 2", "print(x)"]);
        let mut b = a.clone();
        b.pairs.reverse();
        let ha = corpus_entropy(&a).unwrap();
        assert_eq!(ha, corpus_entropy(&b).unwrap());
        assert!(ha >= 0.0 && ha <= (Vocabulary::SIZE as f64).log2());
    }
}
