//! Byte-level token alphabet.
//!
//! Ids `0..=255` are raw bytes; the four special tokens sit directly above
//! them. The layout is fixed so checkpoints stay portable.

use thiserror::Error;

/// Token id. Byte ids occupy `0..256`.
pub type TokenId = u32;

pub const BOS: TokenId = 256;
pub const EOS: TokenId = 257;
pub const PAD: TokenId = 258;
pub const SEP: TokenId = 259;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabError {
    #[error("special token {0} cannot be detokenized")]
    SpecialTokenInOutput(TokenId),
    #[error("token id {0} is outside the vocabulary")]
    OutOfRange(TokenId),
}

/// The fixed 260-entry vocabulary: 256 bytes plus BOS, EOS, PAD and SEP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Vocabulary;

impl Vocabulary {
    pub const SIZE: usize = 260;

    pub fn size(&self) -> usize {
        Self::SIZE
    }

    pub fn byte_id(&self, byte: u8) -> TokenId {
        TokenId::from(byte)
    }

    pub fn is_byte(&self, id: TokenId) -> bool {
        id < 256
    }

    pub fn is_special(&self, id: TokenId) -> bool {
        (256..Self::SIZE as TokenId).contains(&id)
    }

    pub fn special_name(&self, id: TokenId) -> Option<&'static str> {
        match id {
            BOS => Some("<bos>"),
            EOS => Some("<eos>"),
            PAD => Some("<pad>"),
            SEP => Some("<sep>"),
            _ => None,
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<TokenId> {
        self.tokenize_bytes(text.as_bytes())
    }

    pub fn tokenize_bytes(&self, bytes: &[u8]) -> Vec<TokenId> {
        bytes.iter().map(|&b| self.byte_id(b)).collect()
    }

    /// Inverse of [`Vocabulary::tokenize_bytes`]. Special ids are rejected
    /// rather than dropped.
    pub fn detokenize(&self, ids: &[TokenId]) -> Result<Vec<u8>, VocabError> {
        ids.iter()
            .map(|&id| {
                if self.is_byte(id) {
                    Ok(id as u8)
                } else if self.is_special(id) {
                    Err(VocabError::SpecialTokenInOutput(id))
                } else {
                    Err(VocabError::OutOfRange(id))
                }
            })
            .collect()
    }

    /// Detokenize and decode as UTF-8, replacing invalid sequences.
    pub fn detokenize_lossy(&self, ids: &[TokenId]) -> Result<String, VocabError> {
        let bytes = self.detokenize(ids)?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// `BOS prompt SEP snippet EOS`. Returns the sequence and the index of
    /// the first snippet position (the token right after SEP).
    pub fn join_pair(&self, prompt: &str, snippet: &str) -> (Vec<TokenId>, usize) {
        let mut seq = Vec::with_capacity(prompt.len() + snippet.len() + 3);
        seq.push(BOS);
        seq.extend(self.tokenize(prompt));
        seq.push(SEP);
        let start = seq.len();
        seq.extend(self.tokenize(snippet));
        seq.push(EOS);
        (seq, start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_maps_bytes_to_their_slots() {
        let v = Vocabulary;
        assert_eq!(v.tokenize("ab"), vec![97, 98]);
        assert!(v.tokenize("").is_empty());
    }

    #[test]
    fn detokenize_rejects_specials() {
        let v = Vocabulary;
        assert_eq!(v.detokenize(&[104, 105]).unwrap(), b"hi");
        assert_eq!(v.detokenize(&[BOS]), Err(VocabError::SpecialTokenInOutput(BOS)));
        assert_eq!(v.detokenize(&[999]), Err(VocabError::OutOfRange(999)));
    }

    #[test]
    fn specials_are_distinct_from_bytes() {
        let v = Vocabulary;
        let specials = [BOS, EOS, PAD, SEP];
        for (i, a) in specials.iter().enumerate() {
            assert!(v.is_special(*a) && !v.is_byte(*a));
            for b in &specials[i + 1..] {
                assert_ne!(a, b);
            }
        }
        assert_eq!(v.size(), 260);
    }

    #[test]
    fn join_pair_places_sep_before_snippet() {
        let v = Vocabulary;
        let (seq, start) = v.join_pair("p", "xy");
        assert_eq!(seq, vec![BOS, 112, SEP, 120, 121, EOS]);
        assert_eq!(seq[start - 1], SEP);
    }

    proptest! {
        #[test]
        fn byte_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..1024)) {
            let v = Vocabulary;
            prop_assert_eq!(v.detokenize(&v.tokenize_bytes(&bytes)).unwrap(), bytes);
        }

        #[test]
        fn id_round_trip(ids in proptest::collection::vec(0u32..256, 0..256)) {
            let v = Vocabulary;
            prop_assert_eq!(v.tokenize_bytes(&v.detokenize(&ids).unwrap()), ids);
        }
    }

    #[test]
    fn kib_random_string_round_trips() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let bytes: Vec<u8> = (0..1024).map(|_| rng.random()).collect();
        let v = Vocabulary;
        assert_eq!(v.detokenize(&v.tokenize_bytes(&bytes)).unwrap(), bytes);
    }
}
