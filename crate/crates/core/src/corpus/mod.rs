//! Dataset model, byte-level tokenization, dataset I/O and corpus entropy.

mod dataset;
mod entropy;
mod vocab;

pub use dataset::{
    load_dataset, save_dataset, CodeSnippet, Dataset, DatasetError, LanguageTag, PromptCodePair,
};
pub use entropy::{corpus_entropy, text_entropy, EmptyCorpus};
pub use vocab::{TokenId, Vocabulary, VocabError, BOS, EOS, PAD, SEP};
