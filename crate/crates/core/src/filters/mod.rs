//! Post-processing filters for generated code: execution validation with a
//! failure taxonomy, and round-trip validation against the prompt.

mod execution;
mod roundtrip;
mod similarity;

pub use execution::{
    classify_execution, classify_status, execution_validate, ExecutionOutcome, OtherKind, ValidationStats,
};
pub use roundtrip::{round_trip_validate, round_trip_validate_with, AstSummarizer, RoundTripConfig, RoundTripLog, Summarizer};
pub use similarity::{token_match_similarity, EmptyText, SimilarityScore};
