//! Two-stage differentially private code synthesis at desk scale.
//!
//! Stage one trains a small byte-level language model on sensitive
//! prompt/code pairs with DP-SGD and a structure-aware KL regularizer.
//! Stage two samples synthetic code from it, filters the samples by
//! execution and round-trip agreement, and fine-tunes a larger model on what
//! survives without further privacy cost.

pub mod corpus;
pub mod evaluation;
pub mod filters;
pub mod lm;
pub mod minilang;
pub mod pipeline;
pub mod privacy;
pub mod privsa;
pub mod synth;
