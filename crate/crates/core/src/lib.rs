//! Pretraining data engine for question-driven summarization.
//!
//! Unlabeled documents are segmented, their most salient sentences are
//! selected and masked, questions are generated for the selected sentences,
//! and sequence-to-sequence instances are emitted in four modes. The crate
//! also extracts finegrained control plans (content questions, keywords and
//! QA blueprints) from reference summaries and computes plan statistics.

pub mod builder;
pub mod corpus;
pub mod gsg;
pub mod metrics;
pub mod plans;
pub mod qg;
pub mod rng;
pub mod stats;
pub mod text;
