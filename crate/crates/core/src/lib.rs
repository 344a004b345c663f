//! Joint estimation of transcript expression and differential expression
//! between two conditions.
//!
//! Each transcript carries a binary DE indicator. EE transcripts share one
//! relative abundance across both conditions, DE transcripts get their own.
//! Reads are clustered by shared alignments, each cluster is sampled
//! independently with either a collapsed Gibbs sampler or a reversible-jump
//! sampler, and posterior DE probabilities feed FDR-controlling decision rules.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the math
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cluster;
pub mod decision;
pub mod diag;
pub mod dist;
pub mod error;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod runner;
pub mod sampler;
pub mod synth;

pub use error::{Error, Result};
