//! Build frame-aligned dialogue datasets from timed, noisy video
//! transcripts.
//!
//! The library mirrors the batch pipeline stage by stage:
//!
//! - [`transcript`]: parse timed-json and caption-cue inputs into canonical
//!   word-timed transcripts
//! - [`segment`]: 60-second sliding-window slicing plus word-count gates
//! - [`filter`]: language, visual-variation, and safety gates with a
//!   remote scorer and an offline stub
//! - [`convert`]: noisy transcript to speaker-attributed dialogue, via a
//!   remote converter or the deterministic fallback, plus teacher-forcing
//!   accuracy
//! - [`align`]: word-level Levenshtein DTW back onto the timed transcript,
//!   per-turn start times, and frame-extraction jobs
//! - [`example`]: next-turn training examples and benchmark input
//!   templates
//! - [`metrics`]: corpus-level Dist-N, cross-tokenizer perplexity
//!   normalization, NDCG, and streaming corpus statistics
//! - [`pipeline`]: sharded end-to-end orchestration with audit trails and
//!   a video-id-only manifest

pub mod align;
pub mod convert;
pub mod example;
pub mod filter;
pub mod metrics;
pub mod pipeline;
pub mod remote;
pub mod segment;
pub mod transcript;

#[cfg(test)]
pub(crate) mod testutil;
