//! Time-windowed transcript segmentation and word-count gating.
//!
//! A transcript is sliced by a sliding window (default 60 s, stride equal
//! to the window so segments partition the timeline). A token belongs to
//! the window containing its `start_ms`; a token straddling the boundary is
//! never split. Segments are then gated on word count: fewer than 30 words
//! is unlikely to hold multiple turns, more than 150 exceeds the converter
//! input limit. Both boundaries keep on equality.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::{TimedToken, TimedTranscript};

/// Default sliding-window length in milliseconds.
pub const DEFAULT_WINDOW_MS: u64 = 60_000;
/// Default stride: equal to the window, i.e. non-overlapping segments.
pub const DEFAULT_STRIDE_MS: u64 = 60_000;
/// Upper bound on window, stride, and timeline lengths (7 days); anything
/// longer is treated as bad input rather than a video.
pub const MAX_TIMELINE_MS: u64 = 604_800_000;
/// Segments with fewer words are rejected as too short.
pub const DEFAULT_MIN_WORDS: usize = 30;
/// Segments with more words are rejected as too long.
pub const DEFAULT_MAX_WORDS: usize = 150;

/// A windowed slice of a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub segment_id: String,
    pub video_id: String,
    pub window_start_ms: u64,
    pub window_end_ms: u64,
    pub tokens: Vec<TimedToken>,
    pub word_count: usize,
}

impl Segment {
    /// The segment transcript as a single whitespace-joined string.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&tok.text);
        }
        out
    }

    /// The segment's words in order.
    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }
}

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("empty transcript: nothing to segment")]
    EmptyTranscript,
    #[error("invalid segmentation parameters: {0}")]
    InvalidParams(String),
}

/// Why the word-count gate rejected a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WordGateReason {
    TooShort,
    TooLong,
}

/// Slice a transcript into windowed segments.
///
/// Windows start at multiples of `stride_ms` and cover the timeline up to
/// the video duration (or the last token when the duration is unknown), so
/// with `stride_ms <= window_ms` every token lands in at least one segment.
/// Empty windows are emitted too; the word gate rejects them downstream.
pub fn segment_transcript(
    t: &TimedTranscript,
    window_ms: u64,
    stride_ms: u64,
) -> Result<Vec<Segment>, SegmentError> {
    if window_ms == 0 || stride_ms == 0 {
        return Err(SegmentError::InvalidParams(
            "window_ms and stride_ms must be positive".into(),
        ));
    }
    if window_ms > MAX_TIMELINE_MS || stride_ms > MAX_TIMELINE_MS {
        return Err(SegmentError::InvalidParams(format!(
            "window_ms/stride_ms exceed the {MAX_TIMELINE_MS} ms bound"
        )));
    }
    if t.tokens.is_empty() {
        return Err(SegmentError::EmptyTranscript);
    }
    let last_start = t.tokens.iter().map(|tok| tok.start_ms).max().unwrap_or(0);
    let timeline_end = t
        .meta
        .duration_ms
        .unwrap_or(0)
        .max(last_start + 1);
    if timeline_end > MAX_TIMELINE_MS {
        return Err(SegmentError::InvalidParams(format!(
            "timeline of {timeline_end} ms exceeds the {MAX_TIMELINE_MS} ms bound"
        )));
    }

    let mut segments = Vec::new();
    let mut window_start = 0u64;
    while window_start < timeline_end {
        let window_end = window_start + window_ms;
        let tokens: Vec<TimedToken> = t
            .tokens
            .iter()
            .filter(|tok| tok.start_ms >= window_start && tok.start_ms < window_end)
            .cloned()
            .collect();
        let word_count = tokens.len();
        segments.push(Segment {
            segment_id: format!("{}:{}:{}", t.meta.video_id, window_start, window_end),
            video_id: t.meta.video_id.clone(),
            window_start_ms: window_start,
            window_end_ms: window_end,
            tokens,
            word_count,
        });
        window_start += stride_ms;
    }
    Ok(segments)
}

/// Apply the word-count gate, splitting segments into kept and rejected.
pub fn gate_word_count(
    segments: Vec<Segment>,
    min_words: usize,
    max_words: usize,
) -> (Vec<Segment>, Vec<(Segment, WordGateReason)>) {
    debug_assert!(min_words <= max_words);
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for seg in segments {
        if seg.word_count < min_words {
            rejected.push((seg, WordGateReason::TooShort));
        } else if seg.word_count > max_words {
            rejected.push((seg, WordGateReason::TooLong));
        } else {
            kept.push(seg);
        }
    }
    (kept, rejected)
}
