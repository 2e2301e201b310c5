//! Timed-transcript ingestion: canonical types, parsing, and validation.
//!
//! Two input formats are supported:
//! - `timed-json`: one JSON object per video (the canonical on-disk form,
//!   one record per line in shard files)
//! - `caption-cue`: WebVTT-style cue blocks with `HH:MM:SS.mmm` ranges
//!
//! Multi-word cues are split into single-word tokens with start/end times
//! linearly interpolated across the cue window, so every downstream stage
//! sees word-level timing.

mod caption_cue;
mod timed_json;

pub use timed_json::VideoRecord;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single transcript word with millisecond timing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedToken {
    pub text: String,
    pub start_ms: u64,
    pub end_ms: u64,
}

/// Per-video metadata carried alongside the token stream.
///
/// `thumbnail_has_objects` is an upstream image-classifier decision and
/// `frame_signatures_hex` holds per-frame bit signatures (hex-encoded);
/// both are optional inputs consumed by the filter stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    #[serde(default = "default_language_prob")]
    pub language_prob_en: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thumbnail_has_objects: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frame_signatures_hex: Vec<String>,
}

fn default_language_prob() -> f64 {
    1.0
}

/// A parsed transcript: metadata plus tokens sorted by `start_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedTranscript {
    pub meta: VideoMeta,
    pub tokens: Vec<TimedToken>,
}

/// Input format selector for [`parse_transcript`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptFormat {
    TimedJson,
    CaptionCue,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("empty transcript: no words in any cue")]
    EmptyTranscript,
}

/// Parse transcript-file bytes in the declared format into a canonical
/// [`TimedTranscript`].
///
/// The result satisfies all type invariants: tokens are single words,
/// sorted by non-decreasing `start_ms`, with `end_ms >= start_ms`, and
/// (when a duration is known) `end_ms <= duration_ms`.
pub fn parse_transcript(
    raw: &[u8],
    format: TranscriptFormat,
) -> Result<TimedTranscript, TranscriptError> {
    parse_transcript_with_fallback_id(raw, format, None)
}

/// Like [`parse_transcript`] but supplies a video id for caption-cue files
/// that lack a `Video-Id` header (the CLI passes the file stem).
pub fn parse_transcript_with_fallback_id(
    raw: &[u8],
    format: TranscriptFormat,
    fallback_video_id: Option<&str>,
) -> Result<TimedTranscript, TranscriptError> {
    let text = std::str::from_utf8(raw)
        .map_err(|e| TranscriptError::MalformedInput(format!("not valid UTF-8: {e}")))?;
    match format {
        TranscriptFormat::TimedJson => timed_json::parse(text),
        TranscriptFormat::CaptionCue => caption_cue::parse(text, fallback_video_id),
    }
}

/// Serialize a transcript to its canonical timed-json form: a single JSON
/// line. `parse_transcript` of the output is the identity.
pub fn serialize_transcript(t: &TimedTranscript) -> String {
    serde_json::to_string(&VideoRecord::from_transcript(t)).expect("transcript serializes")
}

/// Rule violated by a transcript record; violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationRule {
    EndBeforeStart,
    EmptyText,
    InternalWhitespace,
    OutOfOrder,
    ExceedsDuration,
    EmptyVideoId,
    LanguageProbOutOfRange,
}

/// One validation finding, pointing at the offending token where applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub token_index: Option<usize>,
    pub rule: ViolationRule,
    pub detail: String,
}

/// Check every [`TimedTranscript`] invariant; the report is empty iff all
/// hold.
pub fn validate_transcript(t: &TimedTranscript) -> Vec<Violation> {
    let mut report = Vec::new();
    if t.meta.video_id.is_empty() {
        report.push(Violation {
            token_index: None,
            rule: ViolationRule::EmptyVideoId,
            detail: "video_id is empty".into(),
        });
    }
    if !(0.0..=1.0).contains(&t.meta.language_prob_en) {
        report.push(Violation {
            token_index: None,
            rule: ViolationRule::LanguageProbOutOfRange,
            detail: format!("language_prob_en = {}", t.meta.language_prob_en),
        });
    }
    let mut prev_start = 0u64;
    for (i, tok) in t.tokens.iter().enumerate() {
        if tok.end_ms < tok.start_ms {
            report.push(Violation {
                token_index: Some(i),
                rule: ViolationRule::EndBeforeStart,
                detail: format!("end {} < start {}", tok.end_ms, tok.start_ms),
            });
        }
        if tok.text.trim().is_empty() {
            report.push(Violation {
                token_index: Some(i),
                rule: ViolationRule::EmptyText,
                detail: "token text empty after trimming".into(),
            });
        } else if tok.text.chars().any(char::is_whitespace) {
            report.push(Violation {
                token_index: Some(i),
                rule: ViolationRule::InternalWhitespace,
                detail: format!("token text {:?} contains whitespace", tok.text),
            });
        }
        if i > 0 && tok.start_ms < prev_start {
            report.push(Violation {
                token_index: Some(i),
                rule: ViolationRule::OutOfOrder,
                detail: format!("start {} < previous start {}", tok.start_ms, prev_start),
            });
        }
        if let Some(duration) = t.meta.duration_ms {
            if tok.end_ms > duration {
                report.push(Violation {
                    token_index: Some(i),
                    rule: ViolationRule::ExceedsDuration,
                    detail: format!("end {} > duration {}", tok.end_ms, duration),
                });
            }
        }
        prev_start = tok.start_ms;
    }
    report
}

/// Split a cue's text into word tokens, distributing start/end times by
/// linear interpolation across the cue window `[start_ms, end_ms)`.
pub(crate) fn split_cue_into_tokens(
    text: &str,
    start_ms: u64,
    end_ms: u64,
) -> Vec<TimedToken> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let n = words.len() as u64;
    if n == 0 {
        return Vec::new();
    }
    // u128 intermediates: k * span can exceed u64 for extreme timings
    let span = (end_ms - start_ms) as u128;
    let at = |k: u128| start_ms + (k * span / n as u128) as u64;
    words
        .iter()
        .enumerate()
        .map(|(k, w)| TimedToken {
            text: (*w).to_string(),
            start_ms: at(k as u128),
            end_ms: at(k as u128 + 1),
        })
        .collect()
}

/// Shared tail of both parsers: sort, reject invariant breaks, and wrap up.
pub(crate) fn finish_transcript(
    meta: VideoMeta,
    mut tokens: Vec<TimedToken>,
) -> Result<TimedTranscript, TranscriptError> {
    if tokens.is_empty() {
        return Err(TranscriptError::EmptyTranscript);
    }
    if meta.video_id.is_empty() {
        return Err(TranscriptError::InvariantViolation(
            "video_id is empty".into(),
        ));
    }
    if !(0.0..=1.0).contains(&meta.language_prob_en) {
        return Err(TranscriptError::InvariantViolation(format!(
            "language_prob_en {} outside [0, 1]",
            meta.language_prob_en
        )));
    }
    tokens.sort_by_key(|t| t.start_ms);
    if let Some(duration) = meta.duration_ms {
        if let Some((i, tok)) = tokens
            .iter()
            .enumerate()
            .find(|(_, t)| t.end_ms > duration)
        {
            return Err(TranscriptError::InvariantViolation(format!(
                "token {i} ({:?}) ends at {} past duration {}",
                tok.text, tok.end_ms, duration
            )));
        }
    }
    Ok(TimedTranscript { meta, tokens })
}
