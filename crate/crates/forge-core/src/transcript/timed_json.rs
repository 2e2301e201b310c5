//! The timed-json wire format: one JSON object per video.
//!
//! ```json
//! {"video_id":"abc","title":"My Video","duration_ms":90000,
//!  "language_prob_en":0.97,"tokens":[{"text":"hi","start_ms":0,"end_ms":250}]}
//! ```
//!
//! `duration_ms`, `language_prob_en` (default 1.0), `thumbnail_has_objects`,
//! and `frame_signatures` (hex strings) are optional.

use serde::{Deserialize, Serialize};

use super::{
    finish_transcript, split_cue_into_tokens, TimedTranscript, TranscriptError, VideoMeta,
};

/// Raw wire token; timings are signed so negative inputs surface as
/// invariant violations instead of type errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireToken {
    pub text: String,
    pub start_ms: i64,
    pub end_ms: i64,
}

/// One video record as stored on disk (one per line in shard files).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    #[serde(default = "super::default_language_prob")]
    pub language_prob_en: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thumbnail_has_objects: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frame_signatures: Vec<String>,
    pub tokens: Vec<WireToken>,
}

impl VideoRecord {
    pub fn from_transcript(t: &TimedTranscript) -> Self {
        VideoRecord {
            video_id: t.meta.video_id.clone(),
            title: t.meta.title.clone(),
            duration_ms: t.meta.duration_ms,
            language_prob_en: t.meta.language_prob_en,
            thumbnail_has_objects: t.meta.thumbnail_has_objects,
            frame_signatures: t.meta.frame_signatures_hex.clone(),
            tokens: t
                .tokens
                .iter()
                .map(|tok| WireToken {
                    text: tok.text.clone(),
                    start_ms: tok.start_ms as i64,
                    end_ms: tok.end_ms as i64,
                })
                .collect(),
        }
    }

    /// Convert into a canonical transcript, splitting multi-word tokens and
    /// enforcing every type invariant.
    pub fn into_transcript(self) -> Result<TimedTranscript, TranscriptError> {
        let mut tokens = Vec::with_capacity(self.tokens.len());
        for (i, wire) in self.tokens.iter().enumerate() {
            if wire.start_ms < 0 || wire.end_ms < 0 {
                return Err(TranscriptError::InvariantViolation(format!(
                    "token {i} has negative timing ({}, {})",
                    wire.start_ms, wire.end_ms
                )));
            }
            let (start, end) = (wire.start_ms as u64, wire.end_ms as u64);
            if end < start {
                return Err(TranscriptError::InvariantViolation(format!(
                    "token {i} ends at {end} before start {start}"
                )));
            }
            tokens.extend(split_cue_into_tokens(&wire.text, start, end));
        }
        let meta = VideoMeta {
            video_id: self.video_id,
            title: self.title,
            duration_ms: self.duration_ms,
            language_prob_en: self.language_prob_en,
            thumbnail_has_objects: self.thumbnail_has_objects,
            frame_signatures_hex: self.frame_signatures,
        };
        finish_transcript(meta, tokens)
    }
}

pub(super) fn parse(text: &str) -> Result<TimedTranscript, TranscriptError> {
    let record: VideoRecord = serde_json::from_str(text)
        .map_err(|e| TranscriptError::MalformedInput(format!("timed-json: {e}")))?;
    record.into_transcript()
}
