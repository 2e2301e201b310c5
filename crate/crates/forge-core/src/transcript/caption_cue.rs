//! The caption-cue wire format: WebVTT-style cue blocks.
//!
//! ```text
//! WEBVTT
//! Video-Id: abc123
//! Title: My Video
//! Duration-Ms: 90000
//! Language-Prob-En: 0.97
//!
//! 00:00:00.000 --> 00:00:02.500
//! hello world this is
//!
//! 00:00:02.500 --> 00:00:05.000
//! a caption cue file
//! ```
//!
//! Header lines between `WEBVTT` and the first blank line are `Key: Value`
//! metadata; all keys are optional. Cue blocks may carry an identifier line
//! before the timestamp line and any number of text lines after it. `NOTE`
//! blocks are skipped. Out-of-order cues are accepted and re-sorted.

use std::sync::OnceLock;

use regex::Regex;

use super::{
    finish_transcript, split_cue_into_tokens, TimedTranscript, TranscriptError, VideoMeta,
};

fn timestamp_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(\d{2,}):(\d{2}):(\d{2})\.(\d{3})\s*-->\s*(\d{2,}):(\d{2}):(\d{2})\.(\d{3})")
            .expect("valid regex")
    })
}

fn parse_timestamp_ms(h: &str, m: &str, s: &str, ms: &str) -> Result<u64, TranscriptError> {
    let hours_out_of_range =
        || TranscriptError::MalformedInput(format!("timestamp hours out of range: {h}"));
    let h: u64 = h.parse().map_err(|_| hours_out_of_range())?;
    let m: u64 = m.parse().expect("two digits");
    let s: u64 = s.parse().expect("two digits");
    let ms: u64 = ms.parse().expect("three digits");
    if m >= 60 || s >= 60 {
        return Err(TranscriptError::MalformedInput(format!(
            "timestamp minutes/seconds out of range: {h:02}:{m:02}:{s:02}.{ms:03}"
        )));
    }
    h.checked_mul(3_600_000)
        .and_then(|v| v.checked_add(m * 60_000 + s * 1000 + ms))
        .ok_or_else(hours_out_of_range)
}

pub(super) fn parse(
    text: &str,
    fallback_video_id: Option<&str>,
) -> Result<TimedTranscript, TranscriptError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first.trim_start_matches('\u{feff}').trim().starts_with("WEBVTT") => {}
        _ => {
            return Err(TranscriptError::MalformedInput(
                "missing WEBVTT header".into(),
            ))
        }
    }

    let mut video_id: Option<String> = None;
    let mut title = String::new();
    let mut duration_ms: Option<u64> = None;
    let mut language_prob_en = 1.0f64;

    // Header metadata runs until the first blank line.
    let mut rest: Vec<&str> = Vec::new();
    let mut in_header = true;
    for line in lines {
        if in_header {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                in_header = false;
                continue;
            }
            if let Some((key, value)) = trimmed.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "Video-Id" => video_id = Some(value.to_string()),
                    "Title" => title = value.to_string(),
                    "Duration-Ms" => {
                        duration_ms = Some(value.parse().map_err(|_| {
                            TranscriptError::MalformedInput(format!(
                                "Duration-Ms is not a non-negative integer: {value}"
                            ))
                        })?)
                    }
                    "Language-Prob-En" => {
                        language_prob_en = value.parse().map_err(|_| {
                            TranscriptError::MalformedInput(format!(
                                "Language-Prob-En is not a number: {value}"
                            ))
                        })?
                    }
                    _ => {} // unknown headers (Kind, Language, ...) are ignored
                }
            }
            continue;
        }
        rest.push(line);
    }

    let mut tokens = Vec::new();
    let mut cue_window: Option<(u64, u64)> = None;
    let mut cue_text: Vec<&str> = Vec::new();
    let mut in_note = false;

    let mut flush = |window: &mut Option<(u64, u64)>, text_lines: &mut Vec<&str>| {
        if let Some((start, end)) = window.take() {
            let joined = text_lines.join(" ");
            tokens.extend(split_cue_into_tokens(&joined, start, end));
        }
        text_lines.clear();
    };

    for line in rest {
        let trimmed = line.trim();
        if trimmed.starts_with("NOTE") || trimmed.starts_with("STYLE") || trimmed.starts_with("REGION") {
            flush(&mut cue_window, &mut cue_text);
            in_note = true;
            continue;
        }
        if trimmed.is_empty() {
            flush(&mut cue_window, &mut cue_text);
            in_note = false;
            continue;
        }
        if in_note {
            continue;
        }
        if let Some(caps) = timestamp_line_re().captures(trimmed) {
            flush(&mut cue_window, &mut cue_text);
            let start = parse_timestamp_ms(&caps[1], &caps[2], &caps[3], &caps[4])?;
            let end = parse_timestamp_ms(&caps[5], &caps[6], &caps[7], &caps[8])?;
            if end < start {
                return Err(TranscriptError::InvariantViolation(format!(
                    "cue ends at {end}ms before start {start}ms"
                )));
            }
            cue_window = Some((start, end));
            continue;
        }
        if cue_window.is_some() {
            cue_text.push(line);
        }
        // lines before any timestamp (cue identifiers) are skipped
    }
    flush(&mut cue_window, &mut cue_text);

    let video_id = match video_id.or_else(|| fallback_video_id.map(str::to_string)) {
        Some(id) if !id.is_empty() => id,
        _ => {
            return Err(TranscriptError::MalformedInput(
                "no Video-Id header and no fallback id".into(),
            ))
        }
    };

    let meta = VideoMeta {
        video_id,
        title,
        duration_ms,
        language_prob_en,
        thumbnail_has_objects: None,
        frame_signatures_hex: Vec::new(),
    };
    finish_transcript(meta, tokens)
}
