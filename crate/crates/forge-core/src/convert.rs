//! Noisy-transcript-to-dialogue conversion.
//!
//! A converter turns a flat segment transcript into speaker-attributed
//! turns. The real converter is a remote model behind a JSON endpoint
//! (`{"transcript": ...}` in, `{"turns": [{"speaker", "text"}]}` out); the
//! bundled fallback converter is a deterministic rule system that splits at
//! silence gaps and sentence-final punctuation, so the pipeline also runs
//! hermetically. Converters are scored by teacher-forcing token accuracy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::remote::{post_json, Endpoint, RemoteError};
use crate::segment::Segment;

/// Converter input limit in words; longer segments are rejected upstream
/// and refused here.
pub const CONVERTER_MAX_INPUT_WORDS: usize = 150;

/// Default silence gap (ms) at which the fallback converter starts a new
/// turn.
pub const DEFAULT_PAUSE_GAP_MS: u64 = 1000;

/// One speaker-attributed utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub speaker: String,
    pub text: String,
}

/// A well-formatted dialogue produced from one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub turns: Vec<DialogueTurn>,
    pub source_segment_id: String,
}

impl Dialogue {
    /// Check the type invariants: at least one turn, non-empty turn text,
    /// and no two consecutive turns sharing a speaker label.
    pub fn validate(&self) -> Result<(), ConvertError> {
        if self.turns.is_empty() {
            return Err(ConvertError::MalformedResponse("no turns".into()));
        }
        for (i, turn) in self.turns.iter().enumerate() {
            if turn.text.trim().is_empty() {
                return Err(ConvertError::MalformedResponse(format!(
                    "turn {i} has empty text"
                )));
            }
        }
        for (i, pair) in self.turns.windows(2).enumerate() {
            if pair[0].speaker == pair[1].speaker {
                return Err(ConvertError::MalformedResponse(format!(
                    "turns {i} and {} share speaker {:?}",
                    i + 1,
                    pair[0].speaker
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("rate limited; retry after {retry_after_ms} ms")]
    RateLimited { retry_after_ms: u64 },
    #[error("oversize input: {words} words exceeds the converter limit of {limit}")]
    OversizeInput { words: usize, limit: usize },
    #[error("empty input: segment has no tokens")]
    EmptyInput,
    #[error("empty references")]
    EmptyReferences,
    #[error("predictions and references differ in length: {predictions} vs {references}")]
    LengthMismatch {
        predictions: usize,
        references: usize,
    },
}

impl From<RemoteError> for ConvertError {
    fn from(e: RemoteError) -> Self {
        match e {
            RemoteError::Unreachable(msg) => ConvertError::EndpointUnreachable(msg),
            RemoteError::MalformedResponse(msg) => ConvertError::MalformedResponse(msg),
            RemoteError::RateLimited { retry_after_ms, .. } => {
                ConvertError::RateLimited { retry_after_ms }
            }
        }
    }
}

/// Anything that can rewrite a segment transcript into dialogue turns.
pub trait Converter: Sync {
    fn convert_words(&self, segment: &Segment) -> Result<Vec<DialogueTurn>, ConvertError>;
}

/// Convert a segment into a validated dialogue.
///
/// A response that expands the transcript beyond all plausibility (the
/// converter rewrites, it does not generate) is rejected as malformed;
/// downstream alignment is quadratic in the word counts.
pub fn convert(segment: &Segment, converter: &dyn Converter) -> Result<Dialogue, ConvertError> {
    if segment.word_count > CONVERTER_MAX_INPUT_WORDS {
        return Err(ConvertError::OversizeInput {
            words: segment.word_count,
            limit: CONVERTER_MAX_INPUT_WORDS,
        });
    }
    if segment.tokens.is_empty() {
        return Err(ConvertError::EmptyInput);
    }
    let dialogue = Dialogue {
        turns: converter.convert_words(segment)?,
        source_segment_id: segment.segment_id.clone(),
    };
    dialogue.validate()?;
    let response_words: usize = dialogue
        .turns
        .iter()
        .map(|t| t.text.split_whitespace().count())
        .sum();
    let limit = segment.word_count * 10 + 100;
    if response_words > limit {
        return Err(ConvertError::MalformedResponse(format!(
            "response has {response_words} words for a {}-word segment",
            segment.word_count
        )));
    }
    Ok(dialogue)
}

/// Deterministic rule-based converter: new turn at silence gaps above
/// `pause_gap_ms` and after sentence-final punctuation, alternating "A"/"B"
/// speakers, turn-initial word capitalized.
#[derive(Debug, Clone)]
pub struct FallbackConverter {
    pub pause_gap_ms: u64,
}

impl Default for FallbackConverter {
    fn default() -> Self {
        FallbackConverter {
            pause_gap_ms: DEFAULT_PAUSE_GAP_MS,
        }
    }
}

fn ends_sentence(word: &str) -> bool {
    let trimmed = word.trim_end_matches(['"', '\'', ')', ']']);
    trimmed.ends_with(['.', '?', '!'])
}

fn capitalize_first(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl Converter for FallbackConverter {
    fn convert_words(&self, segment: &Segment) -> Result<Vec<DialogueTurn>, ConvertError> {
        let tokens = &segment.tokens;
        let mut chunks: Vec<Vec<&str>> = vec![Vec::new()];
        for (i, tok) in tokens.iter().enumerate() {
            chunks.last_mut().expect("non-empty").push(tok.text.as_str());
            let gap_break = tokens
                .get(i + 1)
                .map(|next| next.start_ms.saturating_sub(tok.end_ms) > self.pause_gap_ms)
                .unwrap_or(false);
            if (gap_break || ends_sentence(&tok.text)) && i + 1 < tokens.len() {
                chunks.push(Vec::new());
            }
        }
        let turns = chunks
            .into_iter()
            .enumerate()
            .map(|(i, words)| {
                let mut text = String::new();
                for (k, word) in words.iter().enumerate() {
                    if k > 0 {
                        text.push(' ');
                    }
                    if k == 0 {
                        text.push_str(&capitalize_first(word));
                    } else {
                        text.push_str(word);
                    }
                }
                DialogueTurn {
                    speaker: if i % 2 == 0 { "A".into() } else { "B".into() },
                    text,
                }
            })
            .collect();
        Ok(turns)
    }
}

/// Wire response of the remote converter.
#[derive(Debug, Deserialize)]
struct ConverterResponse {
    turns: Vec<DialogueTurn>,
}

#[derive(Debug, Serialize)]
struct ConverterRequest<'a> {
    transcript: &'a str,
}

/// Remote converter speaking the `{"transcript"} -> {"turns"}` protocol.
/// Speaker labels from the endpoint are passed through verbatim.
#[derive(Debug, Clone)]
pub struct RemoteConverter {
    pub endpoint: Endpoint,
}

impl Converter for RemoteConverter {
    fn convert_words(&self, segment: &Segment) -> Result<Vec<DialogueTurn>, ConvertError> {
        let text = segment.text();
        let response: ConverterResponse = post_json(
            &self.endpoint,
            &ConverterRequest { transcript: &text },
        )?;
        Ok(response.turns)
    }
}

/// Decode and validate a raw converter response body. Shared by the remote
/// client tests and the fuzz targets.
pub fn decode_converter_response(raw: &[u8]) -> Result<Vec<DialogueTurn>, ConvertError> {
    let response: ConverterResponse = serde_json::from_slice(raw)
        .map_err(|e| ConvertError::MalformedResponse(e.to_string()))?;
    let dialogue = Dialogue {
        turns: response.turns,
        source_segment_id: String::new(),
    };
    dialogue.validate()?;
    Ok(dialogue.turns)
}

/// Micro-averaged teacher-forcing token accuracy.
///
/// Each prediction is compared position-by-position against its reference
/// up to the reference length; missing positions count as mismatches and
/// extra predicted tokens are ignored. The result is matches divided by
/// total reference tokens.
pub fn teacher_forcing_accuracy(
    predictions: &[Vec<u32>],
    references: &[Vec<u32>],
) -> Result<f64, ConvertError> {
    if predictions.len() != references.len() {
        return Err(ConvertError::LengthMismatch {
            predictions: predictions.len(),
            references: references.len(),
        });
    }
    let total: usize = references.iter().map(Vec::len).sum();
    if references.is_empty() || total == 0 {
        return Err(ConvertError::EmptyReferences);
    }
    let matches: usize = predictions
        .iter()
        .zip(references)
        .map(|(pred, reference)| {
            reference
                .iter()
                .enumerate()
                .filter(|&(i, tok)| pred.get(i) == Some(tok))
                .count()
        })
        .sum();
    Ok(matches as f64 / total as f64)
}
