//! Dialogue-to-transcript alignment.
//!
//! The converter rewrites a noisy transcript into turns, changing case and
//! punctuation and occasionally dropping or adding words. To recover timing
//! for each turn we align the dialogue's words back onto the timed
//! transcript with dynamic time warping, using word-pair Levenshtein
//! distance (on case-folded, punctuation-stripped forms) as the local cost.
//! Each turn's start time is the start of the earliest transcript token
//! aligned to the turn's first word, and that start time is also the
//! timestamp at which a video frame is extracted for the turn.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convert::Dialogue;
use crate::segment::Segment;

/// A monotone, contiguous alignment between two word sequences.
///
/// Steps run from `(0, 0)` to `(len_a - 1, len_b - 1)`; each step advances
/// the transcript index, the dialogue index, or both by exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPath {
    /// `(transcript word index, dialogue word index)` pairs.
    pub steps: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// A dialogue annotated with per-turn start times and frame timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedDialogue {
    pub dialogue: Dialogue,
    pub turn_start_ms: Vec<u64>,
    pub frame_timestamps_ms: Vec<u64>,
}

/// A frame-extraction work item for an external decoding tool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameJob {
    pub video_id: String,
    pub timestamp_ms: u64,
    pub turn_index: usize,
}

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("empty sequence: both word lists must be non-empty")]
    EmptySequence,
    #[error("path mismatch: {0}")]
    PathMismatch(String),
}

/// Case-fold and strip punctuation, the normal form alignment costs use.
/// Original surface forms are untouched elsewhere.
pub fn normalize_word(word: &str) -> String {
    word.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Unit-cost edit distance between the normalized forms of two words.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = normalize_word(a).chars().collect();
    let b: Vec<char> = normalize_word(b).chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Align two word sequences with dynamic time warping under word-pair
/// Levenshtein cost.
///
/// Returns the minimum-cost monotone, contiguous path; ties in the
/// backtrace prefer the diagonal step, then the transcript-advance step,
/// so outputs are deterministic.
pub fn dtw_align(
    transcript_words: &[&str],
    dialogue_words: &[&str],
) -> Result<AlignmentPath, AlignError> {
    let n = transcript_words.len();
    let m = dialogue_words.len();
    if n == 0 || m == 0 {
        return Err(AlignError::EmptySequence);
    }

    // Segments are capped at 150 words, so the full n*m table is cheap.
    let cost = |i: usize, j: usize| levenshtein(transcript_words[i], dialogue_words[j]) as f64;
    let mut table = vec![f64::INFINITY; n * m];
    let idx = |i: usize, j: usize| i * m + j;
    table[idx(0, 0)] = cost(0, 0);
    for i in 0..n {
        for j in 0..m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            if i > 0 && j > 0 {
                best = best.min(table[idx(i - 1, j - 1)]);
            }
            if i > 0 {
                best = best.min(table[idx(i - 1, j)]);
            }
            if j > 0 {
                best = best.min(table[idx(i, j - 1)]);
            }
            table[idx(i, j)] = best + cost(i, j);
        }
    }

    // Backtrace from the corner; tie order: diagonal, transcript-advance,
    // dialogue-advance.
    let mut steps = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 {
            table[idx(i - 1, j - 1)]
        } else {
            f64::INFINITY
        };
        let up = if i > 0 { table[idx(i - 1, j)] } else { f64::INFINITY };
        let left = if j > 0 { table[idx(i, j - 1)] } else { f64::INFINITY };
        let best = diag.min(up).min(left);
        if diag == best {
            i -= 1;
            j -= 1;
        } else if up == best {
            i -= 1;
        } else {
            j -= 1;
        }
        steps.push((i, j));
    }
    steps.reverse();

    Ok(AlignmentPath {
        steps,
        total_cost: table[idx(n - 1, m - 1)],
    })
}

impl AlignmentPath {
    /// Check the path invariants against the sequence lengths it claims to
    /// align.
    pub fn validate(&self, len_transcript: usize, len_dialogue: usize) -> Result<(), AlignError> {
        if self.steps.is_empty() {
            return Err(AlignError::PathMismatch("path has no steps".into()));
        }
        if self.steps[0] != (0, 0) {
            return Err(AlignError::PathMismatch(format!(
                "path starts at {:?}, expected (0, 0)",
                self.steps[0]
            )));
        }
        let last = *self.steps.last().expect("non-empty");
        if last != (len_transcript - 1, len_dialogue - 1) {
            return Err(AlignError::PathMismatch(format!(
                "path ends at {last:?}, expected ({}, {})",
                len_transcript - 1,
                len_dialogue - 1
            )));
        }
        for w in self.steps.windows(2) {
            let (i0, j0) = w[0];
            let (i1, j1) = w[1];
            let di = i1.wrapping_sub(i0);
            let dj = j1.wrapping_sub(j0);
            let ok = (di == 1 && dj == 1) || (di == 1 && dj == 0) || (di == 0 && dj == 1);
            if !ok {
                return Err(AlignError::PathMismatch(format!(
                    "non-monotone step {:?} -> {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Estimate per-turn start times from an alignment path and stamp each turn
/// with its frame timestamp.
///
/// A turn starts at the `start_ms` of the earliest transcript token the
/// path aligns to the turn's first word. Path monotonicity makes the turn
/// start times non-decreasing.
pub fn estimate_turn_times(
    segment: &Segment,
    dialogue: &Dialogue,
    path: &AlignmentPath,
) -> Result<AlignedDialogue, AlignError> {
    let dialogue_words: Vec<&str> = dialogue
        .turns
        .iter()
        .flat_map(|t| t.text.split_whitespace())
        .collect();
    path.validate(segment.tokens.len(), dialogue_words.len())?;

    // Dialogue-word index at which each turn begins.
    let mut first_word_index = Vec::with_capacity(dialogue.turns.len());
    let mut offset = 0usize;
    for turn in &dialogue.turns {
        first_word_index.push(offset);
        offset += turn.text.split_whitespace().count();
    }

    let mut turn_start_ms = Vec::with_capacity(dialogue.turns.len());
    for &start_word in &first_word_index {
        let earliest = self::earliest_aligned_token(path, start_word);
        let token_index = earliest.ok_or_else(|| {
            AlignError::PathMismatch(format!(
                "no path step aligns dialogue word {start_word}"
            ))
        })?;
        turn_start_ms.push(segment.tokens[token_index].start_ms);
    }

    let frame_timestamps_ms = turn_start_ms.clone();
    Ok(AlignedDialogue {
        dialogue: dialogue.clone(),
        turn_start_ms,
        frame_timestamps_ms,
    })
}

// The path is sorted by construction, so the first step touching the word
// has the smallest transcript index, and tokens are sorted by start time.
fn earliest_aligned_token(path: &AlignmentPath, dialogue_word: usize) -> Option<usize> {
    path.steps
        .iter()
        .find(|&&(_, j)| j == dialogue_word)
        .map(|&(i, _)| i)
}

/// One frame-extraction job per turn, ordered by turn index.
pub fn emit_frame_jobs(aligned: &AlignedDialogue, video_id: &str) -> Vec<FrameJob> {
    aligned
        .frame_timestamps_ms
        .iter()
        .enumerate()
        .map(|(turn_index, &timestamp_ms)| FrameJob {
            video_id: video_id.to_string(),
            timestamp_ms,
            turn_index,
        })
        .collect()
}
