//! Training-example construction and benchmark input templating.
//!
//! An aligned dialogue with turns `T1..Tn` yields one next-turn-prediction
//! example per target `Tk` (k >= 2): the context is `T1..Tk-1`, the prompt
//! is the video title, and the frame references cover the most recent
//! context turns, capped at three frames per example.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::AlignedDialogue;
use crate::convert::DialogueTurn;

/// Maximum frame references attached to one training example.
pub const MAX_FRAME_REFS: usize = 3;

/// Reserved separator preceding each dialogue turn in formatted inputs.
pub const TURN_SEPARATOR: &str = "<extra_id_0>";
/// Reserved separator preceding the meta text in formatted inputs.
pub const META_SEPARATOR: &str = "<extra_id_1>";

/// Reference to the frame extracted for a context turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRef {
    pub timestamp_ms: u64,
    pub turn_index: usize,
}

/// One next-turn-prediction example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub video_id: String,
    pub prompt: String,
    pub context: Vec<DialogueTurn>,
    pub frame_refs: Vec<FrameRef>,
    pub target: DialogueTurn,
}

/// Which context turns contribute frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameSelection {
    /// Frames of the three most recent context turns.
    #[default]
    LastThreeContext,
    /// Frames of the first three context turns.
    FirstThree,
}

#[derive(Debug, Error)]
pub enum ExampleError {
    #[error("too few turns: dialogue has {0}, need at least 2")]
    TooFewTurns(usize),
    #[error("aligned dialogue has {turns} turns but {timestamps} timestamps")]
    TimestampMismatch { turns: usize, timestamps: usize },
}

/// Build every next-turn example an aligned dialogue admits.
pub fn build_examples(
    aligned: &AlignedDialogue,
    video_id: &str,
    title: &str,
    selection: FrameSelection,
) -> Result<Vec<TrainingExample>, ExampleError> {
    let turns = &aligned.dialogue.turns;
    if turns.len() < 2 {
        return Err(ExampleError::TooFewTurns(turns.len()));
    }
    if aligned.frame_timestamps_ms.len() != turns.len() {
        return Err(ExampleError::TimestampMismatch {
            turns: turns.len(),
            timestamps: aligned.frame_timestamps_ms.len(),
        });
    }
    let mut examples = Vec::with_capacity(turns.len() - 1);
    for target_index in 1..turns.len() {
        let context = turns[..target_index].to_vec();
        let frame_turns = match selection {
            FrameSelection::LastThreeContext => {
                target_index.saturating_sub(MAX_FRAME_REFS)..target_index
            }
            FrameSelection::FirstThree => 0..target_index.min(MAX_FRAME_REFS),
        };
        let frame_refs = frame_turns
            .map(|turn_index| FrameRef {
                timestamp_ms: aligned.frame_timestamps_ms[turn_index],
                turn_index,
            })
            .collect();
        examples.push(TrainingExample {
            video_id: video_id.to_string(),
            prompt: title.to_string(),
            context,
            frame_refs,
            target: turns[target_index].clone(),
        });
    }
    Ok(examples)
}

/// Input template family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputTemplate {
    /// `<extra_id_1> {meta} <extra_id_0> {turn} ...`
    Dialogue,
    /// Same layout with `Conversation with {style} person` as the meta.
    StyledChat,
}

/// Render a formatted model input. The meta (or style) text and turns are
/// substituted verbatim between the reserved separators.
pub fn format_input(meta: &str, turns: &[DialogueTurn], template: InputTemplate) -> String {
    let meta_text = match template {
        InputTemplate::Dialogue => meta.to_string(),
        InputTemplate::StyledChat => format!("Conversation with {meta} person"),
    };
    let mut out = format!("{META_SEPARATOR} {meta_text}");
    for turn in turns {
        out.push(' ');
        out.push_str(TURN_SEPARATOR);
        out.push(' ');
        out.push_str(&turn.text);
    }
    out
}

/// True when a text contains a reserved separator and would make formatted
/// inputs ambiguous. Callers validate meta and turn texts with this before
/// formatting.
pub fn contains_reserved_separator(text: &str) -> bool {
    text.contains(TURN_SEPARATOR) || text.contains(META_SEPARATOR)
}
