//! Wire records for the stage boundaries (all JSONL, one record per line).

use serde::{Deserialize, Serialize};

use crate::align::AlignedDialogue;
use crate::convert::{Dialogue, DialogueTurn};

/// A dialogue with enough provenance to re-join its source segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub video_id: String,
    pub segment_id: String,
    pub turns: Vec<DialogueTurn>,
}

impl DialogueRecord {
    pub fn from_dialogue(video_id: &str, dialogue: &Dialogue) -> Self {
        DialogueRecord {
            video_id: video_id.to_string(),
            segment_id: dialogue.source_segment_id.clone(),
            turns: dialogue.turns.clone(),
        }
    }

    pub fn into_dialogue(self) -> Dialogue {
        Dialogue {
            turns: self.turns,
            source_segment_id: self.segment_id,
        }
    }
}

/// An aligned dialogue plus the provenance the example builder needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedRecord {
    pub video_id: String,
    pub segment_id: String,
    #[serde(default)]
    pub title: String,
    pub turns: Vec<DialogueTurn>,
    pub turn_start_ms: Vec<u64>,
    pub frame_timestamps_ms: Vec<u64>,
}

impl AlignedRecord {
    pub fn from_aligned(video_id: &str, title: &str, aligned: &AlignedDialogue) -> Self {
        AlignedRecord {
            video_id: video_id.to_string(),
            segment_id: aligned.dialogue.source_segment_id.clone(),
            title: title.to_string(),
            turns: aligned.dialogue.turns.clone(),
            turn_start_ms: aligned.turn_start_ms.clone(),
            frame_timestamps_ms: aligned.frame_timestamps_ms.clone(),
        }
    }

    pub fn to_aligned(&self) -> AlignedDialogue {
        AlignedDialogue {
            dialogue: Dialogue {
                turns: self.turns.clone(),
                source_segment_id: self.segment_id.clone(),
            },
            turn_start_ms: self.turn_start_ms.clone(),
            frame_timestamps_ms: self.frame_timestamps_ms.clone(),
        }
    }
}

/// One audited rejection; `id` names the video or segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionRecord {
    pub id: String,
    pub stage: String,
    pub reason: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}
