//! Pipeline configuration: stage parameters, endpoints, and the offline
//! switch. Loaded from a JSON file; every field has a default, so `{}` is a
//! valid offline-less config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::example::FrameSelection;
use crate::filter::{SafetyScores, DEFAULT_LANGUAGE_THRESHOLD, DEFAULT_VISUAL_VARIATION_FRACTION};
use crate::remote::Endpoint;
use crate::segment::{
    DEFAULT_MAX_WORDS, DEFAULT_MIN_WORDS, DEFAULT_STRIDE_MS, DEFAULT_WINDOW_MS, MAX_TIMELINE_MS,
};
use crate::transcript::TranscriptFormat;

use super::PipelineError;

/// Stub-scorer lexicons, overridable per label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StubLexicons {
    pub abuse: Vec<String>,
    pub hate: Vec<String>,
    pub sexual: Vec<String>,
}

impl Default for StubLexicons {
    fn default() -> Self {
        let stub = crate::filter::StubScorer::default();
        StubLexicons {
            abuse: stub.abuse_lexicon,
            hate: stub.hate_lexicon,
            sexual: stub.sexual_lexicon,
        }
    }
}

/// Input file format for the `run` and `segment` stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// One JSON video record per line.
    #[default]
    TimedJson,
    /// One WebVTT-style file per video.
    CaptionCue,
}

impl From<InputFormat> for TranscriptFormat {
    fn from(f: InputFormat) -> TranscriptFormat {
        match f {
            InputFormat::TimedJson => TranscriptFormat::TimedJson,
            InputFormat::CaptionCue => TranscriptFormat::CaptionCue,
        }
    }
}

// unknown keys are config typos, not forward compatibility
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub window_ms: u64,
    pub stride_ms: u64,
    pub min_words: usize,
    pub max_words: usize,
    pub language_threshold: f64,
    pub safety_thresholds: SafetyScores,
    pub visual_variation_fraction: f64,
    pub pause_gap_ms: u64,
    pub frame_selection: FrameSelection,
    pub input_format: InputFormat,
    /// Use the bundled stub scorer and fallback converter instead of the
    /// remote endpoints.
    pub offline: bool,
    pub scorer_endpoint: Option<Endpoint>,
    pub converter_endpoint: Option<Endpoint>,
    pub stub_lexicons: StubLexicons,
    pub records_per_shard: usize,
    /// Worker threads; 0 means one per core. Also caps in-flight remote
    /// calls, since each worker issues at most one at a time.
    pub workers: usize,
    pub dataset_version: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_ms: DEFAULT_WINDOW_MS,
            stride_ms: DEFAULT_STRIDE_MS,
            min_words: DEFAULT_MIN_WORDS,
            max_words: DEFAULT_MAX_WORDS,
            language_threshold: DEFAULT_LANGUAGE_THRESHOLD,
            safety_thresholds: SafetyScores::default_thresholds(),
            visual_variation_fraction: DEFAULT_VISUAL_VARIATION_FRACTION,
            pause_gap_ms: crate::convert::DEFAULT_PAUSE_GAP_MS,
            frame_selection: FrameSelection::default(),
            input_format: InputFormat::default(),
            offline: false,
            scorer_endpoint: None,
            converter_endpoint: None,
            stub_lexicons: StubLexicons::default(),
            records_per_shard: 10_000,
            workers: 0,
            dataset_version: "1".into(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let raw = std::fs::read(path).map_err(|e| {
            PipelineError::ConfigInvalid(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json_bytes(&raw).map_err(|e| match e {
            PipelineError::ConfigInvalid(msg) => {
                PipelineError::ConfigInvalid(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    /// Parse and validate a JSON config document.
    pub fn from_json_bytes(raw: &[u8]) -> Result<Self, PipelineError> {
        let config: PipelineConfig = serde_json::from_slice(raw)
            .map_err(|e| PipelineError::ConfigInvalid(format!("cannot parse config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let invalid = |msg: String| Err(PipelineError::ConfigInvalid(msg));
        if self.window_ms == 0 || self.window_ms > MAX_TIMELINE_MS {
            return invalid(format!(
                "window_ms must be in 1..={MAX_TIMELINE_MS}, got {}",
                self.window_ms
            ));
        }
        if self.stride_ms == 0 || self.stride_ms > MAX_TIMELINE_MS {
            return invalid(format!(
                "stride_ms must be in 1..={MAX_TIMELINE_MS}, got {}",
                self.stride_ms
            ));
        }
        if self.workers > 1024 {
            return invalid(format!("workers must be at most 1024, got {}", self.workers));
        }
        if self.min_words > self.max_words {
            return invalid(format!(
                "min_words {} exceeds max_words {}",
                self.min_words, self.max_words
            ));
        }
        if !(0.0..=1.0).contains(&self.language_threshold) {
            return invalid(format!(
                "language_threshold {} outside [0, 1]",
                self.language_threshold
            ));
        }
        if !self.safety_thresholds.in_range() {
            return invalid(format!(
                "safety_thresholds outside [0, 1]: {:?}",
                self.safety_thresholds
            ));
        }
        if !(0.0..=1.0).contains(&self.visual_variation_fraction) {
            return invalid(format!(
                "visual_variation_fraction {} outside [0, 1]",
                self.visual_variation_fraction
            ));
        }
        if self.records_per_shard == 0 {
            return invalid("records_per_shard must be positive".into());
        }
        if !self.offline {
            if self.scorer_endpoint.is_none() {
                return invalid("scorer_endpoint is required unless offline is set".into());
            }
            if self.converter_endpoint.is_none() {
                return invalid("converter_endpoint is required unless offline is set".into());
            }
        }
        Ok(())
    }
}
