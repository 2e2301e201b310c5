//! Language, visual-variation, and safety filters.
//!
//! Gates are pure predicates over their inputs and can run in any order
//! without changing the kept set. The safety scorer is remote (a
//! `{"text"} -> {"abuse", "hate", "sexual"}` JSON endpoint); a
//! deterministic lexicon stub stands in when running offline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::remote::{post_json, Endpoint, RemoteError};
use crate::transcript::VideoMeta;

/// Keep threshold for the English-language probability gate.
pub const DEFAULT_LANGUAGE_THRESHOLD: f64 = 0.80;
/// Rejection threshold for the abuse label.
pub const DEFAULT_ABUSE_THRESHOLD: f64 = 0.99534;
/// Rejection threshold for the hate label.
pub const DEFAULT_HATE_THRESHOLD: f64 = 0.83790;
/// Rejection threshold for the sexually-explicit label.
pub const DEFAULT_SEXUAL_THRESHOLD: f64 = 0.99562;
/// Minimum mean consecutive-frame Hamming distance, as a fraction of the
/// signature length, below which a video counts as visually static.
pub const DEFAULT_VISUAL_VARIATION_FRACTION: f64 = 0.02;

/// Toxicity scores (or rejection thresholds) per label, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyScores {
    pub abuse: f64,
    pub hate: f64,
    pub sexual: f64,
}

impl SafetyScores {
    pub fn new(abuse: f64, hate: f64, sexual: f64) -> Self {
        SafetyScores {
            abuse,
            hate,
            sexual,
        }
    }

    /// The label thresholds the corpus was originally filtered with.
    pub fn default_thresholds() -> Self {
        SafetyScores {
            abuse: DEFAULT_ABUSE_THRESHOLD,
            hate: DEFAULT_HATE_THRESHOLD,
            sexual: DEFAULT_SEXUAL_THRESHOLD,
        }
    }

    pub fn in_range(&self) -> bool {
        [self.abuse, self.hate, self.sexual]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    }
}

/// Which filter produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterStage {
    Language,
    Visual,
    Safety,
}

/// Outcome of one gate; `detail` is non-empty whenever `kept` is false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub kept: bool,
    pub stage: FilterStage,
    pub detail: String,
}

impl FilterDecision {
    fn keep(stage: FilterStage) -> Self {
        FilterDecision {
            kept: true,
            stage,
            detail: String::new(),
        }
    }

    fn reject(stage: FilterStage, detail: impl Into<String>) -> Self {
        FilterDecision {
            kept: false,
            stage,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("insufficient frames: visual variation needs at least 2 signatures, got {0}")]
    InsufficientFrames(usize),
    #[error("frame signatures differ in length: {0} vs {1} bytes")]
    SignatureLengthMismatch(usize, usize),
    #[error("invalid frame signature hex: {0}")]
    BadSignatureHex(String),
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("rate limited; retry after {retry_after_ms} ms")]
    RateLimited { retry_after_ms: u64 },
}

impl From<RemoteError> for FilterError {
    fn from(e: RemoteError) -> Self {
        match e {
            RemoteError::Unreachable(msg) => FilterError::EndpointUnreachable(msg),
            RemoteError::MalformedResponse(msg) => FilterError::MalformedResponse(msg),
            RemoteError::RateLimited { retry_after_ms, .. } => {
                FilterError::RateLimited { retry_after_ms }
            }
        }
    }
}

/// Keep a video iff its English probability reaches the threshold (videos
/// strictly below are rejected).
pub fn language_gate(meta: &VideoMeta, threshold: f64) -> FilterDecision {
    if meta.language_prob_en >= threshold {
        FilterDecision::keep(FilterStage::Language)
    } else {
        FilterDecision::reject(
            FilterStage::Language,
            format!(
                "language_prob_en {} below {threshold}",
                meta.language_prob_en
            ),
        )
    }
}

/// Reject iff any label score reaches its threshold; the detail names every
/// triggering label.
pub fn safety_gate(scores: &SafetyScores, thresholds: &SafetyScores) -> FilterDecision {
    let mut triggered = Vec::new();
    if scores.abuse >= thresholds.abuse {
        triggered.push("abuse");
    }
    if scores.hate >= thresholds.hate {
        triggered.push("hate");
    }
    if scores.sexual >= thresholds.sexual {
        triggered.push("sexual");
    }
    if triggered.is_empty() {
        FilterDecision::keep(FilterStage::Safety)
    } else {
        FilterDecision::reject(FilterStage::Safety, triggered.join(","))
    }
}

/// A fixed-length per-frame bit signature (e.g. a perceptual hash).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSignature(pub Vec<u8>);

impl FrameSignature {
    pub fn from_hex(hex_str: &str) -> Result<Self, FilterError> {
        hex::decode(hex_str.trim())
            .map(FrameSignature)
            .map_err(|e| FilterError::BadSignatureHex(format!("{hex_str:?}: {e}")))
    }

    pub fn bit_len(&self) -> usize {
        self.0.len() * 8
    }

    pub fn hamming(&self, other: &FrameSignature) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }
}

/// Reject a video as visually static when the mean Hamming distance
/// between consecutive frame signatures falls below `min_fraction` of the
/// signature length.
pub fn visual_variation_gate(
    signatures: &[FrameSignature],
    min_fraction: f64,
) -> Result<FilterDecision, FilterError> {
    if signatures.len() < 2 {
        return Err(FilterError::InsufficientFrames(signatures.len()));
    }
    let bit_len = signatures[0].bit_len();
    for sig in &signatures[1..] {
        if sig.bit_len() != bit_len {
            return Err(FilterError::SignatureLengthMismatch(
                signatures[0].0.len(),
                sig.0.len(),
            ));
        }
    }
    let total: usize = signatures
        .windows(2)
        .map(|pair| pair[0].hamming(&pair[1]))
        .sum();
    let mean = total as f64 / (signatures.len() - 1) as f64;
    let fraction = mean / bit_len as f64;
    if fraction < min_fraction {
        Ok(FilterDecision::reject(
            FilterStage::Visual,
            format!("mean frame distance {fraction:.5} below {min_fraction}"),
        ))
    } else {
        Ok(FilterDecision::keep(FilterStage::Visual))
    }
}

/// A toxicity scorer for segment transcripts.
pub trait SafetyScorer: Sync {
    fn score(&self, text: &str) -> Result<SafetyScores, FilterError>;
}

/// Wire request/response of the remote scorer.
#[derive(Debug, Serialize)]
struct ScorerRequest<'a> {
    text: &'a str,
}

/// Decode and range-check a raw scorer response body.
pub fn decode_scorer_response(raw: &[u8]) -> Result<SafetyScores, FilterError> {
    let scores: SafetyScores = serde_json::from_slice(raw)
        .map_err(|e| FilterError::MalformedResponse(e.to_string()))?;
    if !scores.in_range() {
        return Err(FilterError::MalformedResponse(format!(
            "scores outside [0, 1]: {scores:?}"
        )));
    }
    Ok(scores)
}

/// Remote scorer speaking the `{"text"} -> {"abuse","hate","sexual"}`
/// protocol.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    pub endpoint: Endpoint,
}

impl SafetyScorer for RemoteScorer {
    fn score(&self, text: &str) -> Result<SafetyScores, FilterError> {
        let scores: SafetyScores = post_json(&self.endpoint, &ScorerRequest { text })?;
        if !scores.in_range() {
            return Err(FilterError::MalformedResponse(format!(
                "scores outside [0, 1]: {scores:?}"
            )));
        }
        Ok(scores)
    }
}

/// Deterministic offline scorer: a word of the text matching a seeded
/// lexicon entry (case-folded) drives that label's score to 1.0; everything
/// else scores 0.0.
#[derive(Debug, Clone)]
pub struct StubScorer {
    pub abuse_lexicon: Vec<String>,
    pub hate_lexicon: Vec<String>,
    pub sexual_lexicon: Vec<String>,
}

impl Default for StubScorer {
    fn default() -> Self {
        StubScorer {
            abuse_lexicon: vec!["unsafe-abuse-marker".into()],
            hate_lexicon: vec!["unsafe-hate-marker".into()],
            sexual_lexicon: vec!["unsafe-sexual-marker".into()],
        }
    }
}

impl SafetyScorer for StubScorer {
    fn score(&self, text: &str) -> Result<SafetyScores, FilterError> {
        let words: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
        let hit = |lexicon: &[String]| {
            words
                .iter()
                .any(|w| lexicon.iter().any(|entry| w == &entry.to_lowercase()))
        };
        Ok(SafetyScores {
            abuse: if hit(&self.abuse_lexicon) { 1.0 } else { 0.0 },
            hate: if hit(&self.hate_lexicon) { 1.0 } else { 0.0 },
            sexual: if hit(&self.sexual_lexicon) { 1.0 } else { 0.0 },
        })
    }
}

/// Score a segment transcript with the configured scorer.
pub fn fetch_safety_scores(
    text: &str,
    scorer: &dyn SafetyScorer,
) -> Result<SafetyScores, FilterError> {
    scorer.score(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::spawn_http_fixture;

    fn meta_with_prob(p: f64) -> VideoMeta {
        VideoMeta {
            video_id: "v".into(),
            title: "t".into(),
            duration_ms: None,
            language_prob_en: p,
            thumbnail_has_objects: None,
            frame_signatures_hex: Vec::new(),
        }
    }

    #[test]
    fn language_gate_boundary() {
        assert!(!language_gate(&meta_with_prob(0.79), DEFAULT_LANGUAGE_THRESHOLD).kept);
        assert!(language_gate(&meta_with_prob(0.80), DEFAULT_LANGUAGE_THRESHOLD).kept);
        assert!(language_gate(&meta_with_prob(1.0), DEFAULT_LANGUAGE_THRESHOLD).kept);
    }

    #[test]
    fn language_rejection_carries_detail() {
        let decision = language_gate(&meta_with_prob(0.5), 0.8);
        assert!(!decision.kept);
        assert!(!decision.detail.is_empty());
        assert_eq!(decision.stage, FilterStage::Language);
    }

    #[test]
    fn safety_gate_rejects_at_and_above_threshold() {
        let thresholds = SafetyScores::default_thresholds();
        assert!(safety_gate(&SafetyScores::new(0.0, 0.0, 0.0), &thresholds).kept);
        let decision = safety_gate(&SafetyScores::new(0.9960, 0.0, 0.0), &thresholds);
        assert!(!decision.kept);
        assert_eq!(decision.detail, "abuse");
        // abuse sits just under its threshold, hate exactly on it
        let decision = safety_gate(&SafetyScores::new(0.99533, 0.83790, 0.0), &thresholds);
        assert!(!decision.kept);
        assert_eq!(decision.detail, "hate");
    }

    #[test]
    fn safety_gate_names_all_triggering_labels() {
        let thresholds = SafetyScores::default_thresholds();
        let decision = safety_gate(&SafetyScores::new(1.0, 1.0, 0.0), &thresholds);
        assert_eq!(decision.detail, "abuse,hate");
    }

    #[test]
    fn identical_signatures_are_rejected() {
        let sigs = vec![FrameSignature(vec![0u8; 8]); 4];
        let decision =
            visual_variation_gate(&sigs, DEFAULT_VISUAL_VARIATION_FRACTION).unwrap();
        assert!(!decision.kept);
    }

    #[test]
    fn alternating_extremes_are_kept() {
        let sigs = vec![
            FrameSignature(vec![0x00; 8]),
            FrameSignature(vec![0xFF; 8]),
            FrameSignature(vec![0x00; 8]),
        ];
        let decision =
            visual_variation_gate(&sigs, DEFAULT_VISUAL_VARIATION_FRACTION).unwrap();
        assert!(decision.kept);
    }

    #[test]
    fn mean_distance_just_over_threshold_keeps() {
        // consecutive distances 1 and 3 over 64-bit signatures:
        // mean 2/64 = 0.03125 >= 0.02
        let a = FrameSignature(vec![0, 0, 0, 0, 0, 0, 0, 0]);
        let b = FrameSignature(vec![1, 0, 0, 0, 0, 0, 0, 0]);
        let c = FrameSignature(vec![1, 7, 0, 0, 0, 0, 0, 0]);
        assert_eq!(a.hamming(&b), 1);
        assert_eq!(b.hamming(&c), 3);
        let decision = visual_variation_gate(&[a, b, c], 0.02).unwrap();
        assert!(decision.kept);
    }

    #[test]
    fn single_signature_is_insufficient() {
        let sigs = vec![FrameSignature(vec![0u8; 8])];
        assert!(matches!(
            visual_variation_gate(&sigs, 0.02),
            Err(FilterError::InsufficientFrames(1))
        ));
    }

    #[test]
    fn stub_scorer_contract() {
        let stub = StubScorer::default();
        let clean = stub.score("just a pleasant chat about cooking").unwrap();
        assert_eq!(clean, SafetyScores::new(0.0, 0.0, 0.0));
        let flagged = stub.score("this has unsafe-abuse-marker inside").unwrap();
        assert_eq!(flagged, SafetyScores::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn remote_scores_pass_through_unchanged() {
        let body = r#"{"abuse":0.5,"hate":0.25,"sexual":0.125}"#;
        let (addr, handle) = spawn_http_fixture(vec![format!(
            "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{}",
            body.len(),
            body
        )]);
        let scorer = RemoteScorer {
            endpoint: Endpoint::new(format!("http://{addr}/")),
        };
        let scores = fetch_safety_scores("some words", &scorer).unwrap();
        assert_eq!(scores, SafetyScores::new(0.5, 0.25, 0.125));
        let sent = handle.join().unwrap();
        assert!(sent[0].contains("\"text\":\"some words\""));
    }

    #[test]
    fn out_of_range_scores_are_malformed() {
        assert!(matches!(
            decode_scorer_response(br#"{"abuse":1.5,"hate":0,"sexual":0}"#),
            Err(FilterError::MalformedResponse(_))
        ));
    }

    #[test]
    fn gates_are_pure_and_order_independent() {
        let metas: Vec<VideoMeta> = (0..20)
            .map(|i| meta_with_prob(i as f64 / 19.0))
            .collect();
        let scores: Vec<SafetyScores> = (0..20)
            .map(|i| SafetyScores::new(i as f64 / 19.0, 0.0, 0.0))
            .collect();
        let thresholds = SafetyScores::default_thresholds();
        // language-then-safety equals safety-then-language
        let kept_a: Vec<usize> = (0..20)
            .filter(|&i| language_gate(&metas[i], 0.8).kept)
            .filter(|&i| safety_gate(&scores[i], &thresholds).kept)
            .collect();
        let kept_b: Vec<usize> = (0..20)
            .filter(|&i| safety_gate(&scores[i], &thresholds).kept)
            .filter(|&i| language_gate(&metas[i], 0.8).kept)
            .collect();
        assert_eq!(kept_a, kept_b);
    }

    #[test]
    fn raising_thresholds_never_rejects_a_kept_segment() {
        // monotonicity over a deterministic sweep of score/threshold pairs
        for i in 0..25 {
            let score = i as f64 / 24.0;
            let scores = SafetyScores::new(score, score / 2.0, score / 3.0);
            for j in 0..25 {
                let t = j as f64 / 24.0;
                let low = SafetyScores::new(t, t, t);
                let high = SafetyScores::new(
                    (t + 0.1).min(1.0),
                    (t + 0.2).min(1.0),
                    (t + 0.05).min(1.0),
                );
                if safety_gate(&scores, &low).kept {
                    assert!(safety_gate(&scores, &high).kept);
                }
            }
        }
    }
}
