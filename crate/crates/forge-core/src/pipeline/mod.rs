//! End-to-end batch orchestration over sharded corpora.
//!
//! Stage order: language -> visual -> segment -> word gates -> safety ->
//! convert -> align -> build examples. Cheap metadata gates run first;
//! remote calls only happen for segments that survive them. Every input
//! record ends up either kept or rejected with a machine-readable reason,
//! and runs are deterministic given the config, inputs, and offline stubs.
//!
//! Videos are independent work units (one video never spans workers); the
//! only cross-video state is the statistics accumulator, which is merged
//! at finalization.

pub mod config;
pub mod manifest;
pub mod records;
pub mod shard;

use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{dtw_align, emit_frame_jobs, estimate_turn_times, FrameJob};
use crate::convert::{
    convert, ConvertError, Converter, FallbackConverter, RemoteConverter,
};
use crate::example::{
    build_examples, contains_reserved_separator, ExampleError, TrainingExample,
};
use crate::filter::{
    fetch_safety_scores, language_gate, safety_gate, visual_variation_gate, FilterError,
    FrameSignature, SafetyScorer, StubScorer,
};
use crate::metrics::{merge_stats, CorpusStats, StatsAccumulator};
use crate::segment::{gate_word_count, segment_transcript, WordGateReason};
use crate::transcript::{parse_transcript_with_fallback_id, TimedTranscript, TranscriptFormat};

pub use config::{InputFormat, PipelineConfig, StubLexicons};
pub use manifest::{write_manifest, Manifest, ManifestEntry, ShardLocation};
pub use records::{AlignedRecord, DialogueRecord, RejectionRecord};
pub use shard::{write_if_changed, write_video_sharded, ShardSet, VideoLocation};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config invalid: {0}")]
    ConfigInvalid(String),
    #[error("io failure at {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },
}

impl PipelineError {
    pub fn io(path: &Path, e: io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

/// Video-level counters. `input` covers every input record once:
/// `malformed + duplicate + rejected_language + rejected_visual + processed`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoCounts {
    pub input: u64,
    pub malformed: u64,
    pub duplicate: u64,
    pub rejected_language: u64,
    pub rejected_visual: u64,
    pub processed: u64,
}

/// Segment-level counters. `created` splits into the rejection buckets
/// plus `kept`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentCounts {
    pub created: u64,
    pub rejected_too_short: u64,
    pub rejected_too_long: u64,
    pub rejected_safety: u64,
    pub rejected_converter: u64,
    pub rejected_aligner: u64,
    pub failed_remote: u64,
    pub kept: u64,
}

impl SegmentCounts {
    fn add(&mut self, other: &SegmentCounts) {
        self.created += other.created;
        self.rejected_too_short += other.rejected_too_short;
        self.rejected_too_long += other.rejected_too_long;
        self.rejected_safety += other.rejected_safety;
        self.rejected_converter += other.rejected_converter;
        self.rejected_aligner += other.rejected_aligner;
        self.failed_remote += other.failed_remote;
        self.kept += other.kept;
    }
}

/// The run report: stage counts, output locations, and any infrastructure
/// failures. All paths are relative to the output root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub videos: VideoCounts,
    pub segments: SegmentCounts,
    pub dialogues_without_examples: u64,
    pub examples_built: u64,
    pub frame_jobs: u64,
    pub corpus_stats: CorpusStats,
    pub dialogue_shards: Vec<String>,
    pub example_shards: Vec<String>,
    pub manifest_path: String,
    pub rejections_path: String,
    pub frame_jobs_path: String,
    pub failures: Vec<RejectionRecord>,
}

impl RunReport {
    /// Conservation check: every record accounted for exactly once.
    pub fn conserved(&self) -> bool {
        let v = &self.videos;
        let s = &self.segments;
        v.input
            == v.malformed + v.duplicate + v.rejected_language + v.rejected_visual + v.processed
            && s.created
                == s.rejected_too_short
                    + s.rejected_too_long
                    + s.rejected_safety
                    + s.rejected_converter
                    + s.rejected_aligner
                    + s.failed_remote
                    + s.kept
    }
}

struct KeptDialogue {
    record: AlignedRecord,
    examples: Vec<TrainingExample>,
    frame_jobs: Vec<FrameJob>,
}

#[derive(Default)]
struct VideoOutcome {
    rejections: Vec<RejectionRecord>,
    failures: Vec<RejectionRecord>,
    kept: Vec<KeptDialogue>,
    segments: SegmentCounts,
    rejected_language: bool,
    rejected_visual: bool,
    without_examples: u64,
    stats: StatsAccumulator,
}

impl VideoOutcome {
    fn reject(&mut self, id: &str, stage: &str, reason: &str, detail: String) {
        self.rejections.push(RejectionRecord {
            id: id.to_string(),
            stage: stage.to_string(),
            reason: reason.to_string(),
            detail,
        });
    }

    fn fail(&mut self, id: &str, stage: &str, reason: &str, detail: String) {
        let record = RejectionRecord {
            id: id.to_string(),
            stage: stage.to_string(),
            reason: reason.to_string(),
            detail,
        };
        self.failures.push(record.clone());
        self.rejections.push(record);
    }
}

/// Run the whole pipeline over the given transcript inputs, writing shards,
/// the frame-job list, the rejection audit, the manifest, and the run
/// report under `out_root`.
pub fn run_pipeline(
    config: &PipelineConfig,
    inputs: &[PathBuf],
    out_root: &Path,
) -> Result<RunReport, PipelineError> {
    config.validate()?;
    std::fs::create_dir_all(out_root).map_err(|e| PipelineError::io(out_root, e))?;

    let scorer: Box<dyn SafetyScorer> = if config.offline {
        Box::new(StubScorer {
            abuse_lexicon: config.stub_lexicons.abuse.clone(),
            hate_lexicon: config.stub_lexicons.hate.clone(),
            sexual_lexicon: config.stub_lexicons.sexual.clone(),
        })
    } else {
        Box::new(crate::filter::RemoteScorer {
            endpoint: config.scorer_endpoint.clone().expect("validated"),
        })
    };
    let converter: Box<dyn Converter> = if config.offline {
        Box::new(FallbackConverter {
            pause_gap_ms: config.pause_gap_ms,
        })
    } else {
        Box::new(RemoteConverter {
            endpoint: config.converter_endpoint.clone().expect("validated"),
        })
    };

    // Read and parse every input record up front, in input order.
    let parsed = read_inputs(config, inputs)?;

    let mut report_videos = VideoCounts::default();
    let mut ordered: Vec<ParsedInput> = Vec::with_capacity(parsed.len());
    let mut seen_ids = std::collections::BTreeSet::new();
    for (source_id, result) in parsed {
        report_videos.input += 1;
        match result {
            Err(e) => {
                report_videos.malformed += 1;
                ordered.push(ParsedInput::Rejected(RejectionRecord {
                    id: source_id,
                    stage: "ingest".into(),
                    reason: "malformed-input".into(),
                    detail: e.to_string(),
                }));
            }
            Ok(t) => {
                if !seen_ids.insert(t.meta.video_id.clone()) {
                    report_videos.duplicate += 1;
                    ordered.push(ParsedInput::Rejected(RejectionRecord {
                        id: source_id,
                        stage: "ingest".into(),
                        reason: "duplicate-video-id".into(),
                        detail: t.meta.video_id.clone(),
                    }));
                } else {
                    ordered.push(ParsedInput::Video(Box::new(t)));
                }
            }
        }
    }

    // Videos are independent; process them in parallel and restore input
    // order afterwards.
    let process = |t: &TimedTranscript| process_video(config, scorer.as_ref(), converter.as_ref(), t);
    let run = || -> Vec<Option<VideoOutcome>> {
        ordered
            .par_iter()
            .map(|input| match input {
                ParsedInput::Video(t) => Some(process(t)),
                ParsedInput::Rejected(_) => None,
            })
            .collect()
    };
    let outcomes: Vec<Option<VideoOutcome>> = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| PipelineError::ConfigInvalid(format!("worker pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    };

    // Aggregate in input order.
    let mut segments = SegmentCounts::default();
    let mut rejections: Vec<RejectionRecord> = Vec::new();
    let mut failures: Vec<RejectionRecord> = Vec::new();
    let mut stats = StatsAccumulator::default();
    let mut without_examples = 0u64;
    let mut dialogue_lines: Vec<(String, Vec<String>)> = Vec::new();
    let mut example_lines: Vec<(String, Vec<String>)> = Vec::new();
    let mut frame_job_lines: Vec<String> = Vec::new();
    let mut examples_built = 0u64;
    let mut frame_jobs_count = 0u64;

    for (input, outcome) in ordered.iter().zip(outcomes) {
        match (input, outcome) {
            (ParsedInput::Rejected(rec), _) => rejections.push(rec.clone()),
            (ParsedInput::Video(t), Some(outcome)) => {
                if outcome.rejected_language {
                    report_videos.rejected_language += 1;
                } else if outcome.rejected_visual {
                    report_videos.rejected_visual += 1;
                } else {
                    report_videos.processed += 1;
                }
                segments.add(&outcome.segments);
                without_examples += outcome.without_examples;
                stats = merge_stats(stats, outcome.stats);
                rejections.extend(outcome.rejections);
                failures.extend(outcome.failures);
                let video_id = &t.meta.video_id;
                let mut d_lines = Vec::new();
                let mut e_lines = Vec::new();
                for kept in outcome.kept {
                    d_lines.push(to_line(&kept.record));
                    for example in &kept.examples {
                        e_lines.push(to_line(example));
                        examples_built += 1;
                    }
                    for job in &kept.frame_jobs {
                        frame_job_lines.push(to_line(job));
                        frame_jobs_count += 1;
                    }
                }
                dialogue_lines.push((video_id.clone(), d_lines));
                example_lines.push((video_id.clone(), e_lines));
            }
            (ParsedInput::Video(_), None) => unreachable!("videos always produce outcomes"),
        }
    }

    let dialogue_set =
        write_video_sharded(out_root, "dialogues", &dialogue_lines, config.records_per_shard)?;
    let example_set =
        write_video_sharded(out_root, "examples", &example_lines, config.records_per_shard)?;

    write_lines(&out_root.join("frame_jobs.jsonl"), &frame_job_lines)?;
    let rejection_lines: Vec<String> = rejections.iter().map(to_line).collect();
    write_lines(&out_root.join("rejections.jsonl"), &rejection_lines)?;

    let manifest = Manifest::build(&config.dataset_version, dialogue_set.locations.clone());
    write_manifest(&manifest, &out_root.join("manifest.json"))?;

    let report = RunReport {
        videos: report_videos,
        segments,
        dialogues_without_examples: without_examples,
        examples_built,
        frame_jobs: frame_jobs_count,
        corpus_stats: stats.finalize(),
        dialogue_shards: dialogue_set.shards,
        example_shards: example_set.shards,
        manifest_path: "manifest.json".into(),
        rejections_path: "rejections.jsonl".into(),
        frame_jobs_path: "frame_jobs.jsonl".into(),
        failures,
    };
    debug_assert!(report.conserved());
    let mut report_json =
        serde_json::to_string_pretty(&report).expect("report serializes");
    report_json.push('\n');
    write_if_changed(&out_root.join("report.json"), report_json.as_bytes())?;
    Ok(report)
}

enum ParsedInput {
    Video(Box<TimedTranscript>),
    Rejected(RejectionRecord),
}

type ParseResult = (String, Result<TimedTranscript, crate::transcript::TranscriptError>);

fn read_inputs(
    config: &PipelineConfig,
    inputs: &[PathBuf],
) -> Result<Vec<ParseResult>, PipelineError> {
    let mut out = Vec::new();
    for path in inputs {
        let raw = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
        match config.input_format {
            InputFormat::TimedJson => {
                let text = String::from_utf8_lossy(&raw);
                for (lineno, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let source_id = format!("{}:{}", path.display(), lineno + 1);
                    out.push((
                        source_id,
                        crate::transcript::parse_transcript(
                            line.as_bytes(),
                            TranscriptFormat::TimedJson,
                        ),
                    ));
                }
            }
            InputFormat::CaptionCue => {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let source_id = path.display().to_string();
                out.push((
                    source_id,
                    parse_transcript_with_fallback_id(
                        &raw,
                        TranscriptFormat::CaptionCue,
                        Some(&stem),
                    ),
                ));
            }
        }
    }
    Ok(out)
}

fn process_video(
    config: &PipelineConfig,
    scorer: &dyn SafetyScorer,
    converter: &dyn Converter,
    t: &TimedTranscript,
) -> VideoOutcome {
    let mut out = VideoOutcome::default();
    let video_id = t.meta.video_id.clone();

    let decision = language_gate(&t.meta, config.language_threshold);
    if !decision.kept {
        out.rejected_language = true;
        out.reject(&video_id, "language", "below-threshold", decision.detail);
        return out;
    }

    if t.meta.thumbnail_has_objects == Some(false) {
        out.rejected_visual = true;
        out.reject(
            &video_id,
            "visual",
            "thumbnail-no-objects",
            "external classifier found no objects in the thumbnail".into(),
        );
        return out;
    }
    // the variation gate needs at least two signatures; videos without
    // them carry no visual signal and pass through
    if t.meta.frame_signatures_hex.len() >= 2 {
        let decoded: Result<Vec<FrameSignature>, FilterError> = t
            .meta
            .frame_signatures_hex
            .iter()
            .map(|h| FrameSignature::from_hex(h))
            .collect();
        let verdict = decoded.and_then(|sigs| {
            visual_variation_gate(&sigs, config.visual_variation_fraction)
        });
        match verdict {
            Ok(decision) if !decision.kept => {
                out.rejected_visual = true;
                out.reject(&video_id, "visual", "static-video", decision.detail);
                return out;
            }
            Ok(_) => {}
            Err(e) => {
                out.rejected_visual = true;
                out.reject(&video_id, "visual", "bad-signatures", e.to_string());
                return out;
            }
        }
    }

    let segments = match segment_transcript(t, config.window_ms, config.stride_ms) {
        Ok(s) => s,
        Err(e) => {
            // parse guarantees non-empty transcripts; this also catches
            // absurd timelines past the segmenter bound
            let reason = match e {
                crate::segment::SegmentError::EmptyTranscript => "empty-transcript",
                crate::segment::SegmentError::InvalidParams(_) => "timeline-out-of-bounds",
            };
            out.reject(&video_id, "segment", reason, e.to_string());
            return out;
        }
    };
    out.segments.created = segments.len() as u64;

    let (kept_segments, rejected) =
        gate_word_count(segments, config.min_words, config.max_words);
    for (seg, reason) in rejected {
        match reason {
            WordGateReason::TooShort => {
                out.segments.rejected_too_short += 1;
                out.reject(
                    &seg.segment_id,
                    "word-count",
                    "too-short",
                    format!("{} words", seg.word_count),
                );
            }
            WordGateReason::TooLong => {
                out.segments.rejected_too_long += 1;
                out.reject(
                    &seg.segment_id,
                    "word-count",
                    "too-long",
                    format!("{} words", seg.word_count),
                );
            }
        }
    }

    for seg in kept_segments {
        let scores = match fetch_safety_scores(&seg.text(), scorer) {
            Ok(s) => s,
            Err(e @ (FilterError::EndpointUnreachable(_) | FilterError::RateLimited { .. })) => {
                out.segments.failed_remote += 1;
                out.fail(&seg.segment_id, "safety", "endpoint-failure", e.to_string());
                continue;
            }
            Err(e) => {
                out.segments.failed_remote += 1;
                out.fail(&seg.segment_id, "safety", "scorer-error", e.to_string());
                continue;
            }
        };
        let decision = safety_gate(&scores, &config.safety_thresholds);
        if !decision.kept {
            out.segments.rejected_safety += 1;
            out.reject(&seg.segment_id, "safety", "unsafe-content", decision.detail);
            continue;
        }

        let dialogue = match convert(&seg, converter) {
            Ok(d) => d,
            Err(
                e @ (ConvertError::EndpointUnreachable(_) | ConvertError::RateLimited { .. }),
            ) => {
                out.segments.failed_remote += 1;
                out.fail(&seg.segment_id, "convert", "endpoint-failure", e.to_string());
                continue;
            }
            Err(e) => {
                out.segments.rejected_converter += 1;
                out.reject(&seg.segment_id, "convert", "converter-error", e.to_string());
                continue;
            }
        };

        let transcript_words = seg.words();
        let dialogue_words: Vec<&str> = dialogue
            .turns
            .iter()
            .flat_map(|t| t.text.split_whitespace())
            .collect();
        let aligned = dtw_align(&transcript_words, &dialogue_words)
            .and_then(|path| estimate_turn_times(&seg, &dialogue, &path));
        let aligned = match aligned {
            Ok(a) => a,
            Err(e) => {
                out.segments.rejected_aligner += 1;
                out.reject(&seg.segment_id, "align", "alignment-error", e.to_string());
                continue;
            }
        };

        out.segments.kept += 1;
        out.stats.add_dialogue(&dialogue);

        let tainted = contains_reserved_separator(&t.meta.title)
            || dialogue
                .turns
                .iter()
                .any(|turn| contains_reserved_separator(&turn.text));
        let examples = if tainted {
            out.without_examples += 1;
            out.reject(
                &seg.segment_id,
                "build",
                "reserved-separator",
                "title or turn text contains a reserved separator token".into(),
            );
            Vec::new()
        } else {
            match build_examples(&aligned, &video_id, &t.meta.title, config.frame_selection) {
                Ok(examples) => examples,
                Err(e @ ExampleError::TooFewTurns(_)) => {
                    out.without_examples += 1;
                    out.reject(&seg.segment_id, "build", "too-few-turns", e.to_string());
                    Vec::new()
                }
                Err(e) => {
                    out.without_examples += 1;
                    out.reject(&seg.segment_id, "build", "example-error", e.to_string());
                    Vec::new()
                }
            }
        };
        let frame_jobs = emit_frame_jobs(&aligned, &video_id);
        out.kept.push(KeptDialogue {
            record: AlignedRecord::from_aligned(&video_id, &t.meta.title, &aligned),
            examples,
            frame_jobs,
        });
    }
    out
}

fn to_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("record serializes")
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), PipelineError> {
    let mut content = lines.join("\n");
    if !content.is_empty() {
        content.push('\n');
    }
    write_if_changed(path, content.as_bytes())?;
    Ok(())
}

/// Read a JSONL file into typed records, failing with the offending line
/// number on malformed content.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let raw = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: T = serde_json::from_str(line).map_err(|e| PipelineError::Record {
            path: path.display().to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        out.push(parsed);
    }
    Ok(out)
}

/// Write records as one JSON line each.
pub fn write_jsonl<T: Serialize>(
    path: &Path,
    items: impl IntoIterator<Item = T>,
) -> Result<(), PipelineError> {
    let lines: Vec<String> = items.into_iter().map(|item| to_line(&item)).collect();
    write_lines(path, &lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_input(dir: &Path, lines: &[String]) -> PathBuf {
        let path = dir.join("input.jsonl");
        std::fs::write(&path, lines.join("\n")).unwrap();
        path
    }

    fn offline_config() -> PipelineConfig {
        PipelineConfig {
            offline: true,
            ..PipelineConfig::default()
        }
    }

    /// A video whose 60s window holds `words` tokens with pauses and
    /// punctuation that give the fallback converter multiple turns.
    fn video_line(id: &str, words: usize, prob_en: f64) -> String {
        let mut tokens = Vec::new();
        let mut t = 0u64;
        for i in 0..words {
            let text = if i % 11 == 10 { format!("w{i}.") } else { format!("w{i}") };
            // a long pause every 13 words
            let gap = if i % 13 == 12 { 1500 } else { 50 };
            tokens.push(format!(
                r#"{{"text":"{text}","start_ms":{t},"end_ms":{}}}"#,
                t + 200
            ));
            t += 200 + gap;
        }
        format!(
            r#"{{"video_id":"{id}","title":"Video {id}","duration_ms":60000,"language_prob_en":{prob_en},"tokens":[{}]}}"#,
            tokens.join(",")
        )
    }

    #[test]
    fn empty_input_set_yields_zero_report_and_no_shards() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let report = run_pipeline(&offline_config(), &[], &out).unwrap();
        assert_eq!(report.videos.input, 0);
        assert_eq!(report.segments.created, 0);
        assert!(report.dialogue_shards.is_empty());
        assert!(report.conserved());
        // manifest still carries the version header
        let manifest: Manifest =
            serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.dataset_version, "1");
        assert!(manifest.entries.is_empty());
    }

    #[test]
    fn config_with_min_above_max_is_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig {
            min_words: 151,
            max_words: 150,
            offline: true,
            ..PipelineConfig::default()
        };
        assert!(matches!(
            run_pipeline(&config, &[], dir.path()),
            Err(PipelineError::ConfigInvalid(_))
        ));
    }

    #[test]
    fn records_are_conserved_across_stages() {
        let dir = tempfile::tempdir().unwrap();
        let lines = vec![
            video_line("keep-1", 60, 0.95),
            video_line("low-lang", 60, 0.5),
            video_line("short", 10, 0.95),
            "not json at all".to_string(),
            video_line("keep-2", 90, 0.95),
            video_line("keep-1", 60, 0.95), // duplicate id
        ];
        let input = write_input(dir.path(), &lines);
        let out = dir.path().join("out");
        let report = run_pipeline(&offline_config(), &[input], &out).unwrap();
        assert_eq!(report.videos.input, 6);
        assert_eq!(report.videos.malformed, 1);
        assert_eq!(report.videos.duplicate, 1);
        assert_eq!(report.videos.rejected_language, 1);
        assert_eq!(report.videos.processed, 3);
        assert!(report.conserved());
        assert_eq!(report.segments.kept + report.segments.rejected_too_short, report.segments.created);
        assert!(report.segments.kept >= 2);
    }

    #[test]
    fn two_runs_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let lines = vec![
            video_line("a", 60, 0.95),
            video_line("b", 45, 0.95),
            video_line("c", 120, 0.95),
        ];
        let input = write_input(dir.path(), &lines);
        let out1 = dir.path().join("out1");
        let out2 = dir.path().join("out2");
        let r1 = run_pipeline(&offline_config(), std::slice::from_ref(&input), &out1).unwrap();
        let r2 = run_pipeline(&offline_config(), &[input], &out2).unwrap();
        assert_eq!(r1, r2);
        for rel in ["report.json", "manifest.json", "rejections.jsonl", "frame_jobs.jsonl"] {
            assert_eq!(
                std::fs::read(out1.join(rel)).unwrap(),
                std::fs::read(out2.join(rel)).unwrap(),
                "{rel} differs"
            );
        }
        for shard in &r1.dialogue_shards {
            assert_eq!(
                std::fs::read(out1.join(shard)).unwrap(),
                std::fs::read(out2.join(shard)).unwrap()
            );
        }
    }

    #[test]
    fn rerun_into_same_directory_is_a_noop() {
        let dir = tempfile::tempdir().unwrap();
        let lines = vec![video_line("a", 60, 0.95)];
        let input = write_input(dir.path(), &lines);
        let out = dir.path().join("out");
        let r1 = run_pipeline(&offline_config(), std::slice::from_ref(&input), &out).unwrap();
        let shard = out.join(&r1.dialogue_shards[0]);
        let mtime = std::fs::metadata(&shard).unwrap().modified().unwrap();
        let r2 = run_pipeline(&offline_config(), &[input], &out).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(std::fs::metadata(&shard).unwrap().modified().unwrap(), mtime);
    }

    #[test]
    fn unsafe_segments_are_rejected_by_the_stub() {
        let dir = tempfile::tempdir().unwrap();
        // inject a stub lexicon hit into an otherwise keepable video
        let mut line = video_line("tainted", 60, 0.95);
        line = line.replace("\"w5\"", "\"unsafe-abuse-marker\"");
        let input = write_input(dir.path(), &[line]);
        let out = dir.path().join("out");
        let report = run_pipeline(&offline_config(), &[input], &out).unwrap();
        assert_eq!(report.segments.rejected_safety, 1);
        assert_eq!(report.segments.kept, 0);
        let rejections = std::fs::read_to_string(out.join("rejections.jsonl")).unwrap();
        assert!(rejections.contains("unsafe-content"));
        assert!(rejections.contains("abuse"));
    }

    #[test]
    fn static_videos_are_rejected_at_the_visual_stage() {
        let dir = tempfile::tempdir().unwrap();
        let line = video_line("static", 60, 0.95).replace(
            "\"tokens\"",
            r#""frame_signatures":["00000000","00000000","00000000"],"tokens""#,
        );
        let input = write_input(dir.path(), &[line]);
        let out = dir.path().join("out");
        let report = run_pipeline(&offline_config(), &[input], &out).unwrap();
        assert_eq!(report.videos.rejected_visual, 1);
        assert_eq!(report.segments.created, 0);
        assert!(report.conserved());
    }

    #[test]
    fn manifest_lists_only_kept_videos() {
        let dir = tempfile::tempdir().unwrap();
        let lines = vec![video_line("kept", 60, 0.95), video_line("gone", 60, 0.1)];
        let input = write_input(dir.path(), &lines);
        let out = dir.path().join("out");
        run_pipeline(&offline_config(), &[input], &out).unwrap();
        let manifest: Manifest =
            serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
        let ids: Vec<&str> = manifest.entries.iter().map(|e| e.video_id.as_str()).collect();
        assert_eq!(ids, ["kept"]);
    }
}
