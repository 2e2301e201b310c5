//! `forge` — batch pipeline turning timed video transcripts into
//! frame-aligned dialogue datasets.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 3 partial
//! failure (run completed and the report was written, but some records
//! failed on remote calls).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use forge_core::align::{dtw_align, emit_frame_jobs, estimate_turn_times};
use forge_core::convert::{
    convert, teacher_forcing_accuracy, Converter, FallbackConverter, RemoteConverter,
};
use forge_core::example::{build_examples, contains_reserved_separator};
use forge_core::filter::{
    fetch_safety_scores, language_gate, safety_gate, visual_variation_gate, FrameSignature,
    RemoteScorer, SafetyScorer, StubScorer,
};
use forge_core::metrics::{corpus_stats, dist_n, ndcg, normalize_ppl, RelevanceSet};
use forge_core::pipeline::{
    read_jsonl, run_pipeline, write_jsonl, AlignedRecord, DialogueRecord, PipelineConfig,
    PipelineError, RejectionRecord,
};
use forge_core::segment::{gate_word_count, segment_transcript, Segment, WordGateReason};
use forge_core::transcript::VideoRecord;

#[derive(Parser)]
#[command(name = "forge", version, about = "Video transcripts to frame-aligned dialogue datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the bundled stub scorer and fallback converter.
    #[arg(long)]
    offline: bool,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if self.offline {
            config.offline = true;
        }
        if let Some(workers) = self.workers {
            config.workers = workers;
        }
        Ok(config)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FilterKind {
    /// Language and visual gates over video records.
    Video,
    /// Safety gate over segment records.
    Safety,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline over transcript shards.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Input transcript files (JSONL video records, or VTT files with
        /// --config input_format caption-cue).
        inputs: Vec<PathBuf>,
        /// Output directory for shards, manifest, and report.
        #[arg(long)]
        out: PathBuf,
    },
    /// Slice transcripts into windowed segments and apply the word gates.
    Segment {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Rejection sidecar (default: <output>.rejects.jsonl).
        #[arg(long)]
        rejects: Option<PathBuf>,
        #[arg(long)]
        window_ms: Option<u64>,
        #[arg(long)]
        stride_ms: Option<u64>,
        #[arg(long)]
        min_words: Option<usize>,
        #[arg(long)]
        max_words: Option<usize>,
    },
    /// Apply metadata or safety filters.
    Filter {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum)]
        kind: FilterKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        rejects: Option<PathBuf>,
    },
    /// Convert segment transcripts into dialogues.
    Convert {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        rejects: Option<PathBuf>,
    },
    /// Align dialogues back onto timed segments and stamp turn times.
    Align {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        segments: PathBuf,
        #[arg(long)]
        dialogues: PathBuf,
        /// Video records supplying titles for downstream prompts.
        #[arg(long)]
        videos: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Frame-extraction job list (default: <output>.frame_jobs.jsonl).
        #[arg(long)]
        frame_jobs: Option<PathBuf>,
        #[arg(long)]
        rejects: Option<PathBuf>,
    },
    /// Build next-turn training examples from aligned dialogues.
    Build {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        rejects: Option<PathBuf>,
    },
    /// Corpus statistics over dialogue records.
    Stats {
        #[arg(long)]
        input: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluation metrics; computes whichever metrics the given inputs
    /// allow and emits one JSON object.
    Eval {
        /// Response records ({"context_id", "response_tokens"}) for Dist-N.
        #[arg(long)]
        responses: Option<PathBuf>,
        /// N-gram order for Dist-N.
        #[arg(long, default_value_t = 3)]
        dist_order: usize,
        /// Relevance records ({"relevances", "ranking"}) for mean NDCG.
        #[arg(long)]
        relevance: Option<PathBuf>,
        /// Source-space perplexity to normalize.
        #[arg(long)]
        ppl: Option<f64>,
        #[arg(long)]
        n_src: Option<u64>,
        #[arg(long)]
        n_tgt: Option<u64>,
        /// Predicted token-id records ({"tokens"}) for teacher forcing.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Reference token-id records ({"tokens"}).
        #[arg(long)]
        references: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            if err
                .downcast_ref::<PipelineError>()
                .is_some_and(|e| matches!(e, PipelineError::ConfigInvalid(_)))
            {
                eprintln!("forge: {err:#}");
                ExitCode::from(2)
            } else {
                eprintln!("forge: error: {err:#}");
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config, inputs, out } => cmd_run(&config, &inputs, &out),
        Command::Segment {
            config,
            input,
            output,
            rejects,
            window_ms,
            stride_ms,
            min_words,
            max_words,
        } => {
            let mut cfg = config.load()?;
            if let Some(v) = window_ms {
                cfg.window_ms = v;
            }
            if let Some(v) = stride_ms {
                cfg.stride_ms = v;
            }
            if let Some(v) = min_words {
                cfg.min_words = v;
            }
            if let Some(v) = max_words {
                cfg.max_words = v;
            }
            if cfg.min_words > cfg.max_words {
                return Err(PipelineError::ConfigInvalid(format!(
                    "min_words {} exceeds max_words {}",
                    cfg.min_words, cfg.max_words
                ))
                .into());
            }
            cmd_segment(&cfg, &input, &output, rejects)
        }
        Command::Filter {
            config,
            kind,
            input,
            output,
            rejects,
        } => cmd_filter(&config.load()?, kind, &input, &output, rejects),
        Command::Convert {
            config,
            input,
            output,
            rejects,
        } => cmd_convert(&config.load()?, &input, &output, rejects),
        Command::Align {
            config,
            segments,
            dialogues,
            videos,
            output,
            frame_jobs,
            rejects,
        } => cmd_align(
            &config.load()?,
            &segments,
            &dialogues,
            videos.as_deref(),
            &output,
            frame_jobs,
            rejects,
        ),
        Command::Build {
            config,
            input,
            output,
            rejects,
        } => cmd_build(&config.load()?, &input, &output, rejects),
        Command::Stats { input, out } => cmd_stats(&input, out.as_deref()),
        Command::Eval {
            responses,
            dist_order,
            relevance,
            ppl,
            n_src,
            n_tgt,
            predictions,
            references,
            out,
        } => cmd_eval(EvalInputs {
            responses,
            dist_order,
            relevance,
            ppl,
            n_src,
            n_tgt,
            predictions,
            references,
            out,
        }),
    }
}

fn default_rejects(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".rejects.jsonl");
    PathBuf::from(s)
}

fn scorer_for(config: &PipelineConfig) -> Result<Box<dyn SafetyScorer>> {
    if config.offline {
        Ok(Box::new(StubScorer {
            abuse_lexicon: config.stub_lexicons.abuse.clone(),
            hate_lexicon: config.stub_lexicons.hate.clone(),
            sexual_lexicon: config.stub_lexicons.sexual.clone(),
        }))
    } else {
        let endpoint = config.scorer_endpoint.clone().ok_or_else(|| {
            PipelineError::ConfigInvalid("scorer_endpoint is required unless offline".into())
        })?;
        Ok(Box::new(RemoteScorer { endpoint }))
    }
}

fn converter_for(config: &PipelineConfig) -> Result<Box<dyn Converter>> {
    if config.offline {
        Ok(Box::new(FallbackConverter {
            pause_gap_ms: config.pause_gap_ms,
        }))
    } else {
        let endpoint = config.converter_endpoint.clone().ok_or_else(|| {
            PipelineError::ConfigInvalid("converter_endpoint is required unless offline".into())
        })?;
        Ok(Box::new(RemoteConverter { endpoint }))
    }
}

fn cmd_run(config_args: &ConfigArgs, inputs: &[PathBuf], out: &Path) -> Result<ExitCode> {
    let config = config_args.load()?;
    let report = run_pipeline(&config, inputs, out)?;
    let summary = serde_json::to_string_pretty(&report)?;
    println!("{summary}");
    if report.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "forge: {} record(s) failed on remote calls; see report",
            report.failures.len()
        );
        Ok(ExitCode::from(3))
    }
}

fn cmd_segment(
    config: &PipelineConfig,
    input: &Path,
    output: &Path,
    rejects: Option<PathBuf>,
) -> Result<ExitCode> {
    let records: Vec<VideoRecord> = read_jsonl(input)?;
    let mut kept_out = Vec::new();
    let mut rejected_out = Vec::new();
    for record in records {
        let transcript = match record.into_transcript() {
            Ok(t) => t,
            Err(e) => {
                rejected_out.push(RejectionRecord {
                    id: input.display().to_string(),
                    stage: "ingest".into(),
                    reason: "malformed-input".into(),
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let segments = match segment_transcript(&transcript, config.window_ms, config.stride_ms) {
            Ok(s) => s,
            Err(e) => {
                rejected_out.push(RejectionRecord {
                    id: transcript.meta.video_id.clone(),
                    stage: "segment".into(),
                    reason: "unsegmentable".into(),
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let (kept, rejected) = gate_word_count(segments, config.min_words, config.max_words);
        kept_out.extend(kept);
        for (seg, reason) in rejected {
            rejected_out.push(RejectionRecord {
                id: seg.segment_id.clone(),
                stage: "word-count".into(),
                reason: match reason {
                    WordGateReason::TooShort => "too-short".into(),
                    WordGateReason::TooLong => "too-long".into(),
                },
                detail: format!("{} words", seg.word_count),
            });
        }
    }
    write_jsonl(output, kept_out.iter())?;
    write_jsonl(&rejects.unwrap_or_else(|| default_rejects(output)), rejected_out.iter())?;
    eprintln!(
        "forge segment: kept {} segment(s), rejected {}",
        kept_out.len(),
        rejected_out.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_filter(
    config: &PipelineConfig,
    kind: FilterKind,
    input: &Path,
    output: &Path,
    rejects: Option<PathBuf>,
) -> Result<ExitCode> {
    let rejects = rejects.unwrap_or_else(|| default_rejects(output));
    match kind {
        FilterKind::Video => {
            let records: Vec<VideoRecord> = read_jsonl(input)?;
            let mut kept = Vec::new();
            let mut rejected = Vec::new();
            for record in records {
                let transcript = match record.clone().into_transcript() {
                    Ok(t) => t,
                    Err(e) => {
                        rejected.push(RejectionRecord {
                            id: record.video_id.clone(),
                            stage: "ingest".into(),
                            reason: "malformed-input".into(),
                            detail: e.to_string(),
                        });
                        continue;
                    }
                };
                let language = language_gate(&transcript.meta, config.language_threshold);
                if !language.kept {
                    rejected.push(RejectionRecord {
                        id: record.video_id.clone(),
                        stage: "language".into(),
                        reason: "below-threshold".into(),
                        detail: language.detail,
                    });
                    continue;
                }
                if transcript.meta.thumbnail_has_objects == Some(false) {
                    rejected.push(RejectionRecord {
                        id: record.video_id.clone(),
                        stage: "visual".into(),
                        reason: "thumbnail-no-objects".into(),
                        detail: String::new(),
                    });
                    continue;
                }
                if transcript.meta.frame_signatures_hex.len() >= 2 {
                    let verdict = transcript
                        .meta
                        .frame_signatures_hex
                        .iter()
                        .map(|h| FrameSignature::from_hex(h))
                        .collect::<Result<Vec<_>, _>>()
                        .and_then(|sigs| {
                            visual_variation_gate(&sigs, config.visual_variation_fraction)
                        });
                    match verdict {
                        Ok(decision) if decision.kept => {}
                        Ok(decision) => {
                            rejected.push(RejectionRecord {
                                id: record.video_id.clone(),
                                stage: "visual".into(),
                                reason: "static-video".into(),
                                detail: decision.detail,
                            });
                            continue;
                        }
                        Err(e) => {
                            rejected.push(RejectionRecord {
                                id: record.video_id.clone(),
                                stage: "visual".into(),
                                reason: "bad-signatures".into(),
                                detail: e.to_string(),
                            });
                            continue;
                        }
                    }
                }
                kept.push(record);
            }
            write_jsonl(output, kept.iter())?;
            write_jsonl(&rejects, rejected.iter())?;
            eprintln!(
                "forge filter --kind video: kept {}, rejected {}",
                kept.len(),
                rejected.len()
            );
        }
        FilterKind::Safety => {
            let scorer = scorer_for(config)?;
            let segments: Vec<Segment> = read_jsonl(input)?;
            let mut kept = Vec::new();
            let mut rejected = Vec::new();
            for seg in segments {
                let scores = fetch_safety_scores(&seg.text(), scorer.as_ref())
                    .with_context(|| format!("scoring {}", seg.segment_id))?;
                let decision = safety_gate(&scores, &config.safety_thresholds);
                if decision.kept {
                    kept.push(seg);
                } else {
                    rejected.push(RejectionRecord {
                        id: seg.segment_id.clone(),
                        stage: "safety".into(),
                        reason: "unsafe-content".into(),
                        detail: decision.detail,
                    });
                }
            }
            write_jsonl(output, kept.iter())?;
            write_jsonl(&rejects, rejected.iter())?;
            eprintln!(
                "forge filter --kind safety: kept {}, rejected {}",
                kept.len(),
                rejected.len()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_convert(
    config: &PipelineConfig,
    input: &Path,
    output: &Path,
    rejects: Option<PathBuf>,
) -> Result<ExitCode> {
    let converter = converter_for(config)?;
    let segments: Vec<Segment> = read_jsonl(input)?;
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for seg in segments {
        match convert(&seg, converter.as_ref()) {
            Ok(dialogue) => kept.push(DialogueRecord::from_dialogue(&seg.video_id, &dialogue)),
            Err(e) => rejected.push(RejectionRecord {
                id: seg.segment_id.clone(),
                stage: "convert".into(),
                reason: "converter-error".into(),
                detail: e.to_string(),
            }),
        }
    }
    write_jsonl(output, kept.iter())?;
    write_jsonl(&rejects.unwrap_or_else(|| default_rejects(output)), rejected.iter())?;
    eprintln!(
        "forge convert: converted {}, rejected {}",
        kept.len(),
        rejected.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_align(
    _config: &PipelineConfig,
    segments_path: &Path,
    dialogues_path: &Path,
    videos_path: Option<&Path>,
    output: &Path,
    frame_jobs_path: Option<PathBuf>,
    rejects: Option<PathBuf>,
) -> Result<ExitCode> {
    let segments: Vec<Segment> = read_jsonl(segments_path)?;
    let by_id: BTreeMap<&str, &Segment> = segments
        .iter()
        .map(|s| (s.segment_id.as_str(), s))
        .collect();
    let titles: BTreeMap<String, String> = match videos_path {
        Some(path) => read_jsonl::<VideoRecord>(path)?
            .into_iter()
            .map(|r| (r.video_id, r.title))
            .collect(),
        None => BTreeMap::new(),
    };
    let dialogues: Vec<DialogueRecord> = read_jsonl(dialogues_path)?;
    let mut aligned_out = Vec::new();
    let mut jobs_out = Vec::new();
    let mut rejected = Vec::new();
    for record in dialogues {
        let Some(seg) = by_id.get(record.segment_id.as_str()) else {
            rejected.push(RejectionRecord {
                id: record.segment_id.clone(),
                stage: "align".into(),
                reason: "missing-segment".into(),
                detail: "no segment with this id in --segments".into(),
            });
            continue;
        };
        let video_id = record.video_id.clone();
        let dialogue = record.into_dialogue();
        let transcript_words = seg.words();
        let dialogue_words: Vec<&str> = dialogue
            .turns
            .iter()
            .flat_map(|t| t.text.split_whitespace())
            .collect();
        let result = dtw_align(&transcript_words, &dialogue_words)
            .and_then(|path| estimate_turn_times(seg, &dialogue, &path));
        match result {
            Ok(aligned) => {
                jobs_out.extend(emit_frame_jobs(&aligned, &video_id));
                let title = titles.get(&video_id).cloned().unwrap_or_default();
                aligned_out.push(AlignedRecord::from_aligned(&video_id, &title, &aligned));
            }
            Err(e) => rejected.push(RejectionRecord {
                id: dialogue.source_segment_id.clone(),
                stage: "align".into(),
                reason: "alignment-error".into(),
                detail: e.to_string(),
            }),
        }
    }
    write_jsonl(output, aligned_out.iter())?;
    let jobs_path = frame_jobs_path.unwrap_or_else(|| {
        let mut s = output.as_os_str().to_owned();
        s.push(".frame_jobs.jsonl");
        PathBuf::from(s)
    });
    write_jsonl(&jobs_path, jobs_out.iter())?;
    write_jsonl(&rejects.unwrap_or_else(|| default_rejects(output)), rejected.iter())?;
    eprintln!(
        "forge align: aligned {}, rejected {}, {} frame job(s)",
        aligned_out.len(),
        rejected.len(),
        jobs_out.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_build(
    config: &PipelineConfig,
    input: &Path,
    output: &Path,
    rejects: Option<PathBuf>,
) -> Result<ExitCode> {
    let records: Vec<AlignedRecord> = read_jsonl(input)?;
    let mut examples_out = Vec::new();
    let mut rejected = Vec::new();
    for record in records {
        let aligned = record.to_aligned();
        let tainted = contains_reserved_separator(&record.title)
            || aligned
                .dialogue
                .turns
                .iter()
                .any(|t| contains_reserved_separator(&t.text));
        if tainted {
            rejected.push(RejectionRecord {
                id: record.segment_id.clone(),
                stage: "build".into(),
                reason: "reserved-separator".into(),
                detail: "title or turn text contains a reserved separator token".into(),
            });
            continue;
        }
        match build_examples(&aligned, &record.video_id, &record.title, config.frame_selection) {
            Ok(examples) => examples_out.extend(examples),
            Err(e) => rejected.push(RejectionRecord {
                id: record.segment_id.clone(),
                stage: "build".into(),
                reason: "too-few-turns".into(),
                detail: e.to_string(),
            }),
        }
    }
    write_jsonl(output, examples_out.iter())?;
    write_jsonl(&rejects.unwrap_or_else(|| default_rejects(output)), rejected.iter())?;
    eprintln!(
        "forge build: built {} example(s), reported {}",
        examples_out.len(),
        rejected.len()
    );
    Ok(ExitCode::SUCCESS)
}

/// Any record with a `turns` field; covers dialogue and aligned records.
#[derive(Deserialize)]
struct TurnsRecord {
    turns: Vec<forge_core::convert::DialogueTurn>,
}

fn cmd_stats(input: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let records: Vec<TurnsRecord> = read_jsonl(input)?;
    let dialogues: Vec<forge_core::convert::Dialogue> = records
        .into_iter()
        .map(|r| forge_core::convert::Dialogue {
            turns: r.turns,
            source_segment_id: String::new(),
        })
        .collect();
    let stats = corpus_stats(dialogues.iter());
    emit_report(&stats, out)
}

struct EvalInputs {
    responses: Option<PathBuf>,
    dist_order: usize,
    relevance: Option<PathBuf>,
    ppl: Option<f64>,
    n_src: Option<u64>,
    n_tgt: Option<u64>,
    predictions: Option<PathBuf>,
    references: Option<PathBuf>,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    dist_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dist_n_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ndcg_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ndcg_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized_ppl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    teacher_forcing_accuracy: Option<f64>,
}

#[derive(Deserialize)]
struct RelevanceRecord {
    relevances: Vec<f64>,
    ranking: Vec<usize>,
}

#[derive(Deserialize)]
struct TokenIdRecord {
    tokens: Vec<u32>,
}

fn cmd_eval(inputs: EvalInputs) -> Result<ExitCode> {
    let mut report = EvalReport {
        dist_n: None,
        dist_n_order: None,
        ndcg_mean: None,
        ndcg_count: None,
        normalized_ppl: None,
        teacher_forcing_accuracy: None,
    };

    if let Some(path) = &inputs.responses {
        if inputs.dist_order == 0 {
            return Err(
                PipelineError::ConfigInvalid("--dist-order must be at least 1".into()).into(),
            );
        }
        let records: Vec<forge_core::metrics::EvalRecord> = read_jsonl(path)?;
        let token_lists: Vec<Vec<String>> =
            records.into_iter().map(|r| r.response_tokens).collect();
        report.dist_n = Some(dist_n(&token_lists, inputs.dist_order));
        report.dist_n_order = Some(inputs.dist_order);
    }

    if let Some(path) = &inputs.relevance {
        let records: Vec<RelevanceRecord> = read_jsonl(path)?;
        let count = records.len();
        let mut total = 0.0;
        for (i, record) in records.into_iter().enumerate() {
            let set = RelevanceSet::new(record.relevances, record.ranking)
                .with_context(|| format!("{}:{}", path.display(), i + 1))?;
            total += ndcg(&set);
        }
        report.ndcg_mean = Some(if count == 0 { 0.0 } else { total / count as f64 });
        report.ndcg_count = Some(count);
    }

    match (inputs.ppl, inputs.n_src, inputs.n_tgt) {
        (Some(ppl), Some(n_src), Some(n_tgt)) => {
            report.normalized_ppl = Some(normalize_ppl(ppl, n_src, n_tgt)?);
        }
        (None, None, None) => {}
        _ => {
            return Err(PipelineError::ConfigInvalid(
                "--ppl, --n-src, and --n-tgt must be given together".into(),
            )
            .into())
        }
    }

    match (&inputs.predictions, &inputs.references) {
        (Some(pred_path), Some(ref_path)) => {
            let predictions: Vec<Vec<u32>> = read_jsonl::<TokenIdRecord>(pred_path)?
                .into_iter()
                .map(|r| r.tokens)
                .collect();
            let references: Vec<Vec<u32>> = read_jsonl::<TokenIdRecord>(ref_path)?
                .into_iter()
                .map(|r| r.tokens)
                .collect();
            report.teacher_forcing_accuracy =
                Some(teacher_forcing_accuracy(&predictions, &references)?);
        }
        (None, None) => {}
        _ => {
            return Err(PipelineError::ConfigInvalid(
                "--predictions and --references must be given together".into(),
            )
            .into())
        }
    }

    emit_report(&report, inputs.out.as_deref())
}

fn emit_report<T: Serialize>(report: &T, out: Option<&Path>) -> Result<ExitCode> {
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    match out {
        Some(path) => std::fs::write(path, json)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}
