//! Seeded randomized checks for the module invariants that are not part of
//! the acceptance suite.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_segment, random_words};
use forge_core::align::{dtw_align, estimate_turn_times};
use forge_core::convert::{convert, FallbackConverter};
use forge_core::metrics::{corpus_stats, dist_n, merge_stats, ndcg, RelevanceSet, StatsAccumulator};
use forge_core::segment::segment_transcript;
use forge_core::transcript::{
    parse_transcript, serialize_transcript, TimedToken, TimedTranscript, TranscriptFormat,
    VideoMeta,
};

fn random_transcript(rng: &mut ChaCha8Rng, id: usize) -> TimedTranscript {
    let words = rng.gen_range(1..80);
    let mut tokens = Vec::new();
    let mut t = rng.gen_range(0..5000u64);
    for i in 0..words {
        let len = rng.gen_range(100..400);
        tokens.push(TimedToken {
            text: format!("word{i}"),
            start_ms: t,
            end_ms: t + len,
        });
        t += len + rng.gen_range(10..2000);
    }
    let duration = t + rng.gen_range(0..10_000);
    TimedTranscript {
        meta: VideoMeta {
            video_id: format!("prop-{id}"),
            title: format!("Property video {id}"),
            duration_ms: Some(duration),
            language_prob_en: (rng.gen_range(0..=100) as f64) / 100.0,
            thumbnail_has_objects: None,
            frame_signatures_hex: Vec::new(),
        },
        tokens,
    }
}

#[test]
fn parse_of_serialize_is_identity_on_canonical_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let t = random_transcript(&mut rng, i);
        let line = serialize_transcript(&t);
        let parsed = parse_transcript(line.as_bytes(), TranscriptFormat::TimedJson).unwrap();
        assert_eq!(parsed, t, "round-trip changed record {i}");
    }
}

#[test]
fn equal_stride_segmentation_partitions_tokens() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..50 {
        let t = random_transcript(&mut rng, i);
        let segments = segment_transcript(&t, 60_000, 60_000).unwrap();
        let total: usize = segments.iter().map(|s| s.word_count).sum();
        assert_eq!(total, t.tokens.len(), "token lost or duplicated");
        for seg in &segments {
            for tok in &seg.tokens {
                assert!(tok.start_ms >= seg.window_start_ms);
                assert!(tok.start_ms < seg.window_end_ms);
            }
            assert_eq!(seg.word_count, seg.tokens.len());
        }
        // byte-identical determinism
        let again = segment_transcript(&t, 60_000, 60_000).unwrap();
        assert_eq!(
            serde_json::to_string(&segments).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }
}

#[test]
fn dtw_paths_always_satisfy_their_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let a = random_words(&mut rng, 8);
        let b = random_words(&mut rng, 8);
        let path = dtw_align(&a, &b).unwrap();
        path.validate(a.len(), b.len()).unwrap();
        assert!(path.total_cost >= 0.0);
    }
}

#[test]
fn estimate_turn_times_is_deterministic_and_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let converter = FallbackConverter::default();
    for case in 0..50 {
        let seg = random_segment(&mut rng, case);
        let dialogue = convert(&seg, &converter).unwrap();
        let words = seg.words();
        let dialogue_words: Vec<&str> = dialogue
            .turns
            .iter()
            .flat_map(|t| t.text.split_whitespace())
            .collect();
        let path = dtw_align(&words, &dialogue_words).unwrap();
        let first = estimate_turn_times(&seg, &dialogue, &path).unwrap();
        let second = estimate_turn_times(&seg, &dialogue, &path).unwrap();
        assert_eq!(first, second);
        for pair in first.turn_start_ms.windows(2) {
            assert!(pair[0] <= pair[1], "turn starts must be non-decreasing");
        }
        assert_eq!(first.frame_timestamps_ms, first.turn_start_ms);
    }
}

#[test]
fn fallback_converter_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let converter = FallbackConverter::default();
    for case in 0..50 {
        let seg = random_segment(&mut rng, case);
        assert_eq!(
            convert(&seg, &converter).unwrap(),
            convert(&seg, &converter).unwrap()
        );
    }
}

#[test]
fn dist_n_stays_in_unit_interval_and_tolerates_duplicates() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..50 {
        let responses: Vec<Vec<String>> = (0..rng.gen_range(1..10))
            .map(|_| {
                random_words(&mut rng, 8)
                    .into_iter()
                    .map(str::to_string)
                    .collect()
            })
            .collect();
        let value = dist_n(&responses, 3);
        assert!((0.0..=1.0).contains(&value));
        let mut shuffled = responses.clone();
        shuffled.reverse();
        assert_eq!(dist_n(&shuffled, 3), value);
        let mut duplicated = responses.clone();
        duplicated.push(responses[0].clone());
        assert!(dist_n(&duplicated, 3) <= value + 1e-15);
    }
}

#[test]
fn ndcg_is_one_for_any_ideal_ordering_and_ignores_zero_tail_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let n = rng.gen_range(2..12);
        let relevances: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    0.0
                } else {
                    (rng.gen_range(1..=10) as f64) / 10.0
                }
            })
            .collect();
        // ideal ranking: nonzero relevance sorted descending, zeros after
        let mut ideal: Vec<usize> = (0..n).collect();
        ideal.sort_by(|&a, &b| relevances[b].partial_cmp(&relevances[a]).unwrap());
        let set = RelevanceSet::new(relevances.clone(), ideal.clone()).unwrap();
        let value = ndcg(&set);
        if relevances.iter().any(|&r| r > 0.0) {
            assert!((value - 1.0).abs() < 1e-12, "ideal ranking must score 1");
        } else {
            assert_eq!(value, 0.0);
        }
        // permuting the zero-relevance tail beyond k never changes the score
        let k = relevances.iter().filter(|&&r| r > 0.0).count();
        if k > 0 && n - k > 1 {
            let mut permuted = ideal.clone();
            permuted[k..].reverse();
            let set2 = RelevanceSet::new(relevances, permuted).unwrap();
            assert!((ndcg(&set2) - value).abs() < 1e-12);
        }
    }
}

#[test]
fn merge_stats_is_associative_commutative_and_matches_direct_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let converter = FallbackConverter::default();
    let dialogues: Vec<_> = (0..12)
        .map(|i| convert(&random_segment(&mut rng, i), &converter).unwrap())
        .collect();
    let accs: Vec<StatsAccumulator> = dialogues
        .iter()
        .map(|d| {
            let mut acc = StatsAccumulator::default();
            acc.add_dialogue(d);
            acc
        })
        .collect();
    let (a, b, c) = (accs[0], accs[1], accs[2]);
    assert_eq!(merge_stats(merge_stats(a, b), c), merge_stats(a, merge_stats(b, c)));
    assert_eq!(merge_stats(a, b), merge_stats(b, a));
    assert_eq!(merge_stats(a, StatsAccumulator::default()), a);

    let merged = accs
        .iter()
        .fold(StatsAccumulator::default(), |acc, &x| merge_stats(acc, x))
        .finalize();
    let direct = corpus_stats(dialogues.iter());
    assert_eq!(merged, direct);
}
