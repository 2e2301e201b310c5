//! Corpus and model-output metrics: corpus-level Dist-N, cross-tokenizer
//! perplexity normalization, NDCG over dense relevance annotations, and
//! streaming corpus statistics.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convert::Dialogue;

/// One model response plus the id of the context it answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub context_id: String,
    pub response_tokens: Vec<String>,
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid relevance set: {0}")]
    InvalidRelevanceSet(String),
}

/// Corpus-level distinct-n: unique n-grams across all responses divided by
/// total n-gram occurrences. Responses shorter than `n` contribute no
/// n-grams; an n-gram-free corpus scores 0.
pub fn dist_n(responses: &[Vec<String>], n: usize) -> f64 {
    assert!(n >= 1, "n-gram order must be at least 1");
    let mut seen: HashSet<String> = HashSet::new();
    let mut total = 0usize;
    for response in responses {
        if response.len() < n {
            continue;
        }
        for gram in response.windows(n) {
            // joined with a separator no whitespace-split token can contain
            seen.insert(gram.join("\u{1f}"));
            total += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        seen.len() as f64 / total as f64
    }
}

/// Re-express a perplexity in another tokenizer's space, conserving the
/// total negative log-likelihood: `exp(n_src * ln(ppl_src) / n_tgt)`.
pub fn normalize_ppl(
    ppl_src: f64,
    n_tokens_src: u64,
    n_tokens_tgt: u64,
) -> Result<f64, MetricError> {
    if ppl_src < 1.0 || ppl_src.is_nan() {
        return Err(MetricError::DomainError(format!(
            "perplexity must be >= 1, got {ppl_src}"
        )));
    }
    if n_tokens_src == 0 || n_tokens_tgt == 0 {
        return Err(MetricError::DomainError(
            "token counts must be positive".into(),
        ));
    }
    if n_tokens_src == n_tokens_tgt {
        return Ok(ppl_src);
    }
    Ok((n_tokens_src as f64 * ppl_src.ln() / n_tokens_tgt as f64).exp())
}

/// Graded relevance per candidate plus a predicted ranking over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceSet {
    relevances: Vec<f64>,
    ranking: Vec<usize>,
}

impl RelevanceSet {
    /// Validate relevance ranges and that `ranking` is a permutation of the
    /// candidate indices.
    pub fn new(relevances: Vec<f64>, ranking: Vec<usize>) -> Result<Self, MetricError> {
        if ranking.len() != relevances.len() {
            return Err(MetricError::InvalidRelevanceSet(format!(
                "ranking length {} != candidate count {}",
                ranking.len(),
                relevances.len()
            )));
        }
        if let Some(bad) = relevances.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(MetricError::InvalidRelevanceSet(format!(
                "relevance {bad} outside [0, 1]"
            )));
        }
        let mut present = vec![false; relevances.len()];
        for &idx in &ranking {
            if idx >= relevances.len() || present[idx] {
                return Err(MetricError::InvalidRelevanceSet(format!(
                    "ranking is not a permutation (index {idx})"
                )));
            }
            present[idx] = true;
        }
        Ok(RelevanceSet {
            relevances,
            ranking,
        })
    }

    pub fn relevances(&self) -> &[f64] {
        &self.relevances
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }
}

fn dcg_at(relevances: &[f64], order: impl Iterator<Item = usize>, k: usize) -> f64 {
    order
        .take(k)
        .enumerate()
        .map(|(rank, idx)| relevances[idx] / ((rank + 2) as f64).log2())
        .sum()
}

/// Normalized discounted cumulative gain truncated at the number of
/// candidates with nonzero relevance. All-zero relevance scores 0.
pub fn ndcg(rel: &RelevanceSet) -> f64 {
    let k = rel.relevances.iter().filter(|&&r| r > 0.0).count();
    ndcg_at_k(rel, k)
}

/// NDCG at a fixed cutoff `k`.
pub fn ndcg_at_k(rel: &RelevanceSet, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut ideal: Vec<usize> = (0..rel.relevances.len()).collect();
    ideal.sort_by(|&a, &b| {
        rel.relevances[b]
            .partial_cmp(&rel.relevances[a])
            .expect("relevances are finite")
            .then(a.cmp(&b))
    });
    let ideal_dcg = dcg_at(&rel.relevances, ideal.into_iter(), k);
    if ideal_dcg == 0.0 {
        return 0.0;
    }
    let dcg = dcg_at(&rel.relevances, rel.ranking.iter().copied(), k);
    dcg / ideal_dcg
}

/// Mergeable integer accumulators behind [`CorpusStats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsAccumulator {
    pub num_dialogues: u64,
    pub total_turns: u64,
    pub total_words: u64,
}

impl StatsAccumulator {
    pub fn add_dialogue(&mut self, dialogue: &Dialogue) {
        self.num_dialogues += 1;
        self.total_turns += dialogue.turns.len() as u64;
        self.total_words += dialogue
            .turns
            .iter()
            .map(|t| t.text.split_whitespace().count() as u64)
            .sum::<u64>();
    }

    pub fn finalize(&self) -> CorpusStats {
        CorpusStats {
            num_dialogues: self.num_dialogues,
            avg_turns: ratio(self.total_turns, self.num_dialogues),
            avg_utterance_len_words: ratio(self.total_words, self.total_turns),
            total_tokens: self.total_words,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Aggregate corpus statistics, the schema of the dataset-comparison table
/// (dialogue count, average turns, average utterance length in words,
/// total tokens).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub num_dialogues: u64,
    pub avg_turns: f64,
    pub avg_utterance_len_words: f64,
    pub total_tokens: u64,
}

/// Exact corpus statistics over a dialogue stream.
pub fn corpus_stats<'a>(dialogues: impl IntoIterator<Item = &'a Dialogue>) -> CorpusStats {
    let mut acc = StatsAccumulator::default();
    for d in dialogues {
        acc.add_dialogue(d);
    }
    acc.finalize()
}

/// Field-wise sum of two accumulators; ratios are recomputed at
/// finalization.
pub fn merge_stats(a: StatsAccumulator, b: StatsAccumulator) -> StatsAccumulator {
    StatsAccumulator {
        num_dialogues: a.num_dialogues + b.num_dialogues,
        total_turns: a.total_turns + b.total_turns,
        total_words: a.total_words + b.total_words,
    }
}
