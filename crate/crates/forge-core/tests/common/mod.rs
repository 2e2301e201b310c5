//! Shared test oracles and fixture generators.
//!
//! The oracles here are deliberately written from the definitions, not
//! from the library code: brute-force path enumeration for DTW and a full
//! dynamic-programming matrix for edit distance. They stay independent of
//! the implementations they check.

// each test binary compiles this module and uses a different subset
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use forge_core::segment::Segment;
use forge_core::transcript::TimedToken;

/// Normalize the way the aligner defines word forms: keep alphanumerics,
/// lowercase. Re-stated here so the oracle does not borrow library code.
pub fn oracle_normalize(word: &str) -> Vec<char> {
    word.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Textbook full-matrix Levenshtein over normalized forms.
pub fn oracle_levenshtein(a: &str, b: &str) -> usize {
    let a = oracle_normalize(a);
    let b = oracle_normalize(b);
    let (n, m) = (a.len(), b.len());
    let mut table = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let substitution = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let deletion = table[i - 1][j] + 1;
            let insertion = table[i][j - 1] + 1;
            table[i][j] = substitution.min(deletion).min(insertion);
        }
    }
    table[n][m]
}

/// Minimum path cost by exhaustive enumeration of every monotone,
/// contiguous path from (0,0) to (n-1,m-1). Exponential, fine for the
/// small grids the acceptance suite uses.
pub fn brute_force_dtw_cost(a: &[&str], b: &[&str]) -> f64 {
    fn explore(
        i: usize,
        j: usize,
        acc: f64,
        a: &[&str],
        b: &[&str],
        best: &mut f64,
    ) {
        if i == a.len() - 1 && j == b.len() - 1 {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            let cost = oracle_levenshtein(a[i + 1], b[j + 1]) as f64;
            explore(i + 1, j + 1, acc + cost, a, b, best);
        }
        if i + 1 < a.len() {
            let cost = oracle_levenshtein(a[i + 1], b[j]) as f64;
            explore(i + 1, j, acc + cost, a, b, best);
        }
        if j + 1 < b.len() {
            let cost = oracle_levenshtein(a[i], b[j + 1]) as f64;
            explore(i, j + 1, acc + cost, a, b, best);
        }
    }
    let mut best = f64::INFINITY;
    explore(0, 0, oracle_levenshtein(a[0], b[0]) as f64, a, b, &mut best);
    best
}

pub const SMALL_VOCAB: [&str; 5] = ["hi", "there", "how", "are", "you"];

/// A random word sequence of 1..=max_len words from the 5-word vocabulary.
pub fn random_words(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<&'static str> {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| SMALL_VOCAB[rng.gen_range(0..SMALL_VOCAB.len())])
        .collect()
}

/// A random short string over letters (both cases), digits, and some
/// punctuation.
pub fn random_string(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    const ALPHABET: &[char] = &[
        'a', 'b', 'c', 'd', 'A', 'B', 'C', '0', '1', '.', ',', '\'', '?', '!',
    ];
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())])
        .collect()
}

const SEGMENT_WORD_POOL: [&str; 24] = [
    "the", "river", "boat", "engine", "ran", "fine", "today", "we", "checked",
    "it", "twice", "then", "again", "sauce", "needs", "salt", "maybe.",
    "sure?", "right!", "Okay", "slowly", "turn", "now", "stop.",
];

/// A random segment whose tokens mix punctuation, case, and silence gaps,
/// sized to pass the default word gates and stay inside a 60s window.
pub fn random_segment(rng: &mut ChaCha8Rng, id: usize) -> Segment {
    let words = rng.gen_range(30..=100);
    let mut tokens = Vec::with_capacity(words);
    let mut t = 0u64;
    for i in 0..words {
        let text = SEGMENT_WORD_POOL[rng.gen_range(0..SEGMENT_WORD_POOL.len())].to_string();
        let len = rng.gen_range(150..=250);
        tokens.push(TimedToken {
            text,
            start_ms: t,
            end_ms: t + len,
        });
        // a pause every ninth word keeps the worst case under 60s
        let gap = if i % 9 == 8 {
            rng.gen_range(1100..=1250)
        } else {
            rng.gen_range(50..=150)
        };
        t += len + gap;
    }
    Segment {
        segment_id: format!("fuzz-{id}:0:60000"),
        video_id: format!("fuzz-{id}"),
        window_start_ms: 0,
        window_end_ms: 60_000,
        word_count: tokens.len(),
        tokens,
    }
}
