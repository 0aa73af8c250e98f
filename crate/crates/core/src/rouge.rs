//! ROUGE-1/2/L over Unicode word tokens.
//!
//! Every score is reported as precision, recall and F1 (β = 1); corpus means
//! average the per-pair F1. Candidate = generated clue, reference = context
//! (or the clue of the reference model in [`compare_cluesets`]).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(overlap: usize, candidate_total: usize, reference_total: usize) -> Self {
        let precision = if candidate_total == 0 { 0.0 } else { overlap as f64 / candidate_total as f64 };
        let recall = if reference_total == 0 { 0.0 } else { overlap as f64 / reference_total as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    pub rouge_l: RougeScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub mean_rouge1: f64,
    pub mean_rouge2: f64,
    #[serde(rename = "mean_rougeL")]
    pub mean_rouge_l: f64,
    pub pair_count: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RougeError {
    #[error("corpus has no pairs")]
    EmptyCorpus,
    #[error("clue sets are not aligned: {0}")]
    KeyMismatch(String),
}

impl RougeError {
    pub fn code(&self) -> &'static str {
        match self {
            RougeError::EmptyCorpus => "EmptyCorpus",
            RougeError::KeyMismatch(_) => "KeyMismatch",
        }
    }
}

/// NFC-normalises, lowercases, and splits on anything that is not a letter or digit.
pub fn tokenize(text: &str) -> Vec<String> {
    let normalized: String = text.nfc().collect::<String>().to_lowercase();
    normalized
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for w in tokens.windows(n) {
        *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram overlap.
pub fn rouge_n<T: AsRef<str>>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    assert!(n >= 1, "n-gram order must be positive");
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, c)| (*c).min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    let total = |len: usize| len.saturating_sub(n - 1).min(len);
    RougeScore::from_counts(overlap, total(candidate.len()), total(reference.len()))
}

/// Length of the longest common subsequence, two-row dynamic programme.
pub fn lcs_len<T: AsRef<str>>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

pub fn score_pair(candidate: &str, reference: &str) -> PairScores {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    PairScores {
        rouge1: rouge_n(&c, &r, 1),
        rouge2: rouge_n(&c, &r, 2),
        rouge_l: rouge_l(&c, &r),
    }
}

fn mean_report(scores: &[PairScores]) -> Result<CorpusReport, RougeError> {
    if scores.is_empty() {
        return Err(RougeError::EmptyCorpus);
    }
    let n = scores.len() as f64;
    let (mut r1, mut r2, mut rl) = (0.0, 0.0, 0.0);
    for s in scores {
        r1 += s.rouge1.f1;
        r2 += s.rouge2.f1;
        rl += s.rouge_l.f1;
    }
    Ok(CorpusReport {
        mean_rouge1: r1 / n,
        mean_rouge2: r2 / n,
        mean_rouge_l: rl / n,
        pair_count: scores.len(),
    })
}

/// Mean ROUGE of each clue against its context. Pairs are `(clue, context)`.
pub fn score_corpus<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<CorpusReport, RougeError> {
    let scores: Vec<PairScores> = pairs
        .iter()
        .map(|(clue, ctx)| score_pair(clue.as_ref(), ctx.as_ref()))
        .collect();
    mean_report(&scores)
}

/// Compares two clue sets keyed by context id; `set_b` supplies the references.
/// Clues sharing a context id are paired in order, so both sets must hold the
/// same ids with the same number of clues per id.
pub fn compare_cluesets<S: AsRef<str>>(
    set_a: &[(S, S)],
    set_b: &[(S, S)],
) -> Result<CorpusReport, RougeError> {
    let group = |set: &[(S, S)]| {
        let mut m: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (id, clue) in set {
            m.entry(id.as_ref().to_string()).or_default().push(clue.as_ref().to_string());
        }
        m
    };
    let a = group(set_a);
    let b = group(set_b);
    if let Some(id) = a.keys().find(|k| !b.contains_key(*k)) {
        return Err(RougeError::KeyMismatch(format!("context {id:?} missing from reference set")));
    }
    if let Some(id) = b.keys().find(|k| !a.contains_key(*k)) {
        return Err(RougeError::KeyMismatch(format!("context {id:?} missing from candidate set")));
    }
    let mut scores = Vec::new();
    for (id, cands) in &a {
        let refs = &b[id];
        if cands.len() != refs.len() {
            return Err(RougeError::KeyMismatch(format!(
                "context {id:?} has {} candidate clues but {} reference clues",
                cands.len(),
                refs.len()
            )));
        }
        scores.extend(cands.iter().zip(refs).map(|(c, r)| score_pair(c, r)));
    }
    mean_report(&scores)
}

/// Plain-text table with one row per labelled report.
pub fn render_table(rows: &[(&str, CorpusReport)]) -> String {
    let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:>7}  {:>7}  {:>7}  {:>5}\n", "Model", "ROUGE-1", "ROUGE-2", "ROUGE-L", "pairs");
    for (label, r) in rows {
        out.push_str(&format!(
            "{:<width$}  {:>7.3}  {:>7.3}  {:>7.3}  {:>5}\n",
            label, r.mean_rouge1, r.mean_rouge2, r.mean_rouge_l, r.pair_count
        ));
    }
    out
}
