//! Corpus loading, filtering, and ordering.
//!
//! Input is plain text, one sentence per line, tokens separated by spaces
//! (punctuation pre-split, as in common corpus distributions). Preparation
//! drops redacted and comma-bearing lines, drops short or unpunctuated
//! sentences, then sorts what is left by the median popularity of each
//! sentence's tokens so that training favors sentences built from common
//! words.

use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("no sentences left after filtering")]
    EmptyCorpus,
}

/// One tokenized sentence, case preserved, with its position in the original
/// input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub source_index: usize,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, source_index: usize) -> Self {
        Self { tokens, source_index }
    }

    pub fn from_line(line: &str, source_index: usize) -> Option<Self> {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            None
        } else {
            Some(Self { tokens, source_index })
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// An ordered sentence collection plus the word counts its ordering was
/// computed from.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub word_counts: HashMap<String, usize>,
    /// Median word count per sentence, aligned with `sentences`; empty when
    /// the corpus was not produced by `prepare_corpus`.
    pub scores: Vec<f64>,
    /// Where `word_counts` came from.
    pub counts_note: String,
}

impl Corpus {
    /// Wrap sentences as-is, counting words over exactly this set.
    pub fn from_sentences(sentences: Vec<Sentence>) -> Result<Self, CorpusError> {
        if sentences.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let word_counts = count_words(&sentences);
        Ok(Self {
            sentences,
            word_counts,
            scores: Vec::new(),
            counts_note: "counted over the sentences as given".into(),
        })
    }

    /// Load one sentence per non-empty line, without filtering.
    pub fn from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<Self, CorpusError> {
        let sentences: Vec<Sentence> = lines
            .into_iter()
            .enumerate()
            .filter_map(|(i, line)| Sentence::from_line(line, i))
            .collect();
        Self::from_sentences(sentences)
    }
}

fn count_words(sentences: &[Sentence]) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for s in sentences {
        for t in &s.tokens {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Debug, Clone)]
pub struct PrepOptions {
    /// Minimum number of words, not counting the final punctuation token.
    pub min_words: usize,
    /// Tokens whose presence drops the whole sentence.
    pub drop_tokens: HashSet<String>,
    /// Lines containing this substring are dropped entirely.
    pub redaction_marker: String,
    /// Keep only the best-scoring N sentences; `None` keeps everything.
    pub take: Option<usize>,
    /// Accepted sentence-final punctuation.
    pub terminals: HashSet<String>,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self {
            min_words: 4,
            drop_tokens: [",".to_string()].into_iter().collect(),
            redaction_marker: "@".into(),
            take: None,
            terminals: [".", "!", "?"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Filter, score, and order raw text lines into a training corpus.
///
/// Word counts are taken over the sentences that survive filtering, before
/// truncation; each sentence is scored with the median of its tokens' counts
/// (mean of the middle two for even lengths) and the result is sorted by
/// descending score, ties broken by input position.
pub fn prepare_corpus<'a>(
    lines: impl IntoIterator<Item = &'a str>,
    options: &PrepOptions,
) -> Result<Corpus, CorpusError> {
    let mut kept: Vec<Sentence> = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        if !options.redaction_marker.is_empty() && line.contains(&options.redaction_marker) {
            continue;
        }
        let Some(sentence) = Sentence::from_line(line, i) else { continue };
        if sentence.tokens.iter().any(|t| options.drop_tokens.contains(t)) {
            continue;
        }
        let last = sentence.tokens.last().expect("nonempty");
        if !options.terminals.contains(last) {
            continue;
        }
        if sentence.tokens.len() - 1 < options.min_words {
            continue;
        }
        kept.push(sentence);
    }
    if kept.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }

    let word_counts = count_words(&kept);
    let mut scored: Vec<(f64, Sentence)> = kept
        .into_iter()
        .map(|s| {
            let mut counts: Vec<usize> =
                s.tokens.iter().map(|t| word_counts[t]).collect();
            counts.sort_unstable();
            let mid = counts.len() / 2;
            let median = if counts.len() % 2 == 1 {
                counts[mid] as f64
            } else {
                (counts[mid - 1] + counts[mid]) as f64 / 2.0
            };
            (median, s)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.source_index.cmp(&b.1.source_index))
    });
    if let Some(n) = options.take {
        scored.truncate(n);
    }
    if scored.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }

    let scores = scored.iter().map(|(m, _)| *m).collect();
    let sentences = scored.into_iter().map(|(_, s)| s).collect();
    Ok(Corpus {
        sentences,
        word_counts,
        scores,
        counts_note: "counted over filtered sentences before truncation".into(),
    })
}
