//! Rounding a search point into a reported solution.
//!
//! The best-guess iterate is pushed through the concur projection, rounded
//! bit by bit, and read back as one code per node. Each layer transition is
//! then scored discretely: the branch position that minimizes the number of
//! mismatched bits wins, and a tree counts as parsed only when its root is
//! the identity and every transition is exact (or within one flipped parent
//! bit per branching event under the bit-flip relaxation).

use super::{project_b, Execution, SolverConfig, SolverError, StateLayout};
use crate::algebra::{branch_mismatch, round_bits, AlgebraConfig, CategoryCode};
use crate::rules::PerplexityReport;
use crate::solver::ErrorTrace;
use std::collections::BTreeMap;

/// One branching event: at `branch_position` (1-based) of layer `layer`, the
/// child code expands into `(left, right)` in the layer above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionRecord {
    pub layer: usize,
    pub branch_position: usize,
    pub child: CategoryCode,
    pub left: CategoryCode,
    pub right: CategoryCode,
    /// Parent bits that deviate from the best exact decomposition.
    pub flips: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSolution {
    pub tokens: Vec<String>,
    pub source_index: usize,
    pub parsed: bool,
    pub root: CategoryCode,
    pub leaf_codes: Vec<CategoryCode>,
    pub transitions: Vec<TransitionRecord>,
}

impl SentenceSolution {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn total_flips(&self) -> u32 {
        self.transitions.iter().map(|t| t.flips).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub algebra: AlgebraConfig,
    pub config: SolverConfig,
    /// The seed this particular run was initialized with (restarts derive
    /// their own from the configured base seed).
    pub run_seed: u64,
    /// The iteration reached a fixed point (change below the exact-solution
    /// threshold). Best-guess trees can validate without this.
    pub converged: bool,
    pub sentences: Vec<SentenceSolution>,
    pub lexicon: BTreeMap<String, Vec<CategoryCode>>,
    pub trace: ErrorTrace,
    pub perplexity: Option<PerplexityReport>,
}

impl Solution {
    pub fn parsed_count(&self) -> usize {
        self.sentences.iter().filter(|s| s.parsed).count()
    }
}

fn hamming(a: &CategoryCode, b: &CategoryCode) -> u32 {
    (0..a.len()).filter(|&i| a.get(i) != b.get(i)).count() as u32
}

/// Round the snapshot through the concur projection and validate every tree.
pub fn extract_solution(
    snapshot: &[f64],
    layout: &StateLayout,
    config: &SolverConfig,
    run_seed: u64,
    trace: ErrorTrace,
) -> Solution {
    let m = layout.code_len();
    let algebra = &layout.algebra;
    let mut concurred = snapshot.to_vec();
    project_b(&mut concurred, layout, config, Execution::Sequential);

    let allowed_flips = if config.relax_bit_flip { 1 } else { 0 };
    let mut sentences = Vec::with_capacity(layout.trees.len());
    let mut lexicon: BTreeMap<String, Vec<CategoryCode>> = BTreeMap::new();

    for (tree_idx, tree) in layout.trees.iter().enumerate() {
        let t = tree.token_count;
        // One rounded code per node; after the concur projection both
        // replicas agree, so the up replica is enough.
        let layers: Vec<Vec<CategoryCode>> = (1..=t)
            .map(|layer| {
                (1..=layer)
                    .map(|i| {
                        let off = tree.start + tree.up_rel(layer, i, m);
                        round_bits(&concurred[off..off + m])
                    })
                    .collect()
            })
            .collect();

        let mut parsed = layers[0][0].is_identity();
        let mut transitions = Vec::with_capacity(t - 1);
        for ell in 1..t {
            let lower = &layers[ell - 1];
            let upper = &layers[ell];
            let mut best = (u32::MAX, u32::MAX, 0usize); // (preserved, branch, p)
            for p in 0..ell {
                let mut preserved = 0;
                for (j, low) in lower.iter().enumerate() {
                    if j == p {
                        continue;
                    }
                    let hi = if j < p { j } else { j + 1 };
                    preserved += hamming(low, &upper[hi]);
                }
                let branch = branch_mismatch(&lower[p], &upper[p], &upper[p + 1], algebra);
                if (preserved, branch, p) < best {
                    best = (preserved, branch, p);
                }
            }
            let (preserved, branch, p) = best;
            if preserved != 0 || branch > allowed_flips {
                parsed = false;
            }
            transitions.push(TransitionRecord {
                layer: ell,
                branch_position: p + 1,
                child: lower[p],
                left: upper[p],
                right: upper[p + 1],
                flips: branch,
            });
        }

        let leaf_codes = layers[t - 1].clone();
        let tokens: Vec<String> = layout.token_word[tree_idx]
            .iter()
            .map(|&w| layout.word_names[w].clone())
            .collect();
        for (token, code) in tokens.iter().zip(&leaf_codes) {
            let codes = lexicon.entry(token.clone()).or_default();
            if !codes.contains(code) {
                codes.push(*code);
            }
        }
        sentences.push(SentenceSolution {
            tokens,
            source_index: tree_idx,
            parsed,
            root: layers[0][0],
            leaf_codes,
            transitions,
        });
    }

    // Leaf membership in the word's cluster codes holds by construction of
    // the lexicon; keep the check in debug builds to guard the invariant.
    debug_assert!(sentences.iter().all(|s| {
        s.tokens
            .iter()
            .zip(&s.leaf_codes)
            .all(|(tok, code)| lexicon[tok].contains(code))
    }));

    let converged = trace
        .total
        .last()
        .is_some_and(|&change| change < crate::solver::EXACT_CHANGE);
    Solution {
        algebra: algebra.clone(),
        config: config.clone(),
        run_seed,
        converged,
        sentences,
        lexicon,
        trace,
        perplexity: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureEntry {
    pub source_index: usize,
    pub text: String,
    pub failures: usize,
}

/// Count, across restarts over the same corpus, how often each sentence
/// failed to parse; descending by count, ties by corpus position. Sentences
/// that always parse are omitted.
pub fn failure_report(solutions: &[Solution]) -> Result<Vec<FailureEntry>, SolverError> {
    let Some(first) = solutions.first() else {
        return Err(SolverError::EmptyCorpus);
    };
    for other in &solutions[1..] {
        let same = first.sentences.len() == other.sentences.len()
            && first
                .sentences
                .iter()
                .zip(&other.sentences)
                .all(|(a, b)| a.tokens == b.tokens && a.source_index == b.source_index);
        if !same {
            return Err(SolverError::MismatchedCorpora);
        }
    }
    let mut entries: Vec<FailureEntry> = first
        .sentences
        .iter()
        .enumerate()
        .map(|(i, s)| FailureEntry {
            source_index: s.source_index,
            text: s.text(),
            failures: solutions.iter().filter(|sol| !sol.sentences[i].parsed).count(),
        })
        .filter(|e| e.failures > 0)
        .collect();
    entries.sort_by(|a, b| b.failures.cmp(&a.failures).then(a.source_index.cmp(&b.source_index)));
    Ok(entries)
}
