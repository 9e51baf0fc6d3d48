//! The projection solver.
//!
//! Every sentence gets a layered parse-tree scaffold: one node at the root,
//! two in the layer above, and so on up to one node per token. Each non-root
//! node carries two replicas of its category vector so that the two
//! constraint families can act independently:
//!
//! * set A — every adjacent layer pair is connected by a single algebraically
//!   valid branching event with binary codes, and all leaves of a given word
//!   agree (per cluster);
//! * set B — the root is the identity, the two replicas of every node agree,
//!   and the central bits of every node (except the rightmost per layer) sum
//!   to one.
//!
//! The concatenation of all replicas is one real vector `v`; the solver
//! iterates the relaxed-reflect-reflect update toward a point of A ∩ B.
//!
//! Layer-pair and per-word sub-projections touch disjoint slices of `v`, so
//! they run in parallel when the `parallel` feature is on; results are
//! bit-identical to sequential execution either way.

mod extract;
mod project_a;
mod project_b;
mod rrr;

pub use extract::{
    extract_solution, failure_report, FailureEntry, SentenceSolution, Solution, TransitionRecord,
};
pub use project_a::project_a;
pub use project_b::project_b;
pub use rrr::{rrr_run, rrr_step, ErrorTrace, RrrOutcome, StepChange, EXACT_CHANGE};

use crate::algebra::{AlgebraConfig, CategoryCode};
use crate::corpus::Corpus;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("sentence {index} has fewer than two tokens")]
    SentenceTooShort { index: usize },
    #[error("seed code for `{word}` does not fit the algebra configuration")]
    SeedCodeMismatch { word: String },
    #[error("solutions were computed over different corpora")]
    MismatchedCorpora,
    #[error("bad solver configuration: {0}")]
    BadConfig(String),
}

/// Iteration strategy for the data-parallel projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}


#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Update aggressiveness, in (0, 1].
    pub beta: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub rng_seed: u64,
    /// Leaf clusters per word; 1 means plain averaging.
    pub clusters_per_word: usize,
    /// Drop the central-bit constraint, allowing several (or zero) base
    /// types per node.
    pub relax_multi_base: bool,
    /// Tolerate one flipped parent bit per branching event.
    pub relax_bit_flip: bool,
    /// Cost added when a branching event uses its bit flip.
    pub bit_flip_penalty: f64,
    /// Known word codes to pin during the concur projection.
    pub seed_lexicon: HashMap<String, CategoryCode>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            max_iters: 10_000,
            restarts: 10,
            rng_seed: 0,
            clusters_per_word: 1,
            relax_multi_base: false,
            relax_bit_flip: false,
            bit_flip_penalty: 0.0,
            seed_lexicon: HashMap::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(SolverError::BadConfig(format!("beta {} not in (0, 1]", self.beta)));
        }
        if self.clusters_per_word < 1 {
            return Err(SolverError::BadConfig("clusters_per_word must be >= 1".into()));
        }
        if self.bit_flip_penalty < 0.0 {
            return Err(SolverError::BadConfig("bit_flip_penalty must be >= 0".into()));
        }
        Ok(())
    }
}

/// Replica layout of one parse tree inside `v`. Offsets are relative to the
/// tree's own block.
///
/// Layers are numbered 1 (root) through T (leaves); layer `l` has `l` nodes.
/// The block for the layer pair (l, l+1) holds the `replica_up` values of
/// layer `l` followed by the `replica_down` values of layer `l+1`, so each
/// layer constraint owns one contiguous block. Leaf `replica_up` values sit
/// in their own block at the end and belong to the word constraints.
#[derive(Debug, Clone)]
pub struct TreeLayout {
    pub token_count: usize,
    pub start: usize,
    pub len: usize,
    pair_rel: Vec<usize>,
    leaf_rel: usize,
}

impl TreeLayout {
    fn new(token_count: usize, start: usize, code_len: usize) -> Self {
        let mut pair_rel = Vec::with_capacity(token_count - 1);
        let mut off = 0;
        for ell in 1..token_count {
            pair_rel.push(off);
            off += (2 * ell + 1) * code_len;
        }
        let leaf_rel = off;
        off += token_count * code_len;
        Self { token_count, start, len: off, pair_rel, leaf_rel }
    }

    /// Relative offset of the `replica_up` slice of node `i` in layer `l`
    /// (both 1-based). For leaves this is the word-constraint replica.
    pub fn up_rel(&self, layer: usize, i: usize, m: usize) -> usize {
        debug_assert!(1 <= i && i <= layer && layer <= self.token_count);
        if layer < self.token_count {
            self.pair_rel[layer - 1] + (i - 1) * m
        } else {
            self.leaf_rel + (i - 1) * m
        }
    }

    /// Relative offset of the `replica_down` slice of node `i` in layer
    /// `l >= 2`.
    pub fn down_rel(&self, layer: usize, i: usize, m: usize) -> usize {
        debug_assert!(2 <= layer && 1 <= i && i <= layer);
        self.pair_rel[layer - 2] + (layer - 1) * m + (i - 1) * m
    }

    pub fn pair_range(&self, layer: usize, m: usize) -> Range<usize> {
        let rel = self.pair_rel[layer - 1];
        self.start + rel..self.start + rel + (2 * layer + 1) * m
    }

    pub fn leaf_range(&self, m: usize) -> Range<usize> {
        self.start + self.leaf_rel..self.start + self.leaf_rel + self.token_count * m
    }
}

/// Full replica layout: trees in corpus order, plus the word index used by
/// the concur and word constraints.
#[derive(Debug, Clone)]
pub struct StateLayout {
    pub algebra: AlgebraConfig,
    pub trees: Vec<TreeLayout>,
    pub total_len: usize,
    /// Word id, per tree and token position.
    pub token_word: Vec<Vec<usize>>,
    /// First-occurrence-ordered word names.
    pub word_names: Vec<String>,
    /// Absolute offsets of each word's leaf `replica_up` slices.
    pub word_leaves: Vec<Vec<usize>>,
    /// Pinned code per word, resolved from the seed lexicon.
    pub word_seeds: Vec<Option<CategoryCode>>,
}

impl StateLayout {
    pub fn build(
        corpus: &Corpus,
        algebra: &AlgebraConfig,
        config: &SolverConfig,
    ) -> Result<Self, SolverError> {
        if corpus.sentences.is_empty() {
            return Err(SolverError::EmptyCorpus);
        }
        let m = algebra.code_len();
        let mut trees = Vec::with_capacity(corpus.sentences.len());
        let mut token_word = Vec::with_capacity(corpus.sentences.len());
        let mut word_ids: HashMap<&str, usize> = HashMap::new();
        let mut word_names: Vec<String> = Vec::new();
        let mut word_leaves: Vec<Vec<usize>> = Vec::new();
        let mut start = 0usize;
        for (idx, sentence) in corpus.sentences.iter().enumerate() {
            if sentence.tokens.len() < 2 {
                return Err(SolverError::SentenceTooShort { index: idx });
            }
            let tree = TreeLayout::new(sentence.tokens.len(), start, m);
            let mut ids = Vec::with_capacity(sentence.tokens.len());
            for (pos, token) in sentence.tokens.iter().enumerate() {
                let id = *word_ids.entry(token.as_str()).or_insert_with(|| {
                    word_names.push(token.clone());
                    word_leaves.push(Vec::new());
                    word_names.len() - 1
                });
                ids.push(id);
                word_leaves[id].push(tree.start + tree.leaf_rel + pos * m);
            }
            start += tree.len;
            trees.push(tree);
            token_word.push(ids);
        }
        let mut word_seeds = vec![None; word_names.len()];
        for (word, code) in &config.seed_lexicon {
            if let Some(&id) = word_ids.get(word.as_str()) {
                if code.len() != m {
                    return Err(SolverError::SeedCodeMismatch { word: word.clone() });
                }
                word_seeds[id] = Some(*code);
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            trees,
            total_len: start,
            token_word,
            word_names,
            word_leaves,
            word_seeds,
        })
    }

    pub fn code_len(&self) -> usize {
        self.algebra.code_len()
    }
}

/// The search point `v` plus its layout.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub layout: StateLayout,
    pub v: Vec<f64>,
}

/// Allocate the replica structure and fill `v` i.i.d. uniform on [0, 1)
/// from the configured seed.
pub fn init_state(
    corpus: &Corpus,
    algebra: &AlgebraConfig,
    config: &SolverConfig,
) -> Result<SolverState, SolverError> {
    config.validate()?;
    let layout = StateLayout::build(corpus, algebra, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let v = (0..layout.total_len).map(|_| rng.gen::<f64>()).collect();
    Ok(SolverState { layout, v })
}

/// Split `v` into mutable views over sorted, pairwise disjoint ranges.
pub(crate) fn split_ranges<'a>(mut v: &'a mut [f64], ranges: &[Range<usize>]) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(ranges.len());
    let mut cursor = 0usize;
    for r in ranges {
        debug_assert!(r.start >= cursor, "ranges must be sorted and disjoint");
        let (_, rest) = v.split_at_mut(r.start - cursor);
        let (block, rest) = rest.split_at_mut(r.end - r.start);
        out.push(block);
        v = rest;
        cursor = r.end;
    }
    out
}

pub(crate) fn run_units<T, F>(units: &mut [T], exec: Execution, f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    match exec {
        Execution::Sequential => units.iter_mut().for_each(&f),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            units.par_iter_mut().for_each(f);
        }
    }
}

pub(crate) fn map_units<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
    }
}
