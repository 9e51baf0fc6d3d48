//! Production rules read off learned parse trees, and what they enable:
//! sampling novel sentences and scoring the grammar's perplexity.
//!
//! Branch rules record how a code split into two; leaf rules record which
//! word a code lexicalized as. Both are keyed by the neighboring codes at
//! the time (boundary markers at sequence ends), with context-free
//! aggregates kept alongside. Looking only at neighboring *codes* (never
//! words) keeps generation free to try unseen word combinations that are
//! algebraically valid.

use crate::algebra::{branch_mismatch, AlgebraConfig, CategoryCode};
use crate::corpus::{Corpus, Sentence};
use crate::solver::{SentenceSolution, Solution};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RulesError {
    #[error("no parsed trees to work with")]
    NoParsedTrees,
    #[error("no branch rule for the identity at the sequence start")]
    NoRootRule,
    #[error("generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("solution replays a rule that is not in the rule set")]
    InconsistentRules,
}

/// A neighbor code, or the sequence boundary.
pub type Ctx = Option<CategoryCode>;
type Key = (CategoryCode, Ctx, Ctx);

#[derive(Debug, Clone)]
struct OptionTable<T: PartialEq> {
    by_context: HashMap<Key, Vec<(T, u32)>>,
    context_free: HashMap<CategoryCode, Vec<(T, u32)>>,
}

impl<T: PartialEq> Default for OptionTable<T> {
    fn default() -> Self {
        Self { by_context: HashMap::new(), context_free: HashMap::new() }
    }
}

fn bump<T: PartialEq + Clone>(opts: &mut Vec<(T, u32)>, option: &T) {
    match opts.iter_mut().find(|(o, _)| o == option) {
        Some((_, c)) => *c += 1,
        None => opts.push((option.clone(), 1)),
    }
}

impl<T: PartialEq + Clone> OptionTable<T> {
    fn record(&mut self, key: Key, option: T) {
        bump(self.by_context.entry(key).or_default(), &option);
        bump(self.context_free.entry(key.0).or_default(), &option);
    }

    fn options(&self, key: &Key, mode: GenMode) -> &[(T, u32)] {
        let found = match mode {
            GenMode::Context => self.by_context.get(key),
            GenMode::ContextFree => self.context_free.get(&key.0),
        };
        found.map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Branch and leaf production rules with use counts, contextual and
/// context-free. Immutable once extracted.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    branch: OptionTable<(CategoryCode, CategoryCode)>,
    leaf: OptionTable<String>,
    /// Rules came from a solution that tolerated bit flips, so replay
    /// validation must too.
    flips_allowed: bool,
}

impl RuleSet {
    pub fn flips_allowed(&self) -> bool {
        self.flips_allowed
    }

    pub fn branch_options(&self, key: &Key, mode: GenMode) -> &[((CategoryCode, CategoryCode), u32)] {
        self.branch.options(key, mode)
    }

    pub fn leaf_options(&self, key: &Key, mode: GenMode) -> &[(String, u32)] {
        self.leaf.options(key, mode)
    }

    pub fn branch_rule_count(&self) -> usize {
        self.branch.by_context.values().map(Vec::len).sum()
    }

    pub fn leaf_rule_count(&self) -> usize {
        self.leaf.by_context.values().map(Vec::len).sum()
    }

    /// Context-summed counts must equal the context-free aggregates.
    pub fn aggregates_consistent(&self) -> bool {
        fn check<T: PartialEq + Clone>(table: &OptionTable<T>) -> bool {
            let mut sums: HashMap<CategoryCode, u32> = HashMap::new();
            for ((code, _, _), opts) in &table.by_context {
                *sums.entry(*code).or_default() += opts.iter().map(|(_, c)| c).sum::<u32>();
            }
            table.context_free.iter().all(|(code, opts)| {
                sums.get(code).copied().unwrap_or(0)
                    == opts.iter().map(|(_, c)| c).sum::<u32>()
            }) && sums.len() == table.context_free.len()
        }
        check(&self.branch) && check(&self.leaf)
    }
}

/// Walk one parsed tree top-down, reporting every branching event (with its
/// pre-branch neighbor codes) and every leaf (with its leaf-layer
/// neighbors).
fn replay_tree<FB, FL>(sentence: &SentenceSolution, mut on_branch: FB, mut on_leaf: FL)
where
    FB: FnMut(Key, (CategoryCode, CategoryCode)),
    FL: FnMut(Key, &str),
{
    let mut seq: Vec<CategoryCode> = vec![sentence.root];
    for rec in &sentence.transitions {
        let p = rec.branch_position - 1;
        let left_ctx = if p > 0 { Some(seq[p - 1]) } else { None };
        let right_ctx = seq.get(p + 1).copied();
        on_branch((rec.child, left_ctx, right_ctx), (rec.left, rec.right));
        seq.splice(p..=p, [rec.left, rec.right]);
    }
    debug_assert_eq!(seq, sentence.leaf_codes);
    for (i, code) in seq.iter().enumerate() {
        let left_ctx = if i > 0 { Some(seq[i - 1]) } else { None };
        let right_ctx = seq.get(i + 1).copied();
        on_leaf((*code, left_ctx, right_ctx), &sentence.tokens[i]);
    }
}

/// Read branch and leaf rules (with contexts and use counts) off the parsed
/// trees of a solution.
pub fn extract_rules(solution: &Solution) -> Result<RuleSet, RulesError> {
    let mut rules = RuleSet {
        flips_allowed: solution.config.relax_bit_flip,
        ..Default::default()
    };
    let mut any = false;
    for sentence in solution.sentences.iter().filter(|s| s.parsed) {
        any = true;
        replay_tree(
            sentence,
            |key, option| rules.branch.record(key, option),
            |key, word| rules.leaf.record(key, word.to_string()),
        );
    }
    if !any {
        return Err(RulesError::NoParsedTrees);
    }
    Ok(rules)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    Context,
    ContextFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Counts,
    Uniform,
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub mode: GenMode,
    pub weighting: Weighting,
    pub max_tokens: usize,
    pub max_retries: usize,
    pub rng_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            mode: GenMode::Context,
            weighting: Weighting::Counts,
            max_tokens: 30,
            max_retries: 10,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DerivationNode {
    pub code: CategoryCode,
    pub children: Option<(usize, usize)>,
    pub word: Option<String>,
}

/// The full derivation of one generated sentence: a binary tree from the
/// identity down to lexicalized leaves.
#[derive(Debug, Clone)]
pub struct DerivationTree {
    pub nodes: Vec<DerivationNode>,
    pub root: usize,
}

impl DerivationTree {
    /// Every branching event must replay through the contraction (allowing
    /// one flipped parent bit when the source rules did).
    pub fn replay_valid(&self, algebra: &AlgebraConfig, flips_allowed: bool) -> bool {
        let allowed = if flips_allowed { 1 } else { 0 };
        self.nodes[self.root].code.is_identity()
            && self.nodes.iter().all(|n| match n.children {
                Some((l, r)) => {
                    branch_mismatch(&n.code, &self.nodes[l].code, &self.nodes[r].code, algebra)
                        <= allowed
                }
                None => n.word.is_some(),
            })
    }

    /// Indented text rendering, one node per line.
    pub fn render(&self, algebra: &AlgebraConfig) -> String {
        let mut out = String::new();
        self.render_node(self.root, 0, algebra, &mut out);
        out
    }

    fn render_node(&self, id: usize, depth: usize, algebra: &AlgebraConfig, out: &mut String) {
        let node = &self.nodes[id];
        out.push_str(&"  ".repeat(depth));
        out.push_str(&algebra.render_code(&node.code));
        if let Some(word) = &node.word {
            out.push_str("  ");
            out.push_str(word);
        }
        out.push('\n');
        if let Some((l, r)) = node.children {
            self.render_node(l, depth + 1, algebra, out);
            self.render_node(r, depth + 1, algebra, out);
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedSentence {
    pub sentence: Sentence,
    pub tree: DerivationTree,
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[u64]) -> usize {
    let total: u64 = weights.iter().sum();
    debug_assert!(total > 0);
    let mut x = rng.gen_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    unreachable!()
}

struct GenAttempt<'a> {
    rules: &'a RuleSet,
    gen: &'a GenConfig,
    nodes: Vec<DerivationNode>,
}

impl GenAttempt<'_> {
    fn weight_of(&self, count: u32) -> u64 {
        match self.gen.weighting {
            Weighting::Counts => count as u64,
            Weighting::Uniform => 1,
        }
    }

    /// Grow the structure from a single identity node; every step picks an
    /// unfrozen node uniformly and has its branch rules compete with a
    /// single terminalize option carrying the node's total leaf-rule mass.
    ///
    /// A node whose current context offers nothing is not ready yet (its
    /// neighbors may still change), so the pick is uniform over the nodes
    /// that do have options; the attempt only dies when no unfrozen node
    /// has any.
    fn build_structure(&mut self, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let identity = CategoryCode::zero(self.nodes_code_len());
        self.nodes.push(DerivationNode { code: identity, children: None, word: None });
        let mut seq = vec![0usize];
        let mut frozen = vec![false];
        loop {
            if frozen.iter().all(|&f| f) {
                return Some(seq);
            }
            let ready: Vec<usize> = (0..seq.len())
                .filter(|&i| !frozen[i])
                .filter(|&i| {
                    let key = self.key_at(&seq, i);
                    let can_branch = seq.len() < self.gen.max_tokens
                        && !self.rules.branch_options(&key, self.gen.mode).is_empty();
                    can_branch || !self.rules.leaf_options(&key, self.gen.mode).is_empty()
                })
                .collect();
            if ready.is_empty() {
                return None; // dead end; retry the sentence
            }
            let pos = ready[rng.gen_range(0..ready.len())];
            let key = self.key_at(&seq, pos);
            let branch_opts = if seq.len() >= self.gen.max_tokens {
                &[]
            } else {
                self.rules.branch_options(&key, self.gen.mode)
            };
            let leaf_mass: u64 = {
                let opts = self.rules.leaf_options(&key, self.gen.mode);
                match self.gen.weighting {
                    Weighting::Counts => opts.iter().map(|(_, c)| *c as u64).sum(),
                    Weighting::Uniform => u64::from(!opts.is_empty()),
                }
            };
            let mut weights: Vec<u64> =
                branch_opts.iter().map(|(_, c)| self.weight_of(*c)).collect();
            weights.push(leaf_mass);
            let choice = pick_weighted(rng, &weights);
            if choice == branch_opts.len() {
                frozen[pos] = true;
            } else {
                let (left, right) = branch_opts[choice].0;
                let l = self.push(left);
                let r = self.push(right);
                self.nodes[seq[pos]].children = Some((l, r));
                seq.splice(pos..=pos, [l, r]);
                frozen.splice(pos..=pos, [false, false]);
            }
        }
    }

    /// Assign words left to right against the final neighbor codes, falling
    /// back to the context-free table when a contextual key is unseen.
    fn lexicalize(&mut self, seq: &[usize], rng: &mut ChaCha8Rng) -> Option<Vec<String>> {
        let mut words = Vec::with_capacity(seq.len());
        for pos in 0..seq.len() {
            let key = self.key_at(seq, pos);
            let mut opts = self.rules.leaf_options(&key, self.gen.mode);
            if opts.is_empty() {
                opts = self.rules.leaf_options(&key, GenMode::ContextFree);
            }
            if opts.is_empty() {
                return None;
            }
            let weights: Vec<u64> = opts.iter().map(|(_, c)| self.weight_of(*c)).collect();
            let word = opts[pick_weighted(rng, &weights)].0.clone();
            self.nodes[seq[pos]].word = Some(word.clone());
            words.push(word);
        }
        Some(words)
    }

    fn key_at(&self, seq: &[usize], pos: usize) -> Key {
        let code = self.nodes[seq[pos]].code;
        let left = if pos > 0 { Some(self.nodes[seq[pos - 1]].code) } else { None };
        let right = seq.get(pos + 1).map(|&i| self.nodes[i].code);
        (code, left, right)
    }

    fn push(&mut self, code: CategoryCode) -> usize {
        self.nodes.push(DerivationNode { code, children: None, word: None });
        self.nodes.len() - 1
    }

    fn nodes_code_len(&self) -> usize {
        // Any rule key carries the width; the root-rule precondition
        // guarantees at least one exists.
        self.rules
            .branch
            .context_free
            .keys()
            .next()
            .map(|c| c.len())
            .unwrap_or(0)
    }
}

/// Generate `count` sentences with their derivation traces, deterministically
/// for a given seed.
pub fn generate_sentences(
    rules: &RuleSet,
    gen: &GenConfig,
    count: usize,
) -> Result<Vec<GeneratedSentence>, RulesError> {
    let width = rules
        .branch
        .context_free
        .keys()
        .next()
        .map(|c| c.len())
        .ok_or(RulesError::NoRootRule)?;
    let identity = CategoryCode::zero(width);
    if rules
        .branch_options(&(identity, None, None), GenMode::Context)
        .is_empty()
        && rules
            .branch_options(&(identity, None, None), GenMode::ContextFree)
            .is_empty()
    {
        return Err(RulesError::NoRootRule);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(gen.rng_seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut produced = None;
        for _ in 0..gen.max_retries.max(1) {
            let mut attempt = GenAttempt { rules, gen, nodes: Vec::new() };
            let Some(seq) = attempt.build_structure(&mut rng) else { continue };
            let Some(words) = attempt.lexicalize(&seq, &mut rng) else { continue };
            produced = Some(GeneratedSentence {
                sentence: Sentence::new(words, index),
                tree: DerivationTree { nodes: attempt.nodes, root: 0 },
            });
            break;
        }
        match produced {
            Some(g) => out.push(g),
            None => return Err(RulesError::GenerationFailed { attempts: gen.max_retries }),
        }
    }
    Ok(out)
}

/// Generate a single sentence; shorthand for a batch of one.
pub fn generate_sentence(rules: &RuleSet, gen: &GenConfig) -> Result<GeneratedSentence, RulesError> {
    Ok(generate_sentences(rules, gen, 1)?.pop().expect("one sentence"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerplexityReport {
    pub branch: f64,
    pub leaf: f64,
    pub total: f64,
    pub n_branches: usize,
    pub n_leaves: usize,
}

impl PerplexityReport {
    pub fn new(branch: f64, leaf: f64, n_branches: usize, n_leaves: usize) -> Self {
        Self { branch, leaf, total: (branch * leaf).sqrt(), n_branches, n_leaves }
    }
}

/// Exponentiated mean negative log-probability of the rules used by the
/// parsed trees: branch rules against the branch mass at their key, leaf
/// rules against the leaf mass, combined geometrically.
pub fn perplexity(
    rules: &RuleSet,
    solution: &Solution,
    mode: GenMode,
) -> Result<PerplexityReport, RulesError> {
    let mut sum_log_b = 0.0;
    let mut n_b = 0usize;
    let mut sum_log_l = 0.0;
    let mut n_l = 0usize;
    let bad = std::cell::Cell::new(false);
    for sentence in solution.sentences.iter().filter(|s| s.parsed) {
        replay_tree(
            sentence,
            |key, option| {
                let opts = rules.branch_options(&key, mode);
                let total: u64 = opts.iter().map(|(_, c)| *c as u64).sum();
                match opts.iter().find(|(o, _)| *o == option) {
                    Some((_, c)) => {
                        sum_log_b += (*c as f64 / total as f64).ln();
                        n_b += 1;
                    }
                    None => bad.set(true),
                }
            },
            |key, word| {
                let opts = rules.leaf_options(&key, mode);
                let total: u64 = opts.iter().map(|(_, c)| *c as u64).sum();
                match opts.iter().find(|(o, _)| o == word) {
                    Some((_, c)) => {
                        sum_log_l += (*c as f64 / total as f64).ln();
                        n_l += 1;
                    }
                    None => bad.set(true),
                }
            },
        );
    }
    if bad.get() {
        return Err(RulesError::InconsistentRules);
    }
    if n_b == 0 || n_l == 0 {
        return Err(RulesError::NoParsedTrees);
    }
    Ok(PerplexityReport::new(
        (-sum_log_b / n_b as f64).exp(),
        (-sum_log_l / n_l as f64).exp(),
        n_b,
        n_l,
    ))
}

/// Fraction of generated sentences whose token sequence appears verbatim in
/// the training corpus.
pub fn reproduction_rate(generated: &[Sentence], training: &Corpus) -> f64 {
    if generated.is_empty() {
        return 0.0;
    }
    let seen: std::collections::HashSet<&[String]> =
        training.sentences.iter().map(|s| s.tokens.as_slice()).collect();
    let hits = generated.iter().filter(|s| seen.contains(s.tokens.as_slice())).count();
    hits as f64 / generated.len() as f64
}
