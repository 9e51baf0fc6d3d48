//! Persistent formats: the JSON solution file, the error-trace CSV, and the
//! seed-lexicon file.
//!
//! Codes serialize as space-separated byte groups (`"010 101 000"`) and are
//! re-parsed against the embedded algebra configuration on load, so a
//! solution file is self-describing. Saving a loaded file reproduces it byte
//! for byte.

use crate::algebra::{AlgebraConfig, AlgebraError, CategoryCode};
use crate::corpus::Sentence;
use crate::rules::PerplexityReport;
use crate::solver::{
    ErrorTrace, SentenceSolution, Solution, SolverConfig, TransitionRecord,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Algebra(#[from] AlgebraError),
    #[error("bad solution file: {0}")]
    Format(String),
}

/// A solution plus its pointers to the error-trace CSVs written alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub solution: Solution,
    pub error_trace_csv: Option<String>,
    pub restart_trace_csvs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraDto {
    num_bytes: usize,
    bits_per_byte: usize,
    base_type_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct SolverDto {
    beta: f64,
    max_iters: usize,
    restarts: usize,
    rng_seed: u64,
    clusters_per_word: usize,
    relax_multi_base: bool,
    relax_bit_flip: bool,
    bit_flip_penalty: f64,
    seed_lexicon: BTreeMap<String, String>,
    snapshot_policy: String,
}

#[derive(Serialize, Deserialize)]
struct TransitionDto {
    layer: usize,
    branch_position: usize,
    child: String,
    left: String,
    right: String,
    flips: u32,
}

#[derive(Serialize, Deserialize)]
struct SentenceDto {
    tokens: Vec<String>,
    source_index: usize,
    parsed: bool,
    root: String,
    leaf_codes: Vec<String>,
    transitions: Vec<TransitionDto>,
}

#[derive(Serialize, Deserialize)]
struct PerplexityDto {
    branch: f64,
    leaf: f64,
    total: f64,
    n_branches: usize,
    n_leaves: usize,
}

#[derive(Serialize, Deserialize)]
struct SolutionFileDto {
    format_version: u32,
    algebra: AlgebraDto,
    solver: SolverDto,
    run_seed: u64,
    converged: bool,
    lexicon: BTreeMap<String, Vec<String>>,
    sentences: Vec<SentenceDto>,
    perplexity: Option<PerplexityDto>,
    error_trace_csv: Option<String>,
    restart_trace_csvs: Vec<String>,
}

const FORMAT_VERSION: u32 = 1;

fn to_dto(file: &SolutionFile) -> SolutionFileDto {
    let s = &file.solution;
    let a = &s.algebra;
    let code = |c: &CategoryCode| a.render_code(c);
    SolutionFileDto {
        format_version: FORMAT_VERSION,
        algebra: AlgebraDto {
            num_bytes: a.num_bytes(),
            bits_per_byte: a.bits_per_byte(),
            base_type_names: a.base_type_names().to_vec(),
        },
        solver: SolverDto {
            beta: s.config.beta,
            max_iters: s.config.max_iters,
            restarts: s.config.restarts,
            rng_seed: s.config.rng_seed,
            clusters_per_word: s.config.clusters_per_word,
            relax_multi_base: s.config.relax_multi_base,
            relax_bit_flip: s.config.relax_bit_flip,
            bit_flip_penalty: s.config.bit_flip_penalty,
            seed_lexicon: s
                .config
                .seed_lexicon
                .iter()
                .map(|(w, c)| (w.clone(), code(c)))
                .collect(),
            snapshot_policy: "record-at-min-change".into(),
        },
        run_seed: s.run_seed,
        converged: s.converged,
        lexicon: s
            .lexicon
            .iter()
            .map(|(w, cs)| (w.clone(), cs.iter().map(code).collect()))
            .collect(),
        sentences: s
            .sentences
            .iter()
            .map(|sent| SentenceDto {
                tokens: sent.tokens.clone(),
                source_index: sent.source_index,
                parsed: sent.parsed,
                root: code(&sent.root),
                leaf_codes: sent.leaf_codes.iter().map(code).collect(),
                transitions: sent
                    .transitions
                    .iter()
                    .map(|t| TransitionDto {
                        layer: t.layer,
                        branch_position: t.branch_position,
                        child: code(&t.child),
                        left: code(&t.left),
                        right: code(&t.right),
                        flips: t.flips,
                    })
                    .collect(),
            })
            .collect(),
        perplexity: s.perplexity.as_ref().map(|p| PerplexityDto {
            branch: p.branch,
            leaf: p.leaf,
            total: p.total,
            n_branches: p.n_branches,
            n_leaves: p.n_leaves,
        }),
        error_trace_csv: file.error_trace_csv.clone(),
        restart_trace_csvs: file.restart_trace_csvs.clone(),
    }
}

fn from_dto(dto: SolutionFileDto) -> Result<SolutionFile, IoError> {
    if dto.format_version != FORMAT_VERSION {
        return Err(IoError::Format(format!(
            "unsupported format version {}",
            dto.format_version
        )));
    }
    let algebra = AlgebraConfig::with_names(
        dto.algebra.num_bytes,
        dto.algebra.bits_per_byte,
        dto.algebra.base_type_names,
    )?;
    let parse = |s: &str| algebra.parse_code(s);
    let mut seed_lexicon = HashMap::new();
    for (w, c) in &dto.solver.seed_lexicon {
        seed_lexicon.insert(w.clone(), parse(c)?);
    }
    let config = SolverConfig {
        beta: dto.solver.beta,
        max_iters: dto.solver.max_iters,
        restarts: dto.solver.restarts,
        rng_seed: dto.solver.rng_seed,
        clusters_per_word: dto.solver.clusters_per_word,
        relax_multi_base: dto.solver.relax_multi_base,
        relax_bit_flip: dto.solver.relax_bit_flip,
        bit_flip_penalty: dto.solver.bit_flip_penalty,
        seed_lexicon,
    };
    let mut lexicon = BTreeMap::new();
    for (w, cs) in &dto.lexicon {
        let codes: Result<Vec<CategoryCode>, AlgebraError> =
            cs.iter().map(|c| parse(c)).collect();
        lexicon.insert(w.clone(), codes?);
    }
    let mut sentences = Vec::with_capacity(dto.sentences.len());
    for s in &dto.sentences {
        let leaf_codes: Result<Vec<CategoryCode>, AlgebraError> =
            s.leaf_codes.iter().map(|c| parse(c)).collect();
        let mut transitions = Vec::with_capacity(s.transitions.len());
        for t in &s.transitions {
            transitions.push(TransitionRecord {
                layer: t.layer,
                branch_position: t.branch_position,
                child: parse(&t.child)?,
                left: parse(&t.left)?,
                right: parse(&t.right)?,
                flips: t.flips,
            });
        }
        sentences.push(SentenceSolution {
            tokens: s.tokens.clone(),
            source_index: s.source_index,
            parsed: s.parsed,
            root: parse(&s.root)?,
            leaf_codes: leaf_codes?,
            transitions,
        });
    }
    let solution = Solution {
        algebra,
        config,
        run_seed: dto.run_seed,
        converged: dto.converged,
        sentences,
        lexicon,
        trace: ErrorTrace::default(),
        perplexity: dto.perplexity.map(|p| PerplexityReport {
            branch: p.branch,
            leaf: p.leaf,
            total: p.total,
            n_branches: p.n_branches,
            n_leaves: p.n_leaves,
        }),
    };
    Ok(SolutionFile {
        solution,
        error_trace_csv: dto.error_trace_csv,
        restart_trace_csvs: dto.restart_trace_csvs,
    })
}

pub fn solution_to_json(file: &SolutionFile) -> Result<String, IoError> {
    let mut text = serde_json::to_string_pretty(&to_dto(file))?;
    text.push('\n');
    Ok(text)
}

pub fn save_solution_file(file: &SolutionFile, path: &Path) -> Result<(), IoError> {
    fs::write(path, solution_to_json(file)?)?;
    Ok(())
}

pub fn load_solution_file(path: &Path) -> Result<SolutionFile, IoError> {
    let text = fs::read_to_string(path)?;
    from_dto(serde_json::from_str(&text)?)
}

/// CSV with one row per iteration: `iter,total,bit_1,...,bit_m`.
pub fn write_error_trace_csv(trace: &ErrorTrace, code_len: usize, path: &Path) -> Result<(), IoError> {
    let mut out = fs::File::create(path)?;
    write!(out, "iter,total")?;
    for i in 1..=code_len {
        write!(out, ",bit_{i}")?;
    }
    writeln!(out)?;
    for (iter, (total, bits)) in trace.total.iter().zip(&trace.per_bit).enumerate() {
        write!(out, "{},{}", iter + 1, total)?;
        for b in bits {
            write!(out, ",{b}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Load a seed lexicon: either a flat JSON object of word -> code string, or
/// a full solution file (whose lexicon's first code per word is used).
pub fn load_seed_lexicon(
    path: &Path,
    algebra: &AlgebraConfig,
) -> Result<HashMap<String, CategoryCode>, IoError> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let mut seeds = HashMap::new();
    if let Some(lexicon) = value.get("lexicon").and_then(|l| l.as_object()) {
        for (word, codes) in lexicon {
            let first = codes
                .as_array()
                .and_then(|a| a.first())
                .and_then(|c| c.as_str())
                .ok_or_else(|| IoError::Format(format!("bad lexicon entry for `{word}`")))?;
            seeds.insert(word.clone(), algebra.parse_code(first)?);
        }
    } else if let Some(map) = value.as_object() {
        for (word, code) in map {
            let code = code
                .as_str()
                .ok_or_else(|| IoError::Format(format!("bad seed entry for `{word}`")))?;
            seeds.insert(word.clone(), algebra.parse_code(code)?);
        }
    } else {
        return Err(IoError::Format("expected a JSON object".into()));
    }
    Ok(seeds)
}

pub fn read_corpus_lines(path: &Path) -> Result<Vec<String>, IoError> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(str::to_string)
        .collect())
}

pub fn write_sentences(path: &Path, sentences: &[Sentence]) -> Result<(), IoError> {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.text());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
