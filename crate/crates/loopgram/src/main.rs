use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use loopgram::algebra::{decode_expression, AlgebraConfig};
use loopgram::corpus::{prepare_corpus, Corpus, PrepOptions};
use loopgram::io;
use loopgram::rules::{
    extract_rules, generate_sentences, perplexity, reproduction_rate, GenConfig, GenMode,
    Weighting,
};
use loopgram::solver::{failure_report, SolverConfig};
use loopgram::synth::{synth_generate, SyntheticGrammar};
use loopgram::train::train;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Grammar induction over small corpora: learn binary word-category codes
/// and parse trees by alternating projections, then read off production
/// rules to generate new sentences.
#[derive(Parser)]
#[command(name = "loopgram", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Context,
    Free,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Counts,
    Uniform,
}

#[derive(Subcommand)]
enum Command {
    /// Write sentences drawn from the built-in synthetic grammar.
    Synth {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Filter and sort raw text into a training corpus.
    Prep {
        #[arg(long = "in")]
        input: PathBuf,
        /// Keep only the best-scoring N sentences.
        #[arg(long)]
        take: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Minimum words per sentence, punctuation excluded.
        #[arg(long, default_value_t = 4)]
        min_words: usize,
        /// Lines containing this marker are dropped.
        #[arg(long, default_value = "@")]
        redaction: String,
    },
    /// Learn category codes and parse trees for a corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Base types per category vector.
        #[arg(long, default_value_t = 3)]
        bytes: usize,
        /// Bits per byte (odd).
        #[arg(long, default_value_t = 3)]
        bits: usize,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long)]
        seed: u64,
        /// Leaf clusters per word.
        #[arg(long, default_value_t = 1)]
        clusters: usize,
        /// Allow more than one base type per node.
        #[arg(long)]
        multi_base: bool,
        /// Tolerate one flipped parent bit per branching event.
        #[arg(long)]
        bit_flip: bool,
        #[arg(long, requires = "bit_flip", default_value_t = 0.0)]
        flip_penalty: f64,
        /// JSON file of known word codes (flat map or a solution file).
        #[arg(long)]
        seed_lexicon: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample sentences from a learned solution.
    Generate {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Context)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = WeightingArg::Counts)]
        weighting: WeightingArg,
        #[arg(long)]
        seed: u64,
        /// Also print each sentence's derivation tree.
        #[arg(long)]
        trace: bool,
    },
    /// Print the branch, leaf, and total perplexity of a solution.
    Perplexity {
        #[arg(long)]
        solution: PathBuf,
    },
    /// Print the learned word-code table.
    Lexicon {
        #[arg(long)]
        solution: PathBuf,
        /// Group by code, largest categories first.
        #[arg(long)]
        by_code: bool,
    },
    /// Count, across several solutions, which sentences fail to parse most.
    Failures {
        #[arg(long = "solutions", num_args = 1.., required = true)]
        solutions: Vec<PathBuf>,
    },
    /// Show every training sentence containing a word, with its learned
    /// code(s).
    Trace {
        #[arg(long)]
        word: String,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Synth { count, seed, out } => {
            let grammar = SyntheticGrammar::standard();
            let sentences = synth_generate(&grammar, count, seed)?;
            io::write_sentences(&out, &sentences)?;
        }
        Command::Prep { input, take, out, min_words, redaction } => {
            let lines = io::read_corpus_lines(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let options = PrepOptions {
                min_words,
                redaction_marker: redaction,
                take,
                ..Default::default()
            };
            let corpus = prepare_corpus(lines.iter().map(String::as_str), &options)?;
            io::write_sentences(&out, &corpus.sentences)?;
        }
        Command::Train {
            corpus,
            bytes,
            bits,
            beta,
            iters,
            restarts,
            seed,
            clusters,
            multi_base,
            bit_flip,
            flip_penalty,
            seed_lexicon,
            out,
        } => {
            let lines = io::read_corpus_lines(&corpus)
                .with_context(|| format!("reading {}", corpus.display()))?;
            let corpus = Corpus::from_lines(lines.iter().map(String::as_str))?;
            let algebra = AlgebraConfig::new(bytes, bits)?;
            let seeds: HashMap<_, _> = match seed_lexicon {
                Some(path) => io::load_seed_lexicon(&path, &algebra)
                    .with_context(|| format!("reading {}", path.display()))?,
                None => HashMap::new(),
            };
            if !(0.0..=1.0).contains(&beta) || beta == 0.0 {
                bail!("--beta must be in (0, 1]");
            }
            let config = SolverConfig {
                beta,
                max_iters: iters,
                restarts,
                rng_seed: seed,
                clusters_per_word: clusters,
                relax_multi_base: multi_base,
                relax_bit_flip: bit_flip,
                bit_flip_penalty: flip_penalty,
                seed_lexicon: seeds,
            };
            run_train(&corpus, &algebra, &config, &out)?;
        }
        Command::Generate { solution, count, mode, weighting, seed, trace } => {
            let file = io::load_solution_file(&solution)?;
            let rules = extract_rules(&file.solution)?;
            let gen = GenConfig {
                mode: match mode {
                    ModeArg::Context => GenMode::Context,
                    ModeArg::Free => GenMode::ContextFree,
                },
                weighting: match weighting {
                    WeightingArg::Counts => Weighting::Counts,
                    WeightingArg::Uniform => Weighting::Uniform,
                },
                rng_seed: seed,
                ..Default::default()
            };
            let generated = generate_sentences(&rules, &gen, count)?;
            for g in &generated {
                println!("{}", g.sentence.text());
                if trace {
                    print!("{}", indent(&g.tree.render(&file.solution.algebra)));
                }
            }
            let training = Corpus::from_sentences(
                file.solution
                    .sentences
                    .iter()
                    .map(|s| loopgram::corpus::Sentence::new(s.tokens.clone(), s.source_index))
                    .collect(),
            )?;
            let sentences: Vec<_> = generated.into_iter().map(|g| g.sentence).collect();
            let rate = reproduction_rate(&sentences, &training);
            eprintln!("reproduction rate: {:.4} ({} sentences)", rate, sentences.len());
        }
        Command::Perplexity { solution } => {
            let file = io::load_solution_file(&solution)?;
            let rules = extract_rules(&file.solution)?;
            let report = perplexity(&rules, &file.solution, GenMode::Context)?;
            println!("branch perplexity: {}", report.branch);
            println!("leaf perplexity: {}", report.leaf);
            println!("total perplexity: {}", report.total);
        }
        Command::Lexicon { solution, by_code } => {
            let file = io::load_solution_file(&solution)?;
            print_lexicon(&file.solution, by_code);
        }
        Command::Failures { solutions } => {
            let mut loaded = Vec::with_capacity(solutions.len());
            for path in &solutions {
                loaded.push(io::load_solution_file(path)?.solution);
            }
            let report = failure_report(&loaded)?;
            for entry in report {
                println!("{}\t{}", entry.failures, entry.text);
            }
        }
        Command::Trace { word, corpus, solution } => {
            let file = io::load_solution_file(&solution)?;
            let lines = io::read_corpus_lines(&corpus)
                .with_context(|| format!("reading {}", corpus.display()))?;
            match file.solution.lexicon.get(&word) {
                Some(codes) => {
                    for code in codes {
                        println!(
                            "code: {}  ({})",
                            file.solution.algebra.render_code(code),
                            decode_expression(code, &file.solution.algebra)?
                        );
                    }
                }
                None => println!("no learned code for `{word}`"),
            }
            let mut any = false;
            for line in &lines {
                if line.split_whitespace().any(|t| t == word) {
                    println!("{line}");
                    any = true;
                }
            }
            if !any {
                println!("no training sentence contains `{word}`");
            }
        }
    }
    Ok(())
}

fn run_train(
    corpus: &Corpus,
    algebra: &AlgebraConfig,
    config: &SolverConfig,
    out: &Path,
) -> Result<()> {
    let outcome = train(corpus, algebra, config)?;
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .context("--out needs a file name")?;
    let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut csv_names = Vec::with_capacity(outcome.solutions.len());
    for (i, solution) in outcome.solutions.iter().enumerate() {
        let name = format!("{stem}.trace{i}.csv");
        io::write_error_trace_csv(&solution.trace, algebra.code_len(), &dir.join(&name))?;
        csv_names.push(name);
        let p = solution
            .perplexity
            .as_ref()
            .map(|p| format!("{:.4}", p.total))
            .unwrap_or_else(|| "n/a".into());
        eprintln!(
            "restart {i}: parsed {}/{} sentences, total perplexity {p}, {} iterations{}",
            solution.parsed_count(),
            solution.sentences.len(),
            solution.trace.iterations(),
            if solution.converged { " (exact)" } else { "" },
        );
    }
    eprintln!("selected restart {}", outcome.best);
    let file = io::SolutionFile {
        solution: outcome.solutions[outcome.best].clone(),
        error_trace_csv: Some(csv_names[outcome.best].clone()),
        restart_trace_csvs: csv_names,
    };
    io::save_solution_file(&file, out)?;
    Ok(())
}

fn print_lexicon(solution: &loopgram::solver::Solution, by_code: bool) {
    // First corpus occurrence orders words within a category.
    let mut order: HashMap<&str, usize> = HashMap::new();
    let mut next = 0usize;
    for sentence in &solution.sentences {
        for token in &sentence.tokens {
            order.entry(token.as_str()).or_insert_with(|| {
                next += 1;
                next
            });
        }
    }
    if by_code {
        let mut groups: HashMap<String, Vec<&str>> = HashMap::new();
        for (word, codes) in &solution.lexicon {
            for code in codes {
                groups
                    .entry(solution.algebra.render_code(code))
                    .or_default()
                    .push(word.as_str());
            }
        }
        let mut groups: Vec<(String, Vec<&str>)> = groups.into_iter().collect();
        for (_, words) in groups.iter_mut() {
            words.sort_by_key(|w| order[w]);
        }
        groups.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
        for (code, words) in groups {
            println!("{code}\t{}", words.join(" | "));
        }
    } else {
        for (word, codes) in &solution.lexicon {
            let rendered: Vec<String> =
                codes.iter().map(|c| solution.algebra.render_code(c)).collect();
            println!("{word}\t{}", rendered.join(" ; "));
        }
    }
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {l}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
