//! Restart orchestration: run several independent searches from derived
//! seeds, score each solution by total perplexity, and pick the best.

use crate::algebra::AlgebraConfig;
use crate::corpus::Corpus;
use crate::rules::{extract_rules, perplexity, GenMode};
use crate::solver::{
    extract_solution, init_state, rrr_run, Execution, Solution, SolverConfig, SolverError,
};

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// One solution per restart, in restart order.
    pub solutions: Vec<Solution>,
    /// Index of the selected solution.
    pub best: usize,
}

impl TrainOutcome {
    pub fn best_solution(&self) -> &Solution {
        &self.solutions[self.best]
    }
}

fn run_restart(
    corpus: &Corpus,
    algebra: &AlgebraConfig,
    config: &SolverConfig,
    restart: usize,
    exec: Execution,
) -> Result<Solution, SolverError> {
    let seed = config.rng_seed.wrapping_add(restart as u64);
    let run_config = SolverConfig { rng_seed: seed, ..config.clone() };
    let mut state = init_state(corpus, algebra, &run_config)?;
    let outcome = rrr_run(&mut state, &run_config, exec);
    let mut solution =
        extract_solution(&outcome.snapshot, &state.layout, &run_config, seed, outcome.trace);
    solution.perplexity = extract_rules(&solution)
        .and_then(|rules| perplexity(&rules, &solution, GenMode::Context))
        .ok();
    Ok(solution)
}

/// Run all restarts and select the lowest-perplexity solution; ties go to
/// the most parsed sentences, then the lowest restart index. Restarts run
/// concurrently when the `parallel` feature is on, with output identical to
/// sequential execution.
pub fn train(
    corpus: &Corpus,
    algebra: &AlgebraConfig,
    config: &SolverConfig,
) -> Result<TrainOutcome, SolverError> {
    train_with(corpus, algebra, config, Execution::default())
}

pub fn train_with(
    corpus: &Corpus,
    algebra: &AlgebraConfig,
    config: &SolverConfig,
    exec: Execution,
) -> Result<TrainOutcome, SolverError> {
    let restarts = config.restarts.max(1);
    let indices: Vec<usize> = (0..restarts).collect();
    let results = crate::solver::map_units(&indices, exec, |&i| {
        run_restart(corpus, algebra, config, i, exec)
    });
    let mut solutions = Vec::with_capacity(restarts);
    for r in results {
        solutions.push(r?);
    }
    let best = select_best(&solutions);
    Ok(TrainOutcome { solutions, best })
}

fn select_best(solutions: &[Solution]) -> usize {
    let mut best = 0;
    for (i, s) in solutions.iter().enumerate().skip(1) {
        let key = |sol: &Solution| {
            (
                sol.perplexity.as_ref().map(|p| p.total).unwrap_or(f64::INFINITY),
                std::cmp::Reverse(sol.parsed_count()),
            )
        };
        let (pi, ri) = key(s);
        let (pb, rb) = key(&solutions[best]);
        if pi < pb || (pi == pb && ri < rb) {
            best = i;
        }
    }
    best
}
