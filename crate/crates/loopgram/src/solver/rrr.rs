//! The relaxed-reflect-reflect iteration:
//!
//! ```text
//! v <- (1 - beta/2) v + (beta/2) R_B(R_A(v)),   R_S(v) = 2 P_S(v) - v
//! ```
//!
//! which works out to `v <- v + beta (P_B(R_A(v)) - P_A(v))` per step. The
//! change in `v` tracks the gap between the two constraint sets near the
//! iterate, so the best guess is the iterate that moved the least.

use super::{project_a, project_b, Execution, SolverConfig, SolverState};

/// Per-iteration RMS change of `v`, broken out per bit position, plus the
/// index of the minimum-change iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTrace {
    /// `per_bit[iter][pos]`, one column per bit of the category vector.
    pub per_bit: Vec<Vec<f64>>,
    pub total: Vec<f64>,
    /// 0-based index into the trace rows.
    pub min_iter: usize,
}

impl ErrorTrace {
    pub fn iterations(&self) -> usize {
        self.total.len()
    }
}

#[derive(Debug, Clone)]
pub struct StepChange {
    pub per_bit_rms: Vec<f64>,
    pub total_rms: f64,
}

/// Outcome of one run: the final iterate, the snapshot at the minimum-change
/// iteration, and the trace.
#[derive(Debug, Clone)]
pub struct RrrOutcome {
    pub v: Vec<f64>,
    pub snapshot: Vec<f64>,
    pub trace: ErrorTrace,
    pub converged: bool,
}

/// Change below which an iterate counts as an exact solution.
pub const EXACT_CHANGE: f64 = 1e-12;

fn step_into(
    state: &mut SolverState,
    config: &SolverConfig,
    exec: Execution,
    pa: &mut [f64],
    rb: &mut [f64],
    bit_sq: &mut [f64],
) -> StepChange {
    let m = state.layout.code_len();
    pa.copy_from_slice(&state.v);
    project_a(pa, &state.layout, config, exec);
    for (r, (&p, &x)) in rb.iter_mut().zip(pa.iter().zip(&state.v)) {
        *r = 2.0 * p - x;
    }
    project_b(rb, &state.layout, config, exec);

    bit_sq.fill(0.0);
    let mut total_sq = 0.0;
    for (i, x) in state.v.iter_mut().enumerate() {
        let delta = config.beta * (rb[i] - pa[i]);
        *x += delta;
        let sq = delta * delta;
        bit_sq[i % m] += sq;
        total_sq += sq;
    }
    let replicas = (state.v.len() / m) as f64;
    StepChange {
        per_bit_rms: bit_sq.iter().map(|&s| (s / replicas).sqrt()).collect(),
        total_rms: (total_sq / state.v.len() as f64).sqrt(),
    }
}

/// Apply a single update in place and report the change.
pub fn rrr_step(state: &mut SolverState, config: &SolverConfig, exec: Execution) -> StepChange {
    let len = state.v.len();
    let mut pa = vec![0.0; len];
    let mut rb = vec![0.0; len];
    let mut bit_sq = vec![0.0; state.layout.code_len()];
    step_into(state, config, exec, &mut pa, &mut rb, &mut bit_sq)
}

/// Iterate up to `max_iters` updates, recording the change trace and keeping
/// the iterate of the minimum-change iteration. Stops early once the change
/// drops below [`EXACT_CHANGE`].
pub fn rrr_run(state: &mut SolverState, config: &SolverConfig, exec: Execution) -> RrrOutcome {
    let len = state.v.len();
    let m = state.layout.code_len();
    let mut pa = vec![0.0; len];
    let mut rb = vec![0.0; len];
    let mut bit_sq = vec![0.0; m];
    let mut trace = ErrorTrace::default();
    let mut snapshot = state.v.clone();
    let mut best_change = f64::INFINITY;
    let mut converged = false;

    for iter in 0..config.max_iters {
        let change = step_into(state, config, exec, &mut pa, &mut rb, &mut bit_sq);
        trace.per_bit.push(change.per_bit_rms);
        trace.total.push(change.total_rms);
        if change.total_rms < best_change {
            best_change = change.total_rms;
            trace.min_iter = iter;
            snapshot.copy_from_slice(&state.v);
        }
        if change.total_rms < EXACT_CHANGE {
            converged = true;
            break;
        }
    }
    RrrOutcome { v: state.v.clone(), snapshot, trace, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraConfig, CategoryValue};
    use crate::corpus::{Corpus, Sentence};
    use crate::solver::init_state;

    fn hand_parse_state() -> SolverState {
        // "Det N IV ." with the classic codes; all replicas set to a valid
        // binary parse.
        let corpus = Corpus::from_sentences(vec![
            Sentence::from_line("the dog runs .", 0).unwrap()
        ])
        .unwrap();
        let algebra = AlgebraConfig::new(3, 3).unwrap();
        let config = SolverConfig::default();
        let mut state = init_state(&corpus, &algebra, &config).unwrap();
        let code = |s: &str| CategoryValue::from_code(&algebra.parse_code(s).unwrap()).0;
        let det = code("000 010 001");
        let noun = code("000 000 010");
        let iv = code("010 100 000");
        let punct = code("100 000 000");
        let np = code("000 010 000");
        let s_code = code("010 000 000");
        let id = code("000 000 000");
        let layers: [Vec<&Vec<f64>>; 4] = [
            vec![&id],
            vec![&s_code, &punct],
            vec![&np, &iv, &punct],
            vec![&det, &noun, &iv, &punct],
        ];
        let m = 9;
        let tree = state.layout.trees[0].clone();
        for (li, nodes) in layers.iter().enumerate() {
            let layer = li + 1;
            for (ni, vals) in nodes.iter().enumerate() {
                let up = tree.start + tree.up_rel(layer, ni + 1, m);
                state.v[up..up + m].copy_from_slice(vals);
                if layer >= 2 {
                    let down = tree.start + tree.down_rel(layer, ni + 1, m);
                    state.v[down..down + m].copy_from_slice(vals);
                }
            }
        }
        state
    }

    #[test]
    fn valid_parse_is_a_fixed_point() {
        let mut state = hand_parse_state();
        let config = SolverConfig::default();
        let change = rrr_step(&mut state, &config, Execution::Sequential);
        assert!(change.total_rms < 1e-12, "change {}", change.total_rms);
    }

    #[test]
    fn update_scales_linearly_with_beta() {
        let corpus = Corpus::from_sentences(vec![
            Sentence::from_line("a b c .", 0).unwrap(),
            Sentence::from_line("b a .", 1).unwrap(),
        ])
        .unwrap();
        let algebra = AlgebraConfig::new(3, 3).unwrap();
        let base = SolverConfig { rng_seed: 4, ..Default::default() };
        let half = SolverConfig { beta: 0.5, ..base.clone() };
        let full = SolverConfig { beta: 1.0, ..base.clone() };
        let s0 = init_state(&corpus, &algebra, &base).unwrap();

        let mut sh = s0.clone();
        rrr_step(&mut sh, &half, Execution::Sequential);
        let mut sf = s0.clone();
        rrr_step(&mut sf, &full, Execution::Sequential);
        for i in 0..s0.v.len() {
            let dh = sh.v[i] - s0.v[i];
            let df = sf.v[i] - s0.v[i];
            assert!((df - 2.0 * dh).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_matches_manual_diffs() {
        let corpus = Corpus::from_sentences(vec![
            Sentence::from_line("x y z .", 0).unwrap(),
        ])
        .unwrap();
        let algebra = AlgebraConfig::new(3, 3).unwrap();
        let config = SolverConfig { rng_seed: 9, max_iters: 2, ..Default::default() };
        let mut manual = init_state(&corpus, &algebra, &config).unwrap();
        let m = manual.layout.code_len();
        let mut manual_rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for _ in 0..2 {
            let before = manual.v.clone();
            rrr_step(&mut manual, &config, Execution::Sequential);
            let mut bit_sq = vec![0.0; m];
            let mut total_sq = 0.0;
            for (i, (&a, &b)) in before.iter().zip(&manual.v).enumerate() {
                let d = b - a;
                bit_sq[i % m] += d * d;
                total_sq += d * d;
            }
            let replicas = (manual.v.len() / m) as f64;
            manual_rows.push((
                bit_sq.iter().map(|&s| (s / replicas).sqrt()).collect(),
                (total_sq / manual.v.len() as f64).sqrt(),
            ));
        }

        let mut fresh = init_state(&corpus, &algebra, &config).unwrap();
        let outcome = rrr_run(&mut fresh, &config, Execution::Sequential);
        assert_eq!(outcome.trace.iterations(), 2);
        for (row, (bits, total)) in outcome.trace.per_bit.iter().zip(&outcome.trace.total).map(
            |(b, t)| (b, *t),
        ).zip(manual_rows.iter().map(|(b, t)| (b.clone(), *t))) {
            let (got_bits, got_total) = row;
            assert!((got_total - total).abs() < 1e-15);
            for (g, w) in got_bits.iter().zip(&bits) {
                assert!((g - w).abs() < 1e-15);
            }
        }
        assert_eq!(fresh.v, manual.v);
    }

    #[test]
    fn run_keeps_the_minimum_change_snapshot() {
        let corpus = Corpus::from_sentences(vec![
            Sentence::from_line("p q r s .", 0).unwrap(),
        ])
        .unwrap();
        let algebra = AlgebraConfig::new(3, 3).unwrap();
        let config = SolverConfig { rng_seed: 2, max_iters: 40, ..Default::default() };
        let mut state = init_state(&corpus, &algebra, &config).unwrap();
        let outcome = rrr_run(&mut state, &config, Execution::Sequential);
        let min = outcome.trace.min_iter;
        let min_val = outcome.trace.total[min];
        for &t in &outcome.trace.total {
            assert!(min_val <= t);
        }
        // Replaying to the min iteration reproduces the snapshot.
        let mut replay = init_state(&corpus, &algebra, &config).unwrap();
        for _ in 0..=min {
            rrr_step(&mut replay, &config, Execution::Sequential);
        }
        assert_eq!(replay.v, outcome.snapshot);
    }

    #[test]
    fn converged_run_stops_early() {
        let mut state = hand_parse_state();
        let config = SolverConfig { max_iters: 500, ..Default::default() };
        let outcome = rrr_run(&mut state, &config, Execution::Sequential);
        assert!(outcome.converged);
        assert_eq!(outcome.trace.iterations(), 1);
    }
}
