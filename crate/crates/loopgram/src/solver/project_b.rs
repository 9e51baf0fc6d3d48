//! Projection to set B: concur the replicas, pin the root to the identity,
//! and push each node's central bits to sum to one.
//!
//! The central-bit constraint skips the root and the rightmost node of every
//! layer (that column ends in the sentence-final punctuation, which is
//! happily a bare right inverse). Words with a seeded code skip everything
//! else too: their leaf replicas are set to the seed verbatim.

use super::{run_units, split_ranges, Execution, SolverConfig, StateLayout, TreeLayout};
use std::ops::Range;

fn project_tree(
    block: &mut [f64],
    tree: &TreeLayout,
    word_ids: &[usize],
    layout: &StateLayout,
    config: &SolverConfig,
) {
    let m = layout.code_len();
    let n = layout.algebra.bits_per_byte();
    let num_bytes = layout.algebra.num_bytes();
    let central = layout.algebra.central_bit();
    let t = tree.token_count;

    // Root is the identity.
    let root = tree.up_rel(1, 1, m);
    block[root..root + m].fill(0.0);

    for layer in 2..=t {
        for i in 1..=layer {
            let up = tree.up_rel(layer, i, m);
            let down = tree.down_rel(layer, i, m);
            if layer == t {
                if let Some(code) = &layout.word_seeds[word_ids[i - 1]] {
                    for bit in 0..m {
                        let v = if code.get(bit) { 1.0 } else { 0.0 };
                        block[up + bit] = v;
                        block[down + bit] = v;
                    }
                    continue;
                }
            }
            for bit in 0..m {
                let mu = (block[up + bit] + block[down + bit]) / 2.0;
                block[up + bit] = mu;
                block[down + bit] = mu;
            }
            if !config.relax_multi_base && i != layer {
                let sum: f64 = (0..num_bytes).map(|b| block[up + b * n + central]).sum();
                if sum != 1.0 {
                    let shift = (1.0 - sum) / num_bytes as f64;
                    for b in 0..num_bytes {
                        block[up + b * n + central] += shift;
                        block[down + b * n + central] += shift;
                    }
                }
            }
        }
    }
}

/// Project `v` onto set B in place.
pub fn project_b(v: &mut [f64], layout: &StateLayout, config: &SolverConfig, exec: Execution) {
    let ranges: Vec<Range<usize>> =
        layout.trees.iter().map(|t| t.start..t.start + t.len).collect();
    let blocks = split_ranges(v, &ranges);
    let mut units: Vec<(usize, &mut [f64])> = blocks.into_iter().enumerate().collect();
    run_units(&mut units, exec, |(idx, block)| {
        project_tree(block, &layout.trees[*idx], &layout.token_word[*idx], layout, config);
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraConfig;
    use crate::corpus::{Corpus, Sentence};
    use crate::solver::{init_state, SolverConfig, SolverState};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn state(lines: &[&str], config: &SolverConfig) -> SolverState {
        let corpus = Corpus::from_sentences(
            lines
                .iter()
                .enumerate()
                .map(|(i, l)| Sentence::from_line(l, i).unwrap())
                .collect(),
        )
        .unwrap();
        let algebra = AlgebraConfig::new(3, 3).unwrap();
        init_state(&corpus, &algebra, config).unwrap()
    }

    #[test]
    fn root_is_zeroed_and_replicas_agree() {
        let config = SolverConfig::default();
        let mut s = state(&["a b c ."], &config);
        project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
        let m = s.layout.code_len();
        let tree = &s.layout.trees[0];
        for i in 0..m {
            assert_eq!(s.v[tree.start + tree.up_rel(1, 1, m) + i], 0.0);
        }
        for layer in 2..=4usize {
            for node in 1..=layer {
                let up = tree.start + tree.up_rel(layer, node, m);
                let down = tree.start + tree.down_rel(layer, node, m);
                for i in 0..m {
                    assert_eq!(s.v[up + i], s.v[down + i], "layer {layer} node {node}");
                }
            }
        }
    }

    #[test]
    fn concur_means_and_central_shift() {
        let config = SolverConfig::default();
        let mut s = state(&["a b"], &config);
        let m = s.layout.code_len();
        let tree = s.layout.trees[0].clone();
        // Node (2,1): make every bit pair (0.2, 0.6); averaged value 0.4,
        // central bits then shifted by (1 - 1.2)/3.
        let up = tree.start + tree.up_rel(2, 1, m);
        let down = tree.start + tree.down_rel(2, 1, m);
        for i in 0..m {
            s.v[up + i] = 0.2;
            s.v[down + i] = 0.6;
        }
        // Node (2,2) is the rightmost in its layer: averaged, never shifted.
        let up2 = tree.start + tree.up_rel(2, 2, m);
        let down2 = tree.start + tree.down_rel(2, 2, m);
        for i in 0..m {
            s.v[up2 + i] = 0.1;
            s.v[down2 + i] = 0.1;
        }
        project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
        let shift = (1.0 - 1.2) / 3.0;
        for b in 0..3 {
            for i in 0..3 {
                let expected = if i == 1 { 0.4 + shift } else { 0.4 };
                assert!((s.v[up + b * 3 + i] - expected).abs() < 1e-12);
                assert!((s.v[down + b * 3 + i] - expected).abs() < 1e-12);
                assert!((s.v[up2 + b * 3 + i] - 0.1).abs() < 1e-12);
            }
        }
        // Central bits of the constrained node now sum to 1.
        let sum: f64 = (0..3).map(|b| s.v[up + b * 3 + 1]).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_central_shift_example() {
        // Averaged central bits (0.1, 0.1, 0.1) must each become
        // 0.1 + 0.7/3.
        let config = SolverConfig::default();
        let mut s = state(&["a b c"], &config);
        let m = s.layout.code_len();
        let tree = s.layout.trees[0].clone();
        let up = tree.start + tree.up_rel(2, 1, m);
        let down = tree.start + tree.down_rel(2, 1, m);
        for i in 0..m {
            s.v[up + i] = 0.0;
            s.v[down + i] = 0.0;
        }
        for b in 0..3 {
            s.v[up + b * 3 + 1] = 0.1;
            s.v[down + b * 3 + 1] = 0.1;
        }
        project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
        for b in 0..3 {
            assert!((s.v[up + b * 3 + 1] - (0.1 + 0.7 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn multi_base_relaxation_skips_the_shift() {
        let config = SolverConfig { relax_multi_base: true, ..Default::default() };
        let mut s = state(&["a b c"], &config);
        let m = s.layout.code_len();
        let tree = s.layout.trees[0].clone();
        let up = tree.start + tree.up_rel(2, 1, m);
        let down = tree.start + tree.down_rel(2, 1, m);
        for i in 0..m {
            s.v[up + i] = 0.3;
            s.v[down + i] = 0.3;
        }
        project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
        for i in 0..m {
            assert!((s.v[up + i] - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_words_are_pinned_verbatim() {
        let algebra = AlgebraConfig::new(3, 3).unwrap();
        let seed_code = algebra.parse_code("010 100 000").unwrap();
        let config = SolverConfig {
            seed_lexicon: [("runs".to_string(), seed_code)].into_iter().collect(),
            ..Default::default()
        };
        let mut s = state(&["dog runs ."], &config);
        let m = s.layout.code_len();
        let tree = s.layout.trees[0].clone();
        project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
        let up = tree.start + tree.up_rel(3, 2, m);
        let expected = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(&s.v[up..up + m], &expected);
        // Unseeded neighbors still get the central-bit treatment.
        let other = tree.start + tree.up_rel(3, 1, m);
        let sum: f64 = (0..3).map(|b| s.v[other + b * 3 + 1]).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn output_lies_in_the_constraint_set() {
        let config = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..20 {
            let mut s = state(&["a b c d .", "c a .", "d d b ."], &config);
            for x in s.v.iter_mut() {
                *x = rng.gen::<f64>() * 1.4 - 0.2;
            }
            project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
            let m = s.layout.code_len();
            for tree in &s.layout.trees {
                let root = tree.start + tree.up_rel(1, 1, m);
                assert!(s.v[root..root + m].iter().all(|&x| x == 0.0));
                for layer in 2..=tree.token_count {
                    for node in 1..=layer {
                        let up = tree.start + tree.up_rel(layer, node, m);
                        let down = tree.start + tree.down_rel(layer, node, m);
                        assert_eq!(&s.v[up..up + m], &s.v[down..down + m]);
                        if node != layer {
                            let sum: f64 = (0..3).map(|b| s.v[up + b * 3 + 1]).sum();
                            assert!((sum - 1.0).abs() < 1e-12, "central sum {sum}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let config = SolverConfig::default();
        for _ in 0..20 {
            let mut s = state(&["a b c d .", "c a ."], &config);
            for x in s.v.iter_mut() {
                *x = rng.gen::<f64>() * 2.0 - 0.5;
            }
            project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
            let once = s.v.clone();
            project_b(&mut s.v, &s.layout, &config, Execution::Sequential);
            let drift: f64 =
                once.iter().zip(&s.v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(drift < 1e-9, "drift {drift}");
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential_bitwise() {
        let config = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = state(&["a b c d .", "d c b a .", "b b a ."], &config);
        for x in s.v.iter_mut() {
            *x = rng.gen::<f64>();
        }
        let mut seq = s.v.clone();
        project_b(&mut seq, &s.layout, &config, Execution::Sequential);
        project_b(&mut s.v, &s.layout, &config, Execution::Parallel);
        assert_eq!(seq, s.v);
    }
}
