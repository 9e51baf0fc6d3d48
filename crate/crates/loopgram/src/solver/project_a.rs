//! Projection to set A: layer constraints and word constraints.
//!
//! For each adjacent layer pair the projection tries every branch position,
//! scores it coordinate-wise against the nearest binary configuration, and
//! rewrites the pair's replicas to the cheapest one. Preserved nodes cost a
//! per-bit two-point rounding; the branching node costs the best of the 2n
//! decomposition patterns per byte. Word constraints average each word's
//! leaf replicas (or cluster them when more than one code per word is
//! allowed) and need not be binary.

use super::{map_units, run_units, split_ranges, Execution, SolverConfig, StateLayout};
use crate::algebra::{enumerate_decompositions, ParentBit};
use std::ops::Range;

/// Decomposition patterns in a form the kernel can scan quickly: for each
/// pattern, where each child bit is copied, and which parent positions are
/// pinned to constants. Sides: 0 = left parent, 1 = right parent.
#[derive(Debug, Clone)]
pub(crate) struct PatternTable {
    pub n: usize,
    pub copies: Vec<Vec<(usize, usize)>>,
    pub fixed: Vec<Vec<(usize, usize, f64)>>,
}

impl PatternTable {
    pub fn new(n: usize) -> Self {
        let patterns = enumerate_decompositions(n).expect("valid byte length");
        let mut copies = Vec::with_capacity(patterns.len());
        let mut fixed = Vec::with_capacity(patterns.len());
        for p in &patterns {
            let mut copy = vec![(0usize, 0usize); n];
            let mut fix = Vec::new();
            for (side, template) in [(0usize, &p.left), (1usize, &p.right)] {
                for (pos, pb) in template.iter().enumerate() {
                    match pb {
                        ParentBit::Child(k) => copy[*k] = (side, pos),
                        ParentBit::Fixed(v) => fix.push((side, pos, *v as f64)),
                    }
                }
            }
            copies.push(copy);
            fixed.push(fix);
        }
        Self { n, copies, fixed }
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }
}

#[inline]
fn pair_cost(x: f64, y: f64) -> f64 {
    if x + y > 1.0 {
        (x - 1.0) * (x - 1.0) + (y - 1.0) * (y - 1.0)
    } else {
        x * x + y * y
    }
}

#[inline]
fn pair_bit(x: f64, y: f64) -> f64 {
    if x + y > 1.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn bin_cost(x: f64) -> f64 {
    if x > 0.5 {
        (x - 1.0) * (x - 1.0)
    } else {
        x * x
    }
}

#[inline]
fn bin_bit(x: f64) -> f64 {
    if x > 0.5 {
        1.0
    } else {
        0.0
    }
}

fn slice_pair_cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| pair_cost(x, y)).sum()
}

/// Byte-level outcome of a branch evaluation.
#[derive(Debug, Clone, Copy)]
struct ByteEval {
    exact_cost: f64,
    exact_pattern: usize,
    /// Cheapest cost when one parent bit is freed to its own binary
    /// rounding, and where that bit is.
    release_cost: f64,
    release_pattern: usize,
    release_at: (usize, usize),
}

fn eval_byte(child: &[f64], parents: [&[f64]; 2], table: &PatternTable, flips: bool) -> ByteEval {
    let mut best = ByteEval {
        exact_cost: f64::INFINITY,
        exact_pattern: 0,
        release_cost: f64::INFINITY,
        release_pattern: 0,
        release_at: (0, 0),
    };
    for q in 0..table.len() {
        let mut cost = 0.0;
        for (k, &(side, pos)) in table.copies[q].iter().enumerate() {
            cost += pair_cost(child[k], parents[side][pos]);
        }
        for &(side, pos, val) in &table.fixed[q] {
            let d = parents[side][pos] - val;
            cost += d * d;
        }
        if cost < best.exact_cost {
            best.exact_cost = cost;
            best.exact_pattern = q;
        }
        if flips {
            // Try releasing each parent position of this pattern.
            for (k, &(side, pos)) in table.copies[q].iter().enumerate() {
                let released = cost - pair_cost(child[k], parents[side][pos])
                    + bin_cost(child[k])
                    + bin_cost(parents[side][pos]);
                if released < best.release_cost {
                    best.release_cost = released;
                    best.release_pattern = q;
                    best.release_at = (side, pos);
                }
            }
            for &(side, pos, val) in &table.fixed[q] {
                let d = parents[side][pos] - val;
                let released = cost - d * d + bin_cost(parents[side][pos]);
                if released < best.release_cost {
                    best.release_cost = released;
                    best.release_pattern = q;
                    best.release_at = (side, pos);
                }
            }
        }
    }
    best
}

/// Minimal cost of making `child = left * right` binary and pattern-valid,
/// byte by byte. With the bit-flip relaxation one parent bit across the whole
/// event may be released at `penalty`, taken only when strictly cheaper.
fn branch_cost(
    child: &[f64],
    left: &[f64],
    right: &[f64],
    table: &PatternTable,
    num_bytes: usize,
    flip_penalty: Option<f64>,
) -> f64 {
    let n = table.n;
    let mut exact_total = 0.0;
    let mut best_gain = f64::INFINITY;
    for b in 0..num_bytes {
        let r = b * n..(b + 1) * n;
        let eval = eval_byte(
            &child[r.clone()],
            [&left[r.clone()], &right[r]],
            table,
            flip_penalty.is_some(),
        );
        exact_total += eval.exact_cost;
        if flip_penalty.is_some() {
            best_gain = best_gain.min(eval.release_cost - eval.exact_cost);
        }
    }
    match flip_penalty {
        Some(penalty) if exact_total + best_gain + penalty < exact_total => {
            exact_total + best_gain + penalty
        }
        _ => exact_total,
    }
}

/// Write the optimal branch configuration for (child, left, right) in place.
fn write_branch(
    child: &mut [f64],
    left: &mut [f64],
    right: &mut [f64],
    table: &PatternTable,
    num_bytes: usize,
    flip_penalty: Option<f64>,
) {
    let n = table.n;
    let evals: Vec<ByteEval> = (0..num_bytes)
        .map(|b| {
            let r = b * n..(b + 1) * n;
            eval_byte(
                &child[r.clone()],
                [&left[r.clone()], &right[r]],
                table,
                flip_penalty.is_some(),
            )
        })
        .collect();
    // Decide whether one byte releases a bit.
    let mut flip_byte = None;
    if let Some(penalty) = flip_penalty {
        let mut best_gain = f64::INFINITY;
        let mut best_b = 0;
        for (b, e) in evals.iter().enumerate() {
            if e.release_cost - e.exact_cost < best_gain {
                best_gain = e.release_cost - e.exact_cost;
                best_b = b;
            }
        }
        if best_gain + penalty < 0.0 {
            flip_byte = Some(best_b);
        }
    }
    for (b, e) in evals.iter().enumerate() {
        let released = if flip_byte == Some(b) { Some(e.release_at) } else { None };
        let q = if released.is_some() { e.release_pattern } else { e.exact_pattern };
        let base = b * n;
        for (k, &(side, pos)) in table.copies[q].iter().enumerate() {
            let pval = if side == 0 { left[base + pos] } else { right[base + pos] };
            let (cbit, pbit) = if released == Some((side, pos)) {
                (bin_bit(child[base + k]), bin_bit(pval))
            } else {
                let t = pair_bit(child[base + k], pval);
                (t, t)
            };
            child[base + k] = cbit;
            if side == 0 {
                left[base + pos] = pbit;
            } else {
                right[base + pos] = pbit;
            }
        }
        for &(side, pos, val) in &table.fixed[q] {
            let target = if released == Some((side, pos)) {
                bin_bit(if side == 0 { left[base + pos] } else { right[base + pos] })
            } else {
                val
            };
            if side == 0 {
                left[base + pos] = target;
            } else {
                right[base + pos] = target;
            }
        }
    }
}

/// Project one layer-pair block: `block` holds the lower layer's up replicas
/// (`ell` nodes) followed by the upper layer's down replicas (`ell + 1`
/// nodes).
fn project_layer_pair(
    block: &mut [f64],
    ell: usize,
    m: usize,
    num_bytes: usize,
    table: &PatternTable,
    flip_penalty: Option<f64>,
) {
    let (low, high) = block.split_at_mut(ell * m);
    let lows: Vec<&[f64]> = low.chunks(m).collect();
    let highs: Vec<&[f64]> = high.chunks(m).collect();

    // Alignment costs for preserved nodes on either side of the branch.
    let a: Vec<f64> = (0..ell).map(|j| slice_pair_cost(lows[j], highs[j])).collect();
    let b: Vec<f64> = (0..ell).map(|j| slice_pair_cost(lows[j], highs[j + 1])).collect();
    let total_b: f64 = b.iter().sum();

    let mut best_p = 0;
    let mut best_cost = f64::INFINITY;
    let mut pref_a = 0.0;
    let mut pref_b = 0.0;
    for p in 0..ell {
        pref_b += b[p];
        let branch = branch_cost(lows[p], highs[p], highs[p + 1], table, num_bytes, flip_penalty);
        let cost = pref_a + branch + (total_b - pref_b);
        if cost < best_cost {
            best_cost = cost;
            best_p = p;
        }
        pref_a += a[p];
    }

    drop(lows);
    drop(highs);
    let p = best_p;
    for j in 0..ell {
        if j == p {
            continue;
        }
        let hi = if j < p { j } else { j + 1 };
        for i in 0..m {
            let t = pair_bit(low[j * m + i], high[hi * m + i]);
            low[j * m + i] = t;
            high[hi * m + i] = t;
        }
    }
    let (hl, hr) = high.split_at_mut((p + 1) * m);
    write_branch(
        &mut low[p * m..(p + 1) * m],
        &mut hl[p * m..],
        &mut hr[..m],
        table,
        num_bytes,
        flip_penalty,
    );
}

/// Deterministic k-means over a word's leaf vectors: farthest-point
/// initialization from the first leaf, then a bounded number of Lloyd
/// rounds. Returns per-leaf assignments and the cluster means.
fn cluster_leaves(points: &[Vec<f64>], k: usize) -> (Vec<usize>, Vec<Vec<f64>>) {
    let m = points[0].len();
    let k = k.min(points.len());
    let mean_of = |members: &[usize]| -> Vec<f64> {
        let mut mu = vec![0.0; m];
        for &i in members {
            for (s, x) in mu.iter_mut().zip(&points[i]) {
                *s += x;
            }
        }
        for s in &mut mu {
            *s /= members.len() as f64;
        }
        mu
    };
    if k <= 1 {
        let all: Vec<usize> = (0..points.len()).collect();
        return (vec![0; points.len()], vec![mean_of(&all)]);
    }

    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };
    let mut centroids: Vec<Vec<f64>> = vec![points[0].clone()];
    while centroids.len() < k {
        let mut far_i = 0;
        let mut far_d = -1.0;
        for (i, pt) in points.iter().enumerate() {
            let d = centroids.iter().map(|c| dist2(pt, c)).fold(f64::INFINITY, f64::min);
            if d > far_d {
                far_d = d;
                far_i = i;
            }
        }
        centroids.push(points[far_i].clone());
    }

    let mut assign = vec![0usize; points.len()];
    for _ in 0..10 {
        let mut changed = false;
        for (i, pt) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = dist2(pt, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<usize> =
                (0..points.len()).filter(|&i| assign[i] == c).collect();
            if !members.is_empty() {
                *centroid = mean_of(&members);
            }
        }
        if !changed {
            break;
        }
    }
    (assign, centroids)
}

/// Project `v` onto set A in place.
pub fn project_a(v: &mut [f64], layout: &StateLayout, config: &SolverConfig, exec: Execution) {
    let m = layout.code_len();
    let num_bytes = layout.algebra.num_bytes();
    let table = PatternTable::new(layout.algebra.bits_per_byte());
    let flip_penalty = config.relax_bit_flip.then_some(config.bit_flip_penalty);

    // Layer constraints: every pair block is an independent unit.
    let mut metas: Vec<usize> = Vec::new();
    let mut ranges: Vec<Range<usize>> = Vec::new();
    for tree in &layout.trees {
        for ell in 1..tree.token_count {
            metas.push(ell);
            ranges.push(tree.pair_range(ell, m));
        }
    }
    let blocks = split_ranges(v, &ranges);
    let mut units: Vec<(usize, &mut [f64])> = metas.into_iter().zip(blocks).collect();
    run_units(&mut units, exec, |(ell, block)| {
        project_layer_pair(block, *ell, m, num_bytes, &table, flip_penalty);
    });
    drop(units);

    // Word constraints: cluster (or average) each word's leaves. Seeded
    // words always use a single cluster; the pinning itself happens in the
    // concur projection.
    let word_ids: Vec<usize> = (0..layout.word_names.len()).collect();
    let projections = map_units(&word_ids, exec, |&w| {
        let points: Vec<Vec<f64>> = layout.word_leaves[w]
            .iter()
            .map(|&off| v[off..off + m].to_vec())
            .collect();
        let k = if layout.word_seeds[w].is_some() { 1 } else { config.clusters_per_word };
        cluster_leaves(&points, k)
    });
    for (w, (assign, means)) in projections.iter().enumerate() {
        for (leaf, &off) in layout.word_leaves[w].iter().enumerate() {
            v[off..off + m].copy_from_slice(&means[assign[leaf]]);
        }
    }
}
