//! Affinity-graph sparsification: fixed-k neighborhoods, adaptive top-p%,
//! and per-node same/between-speaker threshold retention.
//!
//! Pruning only zeroes entries, never alters kept values. Results are
//! symmetrized with the elementwise maximum (union graph) by default, which
//! keeps the graph connected under aggressive pruning; the mutual-graph
//! (minimum) variant is available as a switch.

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};

/// How to restore symmetry after per-row selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetrize {
    /// Union graph: keep an edge if either endpoint kept it.
    #[default]
    Max,
    /// Mutual graph: keep an edge only if both endpoints kept it.
    Min,
}

/// Sparsification strategy plus its parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum PruningSpec {
    /// Keep the k strongest neighbors per row.
    FixedK { k: usize },
    /// Keep the top p fraction of neighbors per row, at least min_keep.
    TopP { p: f64, min_keep: usize },
    /// Keep the top tau fraction of the per-row same-speaker group.
    Pna { tau: f64, min_keep: usize },
}

impl PruningSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PruningSpec::FixedK { k } => {
                if k == 0 {
                    return Err(Error::validation("k must be >= 1"));
                }
            }
            PruningSpec::TopP { p, min_keep } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::validation(format!("p = {p} outside (0, 1]")));
                }
                if min_keep == 0 {
                    return Err(Error::validation("min_keep must be >= 1"));
                }
            }
            PruningSpec::Pna { tau, min_keep } => {
                if !(tau > 0.0 && tau <= 1.0) {
                    return Err(Error::validation(format!("tau = {tau} outside (0, 1]")));
                }
                if min_keep == 0 {
                    return Err(Error::validation("min_keep must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

/// Apply a pruning spec with the given symmetrization.
pub fn prune(a: &AffinityMatrix, spec: &PruningSpec, sym: Symmetrize) -> Result<AffinityMatrix> {
    spec.validate()?;
    match *spec {
        PruningSpec::FixedK { k } => prune_rows(a, sym, |_row| k),
        PruningSpec::TopP { p, min_keep } => prune_rows(a, sym, |row| {
            ((p * row.len() as f64).ceil() as usize).max(min_keep)
        }),
        PruningSpec::Pna { tau, min_keep } => prune_rows(a, sym, |row| {
            let group = same_speaker_group_size(row);
            ((tau * group as f64).ceil() as usize).max(min_keep)
        }),
    }
}

/// Fixed k-NN graph with max symmetrization.
pub fn prune_fixed_k(a: &AffinityMatrix, k: usize) -> Result<AffinityMatrix> {
    prune(a, &PruningSpec::FixedK { k }, Symmetrize::Max)
}

/// Top-p% adaptive graph with max symmetrization.
pub fn prune_top_p(a: &AffinityMatrix, p: f64, min_keep: usize) -> Result<AffinityMatrix> {
    prune(a, &PruningSpec::TopP { p, min_keep }, Symmetrize::Max)
}

/// Per-node same-speaker retention (pNA) with max symmetrization.
pub fn prune_pna(a: &AffinityMatrix, tau: f64, min_keep: usize) -> Result<AffinityMatrix> {
    prune(a, &PruningSpec::Pna { tau, min_keep }, Symmetrize::Max)
}

/// Shared row-selection scaffold: `keep_count` maps a row's off-diagonal
/// scores to how many of its largest entries survive.
fn prune_rows(
    a: &AffinityMatrix,
    sym: Symmetrize,
    mut keep_count: impl FnMut(&[f64]) -> usize,
) -> Result<AffinityMatrix> {
    let n = a.n();
    if n < 2 {
        return Err(Error::TooFewSegments(n));
    }
    let mut kept = vec![0.0; n * n];
    for i in 0..n {
        let scores: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| a.get(i, j)).collect();
        let keep = keep_count(&scores).min(n - 1);
        // Ties break toward lower column index for cross-platform determinism.
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&x, &y| a.get(i, y).total_cmp(&a.get(i, x)).then(x.cmp(&y)));
        for &j in order.iter().take(keep) {
            kept[i * n + j] = a.get(i, j);
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = match sym {
                Symmetrize::Max => kept[i * n + j].max(kept[j * n + i]),
                Symmetrize::Min => kept[i * n + j].min(kept[j * n + i]),
            };
        }
    }
    Ok(AffinityMatrix::from_values_unchecked(n, out))
}

/// Size of the same-speaker (higher-score) group of one row's off-diagonal
/// scores: the two-group split minimizing total within-group variance.
///
/// This is the global optimum of 1-D 2-means, found exactly by scanning all
/// threshold positions in sorted order. A constant row is treated as one
/// all-same-speaker group.
pub fn same_speaker_group_size(scores: &[f64]) -> usize {
    let m = scores.len();
    if m <= 1 {
        return m;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted[0] == sorted[m - 1] {
        return m;
    }
    // Prefix sums over descending order; split j = size of the high group.
    let mut prefix = vec![0.0; m + 1];
    let mut prefix_sq = vec![0.0; m + 1];
    for (i, &v) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
        prefix_sq[i + 1] = prefix_sq[i] + v * v;
    }
    let sse = |lo: usize, hi: usize| -> f64 {
        let count = (hi - lo) as f64;
        let sum = prefix[hi] - prefix[lo];
        let sum_sq = prefix_sq[hi] - prefix_sq[lo];
        sum_sq - sum * sum / count
    };
    let mut best_j = 1;
    let mut best = f64::INFINITY;
    for j in 1..m {
        let total = sse(0, j) + sse(j, m);
        // Plain < keeps the smallest j on exact ties.
        if total < best {
            best = total;
            best_j = j;
        }
    }
    best_j
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affinity(n: usize, values: Vec<f64>) -> AffinityMatrix {
        AffinityMatrix::from_values(n, values).unwrap()
    }

    #[test]
    fn fixed_k_keeps_all_when_k_large() {
        let a = affinity(3, vec![0.0, 0.9, 0.2, 0.9, 0.0, 0.5, 0.2, 0.5, 0.0]);
        let p = prune_fixed_k(&a, 2).unwrap();
        assert_eq!(p, a);
    }

    #[test]
    fn fixed_k_selects_top_two() {
        // Row 0 scores against columns 1..3: 0.9, 0.2, 0.8 -> keep 0.9 and 0.8.
        let a = affinity(
            4,
            vec![
                0.0, 0.9, 0.2, 0.8, //
                0.9, 0.0, 0.1, 0.1, //
                0.2, 0.1, 0.0, 0.1, //
                0.8, 0.1, 0.1, 0.0,
            ],
        );
        let p = prune_fixed_k(&a, 2).unwrap();
        assert_eq!(p.get(0, 1), 0.9);
        assert_eq!(p.get(0, 3), 0.8);
        // 0.2 at (0,2) survives only if row 2 kept it; row 2 scores are
        // 0.2, 0.1, 0.1 -> top-2 keeps 0.2, so max-symmetrization restores it.
        assert_eq!(p.get(0, 2), 0.2);
        // Min symmetrization drops it: row 0 did not keep column 2.
        let q = prune(&a, &PruningSpec::FixedK { k: 2 }, Symmetrize::Min).unwrap();
        assert_eq!(q.get(0, 2), 0.0);
        assert_eq!(q.get(0, 1), 0.9);
    }

    #[test]
    fn top_p_keep_counts_from_spec() {
        // n=101, p=0.01: ceil(0.01 * 100) = 1, floored to min_keep 2.
        let scores = vec![0.5; 100];
        let keep = ((0.01 * scores.len() as f64).ceil() as usize).max(2);
        assert_eq!(keep, 2);
        // n=201, p=0.01: ceil(2.0) = 2.
        let keep = ((0.01f64 * 200.0).ceil() as usize).max(2);
        assert_eq!(keep, 2);
    }

    #[test]
    fn top_p_full_fraction_is_identity() {
        let a = affinity(
            4,
            vec![
                0.0, 0.9, 0.2, 0.8, //
                0.9, 0.0, 0.1, 0.3, //
                0.2, 0.1, 0.0, 0.4, //
                0.8, 0.3, 0.4, 0.0,
            ],
        );
        assert_eq!(prune_top_p(&a, 1.0, 2).unwrap(), a);
        assert_eq!(prune_fixed_k(&a, 3).unwrap(), a);
    }

    #[test]
    fn pna_hand_run_example() {
        // Row scores [0.95, 0.93, 0.91, 0.10, 0.12]: same-speaker group is the
        // top three, ceil(0.2 * 3) = 1 entry kept.
        let scores = [0.95, 0.93, 0.91, 0.10, 0.12];
        assert_eq!(same_speaker_group_size(&scores), 3);
        let keep = ((0.2 * 3.0f64).ceil() as usize).max(1);
        assert_eq!(keep, 1);
    }

    #[test]
    fn pna_constant_row_all_same_speaker() {
        assert_eq!(same_speaker_group_size(&[0.5, 0.5, 0.5]), 3);
        let a = affinity(
            4,
            vec![
                0.0, 0.5, 0.5, 0.5, //
                0.5, 0.0, 0.5, 0.5, //
                0.5, 0.5, 0.0, 0.5, //
                0.5, 0.5, 0.5, 0.0,
            ],
        );
        let p = prune_pna(&a, 1.0, 1).unwrap();
        assert_eq!(p, a);
    }

    #[test]
    fn pna_bimodal_row_keeps_high_group() {
        let scores = [0.9, 0.85, 0.88, 0.1, 0.15, 0.05];
        assert_eq!(same_speaker_group_size(&scores), 3);
    }

    #[test]
    fn split_matches_exhaustive_reference() {
        // Exhaustive oracle: minimize within-group variance over all splits
        // of the descending-sorted scores.
        fn oracle(scores: &[f64]) -> usize {
            let mut sorted = scores.to_vec();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let sse = |xs: &[f64]| {
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            };
            (1..sorted.len())
                .min_by(|&a, &b| {
                    let ca = sse(&sorted[..a]) + sse(&sorted[a..]);
                    let cb = sse(&sorted[..b]) + sse(&sorted[b..]);
                    ca.total_cmp(&cb)
                })
                .unwrap()
        }
        let mut rng = crate::rng::SplitMix64::new(99);
        for _ in 0..200 {
            let m = 2 + rng.next_below(11);
            let scores: Vec<f64> = (0..m).map(|_| rng.next_f64()).collect();
            if scores.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            assert_eq!(same_speaker_group_size(&scores), oracle(&scores));
        }
        // The case where Lloyd from min/max init would settle on a worse split.
        assert_eq!(same_speaker_group_size(&[0.0, 5.0, 6.0, 10.0]), 3);
    }

    #[test]
    fn kept_values_are_subset() {
        let a = affinity(
            4,
            vec![
                0.0, 0.9, 0.2, 0.8, //
                0.9, 0.0, 0.1, 0.3, //
                0.2, 0.1, 0.0, 0.4, //
                0.8, 0.3, 0.4, 0.0,
            ],
        );
        for spec in [
            PruningSpec::FixedK { k: 1 },
            PruningSpec::TopP {
                p: 0.3,
                min_keep: 1,
            },
            PruningSpec::Pna {
                tau: 0.5,
                min_keep: 1,
            },
        ] {
            let p = prune(&a, &spec, Symmetrize::Max).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let v = p.get(i, j);
                    assert!(v == 0.0 || v == a.get(i, j), "{spec:?} altered ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn rejects_tiny_and_bad_params() {
        let a = affinity(1, vec![0.0]);
        assert!(prune_fixed_k(&a, 1).is_err());
        let a = affinity(2, vec![0.0, 0.5, 0.5, 0.0]);
        assert!(prune_top_p(&a, 0.0, 2).is_err());
        assert!(prune_top_p(&a, 1.5, 2).is_err());
        assert!(prune_pna(&a, 0.0, 1).is_err());
        assert!(prune_fixed_k(&a, 0).is_err());
    }
}
