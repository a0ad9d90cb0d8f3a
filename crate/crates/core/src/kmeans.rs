//! Lloyd k-means with greedy farthest-point seeding, shared by spectral and
//! raw-embedding clustering.
//!
//! Everything is deterministic for a fixed seed: restart r draws its first
//! center from splitmix64 stream (seed, r), the remaining centers follow by
//! farthest-point selection with ties to the lower point index, and distance
//! ties assign to the lower center index.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Cluster labels in [0, K), one per segment, every cluster nonempty,
/// ids ordered by first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    /// Canonicalize raw labels: cluster ids are renumbered in order of first
    /// occurrence, K becomes the number of distinct labels.
    pub fn from_raw_labels(raw: &[usize]) -> Self {
        let mut mapping: Vec<Option<usize>> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        let mut next = 0;
        for &r in raw {
            if r >= mapping.len() {
                mapping.resize(r + 1, None);
            }
            let id = *mapping[r].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            labels.push(id);
        }
        Self { labels, k: next }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct KmeansOutcome {
    pub labels: Vec<usize>,
    pub inertia: f64,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Best-of-`restarts` Lloyd iteration on Euclidean distance.
pub(crate) fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<KmeansOutcome> {
    let n = points.len();
    if k == 0 {
        return Err(Error::validation("k must be >= 1"));
    }
    if n < k {
        return Err(Error::TooFewPoints { n, k });
    }
    let restarts = restarts.max(1);
    let mut best: Option<KmeansOutcome> = None;
    for r in 0..restarts {
        let outcome = kmeans_single(points, k, SplitMix64::stream(seed, r as u64));
        match &best {
            Some(b) if b.inertia <= outcome.inertia => {}
            _ => best = Some(outcome),
        }
    }
    Ok(best.expect("at least one restart"))
}

fn kmeans_single(points: &[Vec<f64>], k: usize, mut rng: SplitMix64) -> KmeansOutcome {
    let n = points.len();
    let dim = points[0].len();

    // Greedy farthest-point seeding from a random first center.
    let mut center_idx: Vec<usize> = vec![rng.next_below(n)];
    while center_idx.len() < k {
        let mut far_idx = 0;
        let mut far_dist = -1.0;
        for (i, p) in points.iter().enumerate() {
            let d = center_idx
                .iter()
                .map(|&c| dist_sq(p, &points[c]))
                .fold(f64::INFINITY, f64::min);
            if d > far_dist {
                far_dist = d;
                far_idx = i;
            }
        }
        center_idx.push(far_idx);
    }
    let mut centers: Vec<Vec<f64>> = center_idx.iter().map(|&i| points[i].clone()).collect();

    let mut labels = vec![0usize; n];
    let mut prev_inertia = f64::INFINITY;
    for _iter in 0..300 {
        // Assignment; ties go to the lower center index.
        let mut inertia = 0.0;
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = dist_sq(p, center);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            inertia += best_d;
            if labels[i] != best_c {
                labels[i] = best_c;
                changed = true;
            }
        }
        debug_assert!(
            inertia <= prev_inertia + 1e-9 * (1.0 + prev_inertia.abs()),
            "inertia increased: {prev_inertia} -> {inertia}"
        );
        prev_inertia = inertia;
        if !changed && _iter > 0 {
            break;
        }

        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster on the point farthest from its
                // current center, preferring points not alone in a cluster.
                let mut far_idx = usize::MAX;
                let mut far_dist = -1.0;
                for (i, p) in points.iter().enumerate() {
                    if counts[labels[i]] <= 1 {
                        continue;
                    }
                    let d = dist_sq(p, &centers[labels[i]]);
                    if d > far_dist {
                        far_dist = d;
                        far_idx = i;
                    }
                }
                if far_idx == usize::MAX {
                    // No donor available; keep the stale center.
                    continue;
                }
                counts[labels[far_idx]] -= 1;
                for (s, x) in sums[labels[far_idx]].iter_mut().zip(&points[far_idx]) {
                    *s -= x;
                }
                labels[far_idx] = c;
                counts[c] = 1;
                sums[c] = points[far_idx].clone();
                prev_inertia = f64::INFINITY;
            }
            if counts[c] > 0 {
                for (dst, s) in centers[c].iter_mut().zip(&sums[c]) {
                    *dst = s / counts[c] as f64;
                }
            }
        }
    }

    // Final inertia for the labels actually returned.
    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| dist_sq(p, &centers[l]))
        .sum();
    KmeansOutcome { labels, inertia }
}
