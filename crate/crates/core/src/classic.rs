//! Baseline clustering on raw embeddings: agglomerative hierarchical
//! clustering under cosine distance and Lloyd k-means.

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, ClusterAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Average,
    Complete,
    Single,
}

impl Linkage {
    pub fn name(self) -> &'static str {
        match self {
            Linkage::Average => "average",
            Linkage::Complete => "complete",
            Linkage::Single => "single",
        }
    }
}

/// Exactly one stop criterion: a target cluster count or a cosine-distance
/// threshold past which merging stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AhcStop {
    TargetK(usize),
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AhcConfig {
    pub linkage: Linkage,
    pub stop: AhcStop,
}

/// Agglomerative clustering over cosine distance (1 - <v_i, v_j> on a
/// unit-normalized set). Merges the minimal-linkage pair, ties to the
/// lexicographically smallest cluster-index pair; cluster ids are the
/// smallest original member index.
pub fn ahc_cluster(set: &EmbeddingSet, cfg: &AhcConfig) -> Result<ClusterAssignment> {
    let n = set.len();
    if n == 0 {
        return Err(Error::TooFewSegments(0));
    }
    if let AhcStop::TargetK(k) = cfg.stop {
        if k == 0 {
            return Err(Error::validation("target_k must be >= 1"));
        }
        if k > n {
            return Err(Error::TooFewPoints { n, k });
        }
    }

    let vectors: Vec<&[f64]> = set.vectors().collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = 1.0
                - vectors[i]
                    .iter()
                    .zip(vectors[j])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    // member -> current cluster id (smallest original index in the cluster)
    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut remaining = n;

    loop {
        match cfg.stop {
            AhcStop::TargetK(k) if remaining <= k => break,
            _ if remaining <= 1 => break,
            _ => {}
        }
        // Minimal linkage pair; ties to the smallest (a, b).
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !active[b] {
                    continue;
                }
                let d = dist[a * n + b];
                match best {
                    Some((bd, _, _)) if bd <= d => {}
                    _ => best = Some((d, a, b)),
                }
            }
        }
        let (min_dist, a, b) = best.expect("remaining > 1 clusters");
        if let AhcStop::Threshold(th) = cfg.stop {
            if min_dist > th {
                break;
            }
        }

        // Lance-Williams update of distances to the merged cluster a := a u b.
        for c in 0..n {
            if !active[c] || c == a || c == b {
                continue;
            }
            let dac = dist[a * n + c];
            let dbc = dist[b * n + c];
            let merged = match cfg.linkage {
                Linkage::Average => {
                    (size[a] as f64 * dac + size[b] as f64 * dbc) / (size[a] + size[b]) as f64
                }
                Linkage::Complete => dac.max(dbc),
                Linkage::Single => dac.min(dbc),
            };
            dist[a * n + c] = merged;
            dist[c * n + a] = merged;
        }
        size[a] += size[b];
        active[b] = false;
        for id in cluster_of.iter_mut() {
            if *id == b {
                *id = a;
            }
        }
        remaining -= 1;
    }

    Ok(ClusterAssignment::from_raw_labels(&cluster_of))
}

/// Lloyd k-means on unit-normalized embeddings; seeding and restarts share
/// the spectral module's semantics, lowest inertia wins.
pub fn kmeans_cluster(
    set: &EmbeddingSet,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    let points: Vec<Vec<f64>> = set.vectors().map(|v| v.to_vec()).collect();
    let outcome = kmeans(&points, k, restarts, seed)?;
    Ok(ClusterAssignment::from_raw_labels(&outcome.labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{unit_normalize, EmbeddingSet};
    use crate::rng::SplitMix64;

    fn set_of(vectors: Vec<Vec<f64>>) -> EmbeddingSet {
        let dim = vectors[0].len();
        let segments = vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i as f64, i as f64 + 0.9, v))
            .collect();
        unit_normalize(&EmbeddingSet::new("r", dim, segments).unwrap()).unwrap()
    }

    fn cfg(linkage: Linkage, stop: AhcStop) -> AhcConfig {
        AhcConfig { linkage, stop }
    }

    #[test]
    fn single_point_single_cluster() {
        let set = set_of(vec![vec![1.0, 0.0]]);
        let got = ahc_cluster(&set, &cfg(Linkage::Average, AhcStop::TargetK(1))).unwrap();
        assert_eq!(got.labels(), &[0]);
    }

    #[test]
    fn antipodal_tight_pairs_merge_first() {
        let set = set_of(vec![
            vec![1.0, 0.0],
            vec![0.999, 0.01],
            vec![-1.0, 0.0],
            vec![-0.999, 0.01],
        ]);
        let got = ahc_cluster(&set, &cfg(Linkage::Average, AhcStop::TargetK(2))).unwrap();
        assert_eq!(got.labels(), &[0, 0, 1, 1]);
    }

    #[test]
    fn target_k_extremes() {
        let set = set_of(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.5]]);
        let singletons = ahc_cluster(&set, &cfg(Linkage::Average, AhcStop::TargetK(3))).unwrap();
        assert_eq!(singletons.labels(), &[0, 1, 2]);
        let one = ahc_cluster(&set, &cfg(Linkage::Average, AhcStop::TargetK(1))).unwrap();
        assert_eq!(one.labels(), &[0, 0, 0]);
        assert!(ahc_cluster(&set, &cfg(Linkage::Average, AhcStop::TargetK(4))).is_err());
    }

    #[test]
    fn threshold_below_all_distances_keeps_singletons() {
        let set = set_of(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.5]]);
        let got = ahc_cluster(&set, &cfg(Linkage::Average, AhcStop::Threshold(-1.0))).unwrap();
        assert_eq!(got.labels(), &[0, 1, 2]);
        // Threshold above all distances merges everything.
        let got = ahc_cluster(&set, &cfg(Linkage::Average, AhcStop::Threshold(2.5))).unwrap();
        assert_eq!(got.labels(), &[0, 0, 0]);
    }

    /// Brute-force reference: recompute every cluster-pair linkage from the
    /// raw pairwise distances at each merge step.
    fn ahc_reference(vectors: &[Vec<f64>], linkage: Linkage, target_k: usize) -> Vec<usize> {
        let n = vectors.len();
        let raw = |i: usize, j: usize| -> f64 {
            1.0 - vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
        };
        let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while clusters.len() > target_k {
            let mut best: Option<(f64, usize, usize)> = None;
            for x in 0..clusters.len() {
                for y in (x + 1)..clusters.len() {
                    let mut pair_dists = Vec::new();
                    for &i in &clusters[x] {
                        for &j in &clusters[y] {
                            pair_dists.push(raw(i, j));
                        }
                    }
                    let d = match linkage {
                        Linkage::Average => {
                            pair_dists.iter().sum::<f64>() / pair_dists.len() as f64
                        }
                        Linkage::Complete => pair_dists.iter().fold(f64::MIN, |a, &b| a.max(b)),
                        Linkage::Single => pair_dists.iter().fold(f64::MAX, |a, &b| a.min(b)),
                    };
                    // Tie-break on smallest original-index pair, mirroring
                    // the implementation's cluster-id rule.
                    let ka = clusters[x][0].min(clusters[y][0]);
                    let kb = clusters[x][0].max(clusters[y][0]);
                    match best {
                        Some((bd, ba, bb)) if bd < d || (bd == d && (ba, bb) <= (ka, kb)) => {}
                        _ => best = Some((d, ka, kb)),
                    }
                }
            }
            let (_, ka, kb) = best.unwrap();
            let xi = clusters.iter().position(|c| c.contains(&ka)).unwrap();
            let yi = clusters.iter().position(|c| c.contains(&kb)).unwrap();
            let (lo, hi) = (xi.min(yi), xi.max(yi));
            let merged_tail = clusters.remove(hi);
            clusters[lo].extend(merged_tail);
            clusters[lo].sort_unstable();
        }
        let mut labels = vec![0usize; n];
        for cluster in &clusters {
            let id = cluster[0];
            for &m in cluster {
                labels[m] = id;
            }
        }
        labels
    }

    #[test]
    fn matches_bruteforce_dendrogram() {
        let mut rng = SplitMix64::new(31);
        for linkage in [Linkage::Average, Linkage::Complete, Linkage::Single] {
            for trial in 0..10 {
                let n = 8;
                let dim = 4;
                let vectors: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        let v: Vec<f64> = (0..dim).map(|_| rng.next_normal()).collect();
                        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        v.into_iter().map(|x| x / norm).collect()
                    })
                    .collect();
                let set = set_of(vectors.clone());
                for target_k in [1usize, 3, 5] {
                    let got = ahc_cluster(&set, &cfg(linkage, AhcStop::TargetK(target_k))).unwrap();
                    let reference = ClusterAssignment::from_raw_labels(&ahc_reference(
                        &vectors, linkage, target_k,
                    ));
                    assert_eq!(
                        got.labels(),
                        reference.labels(),
                        "linkage={linkage:?} trial={trial} k={target_k}"
                    );
                }
            }
        }
    }

    #[test]
    fn kmeans_cluster_extremes() {
        let set = set_of(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let one = kmeans_cluster(&set, 1, 3, 0).unwrap();
        assert_eq!(one.labels(), &[0, 0, 0]);
        let all = kmeans_cluster(&set, 3, 3, 0).unwrap();
        assert_eq!(all.k(), 3);
        assert!(kmeans_cluster(&set, 4, 3, 0).is_err());
    }
}
