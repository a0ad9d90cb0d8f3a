//! Spectral clustering: symmetric normalized Laplacian, eigengap speaker-count
//! estimation, row-normalized spectral embedding, and k-means assignment.

use crate::affinity::AffinityMatrix;
use crate::eig::symmetric_eigen;
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, ClusterAssignment};
use crate::matrix::SquareMatrix;

/// Configuration for spectral clustering.
#[derive(Debug, Clone)]
pub struct SpectralConfig {
    /// Known speaker count; when absent the eigengap estimate is used.
    pub num_speakers: Option<usize>,
    /// Upper bound for the eigengap search (only used when num_speakers is absent).
    pub max_speakers: usize,
    pub kmeans_restarts: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            num_speakers: Some(2),
            max_speakers: 10,
            kmeans_restarts: 10,
            seed: 0,
        }
    }
}

impl SpectralConfig {
    fn validate(&self) -> Result<()> {
        if self.max_speakers == 0 {
            return Err(Error::validation("max_speakers must be >= 1"));
        }
        if let Some(k) = self.num_speakers {
            if k == 0 {
                return Err(Error::validation("num_speakers must be >= 1"));
            }
            if k > self.max_speakers {
                return Err(Error::validation(format!(
                    "num_speakers {k} exceeds max_speakers {}",
                    self.max_speakers
                )));
            }
        }
        Ok(())
    }
}

/// Symmetric normalized Laplacian L = I - D^{-1/2} A D^{-1/2}.
///
/// Rejects isolated nodes (zero row sum); eigenvalues lie in [0, 2].
pub fn normalized_laplacian(a: &AffinityMatrix) -> Result<SquareMatrix> {
    let n = a.n();
    let mut inv_sqrt_degree = vec![0.0; n];
    for i in 0..n {
        let d = a.degree(i);
        if d <= 0.0 {
            return Err(Error::IsolatedNode(i));
        }
        inv_sqrt_degree[i] = 1.0 / d.sqrt();
    }
    let mut l = SquareMatrix::zeros(n);
    for i in 0..n {
        l.set(i, i, 1.0);
        for j in (i + 1)..n {
            let v = -inv_sqrt_degree[i] * a.get(i, j) * inv_sqrt_degree[j];
            l.set(i, j, v);
            l.set(j, i, v);
        }
    }
    Ok(l)
}

/// Eigengap heuristic: argmax over k in `[1, max_speakers]` of
/// `eigenvalues[k] - eigenvalues[k-1]`, ties to the smaller k.
pub fn estimate_num_speakers(eigenvalues: &[f64], max_speakers: usize) -> Result<usize> {
    if max_speakers == 0 {
        return Err(Error::validation("max_speakers must be >= 1"));
    }
    if eigenvalues.len() < max_speakers + 1 {
        return Err(Error::EigenvalueSequenceTooShort {
            len: eigenvalues.len(),
            max_speakers,
        });
    }
    let mut best_k = 1;
    let mut best_gap = f64::NEG_INFINITY;
    for k in 1..=max_speakers {
        let gap = eigenvalues[k] - eigenvalues[k - 1];
        if gap > best_gap {
            best_gap = gap;
            best_k = k;
        }
    }
    Ok(best_k)
}

/// Cluster an affinity matrix: eigenvectors of the K smallest Laplacian
/// eigenvalues, rows normalized to unit length (zero rows stay zero and are
/// assigned to cluster 0), then seeded k-means; labels are canonical.
pub fn spectral_cluster(a: &AffinityMatrix, cfg: &SpectralConfig) -> Result<ClusterAssignment> {
    cfg.validate()?;
    let n = a.n();
    let laplacian = normalized_laplacian(a)?;
    let eigen = symmetric_eigen(&laplacian)?;

    let k = match cfg.num_speakers {
        Some(k) => k,
        None => {
            let max = cfg.max_speakers.min(n.saturating_sub(1)).max(1);
            estimate_num_speakers(&eigen.values, max)?
        }
    };
    if n < k {
        return Err(Error::TooFewPoints { n, k });
    }

    // n x K spectral embedding, row-normalized.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut zero_rows = Vec::new();
    for i in 0..n {
        let mut row: Vec<f64> = (0..k).map(|c| eigen.vectors.get(i, c)).collect();
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut row {
                *x /= norm;
            }
        } else {
            zero_rows.push(i);
        }
        rows.push(row);
    }

    let outcome = kmeans(&rows, k, cfg.kmeans_restarts, cfg.seed)?;
    let mut labels = outcome.labels;
    for i in zero_rows {
        labels[i] = 0;
    }
    Ok(ClusterAssignment::from_raw_labels(&labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Block-diagonal affinity with the given block sizes; intra-block
    /// affinity w, no inter-block edges.
    pub(crate) fn block_affinity(blocks: &[usize], w: f64) -> AffinityMatrix {
        let n: usize = blocks.iter().sum();
        let mut block_of = Vec::with_capacity(n);
        for (b, &size) in blocks.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(b, size));
        }
        AffinityMatrix::from_symmetric_fn(
            n,
            |i, j| {
                if block_of[i] == block_of[j] {
                    w
                } else {
                    0.0
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn two_node_laplacian_normalizes_weight_away() {
        let a = AffinityMatrix::from_values(2, vec![0.0, 0.37, 0.37, 0.0]).unwrap();
        let l = normalized_laplacian(&a).unwrap();
        assert!((l.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((l.get(0, 1) + 1.0).abs() < 1e-15);
        let eig = symmetric_eigen(&l).unwrap();
        assert!(eig.values[0].abs() < 1e-12);
        assert!((eig.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn block_diagonal_zero_multiplicity() {
        for c in 2..=4 {
            let blocks: Vec<usize> = (0..c).map(|b| 3 + b).collect();
            let a = block_affinity(&blocks, 0.8);
            let l = normalized_laplacian(&a).unwrap();
            let eig = symmetric_eigen(&l).unwrap();
            let zeros = eig.values.iter().filter(|v| v.abs() <= 1e-8).count();
            assert_eq!(zeros, c, "c={c}: {:?}", &eig.values[..c + 1]);
        }
    }

    #[test]
    fn laplacian_eigenvalues_in_zero_two() {
        let mut rng = crate::rng::SplitMix64::new(40);
        for _ in 0..10 {
            let n = 3 + rng.next_below(12);
            let a = AffinityMatrix::from_symmetric_fn(n, |_, _| rng.next_f64()).unwrap();
            let l = normalized_laplacian(&a).unwrap();
            let eig = symmetric_eigen(&l).unwrap();
            for &v in &eig.values {
                assert!((-1e-8..=2.0 + 1e-8).contains(&v), "eigenvalue {v}");
            }
        }
    }

    #[test]
    fn isolated_node_rejected() {
        let a = AffinityMatrix::from_values(3, vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert!(matches!(
            normalized_laplacian(&a),
            Err(Error::IsolatedNode(2))
        ));
    }

    #[test]
    fn eigengap_examples() {
        assert_eq!(estimate_num_speakers(&[0.0, 0.0, 0.8, 0.9], 3).unwrap(), 2);
        assert_eq!(estimate_num_speakers(&[0.0, 1.0, 1.0, 1.0], 3).unwrap(), 1);
        assert!(matches!(
            estimate_num_speakers(&[0.0, 1.0], 3),
            Err(Error::EigenvalueSequenceTooShort { .. })
        ));
    }

    #[test]
    fn eigengap_counts_blocks() {
        let a = block_affinity(&[3, 4, 5], 0.9);
        let l = normalized_laplacian(&a).unwrap();
        let eig = symmetric_eigen(&l).unwrap();
        assert_eq!(estimate_num_speakers(&eig.values, 6).unwrap(), 3);
    }

    #[test]
    fn blocks_cluster_exactly() {
        let a = block_affinity(&[3, 4], 0.7);
        let cfg = SpectralConfig::default();
        let got = spectral_cluster(&a, &cfg).unwrap();
        assert_eq!(got.labels(), &[0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn two_nodes_two_clusters() {
        let a = AffinityMatrix::from_values(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let got = spectral_cluster(&a, &SpectralConfig::default()).unwrap();
        assert_eq!(got.labels(), &[0, 1]);
    }

    #[test]
    fn estimated_count_matches_blocks() {
        for c in 2..=4 {
            let blocks = vec![4; c];
            let a = block_affinity(&blocks, 0.8);
            let cfg = SpectralConfig {
                num_speakers: None,
                max_speakers: 6,
                ..Default::default()
            };
            let got = spectral_cluster(&a, &cfg).unwrap();
            assert_eq!(got.k(), c, "c={c}");
            // All nodes of one block share a label.
            for b in 0..c {
                let base = got.labels()[b * 4];
                for i in 0..4 {
                    assert_eq!(got.labels()[b * 4 + i], base);
                }
            }
        }
    }

    #[test]
    fn too_few_nodes_for_k() {
        let a = AffinityMatrix::from_values(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let cfg = SpectralConfig {
            num_speakers: Some(3),
            ..Default::default()
        };
        assert!(matches!(
            spectral_cluster(&a, &cfg),
            Err(Error::TooFewPoints { n: 2, k: 3 })
        ));
    }
}
