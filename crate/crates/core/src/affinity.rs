//! Pairwise similarity matrices: plain cosine affinity and the multi-kernel
//! fused affinity (poly1-4 plus arc-cosine degree 0/1).
//!
//! All affinities map into [0, 1] with zero diagonal. Cosine similarity s is
//! mapped via (1+s)/2 rather than clamping negatives, so ordering among
//! dissimilar pairs survives and nonnegativity holds for spectral clustering.

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};

/// Symmetric nonnegative pairwise-similarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl AffinityMatrix {
    /// Build from an entry function over off-diagonal index pairs i < j.
    pub fn from_symmetric_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        let m = Self { n, values };
        m.validate()?;
        Ok(m)
    }

    /// Wrap raw row-major values, checking the type invariants.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::validation(format!(
                "expected {} values for a {n}x{n} matrix, got {}",
                n * n,
                values.len()
            )));
        }
        let m = Self { n, values };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(Error::validation(format!("nonzero diagonal at {i}")));
            }
            for j in 0..self.n {
                let v = self.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::validation(format!(
                        "entry ({i},{j}) = {v} outside [0,1]"
                    )));
                }
                if (v - self.get(j, i)).abs() > 1e-12 {
                    return Err(Error::validation(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Row sum (weighted degree of node i).
    pub fn degree(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub(crate) fn from_values_unchecked(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * n);
        Self { n, values }
    }
}

/// The six similarity kernels of the multi-kernel affinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelId {
    Poly1,
    Poly2,
    Poly3,
    Poly4,
    Arccos0,
    Arccos1,
}

impl KernelId {
    pub const ALL: [KernelId; 6] = [
        KernelId::Poly1,
        KernelId::Poly2,
        KernelId::Poly3,
        KernelId::Poly4,
        KernelId::Arccos0,
        KernelId::Arccos1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelId::Poly1 => "poly1",
            KernelId::Poly2 => "poly2",
            KernelId::Poly3 => "poly3",
            KernelId::Poly4 => "poly4",
            KernelId::Arccos0 => "arccos0",
            KernelId::Arccos1 => "arccos1",
        }
    }

    /// Kernel value for a cosine similarity s in [-1, 1].
    pub fn apply(self, s: f64) -> f64 {
        let s = s.clamp(-1.0, 1.0);
        match self {
            KernelId::Poly1 => (1.0 + s) / 2.0,
            KernelId::Poly2 => ((1.0 + s) / 2.0).powi(2),
            KernelId::Poly3 => ((1.0 + s) / 2.0).powi(3),
            KernelId::Poly4 => ((1.0 + s) / 2.0).powi(4),
            KernelId::Arccos0 => 1.0 - s.acos() / std::f64::consts::PI,
            KernelId::Arccos1 => {
                let theta = s.acos();
                (theta.sin() + (std::f64::consts::PI - theta) * theta.cos()) / std::f64::consts::PI
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn require_pairs(set: &EmbeddingSet) -> Result<usize> {
    let n = set.len();
    if n < 2 {
        return Err(Error::TooFewSegments(n));
    }
    Ok(n)
}

/// Cosine affinity: `a[i][j] = (1 + <v_i, v_j>) / 2` off-diagonal, 0 on the diagonal.
///
/// Expects a unit-normalized set.
pub fn cosine_affinity(set: &EmbeddingSet) -> Result<AffinityMatrix> {
    kernel_affinity(set, KernelId::Poly1)
}

/// Single-kernel affinity for a unit-normalized set.
pub fn kernel_affinity(set: &EmbeddingSet, kernel: KernelId) -> Result<AffinityMatrix> {
    let n = require_pairs(set)?;
    let vectors: Vec<&[f64]> = set.vectors().collect();
    AffinityMatrix::from_symmetric_fn(n, |i, j| {
        // Clamp guards rounding outside acos's domain.
        kernel.apply(dot(vectors[i], vectors[j]).clamp(-1.0, 1.0))
    })
}

/// Kernel fusion: min-max rescale each matrix over its off-diagonal entries
/// to `[0,1]` (constant matrices map to all-0.5), then take the entrywise mean.
pub fn fuse_kernels(matrices: &[AffinityMatrix]) -> Result<AffinityMatrix> {
    let weights = vec![1.0; matrices.len()];
    fuse_kernels_weighted(matrices, &weights)
}

/// Kernel fusion with explicit nonnegative weights (normalized internally).
/// Uniform weights are the parameter-free default; this is the override.
pub fn fuse_kernels_weighted(
    matrices: &[AffinityMatrix],
    weights: &[f64],
) -> Result<AffinityMatrix> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::validation("fuse_kernels needs at least one matrix"))?;
    let n = first.n();
    if matrices.iter().any(|m| m.n() != n) {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: matrices.iter().find(|m| m.n() != n).unwrap().n(),
        });
    }
    if weights.len() != matrices.len() {
        return Err(Error::validation(format!(
            "{} weights for {} matrices",
            weights.len(),
            matrices.len()
        )));
    }
    if weights.iter().any(|&w| w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::validation(
            "kernel weights must be nonnegative with positive sum",
        ));
    }
    let wsum: f64 = weights.iter().sum();

    let mut fused = vec![0.0; n * n];
    for (m, &w) in matrices.iter().zip(weights) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = m.get(i, j);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        let span = hi - lo;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let scaled = if span > 0.0 {
                        (m.get(i, j) - lo) / span
                    } else {
                        0.5
                    };
                    fused[i * n + j] += w / wsum * scaled;
                }
            }
        }
    }
    // Rounding can push a weighted mean of [0,1] values a hair outside.
    for v in &mut fused {
        *v = v.clamp(0.0, 1.0);
    }
    AffinityMatrix::from_values(n, fused)
}
