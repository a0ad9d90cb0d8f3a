//! Symmetric eigendecomposition for small dense matrices.
//!
//! Householder tridiagonalization followed by implicit-shift QL, the classic
//! EISPACK tred2/tql2 pair. O(n^3), deterministic, and accurate to machine
//! precision at the sizes this crate works with (n up to a few thousand).

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Eigenvalues (ascending) and eigenvectors (columns, same order).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: SquareMatrix,
}

/// Decompose a symmetric matrix. Symmetry is the caller's contract; only the
/// lower triangle consistency of the result is guaranteed otherwise.
pub fn symmetric_eigen(m: &SquareMatrix) -> Result<Eigen> {
    let n = m.n();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: SquareMatrix::zeros(0),
        });
    }
    let mut v = m.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = SquareMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_col, v.get(row, old_col));
        }
    }
    Ok(Eigen { values, vectors })
}

/// Householder reduction to tridiagonal form, accumulating the transform in v.
fn tred2(v: &mut SquareMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.n();
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v.set(n - 1, i, v.get(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let val = v.get(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal, accumulating rotations in v.
fn tql2(v: &mut SquareMatrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.n();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::validation(format!(
                        "eigensolver failed to converge at index {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v.get(k, i + 1);
                        v.set(k, i + 1, s * v.get(k, i) + c * h);
                        v.set(k, i, c * v.get(k, i) - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_symmetric(n: usize, rng: &mut SplitMix64) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.next_f64() * 2.0 - 1.0;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    /// Independent oracle: cyclic Jacobi rotations. A different algorithm
    /// family from the tred2/tql2 implementation path above.
    fn jacobi_eigenvalues(m: &SquareMatrix) -> Vec<f64> {
        let n = m.n();
        let mut a = m.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a.get(i, j).abs();
                }
            }
            if off < 1e-13 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let tau = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    #[test]
    fn two_by_two_known_spectrum() {
        // [[1,-1],[-1,1]] has eigenvalues {0, 2}.
        let mut m = SquareMatrix::zeros(2);
        m.set(0, 0, 1.0);
        m.set(0, 1, -1.0);
        m.set(1, 0, -1.0);
        m.set(1, 1, 1.0);
        let eig = symmetric_eigen(&m).unwrap();
        assert!((eig.values[0] - 0.0).abs() < 1e-12);
        assert!((eig.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matches_jacobi_oracle() {
        let mut rng = SplitMix64::new(5);
        for n in [1usize, 2, 3, 6, 10, 17] {
            let m = random_symmetric(n, &mut rng);
            let eig = symmetric_eigen(&m).unwrap();
            let oracle = jacobi_eigenvalues(&m);
            for (a, b) in eig.values.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn residuals_tiny() {
        let mut rng = SplitMix64::new(6);
        for _ in 0..10 {
            let n = 3 + rng.next_below(20);
            let m = random_symmetric(n, &mut rng);
            let eig = symmetric_eigen(&m).unwrap();
            for (idx, &lambda) in eig.values.iter().enumerate() {
                let vcol = eig.vectors.column(idx);
                let mv = m.matvec(&vcol);
                let resid: f64 = mv
                    .iter()
                    .zip(&vcol)
                    .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
                    .sum::<f64>()
                    .sqrt();
                assert!(resid <= 1e-9 * n as f64, "n={n} idx={idx} resid={resid}");
            }
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let mut rng = SplitMix64::new(7);
        let m = random_symmetric(8, &mut rng);
        let eig = symmetric_eigen(&m).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let dot: f64 = (0..8)
                    .map(|k| eig.vectors.get(k, i) * eig.vectors.get(k, j))
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10, "({i},{j}) dot={dot}");
            }
        }
    }
}
