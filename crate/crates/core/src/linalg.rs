//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL iteration, in the classical
//! EISPACK/JAMA formulation (tred2 + tql2).
//!
//! Eigenvector accumulation roughly triples the cost, so it is optional;
//! convergence studies that only need Ritz values use the fast path. With
//! vectors, the accumulated rotations act on contiguous columns (the vector
//! matrix is stored column-major), which keeps the O(n³) inner loop on cache.

use crate::error::{Error, Result};

/// Dense symmetric matrix in row-major full storage.
#[derive(Debug, Clone)]
pub struct SymMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        SymMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Largest absolute deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }
}

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues, and the
/// matching orthonormal eigenvectors (column k of `vectors` pairs with
/// `values[k]`) when they were requested.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// column-major n×n, present only when vectors were accumulated
    pub vectors: Option<Vec<f64>>,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Option<&[f64]> {
        let n = self.values.len();
        self.vectors.as_ref().map(|v| &v[k * n..(k + 1) * n])
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
///
/// On return `d` holds the diagonal and `e[1..]` the subdiagonal. When
/// `accumulate` is set, `v` (row-major) holds the orthogonal reduction Q.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
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
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            // generate Householder vector
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

            // apply similarity transformation to remaining columns
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
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
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        // accumulate the Householder transformations into v; the reduced
        // diagonal is parked in the last row along the way
        for i in 0..(n - 1) {
            v[(n - 1) * n + i] = v[i * n + i];
            v[i * n + i] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for (k, item) in d.iter_mut().enumerate().take(i + 1) {
                    *item = v[k * n + i + 1] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[k * n + i + 1] * v[k * n + j];
                    }
                    for (k, item) in d.iter().enumerate().take(i + 1) {
                        v[k * n + j] -= g * item;
                    }
                }
            }
            for k in 0..=i {
                v[k * n + i + 1] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[(n - 1) * n + j];
            v[(n - 1) * n + j] = 0.0;
        }
        v[(n - 1) * n + (n - 1)] = 1.0;
    } else {
        // values-only path: the reduced tridiagonal diagonal sits on the
        // matrix diagonal
        for j in 0..n {
            d[j] = v[j * n + j];
        }
    }
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
///
/// `z`, when present, is the column-major orthogonal matrix the rotations are
/// accumulated into (initially the Q from `tred2`, transposed to columns).
fn tql2(n: usize, d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
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
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(Error::numeric(
                        "linalg",
                        format!("QL iteration failed to converge at eigenvalue {l}"),
                    ));
                }

                // implicit shift
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

                // QL sweep
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

                    if let Some(zm) = z.as_deref_mut() {
                        // rotate columns i and i+1
                        let (lo, hi) = zm.split_at_mut((i + 1) * n);
                        let col_i = &mut lo[i * n..(i + 1) * n];
                        let col_i1 = &mut hi[..n];
                        for k in 0..n {
                            let h = col_i1[k];
                            col_i1[k] = s * col_i[k] + c * h;
                            col_i[k] = c * col_i[k] - s * h;
                        }
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

    // sort ascending, permuting vectors alongside
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d.swap(k, i);
            if let Some(zm) = z.as_deref_mut() {
                for row in 0..n {
                    zm.swap(i * n + row, k * n + row);
                }
            }
        }
    }
    Ok(())
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn sym_eigen(mat: &SymMat, want_vectors: bool) -> Result<SymEigen> {
    let n = mat.n;
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    let asym = mat.asymmetry();
    let scale = mat.fro_norm();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::numeric(
            "linalg",
            format!("matrix is not symmetric: max asymmetry {asym:.3e}"),
        ));
    }
    let mut v = mat.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e, want_vectors);

    if want_vectors {
        // transpose the accumulated Q so tql2 rotates contiguous columns
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                z[j * n + i] = v[i * n + j];
            }
        }
        tql2(n, &mut d, &mut e, Some(&mut z))?;
        Ok(SymEigen {
            values: d,
            vectors: Some(z),
        })
    } else {
        tql2(n, &mut d, &mut e, None)?;
        Ok(SymEigen {
            values: d,
            vectors: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn diagonal_matrix() {
        let mut m = SymMat::zeros(4);
        for (i, v) in [3.0, -1.0, 2.0, 0.5].iter().enumerate() {
            m.set(i, i, *v);
        }
        let eig = sym_eigen(&m, true).unwrap();
        assert_eq!(eig.values, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_analytic() {
        let mut m = SymMat::zeros(2);
        m.set(0, 0, 2.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 2.0);
        let eig = sym_eigen(&m, true).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_residuals() {
        let n = 50;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let eig = sym_eigen(&m, true).unwrap();
        let norm = m.fro_norm();
        let z = eig.vectors.as_ref().unwrap();

        // per-pair residual ||Mv - lambda v|| <= 1e-9 ||M||
        for k in 0..n {
            let v: Vec<f64> = z[k * n..(k + 1) * n].to_vec();
            let mv = m.matvec(&v);
            let resid: f64 = mv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - eig.values[k] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-9 * norm, "k = {k}: residual {resid:.3e}");
        }

        // reconstruction ||M - V L V^T|| <= 1e-8 ||M||
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += z[k * n + i] * eig.values[k] * z[k * n + j];
                }
                err += (acc - m.get(i, j)).powi(2);
            }
        }
        assert!(err.sqrt() <= 1e-8 * norm);

        // orthonormality
        for k in 0..n {
            let nk: f64 = z[k * n..(k + 1) * n].iter().map(|x| x * x).sum();
            assert!((nk - 1.0).abs() < 1e-10);
        }

        // eigenvalues-only path agrees
        let fast = sym_eigen(&m, false).unwrap();
        for k in 0..n {
            assert!((fast.values[k] - eig.values[k]).abs() <= 1e-11 * norm);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let mut m = SymMat::zeros(3);
        m.set(0, 1, 1.0);
        m.set(1, 0, 2.0);
        assert!(sym_eigen(&m, false).is_err());
    }
}
