//! Dense real-symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by implicit-shift QL
//! iteration. Two entry points share the same reduction:
//!
//! * [`decompose`] accumulates the full orthonormal eigenvector matrix.
//! * [`spectral_weights`] only tracks the projections of two fixed vectors
//!   onto the eigenbasis. This is all that a single-site amplitude needs
//!   and avoids the `O(m^3)` eigenvector accumulation.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 60;

/// Tolerance on `max |A - A^T|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `max_k ||H v_k - lambda_k v_k||`.
    pub fn max_residual(&self, h: &DMatrix<f64>) -> f64 {
        let hv = h * &self.eigenvectors;
        (0..self.dim())
            .map(|k| (hv.column(k) - self.eigenvectors.column(k) * self.eigenvalues[k]).norm())
            .fold(0.0, f64::max)
    }

    /// `max |V^T V - I|` entrywise.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        let m = self.dim();
        (g - DMatrix::<f64>::identity(m, m)).amax()
    }

    /// `V diag(lambda) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[k];
        }
        scaled * self.eigenvectors.transpose()
    }
}

/// Eigenvalues together with the products `<a|v_k><v_k|b>` for two fixed
/// vectors `a`, `b`.
#[derive(Debug, Clone)]
pub struct SpectralWeights {
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Infinity norm (max absolute row sum).
pub fn norm_inf(h: &DMatrix<f64>) -> f64 {
    h.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn fingerprint(h: &DMatrix<f64>) -> u64 {
    let mut hasher = DefaultHasher::new();
    h.nrows().hash(&mut hasher);
    for v in h.iter() {
        v.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

fn check_symmetric(h: &DMatrix<f64>) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidParameter(format!(
            "matrix must be square, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let m = h.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..m {
        for i in j + 1..m {
            worst = worst.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(())
}

/// Householder vectors from the reduction, needed to rebuild `Q`.
struct Reflectors {
    /// `(first index, beta, v)` with `P = I - beta v v^T` acting on rows
    /// `first..m`.
    list: Vec<(usize, f64, Vec<f64>)>,
}

/// Reduces the symmetric matrix held in `a` (row-major, `m x m`, full
/// storage) to tridiagonal form `T = Q^T A Q`. Returns `(diag, offdiag)`.
/// Each reflector is handed to `on_reflector` as it is produced, so callers
/// can transform extra vectors on the fly.
fn tridiagonalize(
    a: &mut [f64],
    m: usize,
    mut on_reflector: impl FnMut(usize, f64, &[f64]),
) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    let mut v = vec![0.0; m];
    let mut p = vec![0.0; m];

    for k in 0..m.saturating_sub(2) {
        let first = k + 1;
        let r = m - first;
        let row_k = &a[k * m + first..k * m + m];
        let sigma: f64 = row_k.iter().map(|x| x * x).sum();
        let x0 = row_k[0];
        diag[k] = a[k * m + k];
        let norm = sigma.sqrt();
        if norm == 0.0 || sigma - x0 * x0 == 0.0 {
            // column already reduced
            off[k] = x0;
            continue;
        }
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let v = &mut v[..r];
        v.copy_from_slice(row_k);
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let beta = 2.0 / vnorm2;
        off[k] = alpha;

        // p = beta * A22 v
        let p = &mut p[..r];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a[(first + i) * m + first..(first + i) * m + m];
            *pi = beta * dot(row, v);
        }
        // w = p - (beta/2)(p.v) v, stored in p
        let kcoef = 0.5 * beta * dot(p, v);
        for (pi, vi) in p.iter_mut().zip(v.iter()) {
            *pi -= kcoef * vi;
        }
        // A22 -= v w^T + w v^T
        for i in 0..r {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(first + i) * m + first..(first + i) * m + m];
            for ((x, vj), wj) in row.iter_mut().zip(v.iter()).zip(p.iter()) {
                *x -= vi * wj + wi * vj;
            }
        }
        // row/column k now hold alpha e_1
        for j in first..m {
            a[k * m + j] = 0.0;
            a[j * m + k] = 0.0;
        }
        a[k * m + first] = alpha;
        a[first * m + k] = alpha;
        on_reflector(first, beta, v);
    }
    if m >= 2 {
        diag[m - 2] = a[(m - 2) * m + m - 2];
        off[m - 2] = a[(m - 1) * m + m - 2];
    }
    if m >= 1 {
        diag[m - 1] = a[(m - 1) * m + m - 1];
    }
    (diag, off)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorizes
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn apply_reflector(first: usize, beta: f64, v: &[f64], x: &mut [f64]) {
    let tail = &mut x[first..];
    let s = beta * dot(v, tail);
    for (xi, vi) in tail.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `rotate(i, c, s)`
/// is called for every plane rotation acting on columns `i` and `i + 1` of
/// the eigenvector accumulator. On success `diag` holds the (unsorted)
/// eigenvalues.
fn ql_implicit(
    diag: &mut [f64],
    off: &[f64],
    mut rotate: impl FnMut(usize, f64, f64),
) -> std::result::Result<(), usize> {
    let m = diag.len();
    if m == 0 {
        return Ok(());
    }
    let mut e = vec![0.0; m];
    e[..m - 1].copy_from_slice(off);

    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = diag[mm].abs() + diag[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(l);
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[mm] - diag[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                rotate(i, c, s);
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    Ok(())
}

fn row_major_copy(h: &DMatrix<f64>) -> Vec<f64> {
    // symmetric, so column-major storage is already the row-major layout
    h.as_slice().to_vec()
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Full eigendecomposition of a real-symmetric matrix.
pub fn decompose(h: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    check_symmetric(h)?;
    let m = h.nrows();
    let mut a = row_major_copy(h);
    let mut refl = Reflectors { list: Vec::new() };
    let (mut diag, off) = tridiagonalize(&mut a, m, |first, beta, v| {
        refl.list.push((first, beta, v.to_vec()));
    });

    // Q = P_0 P_1 ... ; Z starts as Q^T stored row-wise so that each
    // rotation on columns i, i+1 of (Q Z) touches two contiguous rows.
    let mut qt = vec![0.0; m * m];
    for i in 0..m {
        qt[i * m + i] = 1.0;
    }
    // rows of Q^T are columns of Q; build Q column by column: Q e_j
    for j in 0..m {
        let col = &mut qt[j * m..(j + 1) * m];
        for (first, beta, v) in refl.list.iter().rev() {
            apply_reflector(*first, *beta, v, col);
        }
    }
    // qt row j now holds column j of Q; eigenvectors are columns of Q Z,
    // i.e. rows of (Q Z)^T = Z^T Q^T: a rotation on Z's columns i, i+1 mixes
    // rows i, i+1 of qt.
    let res = ql_implicit(&mut diag, &off, |i, c, s| {
        let (lo, hi) = qt.split_at_mut((i + 1) * m);
        let ri = &mut lo[i * m..];
        let rj = &mut hi[..m];
        for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
            let f = *y;
            *y = s * *x + c * f;
            *x = c * *x - s * f;
        }
    });
    if let Err(index) = res {
        return Err(Error::NoConvergence { index, size: m, fingerprint: fingerprint(h) });
    }

    let order = ascending_order(&diag);
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let mut vecs = DMatrix::zeros(m, m);
    for (c, &k) in order.iter().enumerate() {
        let row = &qt[k * m..(k + 1) * m];
        for (r, &x) in row.iter().enumerate() {
            vecs[(r, c)] = x;
        }
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: vecs })
}

/// Eigenvalues only.
pub fn eigenvalues(h: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(h)?;
    let m = h.nrows();
    let mut a = row_major_copy(h);
    let (mut diag, off) = tridiagonalize(&mut a, m, |_, _, _| {});
    ql_implicit(&mut diag, &off, |_, _, _| {})
        .map_err(|index| Error::NoConvergence { index, size: m, fingerprint: fingerprint(h) })?;
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Eigenvalues of `h` together with `<a|v_k><v_k|b>` for every eigenvector.
pub fn spectral_weights(h: &DMatrix<f64>, a_vec: &[f64], b_vec: &[f64]) -> Result<SpectralWeights> {
    check_symmetric(h)?;
    let m = h.nrows();
    if a_vec.len() != m || b_vec.len() != m {
        return Err(Error::InvalidParameter(format!(
            "vector length mismatch: matrix {m}, vectors {} and {}",
            a_vec.len(),
            b_vec.len()
        )));
    }
    let mut a = row_major_copy(h);
    let mut qa = a_vec.to_vec();
    let mut qb = b_vec.to_vec();
    let (mut diag, off) = tridiagonalize(&mut a, m, |first, beta, v| {
        apply_reflector(first, beta, v, &mut qa);
        apply_reflector(first, beta, v, &mut qb);
    });
    // qa = Q^T a as a row vector; rotations act on its entries like on the
    // columns of Z.
    let res = ql_implicit(&mut diag, &off, |i, c, s| {
        for x in [&mut qa, &mut qb] {
            let f = x[i + 1];
            x[i + 1] = s * x[i] + c * f;
            x[i] = c * x[i] - s * f;
        }
    });
    if let Err(index) = res {
        return Err(Error::NoConvergence { index, size: m, fingerprint: fingerprint(h) });
    }
    let order = ascending_order(&diag);
    Ok(SpectralWeights {
        eigenvalues: order.iter().map(|&k| diag[k]).collect(),
        weights: order.iter().map(|&k| qa[k] * qb[k]).collect(),
    })
}
