//! Dense row-major matrices and the few factorizations the crate needs.
//!
//! Everything here operates on small symmetric matrices (correlation and
//! covariance matrices, whitened CCA forms; dimensions in the tens), so a
//! cyclic Jacobi eigensolver and an unpivoted Cholesky are both adequate
//! and fully deterministic. All eigenproblems in the crate are reduced to
//! symmetric form before they reach this module, which is what guarantees
//! real eigenvalues.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fmath;

/// Row-major dense matrix of f64.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape/data mismatch");
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    #[must_use]
    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    #[must_use]
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (j, &b) in orow.iter().enumerate() {
                    out_row[j] += a * b;
                }
            }
        }
        out
    }

    /// y = self · x for a vector x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|r| dot(self.row(r), x))
            .collect()
    }

    #[must_use]
    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    #[must_use]
    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    #[must_use]
    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(fmath::abs(v)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Force exact symmetry by averaging with the transpose.
    #[must_use]
    pub fn symmetrize(&self) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending with
/// matching eigenvector columns.
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column j is the unit eigenvector of `values[j]`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi rotation method. Unconditionally stable for symmetric
/// input; quadratic convergence once off-diagonals are small.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    assert_eq!(a.rows, a.cols, "sym_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.symmetrize();
    let mut v = Matrix::identity(n);
    if n == 1 {
        return Ok(SymEigen {
            values: vec![m.get(0, 0)],
            vectors: v,
        });
    }

    let frob: f64 = fmath::sqrt(m.data.iter().map(|x| x * x).sum::<f64>());
    let tol = 1e-14 * frob.max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if fmath::sqrt(2.0 * off) <= tol {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| {
                m.get(i, i)
                    .partial_cmp(&m.get(j, j))
                    .unwrap_or(core::cmp::Ordering::Equal)
            });
            let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
            let mut vectors = Matrix::zeros(n, n);
            for (new_col, &old_col) in order.iter().enumerate() {
                for r in 0..n {
                    vectors.set(r, new_col, v.get(r, old_col));
                }
            }
            return Ok(SymEigen { values, vectors });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if fmath::abs(apq) < 1e-300 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + fmath::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + fmath::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / fmath::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    Err(CoreError::numeric(format!(
        "Jacobi eigensolver failed to converge for a {n}x{n} matrix"
    )))
}

/// Lower-triangular Cholesky factor L with A = L·Lᵀ.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return Err(CoreError::numeric(format!(
                        "Cholesky pivot {s:.3e} at index {i}: matrix not positive definite"
                    )));
                }
                l.set(i, j, fmath::sqrt(s));
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve L x = b with L lower-triangular.
pub fn solve_lower(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Solve Lᵀ x = b with L lower-triangular.
pub fn solve_lower_transpose(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Solve A x = b for symmetric positive definite A.
pub fn spd_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    Ok(solve_lower_transpose(&l, &solve_lower(&l, b)))
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    let l = cholesky(a)?;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = solve_lower_transpose(&l, &solve_lower(&l, &e));
        e[j] = 0.0;
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    Ok(inv.symmetrize())
}

/// Clip eigenvalues below `floor` and reconstruct in the eigenvector basis.
/// Standard PSD repair for near-singular covariance/correlation matrices.
pub fn psd_repair(a: &Matrix, floor: f64) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    if eig.values.iter().all(|&v| v >= floor) {
        return Ok(a.symmetrize());
    }
    reconstruct_clipped(&eig, floor)
}

fn reconstruct_clipped(eig: &SymEigen, floor: f64) -> Result<Matrix> {
    let n = eig.values.len();
    let mut out = Matrix::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        let l = lam.max(floor);
        for r in 0..n {
            let vr = eig.vectors.get(r, j) * l;
            for c in 0..n {
                let cur = out.get(r, c);
                out.set(r, c, cur + vr * eig.vectors.get(c, j));
            }
        }
    }
    Ok(out.symmetrize())
}

/// Symmetric square root of a PSD matrix (eigenvalues clipped at 0).
pub fn psd_sqrt(a: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    let n = eig.values.len();
    let mut out = Matrix::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        let l = fmath::sqrt(lam.max(0.0));
        for r in 0..n {
            let vr = eig.vectors.get(r, j) * l;
            for c in 0..n {
                let cur = out.get(r, c);
                out.set(r, c, cur + vr * eig.vectors.get(c, j));
            }
        }
    }
    Ok(out.symmetrize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(fmath::abs(a - b) <= tol, "{a} vs {b}");
    }

    #[test]
    fn eigen_2x2_known() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let a = Matrix::from_vec(2, 2, vec![2.0, 1.0, 1.0, 2.0]);
        let e = sym_eigen(&a).unwrap();
        assert_close(e.values[0], 1.0, 1e-12);
        assert_close(e.values[1], 3.0, 1e-12);
    }

    #[test]
    fn eigen_reconstructs_and_is_orthonormal() {
        let mut rng = crate::rng::Prng::new(42);
        let n = 8;
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.normal();
                a.set(i, j, v);
                a.set(j, i, v);
            }
        }
        let e = sym_eigen(&a).unwrap();
        // V diag(w) Vt == A
        let mut lam = Matrix::zeros(n, n);
        for i in 0..n {
            lam.set(i, i, e.values[i]);
        }
        let recon = e.vectors.matmul(&lam).matmul(&e.vectors.transpose());
        assert!(recon.sub(&a).max_abs() < 1e-10);
        // Vt V == I
        let vtv = e.vectors.transpose().matmul(&e.vectors);
        assert!(vtv.sub(&Matrix::identity(n)).max_abs() < 1e-10);
        // ascending order
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
    }

    #[test]
    fn cholesky_round_trip() {
        let a = Matrix::from_vec(3, 3, vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]);
        let l = cholesky(&a).unwrap();
        let recon = l.matmul(&l.transpose());
        assert!(recon.sub(&a).max_abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn spd_inverse_gives_identity() {
        let a = Matrix::from_vec(3, 3, vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]);
        let inv = spd_inverse(&a).unwrap();
        let prod = a.matmul(&inv);
        assert!(prod.sub(&Matrix::identity(3)).max_abs() < 1e-10);
    }

    #[test]
    fn spd_solve_matches_inverse() {
        let a = Matrix::from_vec(2, 2, vec![3.0, 1.0, 1.0, 2.0]);
        let b = [5.0, 5.0];
        let x = spd_solve(&a, &b).unwrap();
        // 3x + y = 5, x + 2y = 5 -> x = 1, y = 2
        assert_close(x[0], 1.0, 1e-12);
        assert_close(x[1], 2.0, 1e-12);
    }

    #[test]
    fn psd_repair_clips_negative_eigenvalue() {
        // correlation-like matrix that is slightly indefinite
        let a = Matrix::from_vec(2, 2, vec![1.0, 1.02, 1.02, 1.0]);
        let r = psd_repair(&a, 1e-8).unwrap();
        let e = sym_eigen(&r).unwrap();
        assert!(e.values.iter().all(|&v| v >= 1e-8 - 1e-12));
        // PD input passes through unchanged
        let b = Matrix::from_vec(2, 2, vec![1.0, 0.5, 0.5, 1.0]);
        assert!(psd_repair(&b, 1e-8).unwrap().sub(&b).max_abs() < 1e-14);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let a = Matrix::from_vec(2, 2, vec![2.0, 0.5, 0.5, 1.0]);
        let s = psd_sqrt(&a).unwrap();
        assert!(s.matmul(&s).sub(&a).max_abs() < 1e-12);
    }

    #[test]
    fn matvec_and_dot() {
        let a = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = a.matvec(&[1.0, 0.0, -1.0]);
        assert_eq!(y, vec![-2.0, -2.0]);
        assert_close(dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0, 0.0);
    }
}
