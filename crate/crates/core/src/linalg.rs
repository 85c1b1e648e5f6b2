//! Small dense least-squares kernels.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::error::{bail, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^T A`.
    pub fn gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let s: f64 = (0..self.rows).map(|r| self.get(r, i) * self.get(r, j)).sum();
                g.set(i, j, s);
                g.set(j, i, s);
            }
        }
        g
    }

    /// Copy without row `skip`.
    pub fn without_row(&self, skip: usize) -> Matrix {
        let mut m = Matrix::zeros(self.rows - 1, self.cols);
        let mut k = 0;
        for i in (0..self.rows).filter(|&i| i != skip) {
            m.data[k * self.cols..(k + 1) * self.cols].copy_from_slice(self.row(i));
            k += 1;
        }
        m
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows;
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) * m.get(i, j))
            .sum();
        let diag: f64 = (0..n).map(|i| m.get(i, i) * m.get(i, i)).sum();
        if off <= 1e-30 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
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
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Condition number of `A^T A` (infinite when singular).
pub fn gram_condition(a: &Matrix) -> f64 {
    let ev = sym_eigenvalues(&a.gram());
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if hi <= 0.0 {
        return f64::INFINITY;
    }
    if lo <= hi * f64::EPSILON {
        return f64::INFINITY;
    }
    hi / lo
}

/// Least squares `argmin ||b - A x||` by Householder QR. Requires full column rank.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        bail!(Input, "right-hand side has {} entries, expected {m}", b.len());
    }
    if n > m {
        bail!(Singular, "{n} unknowns but only {m} equations");
    }
    let mut r = a.clone();
    let mut y = b.to_vec();
    let scale = (0..n)
        .map(|j| (0..m).map(|i| r.get(i, j).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    for k in 0..n {
        let norm = (k..m).map(|i| r.get(i, k) * r.get(i, k)).sum::<f64>().sqrt();
        if norm <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            bail!(Singular, "column {} is linearly dependent", k + 1);
        }
        let alpha = if r.get(k, k) > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * r.get(i, j)).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    r.set(i, j, r.get(i, j) - f * v[i - k]);
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * y[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                y[i] -= f * v[i - k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| r.get(k, j) * x[j]).sum();
        x[k] = (y[k] - s) / r.get(k, k);
    }
    Ok(x)
}

/// Cyclic coordinate descent for `||b - A x||^2 + lambda ||x||_1`, starting
/// from `x`. Returns the number of sweeps, or `None` when `max_sweeps` ran out
/// before the largest coefficient change fell below `tol`.
pub fn lasso_cd(
    a: &Matrix,
    b: &[f64],
    lambda: f64,
    x: &mut [f64],
    tol: f64,
    max_sweeps: usize,
) -> Option<usize> {
    let (m, n) = (a.rows, a.cols);
    let col_sq: Vec<f64> = (0..n).map(|j| (0..m).map(|i| a.get(i, j).powi(2)).sum()).collect();
    let mut resid: Vec<f64> = {
        let fit = a.mul_vec(x);
        b.iter().zip(fit).map(|(y, f)| y - f).collect()
    };
    for sweep in 1..=max_sweeps {
        let mut max_change = 0.0f64;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                x[j] = 0.0;
                continue;
            }
            let old = x[j];
            let rho: f64 =
                (0..m).map(|i| a.get(i, j) * resid[i]).sum::<f64>() + col_sq[j] * old;
            let new = soft_threshold(rho, 0.5 * lambda) / col_sq[j];
            if new != old {
                let d = new - old;
                for (i, r) in resid.iter_mut().enumerate() {
                    *r -= a.get(i, j) * d;
                }
                x[j] = new;
                max_change = max_change.max(d.abs());
            }
        }
        if max_change < tol {
            return Some(sweep);
        }
    }
    None
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Smallest `lambda` for which the lasso solution is zero: `2 max_j |a_j^T b|`.
pub fn lambda_max(a: &Matrix, b: &[f64]) -> f64 {
    (0..a.cols)
        .map(|j| (0..a.rows).map(|i| a.get(i, j) * b[i]).sum::<f64>().abs())
        .fold(0.0, f64::max)
        * 2.0
}
