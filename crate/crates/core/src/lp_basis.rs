//! LP orthonormal polynomials in the rank domain `u = F0(x)`.
//!
//! For a continuous `F0` the Gram-Schmidt orthonormalization of the powers
//! of `T1(u) = sqrt(12) (u - 1/2)` under the uniform measure on `[0, 1]` is
//! the normalized shifted Legendre system `T_j(u) = sqrt(2j + 1) P*_j(u)`.
//! Monomial coefficients are produced by the Legendre three-term recurrence,
//! which is exact in double precision for the degrees allowed here. Point
//! evaluation runs the same recurrence at `t = 2u - 1` instead of Horner on
//! the monomial table: above degree ten the alternating monomial
//! coefficients cancel badly.

use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::error::{bail, Result};

/// Largest supported order.
pub const MAX_ORDER: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct LpBasis {
    /// `coeffs[j - 1][k]` is the coefficient of `u^k` in `T_j`.
    coeffs: Vec<Vec<f64>>,
}

impl LpBasis {
    /// Builds `T_1, ..., T_m` for `1 <= m <= 20`.
    pub fn new(max_order: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&max_order) {
            bail!(Domain, "basis order must be in 1..={MAX_ORDER}, got {max_order}");
        }
        // shifted Legendre P*_n(u) = P_n(2u - 1), integer coefficients
        let mut prev = vec![1.0];
        let mut cur = vec![-1.0, 2.0];
        let mut coeffs = Vec::with_capacity(max_order);
        for j in 1..=max_order {
            if j > 1 {
                // (n+1) P*_{n+1} = (2n+1)(2u-1) P*_n - n P*_{n-1}, n = j - 1
                let n = (j - 1) as f64;
                let mut next = vec![0.0; j + 1];
                for (k, &c) in cur.iter().enumerate() {
                    next[k + 1] += (2.0 * n + 1.0) * 2.0 * c;
                    next[k] -= (2.0 * n + 1.0) * c;
                }
                for (k, &c) in prev.iter().enumerate() {
                    next[k] -= n * c;
                }
                for c in next.iter_mut() {
                    *c /= n + 1.0;
                }
                prev = core::mem::replace(&mut cur, next);
            }
            let norm = ((2 * j + 1) as f64).sqrt();
            coeffs.push(cur.iter().map(|c| c * norm).collect());
        }
        Ok(Self { coeffs })
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.len()
    }

    /// Monomial coefficients of `T_j` (lowest power first).
    pub fn coefficients(&self, j: usize) -> Result<&[f64]> {
        self.check_order(j)?;
        Ok(&self.coeffs[j - 1])
    }

    fn check_order(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.max_order() {
            bail!(Domain, "basis index {j} outside 1..={}", self.max_order());
        }
        Ok(())
    }

    /// `T_j(u)` for `u` in `[0, 1]`.
    pub fn eval(&self, j: usize, u: f64) -> Result<f64> {
        self.check_order(j)?;
        if !(0.0..=1.0).contains(&u) {
            bail!(Domain, "u must lie in [0, 1], got {u}");
        }
        Ok(eval_unchecked(j, u))
    }

    /// Writes `T_1(u), ..., T_m(u)` into `out`; `m` may exceed `max_order`
    /// up to [`MAX_ORDER`].
    pub fn eval_all(&self, u: f64, out: &mut [f64]) {
        eval_all(u, out)
    }

    /// Evaluates `T_j` from the stored monomial coefficients by Horner's rule.
    /// Kept for cross-checking; loses accuracy above degree ten.
    pub fn eval_monomial(&self, j: usize, u: f64) -> Result<f64> {
        Ok(horner(self.coefficients(j)?, u))
    }

    /// `∫_0^w S_j(u) du`, where `S_j(u) = T_j(Q0(u); F0)` is `T_j` itself in
    /// the rank domain. Vanishes at `w = 0` and `w = 1`.
    pub fn integral_s(&self, j: usize, w: f64) -> Result<f64> {
        self.check_order(j)?;
        if !(0.0..=1.0).contains(&w) {
            bail!(Domain, "w must lie in [0, 1], got {w}");
        }
        Ok(integral_unchecked(j, w))
    }

    /// `sup_u |T_j(u)| = sqrt(2j + 1)`, attained at `u = 1`.
    pub fn sup_norm(j: usize) -> f64 {
        ((2 * j + 1) as f64).sqrt()
    }
}

/// `T_1(u), ..., T_m(u)` by the Legendre recurrence at `t = 2u - 1`.
#[inline]
pub(crate) fn eval_all(u: f64, out: &mut [f64]) {
    let t = 2.0 * u - 1.0;
    let (mut p_prev, mut p) = (1.0, t);
    for (idx, slot) in out.iter_mut().enumerate() {
        let n = idx + 1;
        *slot = ((2 * n + 1) as f64).sqrt() * p;
        let next = ((2 * n + 1) as f64 * t * p - n as f64 * p_prev) / (n + 1) as f64;
        p_prev = p;
        p = next;
    }
}

/// `T_j(u)` without range checks.
#[inline]
pub(crate) fn eval_unchecked(j: usize, u: f64) -> f64 {
    let t = 2.0 * u - 1.0;
    let (mut p_prev, mut p) = (1.0, t);
    for n in 1..j {
        let next = ((2 * n + 1) as f64 * t * p - n as f64 * p_prev) / (n + 1) as f64;
        p_prev = p;
        p = next;
    }
    ((2 * j + 1) as f64).sqrt() * p
}

/// `∫_0^w T_j(u) du = sqrt(2j+1) (P_{j+1}(t) - P_{j-1}(t)) / (2 (2j+1))`.
#[inline]
pub(crate) fn integral_unchecked(j: usize, w: f64) -> f64 {
    let t = 2.0 * w - 1.0;
    let (mut p_prev, mut p) = (1.0, t);
    let mut below = 1.0;
    for n in 1..=j {
        if n == j {
            below = p_prev;
        }
        let next = ((2 * n + 1) as f64 * t * p - n as f64 * p_prev) / (n + 1) as f64;
        p_prev = p;
        p = next;
    }
    let k = (2 * j + 1) as f64;
    k.sqrt() * (p - below) / (2.0 * k)
}

#[inline]
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
