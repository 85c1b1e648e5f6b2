//! Quantile-to-distribution: expert quantile-probability pairs to a full
//! d-sharp density.
//!
//! Writing `F = F0 + sum_j beta_j ∫_0^{F0} T_j` at each pair gives the linear
//! system `v = S0 beta` with `v_i = p_i - F0(x_i)`. It is solved by least
//! squares when the design allows, otherwise by lasso.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::distributions::{BaseModel, Family, Univariate};
use crate::error::{bail, Error, Result};
use crate::linalg;
pub use crate::linalg::Matrix;
use crate::lp_basis::{self, MAX_ORDER};
use crate::sharpening::{make_dsharp, series_integral, DSharpModel};
use crate::special::norm_quantile;

/// Default number of LP coefficients.
pub const DEFAULT_ORDER: usize = 6;
/// Points on the automatic lasso penalty grid.
pub const LAMBDA_GRID: usize = 50;
/// Ratio between the smallest and largest penalty on the grid.
pub const LAMBDA_RATIO: f64 = 1e-4;
const CD_TOL: f64 = 1e-10;
const CD_SWEEPS: usize = 100_000;
const MAX_CONDITION: f64 = 1e12;

/// Quantile-probability pairs, strictly increasing in both coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QpData {
    pairs: Vec<(f64, f64)>,
}

impl QpData {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.len() < 2 {
            bail!(Input, "need at least two quantile-probability pairs, got {}", pairs.len());
        }
        for (i, &(x, p)) in pairs.iter().enumerate() {
            if !x.is_finite() {
                bail!(Input, "pair {}: quantile {x} is not finite", i + 1);
            }
            if !(p > 0.0 && p < 1.0) {
                bail!(Input, "pair {}: probability {p} outside (0, 1)", i + 1);
            }
        }
        for (i, w) in pairs.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !(w[1].1 > w[0].1) {
                bail!(Input, "pairs {} and {} are not strictly increasing", i + 1, i + 2);
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Standard quantile of a location-scale family, with the map from
/// (intercept, slope) back to the family's parameters.
fn standard_quantile(family: Family, p: f64) -> Result<f64> {
    Ok(match family {
        Family::Normal | Family::LogNormal => norm_quantile(p),
        Family::Logistic => (p / (1.0 - p)).ln(),
        Family::Laplace => {
            if p < 0.5 {
                (2.0 * p).ln()
            } else {
                -(2.0 - 2.0 * p).ln()
            }
        }
        Family::Uniform => p,
        other => bail!(Parameter, "{} is not a location-scale family", other.name()),
    })
}

/// Regresses `x_i` on the family's standard quantile at `p_i`; intercept
/// and slope become location and scale. The lognormal family regresses
/// `ln x_i` instead.
pub fn init_location_scale(qp: &QpData, family: Family) -> Result<BaseModel> {
    let mut rows = Vec::with_capacity(qp.len());
    let mut ys = Vec::with_capacity(qp.len());
    for &(x, p) in qp.pairs() {
        rows.push(vec![1.0, standard_quantile(family, p)?]);
        ys.push(if family == Family::LogNormal {
            if x <= 0.0 {
                bail!(Support, "lognormal needs positive quantiles, got {x}");
            }
            x.ln()
        } else {
            x
        });
    }
    let coef = linalg::lstsq(&Matrix::from_rows(&rows), &ys)?;
    let (loc, scale) = (coef[0], coef[1]);
    if !(scale > 0.0) {
        bail!(Parameter, "fitted scale {scale} is not positive");
    }
    match family {
        Family::Normal => BaseModel::normal(loc, scale),
        Family::LogNormal => BaseModel::lognormal(loc, scale),
        Family::Logistic => BaseModel::logistic(loc, scale),
        Family::Laplace => BaseModel::laplace(loc, scale),
        Family::Uniform => BaseModel::uniform(loc, loc + scale),
        _ => unreachable!(),
    }
}

/// Exponential model-0 with mean `median / ln 2`; the median is read off the
/// `p = 0.5` pair or interpolated linearly between its neighbours.
pub fn init_exponential(qp: &QpData) -> Result<BaseModel> {
    let pairs = qp.pairs();
    let median = match pairs.iter().find(|&&(_, p)| p == 0.5) {
        Some(&(x, _)) => x,
        None => {
            let k = pairs.partition_point(|&(_, p)| p < 0.5);
            if k == 0 || k == pairs.len() {
                bail!(Input, "the median is not bracketed by the quantile pairs");
            }
            let (x0, p0) = pairs[k - 1];
            let (x1, p1) = pairs[k];
            x0 + (x1 - x0) * (0.5 - p0) / (p1 - p0)
        }
    };
    if !(median > 0.0) {
        bail!(Support, "exponential model needs a positive median, got {median}");
    }
    BaseModel::exponential(median / core::f64::consts::LN_2)
}

/// Model-0 for `family`: exponential by the median rule, otherwise by regression.
pub fn init_base(qp: &QpData, family: Family) -> Result<BaseModel> {
    match family {
        Family::Exponential => init_exponential(qp),
        _ => init_location_scale(qp, family),
    }
}

/// `v_i = p_i - F0(x_i)` and `S0[i][j] = ∫_0^{F0(x_i)} T_{j+1}`.
pub fn design_matrix<M: Univariate>(qp: &QpData, base: &M, m: usize) -> Result<(Vec<f64>, Matrix)> {
    if !(1..=MAX_ORDER).contains(&m) {
        bail!(Domain, "order must be in 1..={MAX_ORDER}, got {m}");
    }
    let mut s0 = Matrix::zeros(qp.len(), m);
    let mut v = Vec::with_capacity(qp.len());
    for (i, &(x, p)) in qp.pairs().iter().enumerate() {
        let u = base.cdf(x);
        v.push(p - u);
        for j in 1..=m {
            s0.set(i, j - 1, lp_basis::integral_unchecked(j, u));
        }
    }
    Ok((v, s0))
}

/// Least squares through QR; a rank-deficient or badly conditioned design
/// (cond(S0^T S0) ≥ 1e12) is a singular-design error.
pub fn solve_ols(v: &[f64], s0: &Matrix) -> Result<Vec<f64>> {
    if s0.cols() > s0.rows() {
        bail!(
            Singular,
            "{} coefficients from {} pairs is underdetermined; use lasso",
            s0.cols(),
            s0.rows()
        );
    }
    let cond = linalg::gram_condition(s0);
    if !(cond < MAX_CONDITION) {
        bail!(Singular, "design condition number {cond:.3e} is too large; use lasso");
    }
    linalg::lstsq(s0, v).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("{msg}; use lasso")),
        other => other,
    })
}

/// Penalty choice for [`solve_lasso`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    /// Leave-one-out cross-validation over the logarithmic grid.
    Auto,
}

/// Lasso solution with the penalty actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub lambda_max: f64,
    /// `(lambda, LOO mean squared error)` when chosen automatically.
    pub cv: Vec<(f64, f64)>,
}

/// The automatic penalty grid, from `lambda_max` down to `1e-4 lambda_max`.
pub fn lambda_grid(lambda_max: f64) -> Vec<f64> {
    (0..LAMBDA_GRID)
        .map(|k| lambda_max * LAMBDA_RATIO.powf(k as f64 / (LAMBDA_GRID - 1) as f64))
        .collect()
}

/// `||v - S0 beta||^2 + lambda ||beta||_1` by cyclic coordinate descent.
pub fn solve_lasso(v: &[f64], s0: &Matrix, lambda: Lambda) -> Result<LassoFit> {
    if s0.rows() < 2 {
        bail!(Input, "lasso needs at least two pairs");
    }
    let lmax = linalg::lambda_max(s0, v);
    let (lambda, cv) = match lambda {
        Lambda::Fixed(l) => {
            if !(l >= 0.0 && l.is_finite()) {
                bail!(Parameter, "lasso penalty must be finite and nonnegative, got {l}");
            }
            (l, Vec::new())
        }
        Lambda::Auto => loo_lambda(v, s0, lmax),
    };
    let mut beta = vec![0.0; s0.cols()];
    if lambda < lmax {
        if linalg::lasso_cd(s0, v, lambda, &mut beta, CD_TOL, CD_SWEEPS).is_none() {
            bail!(IterationLimit, "lasso did not converge within {CD_SWEEPS} sweeps at lambda {lambda:e}");
        }
    }
    Ok(LassoFit { beta, lambda, lambda_max: lmax, cv })
}

fn loo_lambda(v: &[f64], s0: &Matrix, lmax: f64) -> (f64, Vec<(f64, f64)>) {
    if lmax == 0.0 {
        return (0.0, Vec::new());
    }
    let grid = lambda_grid(lmax);
    let l = s0.rows();
    let folds: Vec<(Matrix, Vec<f64>)> = (0..l)
        .map(|i| {
            let vi: Vec<f64> = v.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &x)| x).collect();
            (s0.without_row(i), vi)
        })
        .collect();
    let mut warm = vec![vec![0.0; s0.cols()]; l];
    let mut cv = Vec::with_capacity(grid.len());
    let mut best = (grid[0], f64::INFINITY);
    for &lambda in &grid {
        let mut sse = 0.0;
        for (i, (a, b)) in folds.iter().enumerate() {
            if linalg::lasso_cd(a, b, lambda, &mut warm[i], CD_TOL, CD_SWEEPS).is_none() {
                log::debug!("cross-validation fold {i} at lambda {lambda:e} hit the sweep limit");
            }
            let pred: f64 = s0.row(i).iter().zip(&warm[i]).map(|(s, b)| s * b).sum();
            sse += (v[i] - pred).powi(2);
        }
        let mse = sse / l as f64;
        cv.push((lambda, mse));
        // grid runs from large to small lambda; strict improvement keeps the larger one
        if mse < best.1 {
            best = (lambda, mse);
        }
    }
    (best.0, cv)
}

/// How the coefficients were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Ols,
    Lasso { lambda: f64 },
}

/// Solver requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    /// Lasso for five or more pairs, or when least squares is not possible.
    Auto,
    Ols,
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q2dOptions {
    pub m: usize,
    pub solver: Solver,
    pub lambda: Lambda,
}

impl Default for Q2dOptions {
    fn default() -> Self {
        Self { m: DEFAULT_ORDER, solver: Solver::Auto, lambda: Lambda::Auto }
    }
}

/// Fitted coefficients and the resulting model.
#[derive(Debug, Clone, PartialEq)]
pub struct Q2dFit {
    pub base: BaseModel,
    pub beta: Vec<f64>,
    pub method: Method,
    /// `||v - S0 beta||_2`.
    pub residual: f64,
    pub cv: Vec<(f64, f64)>,
    pub model: DSharpModel,
}

impl Q2dFit {
    /// `(j, beta_j)` pairs.
    pub fn coeffs(&self) -> Vec<(usize, f64)> {
        self.beta.iter().enumerate().map(|(i, &b)| (i + 1, b)).collect()
    }

    /// Unclipped series cdf `F0 + sum beta_j ∫_0^{F0} T_j` used by the solver.
    pub fn series_cdf(&self, x: f64) -> f64 {
        series_integral(&self.coeffs(), self.base.eval_cdf(x))
    }
}

/// Coefficients for `qp` against a given model-0.
pub fn fit_coefficients(qp: &QpData, base: &BaseModel, opts: &Q2dOptions) -> Result<Q2dFit> {
    let (v, s0) = design_matrix(qp, base, opts.m)?;
    let use_lasso = match opts.solver {
        Solver::Lasso => true,
        Solver::Ols => false,
        Solver::Auto => {
            qp.len() >= 5
                || qp.len() < opts.m
                || !(linalg::gram_condition(&s0) < MAX_CONDITION)
        }
    };
    let (beta, method, cv) = if use_lasso {
        let fit = solve_lasso(&v, &s0, opts.lambda)?;
        (fit.beta, Method::Lasso { lambda: fit.lambda }, fit.cv)
    } else {
        (solve_ols(&v, &s0)?, Method::Ols, Vec::new())
    };
    let fitted = s0.mul_vec(&beta);
    let residual = v.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let coeffs: Vec<(usize, f64)> = beta.iter().enumerate().map(|(i, &b)| (i + 1, b)).collect();
    let model = make_dsharp(base.clone(), &coeffs)?;
    Ok(Q2dFit { base: base.clone(), beta, method, residual, cv, model })
}

/// Initializes model-0 from `qp` and repairs it into a d-sharp density.
pub fn q2d(qp: &QpData, family: Family, opts: &Q2dOptions) -> Result<Q2dFit> {
    let base = init_base(qp, family)?;
    fit_coefficients(qp, &base, opts)
}
