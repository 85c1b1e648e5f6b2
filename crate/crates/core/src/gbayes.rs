//! Grid generalized-Bayes updates driven by the sharpening kernel.
//!
//! For every grid value `theta`, the data are LP-coded against
//! `F0(.; theta)`, giving a comparison density `d~_theta`. The d-posterior
//! weight is `prior(theta) * exp(-scale * ∫ psi(d~_theta))`. KL gives the
//! smooth update, TV and Rényi the outlier-resistant ones.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::distributions::{BaseModel, Sample};
use crate::divergence::{series_divergence, DivergenceKind};
use crate::error::{bail, Error, Result};
use crate::sharpening::{estimate_raw, open_select};

/// Floor applied to the raw series before `log` and powers.
pub const KERNEL_FLOOR: f64 = 1e-12;
/// Rényi order used when none is given.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// A family with one or two free parameters, e.g. `Normal(theta, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFamily {
    template: BaseModel,
    free: Vec<&'static str>,
}

impl ParamFamily {
    /// `template` fixes the non-free parameters; `free` names the parameters
    /// that `theta` sets, in order.
    pub fn new(template: BaseModel, free: &[&str]) -> Result<Self> {
        if free.is_empty() || free.len() > 2 {
            bail!(Parameter, "one or two free parameters are supported, got {}", free.len());
        }
        let params = template.params();
        let mut names = Vec::with_capacity(free.len());
        for name in free {
            match params.iter().find(|(n, _)| n == name) {
                Some((n, _)) => names.push(*n),
                None => bail!(
                    Parameter,
                    "{} has no parameter `{name}`",
                    template.family().name()
                ),
            }
        }
        if names.len() == 2 && names[0] == names[1] {
            bail!(Parameter, "free parameters must differ");
        }
        Ok(Self { template, free: names })
    }

    pub fn names(&self) -> &[&'static str] {
        &self.free
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn template(&self) -> &BaseModel {
        &self.template
    }

    /// The family member at `theta`.
    pub fn at(&self, theta: &[f64]) -> Result<BaseModel> {
        if theta.len() != self.free.len() {
            bail!(Input, "theta has {} entries, expected {}", theta.len(), self.free.len());
        }
        let mut m = self.template.clone();
        for (name, &v) in self.free.iter().zip(theta) {
            m = m.with_param(name, v)?;
        }
        Ok(m)
    }
}

/// Raw LP coefficients of `data` against the family member at `theta`.
pub fn sharpening_kernel(
    data: &Sample,
    family: &ParamFamily,
    theta: &[f64],
    m: usize,
) -> Result<Vec<f64>> {
    let base = family.at(theta)?;
    estimate_raw(data, &base, m)
}

/// Which comparison density enters the divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// All `m` raw coefficients.
    Raw,
    /// Coefficients kept by OPEN at penalty `gamma`.
    Open { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorOptions {
    pub kind: DivergenceKind,
    pub m: usize,
    pub smoothing: Smoothing,
    /// Multiplier on the divergence in the exponent; 1 is the plain update.
    pub scale: f64,
}

impl Default for PosteriorOptions {
    fn default() -> Self {
        Self { kind: DivergenceKind::Kl, m: 6, smoothing: Smoothing::Raw, scale: 1.0 }
    }
}

/// Grid d-posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    pub names: Vec<&'static str>,
    pub grid: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    pub posterior: Vec<f64>,
    /// `∫ psi(d~_theta)` at each grid point.
    pub divergence: Vec<f64>,
    pub options: PosteriorOptions,
}

impl PosteriorGrid {
    /// Grid index of the largest posterior weight (first on ties).
    pub fn mode_index(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.posterior.iter().enumerate() {
            if p > self.posterior[best] {
                best = i;
            }
        }
        best
    }

    pub fn mode(&self) -> &[f64] {
        &self.grid[self.mode_index()]
    }

    /// Posterior mean of each coordinate.
    pub fn mean(&self) -> Vec<f64> {
        let d = self.names.len();
        (0..d)
            .map(|k| self.grid.iter().zip(&self.posterior).map(|(t, p)| t[k] * p).sum())
            .collect()
    }

    /// Posterior variance of each coordinate.
    pub fn variance(&self) -> Vec<f64> {
        let mean = self.mean();
        (0..self.names.len())
            .map(|k| {
                self.grid
                    .iter()
                    .zip(&self.posterior)
                    .map(|(t, p)| p * (t[k] - mean[k]).powi(2))
                    .sum()
            })
            .collect()
    }
}

/// `∫ psi(d~_theta)` for one grid point.
pub fn kernel_divergence(
    data: &Sample,
    family: &ParamFamily,
    theta: &[f64],
    opts: &PosteriorOptions,
) -> Result<f64> {
    let raw = sharpening_kernel(data, family, theta, opts.m)?;
    let coeffs: Vec<(usize, f64)> = match opts.smoothing {
        Smoothing::Raw => raw.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect(),
        Smoothing::Open { gamma } => open_select(&raw, data.len(), gamma)?.smooth,
    };
    series_divergence(&coeffs, KERNEL_FLOOR, opts.kind)
}

/// Posterior weights `prior * exp(-scale * I(theta))` over `grid`, normalized
/// after subtracting the largest log weight.
pub fn d_posterior(
    data: &Sample,
    family: &ParamFamily,
    grid: &[Vec<f64>],
    prior: &[f64],
    opts: &PosteriorOptions,
) -> Result<PosteriorGrid> {
    let divergence = grid
        .iter()
        .map(|theta| kernel_divergence(data, family, theta, opts))
        .collect::<Result<Vec<_>>>()?;
    posterior_from_divergences(family, grid, prior, divergence, opts)
}

/// Assembles the posterior from precomputed divergences (for callers that
/// evaluate grid points in parallel).
pub fn posterior_from_divergences(
    family: &ParamFamily,
    grid: &[Vec<f64>],
    prior: &[f64],
    divergence: Vec<f64>,
    opts: &PosteriorOptions,
) -> Result<PosteriorGrid> {
    if grid.is_empty() {
        bail!(Input, "parameter grid is empty");
    }
    if prior.len() != grid.len() || divergence.len() != grid.len() {
        bail!(Input, "prior has {} weights for {} grid points", prior.len(), grid.len());
    }
    if !(opts.scale > 0.0 && opts.scale.is_finite()) {
        bail!(Parameter, "divergence scale must be positive, got {}", opts.scale);
    }
    if prior.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        bail!(Input, "prior weights must be finite and nonnegative");
    }
    let total: f64 = prior.iter().sum();
    if !(total > 0.0) {
        bail!(Input, "prior weights sum to zero");
    }
    let prior: Vec<f64> = prior.iter().map(|w| w / total).collect();
    let logw: Vec<f64> = prior
        .iter()
        .zip(&divergence)
        .map(|(&p, &i)| if p > 0.0 { p.ln() - opts.scale * i } else { f64::NEG_INFINITY })
        .collect();
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Degenerate(format!("all posterior log weights are {top}")));
    }
    let unnorm: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    let posterior = unnorm.iter().map(|w| w / z).collect();
    Ok(PosteriorGrid {
        names: family.names().to_vec(),
        grid: grid.to_vec(),
        prior,
        posterior,
        divergence,
        options: *opts,
    })
}
