//! Density sharpening without `std`.
//!
//! Given data and an imperfect parametric starting model `f0`, this crate
//! estimates the comparison density `d(u) = f(Q0(u)) / f0(Q0(u))` as an
//! orthonormal LP-polynomial series in `u = F0(x)`, measures how far the
//! model is from the data, and repairs it into the d-sharp density
//! `f0(x) * d(F0(x))`. On top of that sit robust decision making over a
//! bootstrap neighbourhood of repaired models, quantile-to-distribution
//! elicitation, data-weighted expert pooling and grid generalized-Bayes
//! updates.
//!
//! The crate only needs `alloc`. File formats, reports and the command line
//! live in the `dsharp` companion crate.
//!
//! ```
//! use dsharp_core::{BaseModel, Sample, sharpening};
//!
//! let truth = BaseModel::normal(0.3, 1.0).unwrap();
//! let data = truth.sample(2_000, 7);
//! let f0 = BaseModel::normal(0.0, 1.0).unwrap();
//! let fit = sharpening::fit(&data, &f0.into(), 6, 2.0).unwrap();
//! assert!(fit.selected().contains(&1));
//! ```
#![no_std]

extern crate alloc;

pub mod decisions;
pub mod distributions;
pub mod divergence;
mod error;
pub mod experts;
pub mod gbayes;
mod linalg;
pub mod lp_basis;
pub mod q2d;
pub mod quadrature;
pub mod sharpening;
pub mod special;

pub use distributions::{BaseModel, Family, Sample, Univariate};
pub use error::{Error, Result};
pub use lp_basis::LpBasis;
pub use sharpening::{DSharpModel, Model, SharpeningFit};

/// Master seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 20240101;
