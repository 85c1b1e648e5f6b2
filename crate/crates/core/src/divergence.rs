//! Misspecification indices between the data distribution and model-0,
//! computed in the rank domain from a comparison density `d(u)`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::error::{bail, Error, Result};
use crate::quadrature::integrate_unit_split;
use crate::sharpening::{series_crossings, DSharpModel};
use crate::special::chisq_sf;

/// Divergence functionals `∫ psi(d(u)) du` and the Rényi family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceKind {
    Kl,
    Tv,
    Hellinger,
    ChiSq,
    Renyi(f64),
}

impl DivergenceKind {
    /// `psi(x)`; `None` for Rényi, which is not of Csiszár form here.
    pub fn psi(self, x: f64) -> Option<f64> {
        Some(match self {
            DivergenceKind::Kl => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            DivergenceKind::Tv => (x - 1.0).abs(),
            DivergenceKind::Hellinger => {
                let r = 1.0 - x.sqrt();
                r * r
            }
            DivergenceKind::ChiSq => (x - 1.0) * (x - 1.0),
            DivergenceKind::Renyi(_) => return None,
        })
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceKind::Kl => f.write_str("kl"),
            DivergenceKind::Tv => f.write_str("tv"),
            DivergenceKind::Hellinger => f.write_str("hellinger"),
            DivergenceKind::ChiSq => f.write_str("chisq"),
            DivergenceKind::Renyi(a) => write!(f, "renyi:{a}"),
        }
    }
}

impl FromStr for DivergenceKind {
    type Err = Error;

    /// `kl`, `tv`, `hellinger`, `chisq` or `renyi:ALPHA` (also `renyi` with α = 0.5).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "kl" => DivergenceKind::Kl,
            "tv" => DivergenceKind::Tv,
            "hellinger" => DivergenceKind::Hellinger,
            "chisq" | "chi2" => DivergenceKind::ChiSq,
            "renyi" => DivergenceKind::Renyi(0.5),
            other => match other.strip_prefix("renyi:") {
                Some(a) => {
                    let alpha: f64 = a
                        .parse()
                        .map_err(|_| Error::Parameter(format!("bad Renyi order `{a}`")))?;
                    check_alpha(alpha)?;
                    DivergenceKind::Renyi(alpha)
                }
                None => bail!(Parameter, "unknown divergence `{s}`"),
            },
        })
    }
}

/// A divergence value, with the chi-square calibration when applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub kind: DivergenceKind,
    pub value: f64,
    pub dof: Option<usize>,
    pub p_value: Option<f64>,
}

/// `∫_0^1 psi(d(u)) du` for a nonnegative comparison density.
pub fn csiszar<F: FnMut(f64) -> f64>(d: F, kind: DivergenceKind) -> Result<f64> {
    csiszar_split(d, kind, &[])
}

/// [`csiszar`] with the quadrature panels split at `breaks` (sorted kinks of `d`).
pub fn csiszar_split<F: FnMut(f64) -> f64>(
    mut d: F,
    kind: DivergenceKind,
    breaks: &[f64],
) -> Result<f64> {
    if let DivergenceKind::Renyi(alpha) = kind {
        return renyi_split(d, alpha, breaks);
    }
    let mut bad = None;
    let value = integrate_unit_split(
        |u| {
            let x = d(u);
            if x.is_nan() || x < 0.0 {
                bad.get_or_insert(x);
                return 0.0;
            }
            kind.psi(x).unwrap_or(0.0)
        },
        breaks,
    );
    if let Some(x) = bad {
        bail!(Evaluation, "comparison density returned {x}");
    }
    if !value.is_finite() {
        bail!(Evaluation, "{kind} divergence is not finite");
    }
    Ok(value)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha == 0.0 || alpha == 1.0 {
        bail!(Parameter, "Renyi order must be finite and differ from 0 and 1, got {alpha}");
    }
    Ok(())
}

/// `R_alpha = (1 - ∫ d^alpha) / (alpha (1 - alpha))`.
pub fn renyi<F: FnMut(f64) -> f64>(d: F, alpha: f64) -> Result<f64> {
    renyi_split(d, alpha, &[])
}

pub fn renyi_split<F: FnMut(f64) -> f64>(mut d: F, alpha: f64, breaks: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    let mut bad = None;
    let integral = integrate_unit_split(
        |u| {
            let x = d(u);
            if x.is_nan() || x < 0.0 {
                bad.get_or_insert(x);
                return 0.0;
            }
            x.powf(alpha)
        },
        breaks,
    );
    if let Some(x) = bad {
        bail!(Evaluation, "comparison density returned {x}");
    }
    let value = (1.0 - integral) / (alpha * (1.0 - alpha));
    if !value.is_finite() {
        bail!(Evaluation, "Renyi divergence is not finite");
    }
    Ok(value)
}

/// Parseval form of the chi-square index, `sum LP_j^2`, with the
/// `n * sum LP_j^2 ~ chi2_m` null calibration.
pub fn chisq_index(coeffs: &[f64], n: usize) -> Result<DivergenceReport> {
    if coeffs.is_empty() {
        bail!(Input, "need at least one coefficient");
    }
    if n < 2 {
        bail!(Input, "sample size must be at least 2, got {n}");
    }
    let value: f64 = coeffs.iter().map(|c| c * c).sum();
    let dof = coeffs.len();
    Ok(DivergenceReport {
        kind: DivergenceKind::ChiSq,
        value,
        dof: Some(dof),
        p_value: Some(chisq_sf(n as f64 * value, dof).clamp(0.0, 1.0)),
    })
}

/// Divergence of a d-sharp model from its model-0, using the clipped and
/// renormalized comparison density.
pub fn model_divergence(model: &DSharpModel, kind: DivergenceKind) -> Result<DivergenceReport> {
    let value = csiszar_split(|u| model.ratio(u), kind, model.kinks())?;
    Ok(DivergenceReport { kind, value, dof: None, p_value: None })
}

/// Divergence of the unclipped series `1 + sum c_j T_j`, floored at `floor`
/// where it dips below it. Kinks of the floor are respected.
pub fn series_divergence(
    coeffs: &[(usize, f64)],
    floor: f64,
    kind: DivergenceKind,
) -> Result<f64> {
    let mut kinks: Vec<f64> = series_crossings(coeffs, floor);
    if matches!(kind, DivergenceKind::Tv) {
        kinks.extend(series_crossings(coeffs, 1.0));
        kinks.sort_by(f64::total_cmp);
    }
    csiszar_split(
        |u| crate::sharpening::series(coeffs, u).max(floor),
        kind,
        &kinks,
    )
}
