//! Parametric starting models ("model-0") and observed samples.
//!
//! A [`BaseModel`] is validated at construction, so evaluation never fails
//! except for quantiles requested outside the open unit interval. The
//! exponential family is parameterized by its mean.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::error::{bail, Error, Result};
use crate::quadrature;
use crate::special::{norm_cdf, norm_pdf, norm_quantile};

/// Deterministic generator used for every seeded draw in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A univariate continuous distribution usable as model-0.
pub trait Univariate {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    /// Left-continuous inverse of the cdf for `u` in `(0, 1)`.
    fn quantile(&self, u: f64) -> Result<f64>;
    /// Closed hull of the support.
    fn support(&self) -> (f64, f64);
    /// `E[g(X)]`, computed in the `u = F(x)` domain.
    fn expect<G: FnMut(f64) -> f64>(&self, g: G) -> f64;
    /// One draw from the distribution.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

/// Family tag of a [`BaseModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    LogNormal,
    Exponential,
    Uniform,
    Laplace,
    Logistic,
    Mixture,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::LogNormal => "lognormal",
            Family::Exponential => "exp",
            Family::Uniform => "uniform",
            Family::Laplace => "laplace",
            Family::Logistic => "logistic",
            Family::Mixture => "mix",
        }
    }

    /// Location-scale families admit quantile-regression initialization.
    pub fn is_location_scale(self) -> bool {
        matches!(
            self,
            Family::Normal | Family::Laplace | Family::Logistic | Family::Uniform
        )
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Family::Normal,
            "lognormal" => Family::LogNormal,
            "exp" | "exponential" => Family::Exponential,
            "uniform" => Family::Uniform,
            "laplace" => Family::Laplace,
            "logistic" => Family::Logistic,
            "mix" | "mixture" => Family::Mixture,
            other => bail!(Parameter, "unknown family `{other}`"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Normal { mean: f64, sd: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Exponential { mean: f64 },
    Uniform { a: f64, b: f64 },
    Laplace { loc: f64, scale: f64 },
    Logistic { loc: f64, scale: f64 },
    Mixture { parts: Vec<(f64, BaseModel)> },
}

/// A parametric model-0 exposing exact pdf, cdf and quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseModel {
    kind: Kind,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        bail!(Parameter, "{name} must be finite, got {v}");
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!(Parameter, "{name} must be positive and finite, got {v}");
    }
    Ok(())
}

impl BaseModel {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_positive("sd", sd)?;
        Ok(Self { kind: Kind::Normal { mean, sd } })
    }

    /// Log-normal with log-scale mean `mu` and log-scale sd `sigma`.
    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_positive("sigma", sigma)?;
        Ok(Self { kind: Kind::LogNormal { mu, sigma } })
    }

    /// Exponential with the given mean (not rate).
    pub fn exponential(mean: f64) -> Result<Self> {
        check_positive("mean", mean)?;
        Ok(Self { kind: Kind::Exponential { mean } })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check_finite("a", a)?;
        check_finite("b", b)?;
        if !(a < b) {
            bail!(Parameter, "uniform needs a < b, got a={a}, b={b}");
        }
        Ok(Self { kind: Kind::Uniform { a, b } })
    }

    pub fn laplace(loc: f64, scale: f64) -> Result<Self> {
        check_finite("loc", loc)?;
        check_positive("scale", scale)?;
        Ok(Self { kind: Kind::Laplace { loc, scale } })
    }

    pub fn logistic(loc: f64, scale: f64) -> Result<Self> {
        check_finite("loc", loc)?;
        check_positive("scale", scale)?;
        Ok(Self { kind: Kind::Logistic { loc, scale } })
    }

    /// Finite mixture. Weights must be nonnegative and sum to one (within
    /// 1e-9; they are renormalized exactly). Components may not themselves
    /// be mixtures.
    pub fn mixture(parts: Vec<(f64, BaseModel)>) -> Result<Self> {
        if parts.is_empty() {
            bail!(Parameter, "mixture needs at least one component");
        }
        let mut total = 0.0;
        for (w, m) in &parts {
            if !(w.is_finite() && *w >= 0.0) {
                bail!(Parameter, "mixture weight must be nonnegative, got {w}");
            }
            if m.family() == Family::Mixture {
                bail!(Parameter, "nested mixtures are not supported");
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            bail!(Parameter, "mixture weights sum to {total}, expected 1");
        }
        let parts = parts.into_iter().map(|(w, m)| (w / total, m)).collect();
        Ok(Self { kind: Kind::Mixture { parts } })
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Normal { .. } => Family::Normal,
            Kind::LogNormal { .. } => Family::LogNormal,
            Kind::Exponential { .. } => Family::Exponential,
            Kind::Uniform { .. } => Family::Uniform,
            Kind::Laplace { .. } => Family::Laplace,
            Kind::Logistic { .. } => Family::Logistic,
            Kind::Mixture { .. } => Family::Mixture,
        }
    }

    /// Named scalar parameters in spec-string order (empty for mixtures).
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.kind {
            Kind::Normal { mean, sd } => alloc::vec![("mean", mean), ("sd", sd)],
            Kind::LogNormal { mu, sigma } => alloc::vec![("mu", mu), ("sigma", sigma)],
            Kind::Exponential { mean } => alloc::vec![("mean", mean)],
            Kind::Uniform { a, b } => alloc::vec![("a", a), ("b", b)],
            Kind::Laplace { loc, scale } | Kind::Logistic { loc, scale } => {
                alloc::vec![("loc", loc), ("scale", scale)]
            }
            Kind::Mixture { .. } => Vec::new(),
        }
    }

    /// Mixture components with their weights (empty for plain families).
    pub fn components(&self) -> &[(f64, BaseModel)] {
        match &self.kind {
            Kind::Mixture { parts } => parts,
            _ => &[],
        }
    }

    /// Copy of the model with one named parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut params = self.params();
        let slot = params
            .iter_mut()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| {
                Error::Parameter(format!("{} has no parameter `{name}`", self.family().name()))
            })?;
        slot.1 = value;
        Self::from_params(self.family(), &params)
    }

    fn from_params(family: Family, params: &[(&str, f64)]) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parameter(format!("missing parameter `{key}`")))
        };
        match family {
            Family::Normal => Self::normal(get("mean")?, get("sd")?),
            Family::LogNormal => Self::lognormal(get("mu")?, get("sigma")?),
            Family::Exponential => Self::exponential(get("mean")?),
            Family::Uniform => Self::uniform(get("a")?, get("b")?),
            Family::Laplace => Self::laplace(get("loc")?, get("scale")?),
            Family::Logistic => Self::logistic(get("loc")?, get("scale")?),
            Family::Mixture => bail!(Parameter, "mixtures have no scalar parameters"),
        }
    }

    /// Simple moment-matching initializer (not maximum likelihood).
    pub fn fit_moments(family: Family, data: &Sample) -> Result<Self> {
        let n = data.len() as f64;
        if data.len() < 2 {
            bail!(Input, "moment matching needs at least two observations");
        }
        let moments = |xs: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = xs.collect();
            let m = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
            (m, var.sqrt())
        };
        let (mean, sd) = moments(&mut data.values().iter().copied());
        match family {
            Family::Normal => Self::normal(mean, sd),
            Family::LogNormal => {
                if data.values().iter().any(|&x| x <= 0.0) {
                    bail!(Support, "lognormal needs strictly positive data");
                }
                let (mu, sigma) = moments(&mut data.values().iter().map(|x| x.ln()));
                Self::lognormal(mu, sigma)
            }
            Family::Exponential => Self::exponential(mean),
            Family::Uniform => {
                let half = sd * 3f64.sqrt();
                Self::uniform(mean - half, mean + half)
            }
            Family::Laplace => Self::laplace(mean, sd / core::f64::consts::SQRT_2),
            Family::Logistic => {
                Self::logistic(mean, sd * 3f64.sqrt() / core::f64::consts::PI)
            }
            Family::Mixture => bail!(Parameter, "cannot moment-match a mixture"),
        }
    }

    /// Density at `x`; exactly zero outside the support.
    pub fn eval_pdf(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Normal { mean, sd } => norm_pdf((x - mean) / sd) / sd,
            Kind::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_pdf((x.ln() - mu) / sigma) / (x * sigma)
                }
            }
            Kind::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            Kind::Uniform { a, b } => {
                if x < *a || x > *b {
                    0.0
                } else {
                    1.0 / (b - a)
                }
            }
            Kind::Laplace { loc, scale } => (-(x - loc).abs() / scale).exp() / (2.0 * scale),
            Kind::Logistic { loc, scale } => {
                let e = (-((x - loc) / scale).abs()).exp();
                e / (scale * (1.0 + e) * (1.0 + e))
            }
            Kind::Mixture { parts } => parts.iter().map(|(w, m)| w * m.eval_pdf(x)).sum(),
        }
    }

    /// Cumulative probability at `x`; exactly 0 / 1 beyond the support.
    pub fn eval_cdf(&self, x: f64) -> f64 {
        let p = match &self.kind {
            Kind::Normal { mean, sd } => norm_cdf((x - mean) / sd),
            Kind::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - mu) / sigma)
                }
            }
            Kind::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Kind::Uniform { a, b } => {
                if x <= *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else {
                    (x - a) / (b - a)
                }
            }
            Kind::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Kind::Logistic { loc, scale } => {
                let z = (x - loc) / scale;
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            Kind::Mixture { parts } => parts.iter().map(|(w, m)| w * m.eval_cdf(x)).sum(),
        };
        p.clamp(0.0, 1.0)
    }

    /// Quantile function `Q0(u) = inf{x : F0(x) >= u}` for `u` in `(0, 1)`.
    pub fn eval_quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            bail!(Domain, "quantile level must lie in (0, 1), got {u}");
        }
        Ok(match &self.kind {
            Kind::Normal { mean, sd } => mean + sd * norm_quantile(u),
            Kind::LogNormal { mu, sigma } => (mu + sigma * norm_quantile(u)).exp(),
            Kind::Exponential { mean } => -mean * (-u).ln_1p(),
            Kind::Uniform { a, b } => a + (b - a) * u,
            Kind::Laplace { loc, scale } => {
                if u < 0.5 {
                    loc + scale * (2.0 * u).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - u)).ln()
                }
            }
            Kind::Logistic { loc, scale } => loc + scale * (u / (1.0 - u)).ln(),
            Kind::Mixture { parts } => self.mixture_quantile(parts, u)?,
        })
    }

    fn mixture_quantile(&self, parts: &[(f64, BaseModel)], u: f64) -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (w, m) in parts {
            if *w > 0.0 {
                let q = m.eval_quantile(u)?;
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        let scale = 1.0 + lo.abs().max(hi.abs());
        while hi - lo > 1e-14 * scale {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    fn expect_dyn(&self, g: &mut dyn FnMut(f64) -> f64) -> f64 {
        match &self.kind {
            Kind::Mixture { parts } => parts.iter().map(|(w, m)| w * m.expect_dyn(g)).sum(),
            _ => quadrature::integrate_unit(|u| match self.eval_quantile(u) {
                Ok(x) => g(x),
                Err(_) => f64::NAN,
            }),
        }
    }

    /// Seeded i.i.d. sample of size `n` (at least one draw is always produced).
    pub fn sample(&self, n: usize, seed: u64) -> Sample {
        let mut rng = seeded_rng(seed);
        let values = (0..n.max(1)).map(|_| self.draw(&mut rng)).collect();
        Sample { values }
    }
}

impl Univariate for BaseModel {
    fn pdf(&self, x: f64) -> f64 {
        self.eval_pdf(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.eval_cdf(x)
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        self.eval_quantile(u)
    }

    fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Normal { .. } | Kind::Laplace { .. } | Kind::Logistic { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Kind::LogNormal { .. } | Kind::Exponential { .. } => (0.0, f64::INFINITY),
            Kind::Uniform { a, b } => (*a, *b),
            Kind::Mixture { parts } => parts.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), (_, m)| {
                    let (a, b) = m.support();
                    (lo.min(a), hi.max(b))
                },
            ),
        }
    }

    fn expect<G: FnMut(f64) -> f64>(&self, mut g: G) -> f64 {
        self.expect_dyn(&mut g)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Mixture { parts } => {
                let pick: f64 = rng.sample(Open01);
                let mut acc = 0.0;
                for (w, m) in parts {
                    acc += w;
                    if pick < acc {
                        return m.draw(rng);
                    }
                }
                parts[parts.len() - 1].1.draw(rng)
            }
            _ => {
                let u: f64 = rng.sample(Open01);
                self.eval_quantile(u).unwrap_or(f64::NAN)
            }
        }
    }
}

impl fmt::Display for BaseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Mixture { parts } => {
                f.write_str("mix:")?;
                for (i, (w, m)) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write!(f, "{w}*{m}")?;
                }
                Ok(())
            }
            _ => {
                write!(f, "{}:", self.family().name())?;
                for (i, (k, v)) in self.params().iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}={v}")?;
                }
                Ok(())
            }
        }
    }
}

fn spec_err(spec: &str, reason: impl ToString) -> Error {
    Error::Spec { spec: spec.to_string(), reason: reason.to_string() }
}

impl FromStr for BaseModel {
    type Err = Error;

    /// Parses `normal:mean=M,sd=S`, `lognormal:mu=M,sigma=S`, `exp:mean=L`,
    /// `uniform:a=A,b=B`, `laplace:loc=L,scale=S`, `logistic:loc=L,scale=S`
    /// and `mix:w1*SPEC1|w2*SPEC2|...`.
    fn from_str(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| spec_err(spec, "expected `family:params`"))?;
        let family: Family = head.parse().map_err(|_| spec_err(spec, "unknown family"))?;
        if family == Family::Mixture {
            let mut parts = Vec::new();
            for piece in body.split('|') {
                let (w, inner) = piece
                    .split_once('*')
                    .ok_or_else(|| spec_err(spec, "mixture terms look like `w*SPEC`"))?;
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| spec_err(spec, format!("bad weight `{}`", w.trim())))?;
                parts.push((w, inner.parse::<BaseModel>()?));
            }
            return BaseModel::mixture(parts).map_err(|e| spec_err(spec, e));
        }
        let mut params: Vec<(String, f64)> = Vec::new();
        for kv in body.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| spec_err(spec, format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| spec_err(spec, format!("bad number `{}`", v.trim())))?;
            params.push((k.trim().to_ascii_lowercase(), v));
        }
        let expected: &[&str] = match family {
            Family::Normal => &["mean", "sd"],
            Family::LogNormal => &["mu", "sigma"],
            Family::Exponential => &["mean"],
            Family::Uniform => &["a", "b"],
            Family::Laplace | Family::Logistic => &["loc", "scale"],
            Family::Mixture => unreachable!(),
        };
        for (k, _) in &params {
            if !expected.contains(&k.as_str()) {
                return Err(spec_err(spec, format!("unexpected parameter `{k}`")));
            }
        }
        let named: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        BaseModel::from_params(family, &named).map_err(|e| spec_err(spec, e))
    }
}

/// Observed data `X_1, ..., X_n`: at least one finite value.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            bail!(Input, "sample is empty");
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            bail!(Input, "observation {i} is not finite ({v})");
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Nonparametric bootstrap resample of the same size.
    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sample {
        let n = self.values.len();
        let values = (0..n).map(|_| self.values[rng.gen_range(0..n)]).collect();
        Sample { values }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn bump_mixture() -> BaseModel {
        "mix:0.9*exp:mean=25|0.1*normal:mean=25,sd=2.5".parse().unwrap()
    }

    #[test]
    fn pdf_examples() {
        let e = BaseModel::exponential(4.32).unwrap();
        assert!(close(e.eval_pdf(0.0), 1.0 / 4.32, 1e-15));
        assert!(close(e.eval_pdf(0.0), 0.23148, 1e-5));
        let n = BaseModel::normal(0.0, 1.0).unwrap();
        assert!(close(n.eval_pdf(0.0), 0.39894, 1e-5));
        let mix = bump_mixture();
        let want = 0.9 * (1.0 / 25.0) * (-1.0f64).exp() + 0.1 * 0.159_576_912_160_573_1;
        assert!(close(mix.eval_pdf(25.0), want, 1e-15));
        // cross-check against the slope of the cdf
        let h = 1e-4;
        let slope = (mix.eval_cdf(25.0 + h) - mix.eval_cdf(25.0 - h)) / (2.0 * h);
        assert!(close(slope, want, 1e-8));
    }

    #[test]
    fn cdf_examples() {
        let lam = 7.5;
        let e = BaseModel::exponential(lam).unwrap();
        assert!(close(e.eval_cdf(lam * core::f64::consts::LN_2), 0.5, 1e-15));
        assert_eq!(BaseModel::normal(0.0, 1.0).unwrap().eval_cdf(0.0), 0.5);
        let ln = BaseModel::lognormal(4.0, 0.24).unwrap();
        assert!(close(ln.eval_cdf(4f64.exp()), 0.5, 1e-15));
        // bisection on the cdf lands on e^4
        let (mut lo, mut hi) = (1.0, 200.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ln.eval_cdf(mid) < 0.5 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!(close(hi, 4f64.exp(), 1e-10));
    }

    #[test]
    fn quantile_examples() {
        let e = BaseModel::exponential(25.0).unwrap();
        let u = 1.0 - (-1.0f64).exp();
        assert!(close(e.eval_quantile(u).unwrap(), 25.0, 1e-12));
        let n = BaseModel::normal(2.0, 1.0).unwrap();
        assert_eq!(n.eval_quantile(0.5).unwrap(), 2.0);
        let mix: BaseModel = "mix:0.5*normal:mean=-2,sd=1|0.5*normal:mean=2,sd=1".parse().unwrap();
        assert!(mix.eval_quantile(0.5).unwrap().abs() < 1e-12);
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(n.eval_quantile(bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn zero_outside_support() {
        let e = BaseModel::exponential(2.0).unwrap();
        assert_eq!(e.eval_pdf(-1.0), 0.0);
        assert_eq!(e.eval_cdf(-1.0), 0.0);
        let u = BaseModel::uniform(0.0, 2.0).unwrap();
        assert_eq!(u.eval_pdf(2.5), 0.0);
        assert_eq!(u.eval_cdf(2.5), 1.0);
        assert_eq!(u.eval_cdf(-0.5), 0.0);
        let ln = BaseModel::lognormal(0.0, 1.0).unwrap();
        assert_eq!(ln.eval_pdf(0.0), 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(BaseModel::normal(0.0, 0.0), Err(Error::Parameter(_))));
        assert!(BaseModel::exponential(-1.0).is_err());
        assert!(BaseModel::uniform(1.0, 1.0).is_err());
        assert!(BaseModel::lognormal(f64::NAN, 1.0).is_err());
        let n = BaseModel::normal(0.0, 1.0).unwrap();
        assert!(BaseModel::mixture(vec![(0.5, n.clone()), (0.4, n.clone())]).is_err());
        assert!(BaseModel::mixture(vec![(1.2, n.clone()), (-0.2, n)]).is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let n = BaseModel::normal(0.0, 1.0).unwrap();
        assert_eq!(n.sample(5, 7), n.sample(5, 7));
        assert_ne!(n.sample(5, 7), n.sample(5, 8));

        let e = BaseModel::exponential(25.0).unwrap();
        let s = e.sample(10_000, 1);
        let mean = s.values().iter().sum::<f64>() / 10_000.0;
        assert!(close(mean, 25.0, 1.0), "{mean}");

        // mass of the mixture on [20, 30], integrated by brute force
        let mix = bump_mixture();
        let steps = 100_000;
        let h = 10.0 / steps as f64;
        let mass: f64 = (0..steps)
            .map(|i| mix.eval_pdf(20.0 + (i as f64 + 0.5) * h) * h)
            .sum();
        assert!(mass > 0.1);
        let s = mix.sample(10_000, 1);
        let frac = s.values().iter().filter(|&&x| (20.0..=30.0).contains(&x)).count() as f64
            / 10_000.0;
        assert!(frac > 0.1 && close(frac, mass, 0.02), "{frac} vs {mass}");
    }

    #[test]
    fn spec_strings_round_trip() {
        for spec in [
            "normal:mean=0,sd=1",
            "lognormal:mu=4,sigma=0.24",
            "exp:mean=25",
            "uniform:a=-1,b=2.5",
            "laplace:loc=1,scale=2",
            "logistic:loc=0,scale=0.5",
            "mix:0.9*exp:mean=25|0.1*normal:mean=25,sd=2.5",
        ] {
            let m: BaseModel = spec.parse().unwrap();
            assert_eq!(m.to_string(), spec);
        }
        for bad in ["normal", "normal:mean=0", "gamma:k=1", "exp:mean=x", "normal:mean=0,sd=1,z=2"] {
            assert!(bad.parse::<BaseModel>().is_err(), "{bad}");
        }
    }

    #[test]
    fn expectation_matches_moments() {
        let e = BaseModel::exponential(25.0).unwrap();
        assert!(close(e.expect(|x| x), 25.0, 25.0 * 1e-6));
        let n = BaseModel::normal(1.0, 2.0).unwrap();
        assert!(close(n.expect(|x| x * x), 5.0, 1e-6));
        let mix = bump_mixture();
        assert!(close(mix.expect(|x| x), 0.9 * 25.0 + 0.1 * 25.0, 1e-4));
    }

    #[test]
    fn moment_matching() {
        let truth = BaseModel::normal(3.0, 2.0).unwrap();
        let s = truth.sample(20_000, 3);
        let fit = BaseModel::fit_moments(Family::Normal, &s).unwrap();
        let p = fit.params();
        assert!(close(p[0].1, 3.0, 0.05) && close(p[1].1, 2.0, 0.05));
        let neg = Sample::new(vec![-1.0, 2.0]).unwrap();
        assert!(BaseModel::fit_moments(Family::LogNormal, &neg).is_err());
    }

    #[test]
    fn with_param_replaces() {
        let n = BaseModel::normal(0.0, 1.0).unwrap();
        let m = n.with_param("mean", 1.5).unwrap();
        assert_eq!(m, BaseModel::normal(1.5, 1.0).unwrap());
        assert!(n.with_param("rate", 1.0).is_err());
        assert!(n.with_param("sd", -1.0).is_err());
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(Sample::new(vec![1.0, 2.0]).unwrap().len(), 2);
    }
}
