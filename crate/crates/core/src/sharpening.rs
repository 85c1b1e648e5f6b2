//! Comparison coding and d-sharp models.
//!
//! `estimate_raw` computes the plug-in LP coefficients `LP~[j] = mean T_j(F0(x_i))`,
//! `open_select` keeps the coefficients that survive the ordered AIC-type
//! penalty, and [`DSharpModel`] turns a coefficient set into the repaired
//! density `f0(x) * max(0, 1 + sum LP_j T_j(F0(x))) / Z`.
//!
//! The series is a polynomial in `u`, so its antiderivative is available in
//! closed form. The positive part is integrated exactly between the sign
//! changes of the series; cdf and quantile of a d-sharp model therefore need
//! no interpolation table.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;
use rand::distributions::Open01;
use rand::Rng;

use crate::distributions::{seeded_rng, BaseModel, Sample, Univariate};
use crate::error::{bail, Error, Result};
use crate::lp_basis::{self, MAX_ORDER};
use crate::quadrature;

/// Resolution of the sign-change scan used to locate zeros of the series.
pub const ROOT_SCAN_CELLS: usize = 4096;

/// A model-0: either a parametric family or an already sharpened model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Base(BaseModel),
    Sharp(DSharpModel),
}

impl From<BaseModel> for Model {
    fn from(m: BaseModel) -> Self {
        Model::Base(m)
    }
}

impl From<DSharpModel> for Model {
    fn from(m: DSharpModel) -> Self {
        Model::Sharp(m)
    }
}

impl Model {
    /// Seeded sample; identical to [`BaseModel::sample`] for plain families.
    pub fn sample(&self, n: usize, seed: u64) -> Sample {
        match self {
            Model::Base(b) => b.sample(n, seed),
            Model::Sharp(s) => s.sample(n, seed),
        }
    }
}

impl Univariate for Model {
    fn pdf(&self, x: f64) -> f64 {
        match self {
            Model::Base(b) => b.pdf(x),
            Model::Sharp(s) => s.pdf(x),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match self {
            Model::Base(b) => b.cdf(x),
            Model::Sharp(s) => s.cdf(x),
        }
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            Model::Base(b) => b.quantile(u),
            Model::Sharp(s) => s.quantile(u),
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            Model::Base(b) => b.support(),
            Model::Sharp(s) => s.support(),
        }
    }

    fn expect<G: FnMut(f64) -> f64>(&self, g: G) -> f64 {
        match self {
            Model::Base(b) => b.expect(g),
            Model::Sharp(s) => s.expect(g),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Model::Base(b) => b.draw(rng),
            Model::Sharp(s) => s.draw(rng),
        }
    }
}

/// Plug-in LP coefficients `LP~[j] = (1/n) sum_i T_j(F0(x_i))`, `j = 1..=m_max`.
pub fn estimate_raw<M: Univariate>(data: &Sample, base: &M, m_max: usize) -> Result<Vec<f64>> {
    if data.len() < 2 {
        bail!(Input, "need at least two observations, got {}", data.len());
    }
    if !(1..=MAX_ORDER).contains(&m_max) {
        bail!(Domain, "m_max must be in 1..={MAX_ORDER}, got {m_max}");
    }
    let mut sums = vec![0.0; m_max];
    let mut t = [0.0; MAX_ORDER];
    for &x in data.values() {
        if !x.is_finite() {
            bail!(Input, "non-finite observation {x}");
        }
        let u = base.cdf(x);
        lp_basis::eval_all(u, &mut t[..m_max]);
        for (s, tj) in sums.iter_mut().zip(&t[..m_max]) {
            *s += tj;
        }
    }
    let n = data.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Outcome of OPEN model selection.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSelection {
    /// Retained indices `j`, ascending.
    pub selected: Vec<usize>,
    /// `(j, LP^_j)` for the retained indices, ascending in `j`.
    pub smooth: Vec<(usize, f64)>,
    /// `OPEN(m)` for `m = 1..=len(raw)`.
    pub scores: Vec<f64>,
}

/// Ordered penalization: `OPEN(m) = (top-m sum of squares) - (gamma / n) m`.
///
/// The size maximizing the score wins (smallest on ties); a non-positive
/// maximum retains nothing.
pub fn open_select(raw: &[f64], n: usize, gamma: f64) -> Result<OpenSelection> {
    if raw.is_empty() {
        bail!(Input, "no coefficients to select from");
    }
    if n < 2 {
        bail!(Input, "sample size must be at least 2, got {n}");
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        bail!(Parameter, "penalty gamma must be nonnegative, got {gamma}");
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].abs().total_cmp(&raw[a].abs()));
    let charge = gamma / n as f64;
    let mut scores = Vec::with_capacity(raw.len());
    let mut acc = 0.0;
    for (m, &idx) in order.iter().enumerate() {
        acc += raw[idx] * raw[idx];
        scores.push(acc - charge * (m + 1) as f64);
    }
    let mut best = 0usize;
    let mut best_score = 0.0;
    for (m, &s) in scores.iter().enumerate() {
        if s > best_score {
            best_score = s;
            best = m + 1;
        }
    }
    let mut selected: Vec<usize> = order[..best].iter().map(|&i| i + 1).collect();
    selected.sort_unstable();
    let smooth = selected.iter().map(|&j| (j, raw[j - 1])).collect();
    Ok(OpenSelection { selected, smooth, scores })
}

/// Estimated comparison density of data against a model-0.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpeningFit {
    base: Arc<Model>,
    n: usize,
    raw: Vec<f64>,
    selection: OpenSelection,
}

/// Raw coefficients, OPEN selection at penalty `gamma`, bundled as a fit.
pub fn fit(data: &Sample, base: &Model, m_max: usize, gamma: f64) -> Result<SharpeningFit> {
    let raw = estimate_raw(data, base, m_max)?;
    let selection = open_select(&raw, data.len(), gamma)?;
    Ok(SharpeningFit { base: Arc::new(base.clone()), n: data.len(), raw, selection })
}

/// Fit that keeps all `m` raw coefficients (no OPEN step).
pub fn fit_fixed(data: &Sample, base: &Model, m: usize) -> Result<SharpeningFit> {
    let raw = estimate_raw(data, base, m)?;
    let selected: Vec<usize> = (1..=m).collect();
    let smooth = selected.iter().map(|&j| (j, raw[j - 1])).collect();
    let n = data.len();
    let mut acc = 0.0;
    let scores = raw
        .iter()
        .enumerate()
        .map(|(i, c)| {
            acc += c * c;
            acc - 2.0 / n as f64 * (i + 1) as f64
        })
        .collect();
    Ok(SharpeningFit {
        base: Arc::new(base.clone()),
        n,
        raw,
        selection: OpenSelection { selected, smooth, scores },
    })
}

impl SharpeningFit {
    pub fn base(&self) -> &Model {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn raw_coeffs(&self) -> &[f64] {
        &self.raw
    }

    pub fn selected(&self) -> &[usize] {
        &self.selection.selected
    }

    pub fn smooth_coeffs(&self) -> &[(usize, f64)] {
        &self.selection.smooth
    }

    pub fn open_scores(&self) -> &[f64] {
        &self.selection.scores
    }

    /// Smoothed comparison density `1 + sum_{j in J} LP^_j T_j(u)` (unclipped).
    pub fn eval_d(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            bail!(Domain, "u must lie in [0, 1], got {u}");
        }
        Ok(series(&self.selection.smooth, u))
    }

    /// The d-sharp model built from the smoothed coefficients.
    pub fn to_model(&self) -> Result<DSharpModel> {
        DSharpModel::with_shared_base(self.base.clone(), &self.selection.smooth)
    }

    /// `DS(F0, m)` from the first `m` raw coefficients (`m = 0` is model-0).
    pub fn truncated_model(&self, m: usize) -> Result<DSharpModel> {
        if m > self.raw.len() {
            bail!(Domain, "truncation {m} exceeds fitted order {}", self.raw.len());
        }
        let coeffs: Vec<(usize, f64)> = (1..=m).map(|j| (j, self.raw[j - 1])).collect();
        DSharpModel::with_shared_base(self.base.clone(), &coeffs)
    }
}

/// `1 + sum_j c_j T_j(u)` for sparse `(j, c_j)` pairs.
pub fn series(coeffs: &[(usize, f64)], u: f64) -> f64 {
    let top = coeffs.iter().map(|&(j, _)| j).max().unwrap_or(0);
    if top == 0 {
        return 1.0;
    }
    let mut t = [0.0; MAX_ORDER];
    lp_basis::eval_all(u, &mut t[..top]);
    1.0 + coeffs.iter().map(|&(j, c)| c * t[j - 1]).sum::<f64>()
}

/// Exact antiderivative `u + sum_j c_j ∫_0^u T_j` of [`series`].
pub fn series_integral(coeffs: &[(usize, f64)], u: f64) -> f64 {
    u + coeffs.iter().map(|&(j, c)| c * lp_basis::integral_unchecked(j, u)).sum::<f64>()
}

/// Points in `(0, 1)` where `series(u) = level`, found by a sign-change scan
/// on [`ROOT_SCAN_CELLS`] cells refined by bisection. Sorted.
pub fn series_crossings(coeffs: &[(usize, f64)], level: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if coeffs.is_empty() {
        return roots;
    }
    let f = |u: f64| series(coeffs, u) - level;
    let h = 1.0 / ROOT_SCAN_CELLS as f64;
    let mut a = 0.0;
    let mut fa = f(a);
    for i in 1..=ROOT_SCAN_CELLS {
        let b = i as f64 * h;
        let fb = f(b);
        if fa == 0.0 && a > 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Density-sharpened model `f0(x) [1 + sum_j LP_j T_j(F0(x))]`, clipped at
/// zero and renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DSharpModel {
    base: Arc<Model>,
    coeffs: Vec<(usize, f64)>,
    /// Zeros of the raw series inside (0, 1).
    roots: Vec<f64>,
    /// Intervals of `[0, 1]` on which the raw series is positive.
    positive: Vec<(f64, f64)>,
    /// Unnormalized positive mass accumulated up to the start of each interval.
    mass_before: Vec<f64>,
    normalizer: f64,
}

/// Builds `DS(F0, m)` for the given `(j, LP_j)` coefficients.
pub fn make_dsharp(base: impl Into<Model>, coeffs: &[(usize, f64)]) -> Result<DSharpModel> {
    DSharpModel::with_shared_base(Arc::new(base.into()), coeffs)
}

impl DSharpModel {
    pub fn with_shared_base(base: Arc<Model>, coeffs: &[(usize, f64)]) -> Result<Self> {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for &(j, c) in coeffs {
            if !(1..=MAX_ORDER).contains(&j) {
                bail!(Domain, "coefficient index {j} outside 1..={MAX_ORDER}");
            }
            if !c.is_finite() {
                bail!(Parameter, "coefficient {j} is not finite");
            }
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(slot) => slot.1 += c,
                None => merged.push((j, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        merged.sort_by_key(|&(j, _)| j);

        let roots = series_crossings(&merged, 0.0);
        let mut edges = Vec::with_capacity(roots.len() + 2);
        edges.push(0.0);
        edges.extend_from_slice(&roots);
        edges.push(1.0);
        let mut positive = Vec::new();
        let mut mass_before = Vec::new();
        let mut total = 0.0;
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a || series(&merged, 0.5 * (a + b)) <= 0.0 {
                continue;
            }
            positive.push((a, b));
            mass_before.push(total);
            total += series_integral(&merged, b) - series_integral(&merged, a);
        }
        if !(total > 1e-12) {
            return Err(Error::Degenerate(alloc::format!(
                "positive part of the sharpening series has mass {total}"
            )));
        }
        Ok(Self { base, coeffs: merged, roots, positive, mass_before, normalizer: total })
    }

    pub fn base(&self) -> &Model {
        &self.base
    }

    pub fn shared_base(&self) -> &Arc<Model> {
        &self.base
    }

    /// Nonzero `(j, LP_j)` pairs, ascending in `j`.
    pub fn coeffs(&self) -> &[(usize, f64)] {
        &self.coeffs
    }

    /// Mass of the positively clipped series. At least 1, since the series
    /// itself integrates to 1; equal to 1 when it never dips below 0.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Zeros of the raw series in (0, 1), i.e. the kinks of the clipped density.
    pub fn kinks(&self) -> &[f64] {
        &self.roots
    }

    /// Raw series `1 + sum LP_j T_j(u)`.
    pub fn series(&self, u: f64) -> f64 {
        series(&self.coeffs, u)
    }

    /// Normalized clipped comparison density `max(0, series(u)) / Z`.
    pub fn ratio(&self, u: f64) -> f64 {
        self.series(u).max(0.0) / self.normalizer
    }

    /// `f0(x) [1 + sum LP_j T_j(F0(x))]` without clipping.
    pub fn pdf_raw(&self, x: f64) -> f64 {
        let f0 = self.base.pdf(x);
        if f0 == 0.0 {
            return 0.0;
        }
        f0 * self.series(self.base.cdf(x))
    }

    /// Clipped and renormalized density.
    pub fn pdf_positive(&self, x: f64) -> f64 {
        let f0 = self.base.pdf(x);
        if f0 == 0.0 {
            return 0.0;
        }
        f0 * self.ratio(self.base.cdf(x))
    }

    /// Cdf of the raw series model, `F0 + sum LP_j ∫_0^{F0} T_j` (may leave [0, 1]).
    pub fn cdf_raw(&self, x: f64) -> f64 {
        series_integral(&self.coeffs, self.base.cdf(x))
    }

    /// `∫_0^w max(0, series) / Z`.
    pub fn rank_cdf(&self, w: f64) -> f64 {
        let w = w.clamp(0.0, 1.0);
        let mut acc = 0.0;
        for (k, &(a, b)) in self.positive.iter().enumerate() {
            if w <= a {
                break;
            }
            let top = w.min(b);
            acc = self.mass_before[k] + series_integral(&self.coeffs, top)
                - series_integral(&self.coeffs, a);
            if w <= b {
                break;
            }
        }
        (acc / self.normalizer).clamp(0.0, 1.0)
    }

    /// Inverse of [`rank_cdf`](Self::rank_cdf).
    pub fn rank_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            bail!(Domain, "quantile level must lie in (0, 1), got {p}");
        }
        let target = p * self.normalizer;
        let k = match self.mass_before.iter().rposition(|&m| m < target) {
            Some(k) => k,
            None => 0,
        };
        let (a, b) = self.positive[k];
        let goal = target - self.mass_before[k] + series_integral(&self.coeffs, a);
        // safeguarded Newton on the increasing antiderivative
        let (mut lo, mut hi) = (a, b);
        let mut w = 0.5 * (a + b);
        for _ in 0..200 {
            let g = series_integral(&self.coeffs, w) - goal;
            if g == 0.0 {
                break;
            }
            if g > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            if hi - lo < 1e-15 {
                break;
            }
            let slope = self.series(w);
            let step = if slope > 0.0 { w - g / slope } else { f64::NAN };
            let next = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if next == w {
                break;
            }
            w = next;
        }
        Ok(w)
    }

    /// Accept-reject envelope `1 + sum_j |LP_j| sqrt(2j + 1)`.
    pub fn envelope(&self) -> f64 {
        1.0 + self
            .coeffs
            .iter()
            .map(|&(j, c)| c.abs() * crate::lp_basis::LpBasis::sup_norm(j))
            .sum::<f64>()
    }

    /// Seeded accept-reject sample with proposal f0. Without coefficients the
    /// draws coincide with sampling model-0 directly.
    pub fn sample(&self, n: usize, seed: u64) -> Sample {
        self.sample_counting(n, seed).0
    }

    /// Like [`sample`](Self::sample), also returning the number of proposals.
    pub fn sample_counting(&self, n: usize, seed: u64) -> (Sample, usize) {
        if self.coeffs.is_empty() {
            let n = n.max(1);
            return (self.base.sample(n, seed), n);
        }
        let mut rng = seeded_rng(seed);
        let mut values = Vec::with_capacity(n.max(1));
        let mut proposals = 0usize;
        let env = self.envelope();
        while values.len() < n.max(1) {
            proposals += 1;
            let x = self.base.draw(&mut rng);
            let accept: f64 = rng.sample(Open01);
            if accept * env < self.series(self.base.cdf(x)) {
                values.push(x);
            }
        }
        (Sample::new(values).expect("draws are finite"), proposals)
    }
}

impl Univariate for DSharpModel {
    fn pdf(&self, x: f64) -> f64 {
        self.pdf_positive(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.rank_cdf(self.base.cdf(x))
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        let w = self.rank_quantile(u)?;
        let w = w.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        self.base.quantile(w)
    }

    fn support(&self) -> (f64, f64) {
        self.base.support()
    }

    fn expect<G: FnMut(f64) -> f64>(&self, mut g: G) -> f64 {
        let base = &self.base;
        quadrature::integrate_unit_split(
            |u| {
                let r = self.ratio(u);
                if r == 0.0 {
                    return 0.0;
                }
                match base.quantile(u) {
                    Ok(x) => g(x) * r,
                    Err(_) => f64::NAN,
                }
            },
            &self.roots,
        )
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.coeffs.is_empty() {
            return self.base.draw(rng);
        }
        let env = self.envelope();
        loop {
            let x = self.base.draw(rng);
            let accept: f64 = rng.sample(Open01);
            if accept * env < self.series(self.base.cdf(x)) {
                return x;
            }
        }
    }
}

/// Treats `model` as the new model-0 and sharpens it again on `data`.
pub fn resharpen(
    model: &DSharpModel,
    data: &Sample,
    m_max: usize,
    gamma: f64,
) -> Result<DSharpModel> {
    resharpen_fit(model, data, m_max, gamma)?.to_model()
}

/// The second-stage fit behind [`resharpen`].
pub fn resharpen_fit(
    model: &DSharpModel,
    data: &Sample,
    m_max: usize,
    gamma: f64,
) -> Result<SharpeningFit> {
    fit(data, &Model::Sharp(model.clone()), m_max, gamma)
}
