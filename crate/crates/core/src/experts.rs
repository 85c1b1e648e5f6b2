//! Pooling expert model-0s by their fit to the data.
//!
//! Each expert gets the relevance weight `w = 1 / (1 + sum_j LP~[j]^2)`,
//! computed from raw coefficients at a fixed order; the consensus is the
//! mixture with probabilities proportional to `w`.

use alloc::vec::Vec;

use crate::distributions::{BaseModel, Sample, Univariate};
use crate::error::{bail, Result};
use crate::sharpening::estimate_raw;

/// Default number of coefficients per expert.
pub const DEFAULT_ORDER: usize = 10;

/// Relevance weights and the resulting mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertEnsemble {
    pub experts: Vec<BaseModel>,
    /// Chi-square index `sum_j LP~[j]^2` of each expert.
    pub chisq: Vec<f64>,
    pub weights: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub consensus: BaseModel,
}

fn check_support(data: &Sample, expert: &BaseModel, index: usize) -> Result<()> {
    let (lo, hi) = expert.support();
    if data.min() < lo || data.max() > hi {
        bail!(
            Support,
            "expert {} ({expert}) has support [{lo}, {hi}] but data span [{}, {}]",
            index + 1,
            data.min(),
            data.max()
        );
    }
    Ok(())
}

/// `w_l = 1 / (1 + sum_{j <= m} LP~[j|l]^2)` for every expert.
pub fn relevance_weights(data: &Sample, experts: &[BaseModel], m: usize) -> Result<Vec<f64>> {
    Ok(chisq_and_weights(data, experts, m)?.1)
}

fn chisq_and_weights(data: &Sample, experts: &[BaseModel], m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if experts.len() < 2 {
        bail!(Input, "need at least two experts, got {}", experts.len());
    }
    if data.len() < 10 {
        bail!(Input, "need at least 10 observations, got {}", data.len());
    }
    let mut chisq = Vec::with_capacity(experts.len());
    for (i, e) in experts.iter().enumerate() {
        check_support(data, e, i)?;
        let raw = estimate_raw(data, e, m)?;
        chisq.push(raw.iter().map(|c| c * c).sum::<f64>());
    }
    let weights = chisq.iter().map(|s| 1.0 / (1.0 + s)).collect();
    Ok((chisq, weights))
}

/// Mixture of the experts with probabilities proportional to their weights.
/// Mixture experts are flattened into their components.
pub fn consensus(data: &Sample, experts: &[BaseModel], m: usize) -> Result<ExpertEnsemble> {
    let (chisq, weights) = chisq_and_weights(data, experts, m)?;
    let total: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut parts = Vec::new();
    for (p, e) in probabilities.iter().zip(experts) {
        if e.components().is_empty() {
            parts.push((*p, e.clone()));
        } else {
            parts.extend(e.components().iter().map(|(w, c)| (p * w, c.clone())));
        }
    }
    // renormalize away rounding before the constructor's 1e-9 check
    let s: f64 = parts.iter().map(|(w, _)| w).sum();
    for part in parts.iter_mut() {
        part.0 /= s;
    }
    let consensus = BaseModel::mixture(parts)?;
    Ok(ExpertEnsemble { experts: experts.to_vec(), chisq, weights, probabilities, consensus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_unit;

    #[test]
    fn correct_expert_gets_weight_near_one() {
        let truth = BaseModel::normal(0.0, 1.0).unwrap();
        let wrong = BaseModel::normal(1.5, 1.0).unwrap();
        let data = truth.sample(10_000, 3);
        let w = relevance_weights(&data, &[truth, wrong], 10).unwrap();
        assert!(w[0] >= 0.95, "{w:?}");
        assert!(w[1] < w[0]);
        assert!(w.iter().all(|&x| x > 0.0 && x <= 1.0));
    }

    #[test]
    fn identical_experts_share_equally() {
        let e = BaseModel::logistic(0.0, 1.0).unwrap();
        let data = BaseModel::normal(0.0, 1.0).unwrap().sample(200, 1);
        let ens = consensus(&data, &[e.clone(), e.clone()], 10).unwrap();
        assert_eq!(ens.weights[0], ens.weights[1]);
        assert!((ens.probabilities[0] - 0.5).abs() < 1e-15);
        for x in [-2.0, 0.0, 0.7] {
            assert!((ens.consensus.eval_pdf(x) - e.eval_pdf(x)).abs() < 1e-14);
        }
        // x = 80 u - 40 covers all but e^-40 of the logistic mass
        let mass = integrate_unit(|u| 80.0 * ens.consensus.eval_pdf(80.0 * u - 40.0));
        assert!((mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn support_and_size_checks() {
        let data = BaseModel::normal(0.0, 1.0).unwrap().sample(50, 2);
        let exp = BaseModel::exponential(1.0).unwrap();
        let norm = BaseModel::normal(0.0, 1.0).unwrap();
        assert!(matches!(
            relevance_weights(&data, &[norm.clone(), exp], 10),
            Err(crate::Error::Support(_))
        ));
        assert!(relevance_weights(&data, &[norm.clone()], 10).is_err());
        let tiny = Sample::new(alloc::vec![0.1; 9]).unwrap();
        assert!(relevance_weights(&tiny, &[norm.clone(), norm], 10).is_err());
    }

    #[test]
    fn mixture_experts_are_flattened() {
        let mix: BaseModel = "mix:0.5*normal:mean=-1,sd=1|0.5*normal:mean=1,sd=1".parse().unwrap();
        let single = BaseModel::normal(0.0, 1.0).unwrap();
        let data = single.sample(500, 4);
        let ens = consensus(&data, &[mix, single], 6).unwrap();
        assert_eq!(ens.consensus.components().len(), 3);
    }
}
