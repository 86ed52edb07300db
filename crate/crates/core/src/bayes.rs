//! Bayesian agent: likelihood-proportional posterior over the ensemble
//! members and the entropy / mutual-information decomposition.

use crate::error::{Error, Result};
use crate::types::{EnsembleOutput, Method, PosteriorWeights, ProbVector, UncertaintyReport};

/// Negative epistemic values above this are rounding noise and clamped to 0.
pub const NEGATIVE_EU_TOL: f64 = 1e-9;

/// Posterior weights under a uniform prior, `p(h_m | D) ∝ exp(ll_m)`.
///
/// Computed after shifting by the largest log-likelihood, so the result is
/// invariant to adding a constant to all inputs.
pub fn posterior_from_likelihoods(log_likelihoods: &[f64]) -> Result<PosteriorWeights> {
    if log_likelihoods.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(index) = log_likelihoods.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLikelihood {
            index,
            value: log_likelihoods[index],
        });
    }
    let max = log_likelihoods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnormalized: Vec<f64> = log_likelihoods.iter().map(|ll| (ll - max).exp()).collect();
    let total: f64 = unnormalized.iter().sum();
    PosteriorWeights::new(unnormalized.into_iter().map(|w| w / total).collect())
}

/// Posterior weights of the members of `ens`.
pub fn posterior_weights(ens: &EnsembleOutput) -> Result<PosteriorWeights> {
    posterior_from_likelihoods(ens.log_likelihoods())
}

/// Bayesian model average `q_k = sum_m w_m p_{k,m}`.
pub fn bma_prediction(ens: &EnsembleOutput, weights: &PosteriorWeights) -> Result<ProbVector> {
    check_lengths(ens, weights)?;
    let mut q = vec![0.0; ens.n_classes()];
    for (member, &w) in ens.members().iter().zip(weights.as_slice()) {
        for (qk, p) in q.iter_mut().zip(member.as_slice()) {
            *qk += w * p;
        }
    }
    ProbVector::new(q)
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn shannon_entropy(q: &ProbVector) -> f64 {
    entropy_bits(q.as_slice())
}

pub(crate) fn entropy_bits(q: &[f64]) -> f64 {
    q.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Total uncertainty as the entropy of the model average, aleatoric as the
/// posterior-expected member entropy, epistemic as their difference.
pub fn bayes_decomposition(ens: &EnsembleOutput, weights: &PosteriorWeights) -> Result<UncertaintyReport> {
    let q = bma_prediction(ens, weights)?;
    let total = shannon_entropy(&q);
    let aleatoric: f64 = ens
        .members()
        .iter()
        .zip(weights.as_slice())
        .map(|(member, &w)| w * shannon_entropy(member))
        .sum();
    let mut epistemic = total - aleatoric;
    if epistemic < 0.0 {
        if epistemic < -NEGATIVE_EU_TOL {
            return Err(Error::InternalConsistency(format!(
                "Bayesian epistemic uncertainty {epistemic} is negative"
            )));
        }
        epistemic = 0.0;
    }
    UncertaintyReport::new(total, total - epistemic, epistemic, Method::Bayes)
}

fn check_lengths(ens: &EnsembleOutput, weights: &PosteriorWeights) -> Result<()> {
    if weights.len() != ens.n_members() {
        return Err(Error::DimensionMismatch {
            what: "posterior weights per member",
            expected: ens.n_members(),
            found: weights.len(),
        });
    }
    Ok(())
}
