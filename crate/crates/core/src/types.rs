//! Shared domain types.
//!
//! All types validate their invariants at construction and are immutable
//! afterwards.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for simplex membership checks.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Entries this close outside `[0, 1]` are clamped instead of rejected.
pub const CLAMP_TOL: f64 = 1e-12;
/// Tolerance for `total = aleatoric + epistemic`.
pub const ADDITIVITY_TOL: f64 = 1e-9;

/// A point on the probability simplex over `K >= 2` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates `raw` as a probability vector.
    ///
    /// Entries within `1e-12` outside `[0, 1]` are clamped before the sum is
    /// checked against 1 with tolerance `1e-9`.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        if raw.len() < 2 {
            return Err(Error::TooFewClasses(raw.len()));
        }
        let mut probs = raw;
        for (index, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteEntry { index });
            }
            if *p < -CLAMP_TOL {
                return Err(Error::NegativeEntry { index, value: *p });
            }
            if *p < 0.0 {
                *p = 0.0;
            } else if *p > 1.0 && *p <= 1.0 + CLAMP_TOL {
                *p = 1.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL || probs.iter().any(|&p| p > 1.0) {
            return Err(Error::SumNotOne { sum });
        }
        Ok(Self(probs))
    }

    /// The uniform distribution over `k` classes.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability, ties going to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = k;
            }
        }
        best
    }

    /// Probability of the event given as a class bitmask.
    pub fn event_prob(&self, subset: u64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(k, _)| subset >> k & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;

    fn try_from(raw: Vec<f64>) -> Result<Self> {
        Self::new(raw)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(q: ProbVector) -> Self {
        q.0
    }
}

/// Predictions of an ensemble of `M` members for a single query.
///
/// Column `m` of the `K x M` matrix is the distribution predicted by member
/// `m`; `log_likelihoods[m]` is the natural-log likelihood of that member on
/// the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    members: Vec<ProbVector>,
    log_likelihoods: Vec<f64>,
}

impl EnsembleOutput {
    pub fn new(members: Vec<ProbVector>, log_likelihoods: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyInput);
        }
        if members.len() != log_likelihoods.len() {
            return Err(Error::DimensionMismatch {
                what: "log-likelihoods per member",
                expected: members.len(),
                found: log_likelihoods.len(),
            });
        }
        let k = members[0].len();
        if let Some(bad) = members.iter().find(|q| q.len() != k) {
            return Err(Error::DimensionMismatch {
                what: "classes per member",
                expected: k,
                found: bad.len(),
            });
        }
        check_finite(&log_likelihoods)?;
        Ok(Self {
            members,
            log_likelihoods,
        })
    }

    /// Builds an output whose members all have equal likelihood.
    pub fn with_equal_likelihoods(members: Vec<ProbVector>) -> Result<Self> {
        let m = members.len();
        Self::new(members, vec![0.0; m])
    }

    pub fn n_classes(&self) -> usize {
        self.members[0].len()
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[ProbVector] {
        &self.members
    }

    pub fn log_likelihoods(&self) -> &[f64] {
        &self.log_likelihoods
    }

    /// `p_{k,m}`.
    pub fn prob(&self, class: usize, member: usize) -> f64 {
        self.members[member].as_slice()[class]
    }

    /// Likelihoods rescaled by the largest one, `exp(ll_m - max ll)`.
    ///
    /// Every entry lies in `(0, 1]` up to underflow, and the largest is 1.
    pub fn relative_likelihoods(&self) -> Vec<f64> {
        let max = self
            .log_likelihoods
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        self.log_likelihoods.iter().map(|ll| (ll - max).exp()).collect()
    }
}

fn check_finite(log_likelihoods: &[f64]) -> Result<()> {
    match log_likelihoods.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteLikelihood {
            index,
            value: log_likelihoods[index],
        }),
        None => Ok(()),
    }
}

/// Posterior probabilities `p(h_m | D)` of the ensemble members.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorWeights(Vec<f64>);

impl PosteriorWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteEntry { index });
        }
        if let Some(index) = weights.iter().position(|&w| w < 0.0) {
            return Err(Error::NegativeEntry {
                index,
                value: weights[index],
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::SumNotOne { sum });
        }
        Ok(Self(weights))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A credal set given by (not necessarily extreme) generating points.
///
/// The set itself is the convex hull of `vertices`. Each vertex is the image
/// of the prior in `source_weights` at the same index.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalPolytope {
    vertices: Vec<ProbVector>,
    source_delta: f64,
    source_weights: Vec<Vec<f64>>,
}

impl CredalPolytope {
    pub fn new(
        vertices: Vec<ProbVector>,
        source_delta: f64,
        source_weights: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(source_delta.is_finite() && source_delta >= 1.0) {
            return Err(Error::InvalidDelta(source_delta));
        }
        if source_weights.len() != vertices.len() {
            return Err(Error::DimensionMismatch {
                what: "source priors per vertex",
                expected: vertices.len(),
                found: source_weights.len(),
            });
        }
        let k = vertices[0].len();
        if let Some(bad) = vertices.iter().find(|v| v.len() != k) {
            return Err(Error::DimensionMismatch {
                what: "classes per vertex",
                expected: k,
                found: bad.len(),
            });
        }
        if source_delta == 1.0 && vertices.len() != 1 {
            return Err(Error::InternalConsistency(format!(
                "delta = 1 must give a single vertex, got {}",
                vertices.len()
            )));
        }
        Ok(Self {
            vertices,
            source_delta,
            source_weights,
        })
    }

    /// A credal set given directly by its generating points.
    pub fn from_points(vertices: Vec<ProbVector>) -> Result<Self> {
        let n = vertices.len();
        let delta = if n == 1 { 1.0 } else { f64::INFINITY };
        if vertices.is_empty() {
            return Err(Error::EmptyInput);
        }
        let k = vertices[0].len();
        if let Some(bad) = vertices.iter().find(|v| v.len() != k) {
            return Err(Error::DimensionMismatch {
                what: "classes per vertex",
                expected: k,
                found: bad.len(),
            });
        }
        Ok(Self {
            vertices,
            source_delta: delta,
            source_weights: vec![Vec::new(); n],
        })
    }

    pub fn vertices(&self) -> &[ProbVector] {
        &self.vertices
    }

    pub fn n_classes(&self) -> usize {
        self.vertices[0].len()
    }

    /// The `delta` of the generating prior family; infinite for sets built
    /// with [`CredalPolytope::from_points`] from more than one point.
    pub fn source_delta(&self) -> f64 {
        self.source_delta
    }

    pub fn source_weights(&self) -> &[Vec<f64>] {
        &self.source_weights
    }
}

/// Uncertainty-producing method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Bayes,
    LeviGh,
    LeviEnt,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Bayes, Method::LeviGh, Method::LeviEnt];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bayes => "bayes",
            Method::LeviGh => "levi-gh",
            Method::LeviEnt => "levi-ent",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which component of an [`UncertaintyReport`] to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    Total,
    Aleatoric,
    Epistemic,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Total, Measure::Aleatoric, Measure::Epistemic];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Total => "TU",
            Measure::Aleatoric => "AU",
            Measure::Epistemic => "EU",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Total, aleatoric and epistemic uncertainty in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub total: f64,
    pub aleatoric: f64,
    pub epistemic: f64,
    pub method: Method,
}

impl UncertaintyReport {
    pub fn new(total: f64, aleatoric: f64, epistemic: f64, method: Method) -> Result<Self> {
        if !(total.is_finite() && aleatoric.is_finite() && epistemic.is_finite()) {
            return Err(Error::InternalConsistency(format!(
                "{method} report has non-finite components"
            )));
        }
        if total < 0.0 {
            return Err(Error::InternalConsistency(format!(
                "{method} total uncertainty {total} is negative"
            )));
        }
        if (total - aleatoric - epistemic).abs() > ADDITIVITY_TOL {
            return Err(Error::InternalConsistency(format!(
                "{method} report is not additive: {total} != {aleatoric} + {epistemic}"
            )));
        }
        Ok(Self {
            total,
            aleatoric,
            epistemic,
            method,
        })
    }

    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Total => self.total,
            Measure::Aleatoric => self.aleatoric,
            Measure::Epistemic => self.epistemic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_exact_simplex_point() {
        let q = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(q.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_sum() {
        assert!(matches!(
            ProbVector::new(vec![0.7, 0.4]),
            Err(Error::SumNotOne { .. })
        ));
    }

    #[test]
    fn clamps_tiny_excursions() {
        let q = ProbVector::new(vec![1.0 + 1e-13, -1e-13]).unwrap();
        assert_eq!(q.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn rejects_negative_and_short_vectors() {
        assert!(matches!(
            ProbVector::new(vec![1.5, -0.5]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(
            ProbVector::new(vec![1.0]),
            Err(Error::TooFewClasses(1))
        ));
        assert!(matches!(ProbVector::new(vec![]), Err(Error::EmptyInput)));
        assert!(matches!(
            ProbVector::new(vec![f64::NAN, 1.0]),
            Err(Error::NonFiniteEntry { index: 0 })
        ));
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let q = ProbVector::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert_eq!(q.argmax(), 0);
        let q = ProbVector::new(vec![0.2, 0.4, 0.4]).unwrap();
        assert_eq!(q.argmax(), 1);
    }

    #[test]
    fn event_probability_sums_members_of_mask() {
        let q = ProbVector::new(vec![0.1, 0.2, 0.7]).unwrap();
        assert!((q.event_prob(0b101) - 0.8).abs() < 1e-15);
        assert_eq!(q.event_prob(0), 0.0);
    }

    #[test]
    fn ensemble_output_validates_shapes() {
        let a = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let b = ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            EnsembleOutput::new(vec![a.clone(), b], vec![0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            EnsembleOutput::new(vec![a.clone()], vec![f64::NEG_INFINITY]),
            Err(Error::NonFiniteLikelihood { index: 0, .. })
        ));
        assert!(matches!(
            EnsembleOutput::new(vec![], vec![]),
            Err(Error::EmptyInput)
        ));
        let ens = EnsembleOutput::new(vec![a.clone(), a], vec![-1000.0, -1001.0]).unwrap();
        let rel = ens.relative_likelihoods();
        assert_eq!(rel[0], 1.0);
        assert!((rel[1] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn report_must_be_additive() {
        assert!(UncertaintyReport::new(1.0, 0.4, 0.6, Method::Bayes).is_ok());
        assert!(UncertaintyReport::new(1.0, 0.4, 0.5, Method::Bayes).is_err());
    }

    #[test]
    fn delta_one_polytope_has_one_vertex() {
        let a = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let b = ProbVector::new(vec![0.6, 0.4]).unwrap();
        assert!(CredalPolytope::new(vec![a.clone(), b], 1.0, vec![vec![1.0], vec![1.0]]).is_err());
        assert!(CredalPolytope::new(vec![a], 1.0, vec![vec![1.0]]).is_ok());
    }
}
