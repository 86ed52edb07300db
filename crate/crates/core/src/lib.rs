//! Uncertainty quantification for ensemble classifiers.
//!
//! Two agents are provided on top of a bagged decision-tree ensemble:
//!
//! * a Bayesian agent ([`bayes`]) that averages member predictions under
//!   likelihood-proportional posterior weights and splits the entropy of the
//!   average into an aleatoric part (expected member entropy) and an epistemic
//!   part (mutual information);
//! * a Levi agent ([`credal`]) that replaces the single prior by the family of
//!   priors within a factor `delta` of uniform, yielding a credal set of
//!   predictive distributions. Its uncertainty is measured by upper/lower
//!   entropy and the generalized Hartley measure.
//!
//! [`eval`] runs the accuracy-rejection protocol that compares the two.

pub mod bayes;
pub mod credal;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod numfmt;
pub mod optim;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    CredalPolytope, EnsembleOutput, Measure, Method, PosteriorWeights, ProbVector,
    UncertaintyReport,
};
