//! Accuracy-rejection evaluation of the uncertainty measures.
//!
//! A run splits the data, trains a forest on the training part and scores
//! every test instance with all nine (method, measure) combinations. The
//! class prediction is always the argmax of the Bayesian model average, so
//! the methods differ only in how they order instances for rejection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{bayes_decomposition, bma_prediction, posterior_weights};
use crate::credal::LeviAgent;
use crate::ensemble::{derive_seed, ensemble_output, train_forest, Dataset, ForestConfig};
use crate::error::{Error, Result};
use crate::optim::MAX_ENUMERATED_MEMBERS;
use crate::types::{Measure, Method, UncertaintyReport};

/// Experiment settings. Defaults follow the reference protocol: 70/30
/// splits, 100 runs, `delta = 2`, 10 trees of depth at most 10, rejection
/// from 0% to 90% in steps of 5%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub train_fraction: f64,
    pub runs: usize,
    pub delta: f64,
    pub trees: usize,
    pub max_depth: usize,
    pub rejection_grid: Vec<f64>,
    pub seed: u64,
    pub oob_likelihood: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            runs: 100,
            delta: 2.0,
            trees: 10,
            max_depth: 10,
            rejection_grid: default_rejection_grid(),
            seed: 0,
            oob_likelihood: false,
        }
    }
}

/// `0.00, 0.05, ..., 0.90`.
pub fn default_rejection_grid() -> Vec<f64> {
    (0..=18).map(|i| (i * 5) as f64 / 100.0).collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return invalid(format!("train fraction {} is not in (0, 1)", self.train_fraction));
        }
        if self.runs == 0 {
            return invalid("runs must be at least 1".into());
        }
        if !(self.delta.is_finite() && self.delta >= 1.0) {
            return Err(Error::InvalidDelta(self.delta));
        }
        if self.trees == 0 || self.trees > MAX_ENUMERATED_MEMBERS {
            return invalid(format!("tree count must be in 1..={MAX_ENUMERATED_MEMBERS}"));
        }
        if self.max_depth == 0 {
            return invalid("max depth must be at least 1".into());
        }
        check_grid(&self.rejection_grid)
    }

    fn forest_config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            max_depth: self.max_depth,
            seed,
            max_features: None,
            oob_likelihood: self.oob_likelihood,
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("rejection grid is empty".into()));
    }
    if grid.iter().any(|&p| !(0.0..1.0).contains(&p)) {
        return Err(Error::InvalidConfig("rejection rates must lie in [0, 1)".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("rejection grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Scores and outcome for one test instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    /// Row of the instance in the full dataset.
    pub row: usize,
    pub predicted: usize,
    pub truth: usize,
    /// Reports in [`Method::ALL`] order.
    pub reports: [UncertaintyReport; 3],
}

impl InstanceRecord {
    pub fn is_correct(&self) -> bool {
        self.predicted == self.truth
    }

    pub fn score(&self, method: Method, measure: Measure) -> f64 {
        let index = Method::ALL.iter().position(|&m| m == method).unwrap();
        self.reports[index].get(measure)
    }
}

/// Stratified split: within each class a `fraction` share (rounded, but
/// leaving at least one instance on each side when the class has two or
/// more) goes to training. Returns sorted `(train, test)` row indices.
pub fn stratified_split(data: &Dataset, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..data.class_count() {
        let mut rows: Vec<usize> = (0..data.n_rows()).filter(|&i| data.label(i) == class).collect();
        if rows.is_empty() {
            continue;
        }
        rows.shuffle(&mut rng);
        let n = rows.len();
        let n_train = if n == 1 {
            1
        } else {
            ((fraction * n as f64).round() as usize).clamp(1, n - 1)
        };
        train.extend_from_slice(&rows[..n_train]);
        test.extend_from_slice(&rows[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Trains on `train` and scores every row of `test`.
///
/// `test_rows` labels the records with row numbers of the original dataset.
pub fn evaluate_split(
    train: &Dataset,
    test: &Dataset,
    test_rows: &[usize],
    cfg: &ExperimentConfig,
    forest_seed: u64,
) -> Result<Vec<InstanceRecord>> {
    let forest = train_forest(train, &cfg.forest_config(forest_seed))?;
    let agent = LeviAgent::new(cfg.trees, cfg.delta)?;
    (0..test.n_rows())
        .into_par_iter()
        .map(|i| {
            let ens = ensemble_output(&forest, test.row(i))?;
            let weights = posterior_weights(&ens)?;
            let predicted = bma_prediction(&ens, &weights)?.argmax();
            let bayes = bayes_decomposition(&ens, &weights)?;
            let credal = agent.measures(&ens)?;
            Ok(InstanceRecord {
                row: test_rows[i],
                predicted,
                truth: test.label(i),
                reports: [bayes, credal.gh_report()?, credal.ent_report()?],
            })
        })
        .collect()
}

/// One split-train-score run, seeded from the master seed and `run_index`.
pub fn run_single(data: &Dataset, cfg: &ExperimentConfig, run_index: usize) -> Result<Vec<InstanceRecord>> {
    cfg.validate()?;
    let run_seed = derive_seed(cfg.seed, run_index as u64);
    let (train_rows, test_rows) = stratified_split(data, cfg.train_fraction, run_seed);
    if test_rows.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let train = data.select(&train_rows)?;
    let test = data.select(&test_rows)?;
    evaluate_split(&train, &test, &test_rows, cfg, derive_seed(run_seed, u64::MAX))
}

/// Accuracy as a function of the rejected fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionCurve {
    pub rejection_rates: Vec<f64>,
    pub mean_accuracy: Vec<f64>,
    pub std_accuracy: Vec<f64>,
    pub method: Method,
    pub measure: Measure,
    pub runs: usize,
}

/// Single-run curve: for each rate `p`, the `floor(p n)` records with the
/// highest score are rejected (ties keep record order) and accuracy is
/// measured on the rest.
pub fn accuracy_rejection(
    records: &[InstanceRecord],
    method: Method,
    measure: Measure,
    grid: &[f64],
) -> Result<RejectionCurve> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    check_grid(grid)?;
    let scores: Vec<f64> = records.iter().map(|r| r.score(method, measure)).collect();
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let n = records.len();
    let mut accuracy = Vec::with_capacity(grid.len());
    for &p in grid {
        let rejected = rejected_count(p, n);
        let kept = &order[rejected..];
        if kept.is_empty() {
            return Err(Error::EmptyRecords);
        }
        let correct = kept.iter().filter(|&&i| records[i].is_correct()).count();
        accuracy.push(correct as f64 / kept.len() as f64);
    }
    Ok(RejectionCurve {
        rejection_rates: grid.to_vec(),
        std_accuracy: vec![0.0; grid.len()],
        mean_accuracy: accuracy,
        method,
        measure,
        runs: 1,
    })
}

/// `floor(p n)`, robust to `p` not being exactly representable.
pub fn rejected_count(p: f64, n: usize) -> usize {
    ((p * n as f64) + 1e-9).floor() as usize
}

/// Pointwise mean and sample standard deviation across runs.
pub fn aggregate_runs(curves: &[RejectionCurve]) -> Result<RejectionCurve> {
    let first = curves.first().ok_or(Error::EmptyRecords)?;
    if curves.iter().any(|c| {
        c.rejection_rates != first.rejection_rates || c.method != first.method || c.measure != first.measure
    }) {
        return Err(Error::GridMismatch);
    }
    let n = curves.len() as f64;
    let points = first.rejection_rates.len();
    let mut mean = vec![0.0; points];
    let mut std = vec![0.0; points];
    for j in 0..points {
        mean[j] = curves.iter().map(|c| c.mean_accuracy[j]).sum::<f64>() / n;
        if curves.len() > 1 {
            let ss: f64 = curves.iter().map(|c| (c.mean_accuracy[j] - mean[j]).powi(2)).sum();
            std[j] = (ss / (n - 1.0)).sqrt();
        }
    }
    Ok(RejectionCurve {
        rejection_rates: first.rejection_rates.clone(),
        mean_accuracy: mean,
        std_accuracy: std,
        method: first.method,
        measure: first.measure,
        runs: curves.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// One curve per (method, measure), methods outermost.
    pub curves: Vec<RejectionCurve>,
    /// Records of the last run.
    pub last_run: Vec<InstanceRecord>,
}

impl ExperimentResult {
    pub fn curve(&self, method: Method, measure: Measure) -> &RejectionCurve {
        self.curves
            .iter()
            .find(|c| c.method == method && c.measure == measure)
            .expect("every combination is present")
    }
}

/// All runs of the experiment, executed in parallel and reduced in run order.
pub fn run_experiment(data: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let runs: Vec<Vec<InstanceRecord>> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| run_single(data, cfg, r))
        .collect::<Result<_>>()?;
    let mut curves = Vec::with_capacity(9);
    for method in Method::ALL {
        for measure in Measure::ALL {
            let per_run = runs
                .iter()
                .map(|records| accuracy_rejection(records, method, measure, &cfg.rejection_grid))
                .collect::<Result<Vec<_>>>()?;
            curves.push(aggregate_runs(&per_run)?);
        }
    }
    Ok(ExperimentResult {
        curves,
        last_run: runs.into_iter().last().unwrap_or_default(),
    })
}
