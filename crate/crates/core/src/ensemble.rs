//! Bagged decision trees with Laplace-corrected leaves.
//!
//! Each tree is grown on a bootstrap sample with Gini splits over a random
//! feature subset per node. A member's likelihood is the probability its
//! leaves assign to the training labels, kept in log scale throughout.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{EnsembleOutput, ProbVector};

/// Labelled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_count: usize,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                what: "labels per row",
                expected: features.len(),
                found: labels.len(),
            });
        }
        let d = features[0].len();
        if d == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if let Some(row) = features.iter().position(|r| r.len() != d) {
            return Err(Error::InvalidDataset(format!("row {row} has {} features, expected {d}", features[row].len())));
        }
        if let Some(row) = features.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidDataset(format!("row {row} has a non-finite feature")));
        }
        if class_count < 2 {
            return Err(Error::TooFewClasses(class_count));
        }
        if let Some(row) = labels.iter().position(|&y| y >= class_count) {
            return Err(Error::InvalidDataset(format!(
                "row {row} has label {} outside 0..{class_count}",
                labels[row]
            )));
        }
        Ok(Self {
            features,
            labels,
            class_count,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                what: "feature names",
                expected: self.n_features(),
                found: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut out = Self::new(
            indices.iter().map(|&i| self.features[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.class_count,
        )?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    /// Number of distinct labels that actually occur.
    pub fn observed_classes(&self) -> usize {
        let mut seen = vec![false; self.class_count];
        self.labels.iter().for_each(|&y| seen[y] = true);
        seen.into_iter().filter(|&s| s).count()
    }
}

/// `(n_k + 1) / (n + K)`.
pub fn laplace(counts: &[u64]) -> Result<ProbVector> {
    let n: u64 = counts.iter().sum();
    let denom = (n + counts.len() as u64) as f64;
    ProbVector::new(counts.iter().map(|&c| (c + 1) as f64 / denom).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { counts: Vec<u64>, probs: ProbVector },
}

impl Node {
    pub fn leaf(counts: Vec<u64>) -> Result<Self> {
        let probs = laplace(&counts)?;
        Ok(Node::Leaf { counts, probs })
    }
}

/// A decision tree stored as a preorder node array rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    nodes: Vec<Node>,
    max_depth: usize,
    n_features: usize,
    class_count: usize,
}

impl TreeModel {
    /// Validates child links (each child after its parent), feature indices,
    /// leaf shape, the Laplace identity and the depth cap.
    pub fn from_nodes(nodes: Vec<Node>, max_depth: usize, n_features: usize, class_count: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidConfig("tree has no nodes".into()));
        }
        let mut depth = vec![usize::MAX; nodes.len()];
        depth[0] = 0;
        for (i, node) in nodes.iter().enumerate() {
            if depth[i] == usize::MAX {
                return Err(Error::InvalidConfig(format!("node {i} is unreachable")));
            }
            if depth[i] > max_depth {
                return Err(Error::InvalidConfig(format!("node {i} exceeds depth cap {max_depth}")));
            }
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features || !threshold.is_finite() {
                        return Err(Error::InvalidConfig(format!("node {i} has an invalid split")));
                    }
                    for &child in [left, right] {
                        if child <= i || child >= nodes.len() || depth[child] != usize::MAX {
                            return Err(Error::InvalidConfig(format!("node {i} has an invalid child {child}")));
                        }
                        depth[child] = depth[i] + 1;
                    }
                }
                Node::Leaf { counts, probs } => {
                    if counts.len() != class_count || laplace(counts)? != *probs {
                        return Err(Error::InvalidConfig(format!("leaf {i} is inconsistent with its counts")));
                    }
                }
            }
        }
        Ok(Self {
            nodes,
            max_depth,
            n_features,
            class_count,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn leaf_for(&self, x: &[f64]) -> Result<&ProbVector> {
        if x.len() != self.n_features {
            return Err(Error::FeatureDimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { probs, .. } => return Ok(probs),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

/// Distribution of the leaf that `x` is routed to.
pub fn predict_member(tree: &TreeModel, x: &[f64]) -> Result<ProbVector> {
    tree.leaf_for(x).cloned()
}

/// `sum_i ln p(y_i | tree, x_i)` over all rows of `data`.
pub fn likelihood_of_member(tree: &TreeModel, data: &Dataset) -> Result<f64> {
    likelihood_on_rows(tree, data, 0..data.n_rows())
}

fn likelihood_on_rows(tree: &TreeModel, data: &Dataset, rows: impl Iterator<Item = usize>) -> Result<f64> {
    let mut total = 0.0;
    for i in rows {
        let probs = tree.leaf_for(data.row(i))?;
        total += probs.as_slice()[data.label(i)].ln();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    /// Features considered per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    /// Evaluate member likelihoods on out-of-bag rows instead of the whole
    /// training set.
    pub oob_likelihood: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 10,
            max_depth: 10,
            seed: 0,
            max_features: None,
            oob_likelihood: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
    log_likelihoods: Vec<f64>,
    config: ForestConfig,
    single_class: bool,
}

impl ForestModel {
    pub fn new(trees: Vec<TreeModel>, log_likelihoods: Vec<f64>, config: ForestConfig) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidConfig("forest has no trees".into()));
        }
        if trees.len() != log_likelihoods.len() {
            return Err(Error::DimensionMismatch {
                what: "log-likelihoods per tree",
                expected: trees.len(),
                found: log_likelihoods.len(),
            });
        }
        if let Some(index) = log_likelihoods.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLikelihood {
                index,
                value: log_likelihoods[index],
            });
        }
        let (d, k) = (trees[0].n_features, trees[0].class_count);
        if trees.iter().any(|t| t.n_features != d || t.class_count != k) {
            return Err(Error::InvalidConfig("trees disagree on feature or class count".into()));
        }
        Ok(Self {
            trees,
            log_likelihoods,
            config,
            single_class: false,
        })
    }

    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn log_likelihoods(&self) -> &[f64] {
        &self.log_likelihoods
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    pub fn class_count(&self) -> usize {
        self.trees[0].class_count
    }

    /// Set when the training labels contained a single class; every leaf
    /// then leans the same way and the ensemble carries little information.
    pub fn is_single_class(&self) -> bool {
        self.single_class
    }
}

/// Mixes a master seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index))
}

/// Grows `config.n_trees` trees on bootstrap samples of `data`.
pub fn train_forest(data: &Dataset, config: &ForestConfig) -> Result<ForestModel> {
    if config.n_trees == 0 {
        return Err(Error::InvalidConfig("tree count must be at least 1".into()));
    }
    if config.max_depth == 0 {
        return Err(Error::InvalidConfig("max depth must be at least 1".into()));
    }
    let d = data.n_features();
    let max_features = config
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    let grown: Vec<(TreeModel, f64)> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, t as u64));
            let n = data.n_rows();
            let bag: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let tree = TreeBuilder {
                data,
                max_depth: config.max_depth,
                max_features,
                rng: &mut rng,
                nodes: Vec::new(),
            }
            .build(bag.clone())?;
            let ll = if config.oob_likelihood {
                let mut in_bag = vec![false; n];
                bag.iter().for_each(|&i| in_bag[i] = true);
                likelihood_on_rows(&tree, data, (0..n).filter(|&i| !in_bag[i]))?
            } else {
                likelihood_of_member(&tree, data)?
            };
            Ok((tree, ll))
        })
        .collect::<Result<_>>()?;
    let (trees, log_likelihoods) = grown.into_iter().unzip();
    let mut forest = ForestModel::new(trees, log_likelihoods, *config)?;
    forest.single_class = data.observed_classes() < 2;
    Ok(forest)
}

struct TreeBuilder<'a, R: Rng> {
    data: &'a Dataset,
    max_depth: usize,
    max_features: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl<R: Rng> TreeBuilder<'_, R> {
    fn build(mut self, rows: Vec<usize>) -> Result<TreeModel> {
        self.grow(rows, 0)?;
        TreeModel::from_nodes(self.nodes, self.max_depth, self.data.n_features(), self.data.class_count())
    }

    fn counts(&self, rows: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.data.class_count()];
        rows.iter().for_each(|&i| counts[self.data.label(i)] += 1);
        counts
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> Result<usize> {
        let index = self.nodes.len();
        let counts = self.counts(&rows);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let split = if pure || depth >= self.max_depth || rows.len() < 2 {
            None
        } else {
            self.best_split(&rows, &counts)
        };
        let Some(split) = split else {
            self.nodes.push(Node::leaf(counts)?);
            return Ok(index);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.data.row(i)[split.feature] <= split.threshold);
        self.nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(left_rows, depth + 1)?;
        let right = self.grow(right_rows, depth + 1)?;
        if let Node::Split { left: l, right: r, .. } = &mut self.nodes[index] {
            *l = left;
            *r = right;
        }
        Ok(index)
    }

    /// Lowest weighted Gini impurity over a random feature subset; ties go to
    /// the lower feature index, then the lower threshold.
    fn best_split(&mut self, rows: &[usize], counts: &[u64]) -> Option<SplitChoice> {
        let mut features = sample(self.rng, self.data.n_features(), self.max_features).into_vec();
        features.sort_unstable();
        let n = rows.len();
        let mut best: Option<SplitChoice> = None;
        let mut values: Vec<(f64, usize)> = Vec::with_capacity(n);
        for feature in features {
            values.clear();
            values.extend(rows.iter().map(|&i| (self.data.row(i)[feature], self.data.label(i))));
            values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut left = vec![0u64; counts.len()];
            for pos in 0..n - 1 {
                left[values[pos].1] += 1;
                let (lo, hi) = (values[pos].0, values[pos + 1].0);
                if lo == hi {
                    continue;
                }
                let n_left = (pos + 1) as f64;
                let n_right = (n - pos - 1) as f64;
                let gini = |c: &mut dyn Iterator<Item = f64>, total: f64| {
                    1.0 - c.map(|v| (v / total).powi(2)).sum::<f64>()
                };
                let impurity = n_left * gini(&mut left.iter().map(|&c| c as f64), n_left)
                    + n_right * gini(&mut left.iter().zip(counts).map(|(&l, &c)| (c - l) as f64), n_right);
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mut threshold = 0.5 * (lo + hi);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(SplitChoice {
                        feature,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }
}

/// The `K x M` member predictions for `x` together with member likelihoods.
pub fn ensemble_output(forest: &ForestModel, x: &[f64]) -> Result<EnsembleOutput> {
    let members = forest
        .trees
        .iter()
        .map(|tree| predict_member(tree, x))
        .collect::<Result<Vec<_>>>()?;
    EnsembleOutput::new(members, forest.log_likelihoods.clone())
}

const FORMAT_HEADER: &str = "uq-forest 1";

impl ForestModel {
    /// Line-oriented text form:
    ///
    /// ```text
    /// uq-forest 1
    /// config <trees> <max_depth> <seed> <max_features|auto> <oob 0|1>
    /// shape <classes> <features>
    /// tree <node count> <log-likelihood>
    /// split <feature> <threshold> <left> <right>
    /// leaf <count_1> ... <count_K>
    /// ```
    ///
    /// One `tree` line per member followed by its nodes in preorder. Leaf
    /// probabilities are recomputed from the counts on load.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let max_features = c.max_features.map_or("auto".to_string(), |f| f.to_string());
        writeln!(out, "{FORMAT_HEADER}").unwrap();
        writeln!(
            out,
            "config {} {} {} {} {}",
            c.n_trees, c.max_depth, c.seed, max_features, c.oob_likelihood as u8
        )
        .unwrap();
        writeln!(out, "shape {} {}", self.class_count(), self.n_features()).unwrap();
        for (tree, ll) in self.trees.iter().zip(&self.log_likelihoods) {
            writeln!(out, "tree {} {:?}", tree.nodes.len(), ll).unwrap();
            for node in &tree.nodes {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(out, "split {feature} {threshold:?} {left} {right}").unwrap(),
                    Node::Leaf { counts, .. } => {
                        let counts: Vec<String> = counts.iter().map(u64::to_string).collect();
                        writeln!(out, "leaf {}", counts.join(" ")).unwrap()
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut reader = ModelReader::new(text);
        let (no, header) = reader.expect("uq-forest")?;
        if header.get(1) != Some(&"1") {
            return Err(format_error(no, "unsupported format version"));
        }
        let (no, cfg) = reader.expect("config")?;
        if cfg.len() != 6 {
            return Err(format_error(no, "config needs 5 fields"));
        }
        let config = ForestConfig {
            n_trees: field(no, &cfg, 1)?,
            max_depth: field(no, &cfg, 2)?,
            seed: field(no, &cfg, 3)?,
            max_features: if cfg[4] == "auto" { None } else { Some(field(no, &cfg, 4)?) },
            oob_likelihood: field::<u8>(no, &cfg, 5)? == 1,
        };
        let (no, shape) = reader.expect("shape")?;
        let classes: usize = field(no, &shape, 1)?;
        let features: usize = field(no, &shape, 2)?;

        let mut trees = Vec::with_capacity(config.n_trees);
        let mut lls = Vec::with_capacity(config.n_trees);
        for _ in 0..config.n_trees {
            let (no, head) = reader.expect("tree")?;
            let count: usize = field(no, &head, 1)?;
            lls.push(field::<f64>(no, &head, 2)?);
            let mut nodes = Vec::with_capacity(count);
            let mut last = no;
            for _ in 0..count {
                let (no, fields) = reader.next("a node")?;
                last = no;
                let node = match fields[0] {
                    "split" => Node::Split {
                        feature: field(no, &fields, 1)?,
                        threshold: field(no, &fields, 2)?,
                        left: field(no, &fields, 3)?,
                        right: field(no, &fields, 4)?,
                    },
                    "leaf" => {
                        let counts = fields[1..]
                            .iter()
                            .map(|f| f.parse::<u64>().map_err(|_| format_error(no, "malformed leaf count")))
                            .collect::<Result<Vec<_>>>()?;
                        Node::leaf(counts).map_err(|e| format_error(no, &e.to_string()))?
                    }
                    other => return Err(format_error(no, &format!("unknown node kind `{other}`"))),
                };
                nodes.push(node);
            }
            let tree = TreeModel::from_nodes(nodes, config.max_depth, features, classes)
                .map_err(|e| format_error(last, &e.to_string()))?;
            trees.push(tree);
        }
        if let Ok((no, _)) = reader.next("end of input") {
            return Err(format_error(no, "trailing content after last tree"));
        }
        ForestModel::new(trees, lls, config)
    }
}

fn format_error(line: usize, message: &str) -> Error {
    Error::ModelFormat {
        line,
        message: message.to_string(),
    }
}

fn field<T: std::str::FromStr>(line: usize, fields: &[&str], index: usize) -> Result<T> {
    fields
        .get(index)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| format_error(line, &format!("field {index} is missing or malformed")))
}

/// Yields non-blank, non-comment lines split into fields, with 1-based
/// line numbers.
struct ModelReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> ModelReader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
        }
    }

    fn next(&mut self, expected: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.lines.by_ref() {
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Ok((i + 1, line.split_whitespace().collect()));
            }
        }
        Err(format_error(0, &format!("unexpected end of input, expected {expected}")))
    }

    fn expect(&mut self, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
        let (no, fields) = self.next(keyword)?;
        if fields[0] != keyword {
            return Err(format_error(no, &format!("expected `{keyword}`, found `{}`", fields[0])));
        }
        Ok((no, fields))
    }
}
