//! Gradient-boosted decision trees for binary classification, written from
//! scratch so the training procedure is fully specified and reproducible.
//!
//! Boosting minimizes logistic loss with second-order (Newton) steps: each
//! round fits a small regression tree to the per-sample gradients `g` and
//! hessians `h`, with leaf weights `-G/(H+lambda)` shrunk by the learning
//! rate. Split search is exact greedy: every midpoint between distinct
//! sorted values of every feature is scored with the standard second-order
//! gain, and ties are broken toward the earliest feature in scan order
//! ([`GbtParams::feature_priority`] when set, ascending index otherwise),
//! then the lowest threshold. Samples with `x[feature] < threshold` go left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GbtParams {
    /// Boosting rounds (one tree each).
    pub n_trees: usize,
    /// Maximum tree depth; 1 builds stumps.
    pub max_depth: usize,
    /// Shrinkage applied to every leaf weight.
    pub learning_rate: f64,
    /// L2 regularization on leaf weights.
    pub lambda: f64,
    /// Minimum gain a split must clear (after subtracting it).
    pub gamma: f64,
    /// Minimum samples on each side of a split.
    pub min_leaf_samples: usize,
    /// Minimum samples a node needs before a split is considered.
    pub min_split_samples: usize,
    /// Reweight classes to `n / (2 * n_class)` so imbalanced corpora do not
    /// bias the detector toward the majority class.
    pub balance_classes: bool,
    /// Order in which the split search scans features. Gain is what decides
    /// a split, so this changes nothing when one feature is strictly best —
    /// it only settles exact ties, which clean simulated corpora produce
    /// routinely (several statistics of different series can separate the
    /// classes identically). Listing the features whose measurements are
    /// most trustworthy first anchors the model on them when the evidence
    /// is otherwise equal. `None` scans in ascending index order.
    pub feature_priority: Option<Vec<usize>>,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 10,
            max_depth: 1,
            learning_rate: 0.3,
            lambda: 1.0,
            gamma: 0.0,
            min_leaf_samples: 10,
            min_split_samples: 40,
            balance_classes: true,
            feature_priority: None,
        }
    }
}

/// Checks that `priority` is a permutation of `0..n_features`.
fn validate_priority(priority: &[usize], n_features: usize) -> Result<()> {
    if priority.len() != n_features {
        return Err(Error::InvalidConfig(format!(
            "feature_priority lists {} features but the data has {}",
            priority.len(),
            n_features
        )));
    }
    let mut seen = vec![false; n_features];
    for &f in priority {
        if f >= n_features {
            return Err(Error::InvalidConfig(format!(
                "feature_priority entry {f} is out of range for {n_features} features"
            )));
        }
        if seen[f] {
            return Err(Error::InvalidConfig(format!(
                "feature_priority lists feature {f} twice"
            )));
        }
        seen[f] = true;
    }
    Ok(())
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 || self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(Error::InvalidConfig(
                "lambda and gamma must be non-negative".into(),
            ));
        }
        if self.min_leaf_samples == 0 {
            return Err(Error::InvalidConfig("min_leaf_samples must be at least 1".into()));
        }
        if self.min_split_samples < 2 {
            return Err(Error::InvalidConfig("min_split_samples must be at least 2".into()));
        }
        Ok(())
    }
}

/// One tree node. `x[feature] < threshold` routes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn output(&self, x: &[f64]) -> f64 {
        match self {
            Node::Leaf { value } => *value,
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                if x[*feature] < *threshold {
                    left.output(x)
                } else {
                    right.output(x)
                }
            }
        }
    }

    fn each_split(&self, f: &mut impl FnMut(usize, f64)) {
        if let Node::Split {
            feature,
            gain,
            left,
            right,
            ..
        } = self
        {
            f(*feature, *gain);
            left.each_split(f);
            right.each_split(f);
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn max_feature(&self) -> Option<usize> {
        match self {
            Node::Leaf { .. } => None,
            Node::Split {
                feature,
                left,
                right,
                ..
            } => Some(
                (*feature)
                    .max(left.max_feature().unwrap_or(0))
                    .max(right.max_feature().unwrap_or(0)),
            ),
        }
    }
}

/// A winning split from the exact greedy search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Exact greedy split search over `indices`.
///
/// Scores every midpoint between consecutive distinct values of every
/// feature with the second-order gain
/// `0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) - gamma`
/// and returns the best split with positive gain that leaves at least
/// `min_leaf_samples` on each side, or `None`. Ties go to the earliest
/// feature in scan order (`feature_priority` when set, ascending index
/// otherwise), then the lowest threshold.
pub fn best_split(
    x: &[Vec<f64>],
    indices: &[usize],
    grad: &[f64],
    hess: &[f64],
    params: &GbtParams,
) -> Option<SplitCandidate> {
    let n = indices.len();
    if n < params.min_split_samples || n < 2 * params.min_leaf_samples {
        return None;
    }
    let n_features = x[indices[0]].len();
    let total_g: f64 = indices.iter().map(|&i| grad[i]).sum();
    let total_h: f64 = indices.iter().map(|&i| hess[i]).sum();
    let parent_score = total_g * total_g / (total_h + params.lambda);

    let identity: Vec<usize>;
    let scan: &[usize] = match &params.feature_priority {
        Some(priority) => priority,
        None => {
            identity = (0..n_features).collect();
            &identity
        }
    };

    let mut best: Option<SplitCandidate> = None;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for &feature in scan.iter().filter(|&&f| f < n_features) {
        order.clear();
        order.extend_from_slice(indices);
        order.sort_by(|&a, &b| {
            x[a][feature]
                .partial_cmp(&x[b][feature])
                .expect("features are never NaN")
                .then(a.cmp(&b))
        });
        let mut left_g = 0.0;
        let mut left_h = 0.0;
        for pos in 1..n {
            let prev = order[pos - 1];
            left_g += grad[prev];
            left_h += hess[prev];
            let (lo, hi) = (x[prev][feature], x[order[pos]][feature]);
            if lo == hi {
                continue; // no threshold separates equal values
            }
            if pos < params.min_leaf_samples || n - pos < params.min_leaf_samples {
                continue;
            }
            let right_g = total_g - left_g;
            let right_h = total_h - left_h;
            let gain = 0.5
                * (left_g * left_g / (left_h + params.lambda)
                    + right_g * right_g / (right_h + params.lambda)
                    - parent_score)
                - params.gamma;
            if gain <= 0.0 {
                continue;
            }
            // Strict improvement required: scanning features in priority
            // order and thresholds ascending makes ties resolve to the
            // earliest scanned feature, then the lowest threshold.
            let better = match &best {
                None => true,
                Some(b) => gain > b.gain,
            };
            if better {
                best = Some(SplitCandidate {
                    feature,
                    threshold: (lo + hi) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

/// A trained boosted-tree classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub params: GbtParams,
    pub feature_names: Vec<String>,
    /// Initial raw margin before any tree (log-odds scale).
    pub base_score: f64,
    pub trees: Vec<Node>,
    /// Weighted training log-loss before boosting and after each round
    /// (`n_trees + 1` entries).
    pub train_log_loss: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn weighted_log_loss(margins: &[f64], y: &[bool], weights: &[f64]) -> f64 {
    let mut loss = 0.0;
    let mut total_w = 0.0;
    for ((&f, &label), &w) in margins.iter().zip(y).zip(weights) {
        let p = sigmoid(f).clamp(1e-12, 1.0 - 1e-12);
        loss -= w * if label { p.ln() } else { (1.0 - p).ln() };
        total_w += w;
    }
    loss / total_w
}

impl GbtModel {
    /// Trains on a row-major feature matrix (`x[i]` is sample `i`) with
    /// boolean labels (`true` = attack).
    pub fn train(
        x: &[Vec<f64>],
        y: &[bool],
        feature_names: Vec<String>,
        params: GbtParams,
    ) -> Result<GbtModel> {
        params.validate()?;
        if x.is_empty() {
            return Err(Error::EmptyInput("training needs at least one sample".into()));
        }
        if x.len() != y.len() {
            return Err(Error::ArityMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let n_features = feature_names.len();
        if let Some(priority) = &params.feature_priority {
            validate_priority(priority, n_features)?;
        }
        for (i, row) in x.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::ArityMismatch {
                    expected: n_features,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| v.is_nan()) {
                return Err(Error::InvalidConfig(format!(
                    "sample {i} contains NaN features"
                )));
            }
        }
        let n = x.len();
        let n_pos = y.iter().filter(|&&l| l).count();
        let n_neg = n - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::DegenerateTrainingSet(format!(
                "both classes are required, got {n_pos} positive / {n_neg} negative"
            )));
        }
        let weights: Vec<f64> = if params.balance_classes {
            let w_pos = n as f64 / (2.0 * n_pos as f64);
            let w_neg = n as f64 / (2.0 * n_neg as f64);
            y.iter().map(|&l| if l { w_pos } else { w_neg }).collect()
        } else {
            vec![1.0; n]
        };

        let base_score = 0.0;
        let mut margins = vec![base_score; n];
        let mut train_log_loss = vec![weighted_log_loss(&margins, y, &weights)];
        let mut trees = Vec::with_capacity(params.n_trees);
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        let all: Vec<usize> = (0..n).collect();

        for _round in 0..params.n_trees {
            for i in 0..n {
                let p = sigmoid(margins[i]);
                let target = if y[i] { 1.0 } else { 0.0 };
                grad[i] = weights[i] * (p - target);
                hess[i] = weights[i] * p * (1.0 - p);
            }
            let tree = build_node(x, &all, &grad, &hess, &params, 0);
            for i in 0..n {
                margins[i] += tree.output(&x[i]);
            }
            trees.push(tree);
            train_log_loss.push(weighted_log_loss(&margins, y, &weights));
        }

        Ok(GbtModel {
            params,
            feature_names,
            base_score,
            trees,
            train_log_loss,
        })
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_names.len() {
            return Err(Error::ArityMismatch {
                expected: self.feature_names.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Raw margin (log-odds scale) for one sample.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x)?;
        Ok(self.base_score + self.trees.iter().map(|t| t.output(x)).sum::<f64>())
    }

    /// Probability that the sample is an attack.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.decision_value(x)?))
    }

    /// Hard label at the 0.5 probability threshold.
    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.predict_proba(x)? >= 0.5)
    }

    /// Per-feature importance: total split gain accumulated by each
    /// feature, rescaled so the largest is 10. Sorted by importance
    /// descending, ties by feature order.
    pub fn feature_importance(&self) -> Vec<(String, f64)> {
        let mut gains = vec![0.0; self.feature_names.len()];
        for tree in &self.trees {
            tree.each_split(&mut |feature, gain| gains[feature] += gain);
        }
        let max = gains.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            for g in &mut gains {
                *g *= 10.0 / max;
            }
        }
        let mut pairs: Vec<(String, f64)> = self
            .feature_names
            .iter()
            .cloned()
            .zip(gains)
            .collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("gains are finite"));
        pairs
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("model encode: {e}")))
    }

    pub fn from_json(text: &str) -> Result<GbtModel> {
        let model: GbtModel =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("model decode: {e}")))?;
        model.params.validate()?;
        let n_features = model.feature_names.len();
        if let Some(priority) = &model.params.feature_priority {
            validate_priority(priority, n_features)?;
        }
        if model.trees.len() != model.params.n_trees {
            return Err(Error::Parse(format!(
                "model has {} trees but params say {}",
                model.trees.len(),
                model.params.n_trees
            )));
        }
        for tree in &model.trees {
            if tree.depth() > model.params.max_depth {
                return Err(Error::Parse("tree deeper than max_depth".into()));
            }
            if let Some(f) = tree.max_feature() {
                if f >= n_features {
                    return Err(Error::Parse(format!(
                        "tree references feature {f} but only {n_features} exist"
                    )));
                }
            }
        }
        Ok(model)
    }
}

fn build_node(
    x: &[Vec<f64>],
    indices: &[usize],
    grad: &[f64],
    hess: &[f64],
    params: &GbtParams,
    depth: usize,
) -> Node {
    let leaf = |idx: &[usize]| -> Node {
        let g: f64 = idx.iter().map(|&i| grad[i]).sum();
        let h: f64 = idx.iter().map(|&i| hess[i]).sum();
        Node::Leaf {
            value: -params.learning_rate * g / (h + params.lambda),
        }
    };
    if depth >= params.max_depth {
        return leaf(indices);
    }
    match best_split(x, indices, grad, hess, params) {
        None => leaf(indices),
        Some(split) => {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &i in indices {
                if x[i][split.feature] < split.threshold {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                gain: split.gain,
                left: Box::new(build_node(x, &left, grad, hess, params, depth + 1)),
                right: Box::new(build_node(x, &right, grad, hess, params, depth + 1)),
            }
        }
    }
}
