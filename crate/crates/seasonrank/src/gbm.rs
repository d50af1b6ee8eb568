//! Gradient-boosted regression trees with three objectives: squared error,
//! pairwise logistic ranking, and NDCG-change-scaled pairwise ranking.
//!
//! Each round fits a least-squares tree to the negative gradient of the
//! objective at the current predictions, then line-searches a step per leaf.
//! Fitting is fully deterministic: split ties break on lowest feature index,
//! then lowest threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SquaredError,
    PairwiseLogistic,
    NdcgScaledPairwise,
}

impl Objective {
    fn tag(&self) -> &'static str {
        match self {
            Objective::SquaredError => "squared_error",
            Objective::PairwiseLogistic => "pairwise_logistic",
            Objective::NdcgScaledPairwise => "ndcg_scaled_pairwise",
        }
    }

    fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "squared_error" => Ok(Objective::SquaredError),
            "pairwise_logistic" => Ok(Objective::PairwiseLogistic),
            "ndcg_scaled_pairwise" => Ok(Objective::NdcgScaledPairwise),
            other => Err(Error::validation(format!("unknown objective: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub learning_rate: f64,
    pub objective: Objective,
    pub sigma: f64,
    pub rng_seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            rounds: 100,
            max_depth: 3,
            min_samples_leaf: 2,
            learning_rate: 0.1,
            objective: Objective::SquaredError,
            sigma: 1.0,
            rng_seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::validation("learning rate must be in (0, 1]"));
        }
        if self.sigma <= 0.0 {
            return Err(Error::validation("sigma must be > 0"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::validation("min_samples_leaf must be >= 1"));
        }
        Ok(())
    }
}

/// Items ranked together: one season's games with their feature rows and
/// relevance labels.
#[derive(Debug, Clone)]
pub struct QueryGroup {
    pub key: i32,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        id: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: Node,
    pub n_leaves: usize,
}

impl RegressionTree {
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { id, .. } => return *id,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    sse: f64,
}

/// Greedy recursive least-squares tree over the given row subset.
fn build_node(
    rows: &[Vec<f64>],
    residuals: &[f64],
    indices: &[usize],
    depth: usize,
    config: &BoostConfig,
    next_leaf: &mut usize,
) -> Node {
    let leaf = |next_leaf: &mut usize| {
        let id = *next_leaf;
        *next_leaf += 1;
        let vals: Vec<f64> = indices.iter().map(|&i| residuals[i]).collect();
        Node::Leaf {
            id,
            value: mean(&vals),
        }
    };
    if depth >= config.max_depth || indices.len() < 2 * config.min_samples_leaf {
        return leaf(next_leaf);
    }
    let node_mean = mean(&indices.iter().map(|&i| residuals[i]).collect::<Vec<_>>());
    let node_sse: f64 = indices
        .iter()
        .map(|&i| (residuals[i] - node_mean).powi(2))
        .sum();
    if node_sse == 0.0 {
        return leaf(next_leaf);
    }

    let n_features = rows[indices[0]].len();
    let mut best: Option<SplitCandidate> = None;
    for feature in 0..n_features {
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| {
            rows[a][feature]
                .partial_cmp(&rows[b][feature])
                .unwrap()
                .then(a.cmp(&b))
        });
        // prefix sums over the sorted order
        let sorted_r: Vec<f64> = order.iter().map(|&i| residuals[i]).collect();
        let mut prefix_sum = vec![0.0; order.len() + 1];
        let mut prefix_sq = vec![0.0; order.len() + 1];
        for (i, r) in sorted_r.iter().enumerate() {
            prefix_sum[i + 1] = prefix_sum[i] + r;
            prefix_sq[i + 1] = prefix_sq[i] + r * r;
        }
        let total_sum = prefix_sum[order.len()];
        let total_sq = prefix_sq[order.len()];
        for cut in 1..order.len() {
            let lo = rows[order[cut - 1]][feature];
            let hi = rows[order[cut]][feature];
            if lo == hi {
                continue;
            }
            if cut < config.min_samples_leaf || order.len() - cut < config.min_samples_leaf {
                continue;
            }
            let threshold = (lo + hi) / 2.0;
            let nl = cut as f64;
            let nr = (order.len() - cut) as f64;
            let sl = prefix_sum[cut];
            let sr = total_sum - sl;
            let sse = (prefix_sq[cut] - sl * sl / nl) + ((total_sq - prefix_sq[cut]) - sr * sr / nr);
            let better = match &best {
                None => sse < node_sse,
                Some(b) => sse < b.sse,
            };
            if better {
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    sse,
                });
            }
        }
    }

    match best {
        None => leaf(next_leaf),
        Some(split) => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| rows[i][split.feature] <= split.threshold);
            let left = build_node(rows, residuals, &left_idx, depth + 1, config, next_leaf);
            let right = build_node(rows, residuals, &right_idx, depth + 1, config, next_leaf);
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    }
}

/// Fit one regression tree to the residuals.
pub fn fit_tree(rows: &[Vec<f64>], residuals: &[f64], config: &BoostConfig) -> Result<RegressionTree> {
    if rows.is_empty() || rows.len() != residuals.len() {
        return Err(Error::validation(
            "rows and residuals must be nonempty and aligned",
        ));
    }
    let indices: Vec<usize> = (0..rows.len()).collect();
    let mut next_leaf = 0;
    let root = build_node(rows, residuals, &indices, 0, config, &mut next_leaf);
    Ok(RegressionTree {
        root,
        n_leaves: next_leaf,
    })
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Golden-section minimization on [lo, hi] to the given x-tolerance.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// F0 = argmin_γ Σ L(y_i, γ). Closed form (mean) for squared error, a 1-d
/// golden-section search on the pointwise log loss for pairwise logistic
/// (binary labels, in log-odds), and 0 for the NDCG-scaled objective whose
/// loss is invariant to a constant shift.
pub fn fit_constant(labels: &[f64], objective: Objective) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::validation("cannot fit a constant to zero labels"));
    }
    match objective {
        Objective::SquaredError => Ok(mean(labels)),
        Objective::PairwiseLogistic => {
            let loss = |g: f64| -> f64 {
                labels
                    .iter()
                    .map(|&y| {
                        let p = sigmoid(g);
                        -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
                    })
                    .sum()
            };
            Ok(golden_section(loss, -10.0, 10.0, 1e-8))
        }
        Objective::NdcgScaledPairwise => Ok(0.0),
    }
}

/// r_i = -∂L/∂F for the pointwise losses.
pub fn pseudo_residuals(labels: &[f64], predictions: &[f64], objective: Objective) -> Result<Vec<f64>> {
    if labels.len() != predictions.len() {
        return Err(Error::validation("labels and predictions misaligned"));
    }
    if predictions.iter().any(|p| !p.is_finite()) {
        return Err(Error::validation("non-finite prediction"));
    }
    match objective {
        Objective::SquaredError => {
            Ok(labels.iter().zip(predictions).map(|(y, f)| y - f).collect())
        }
        Objective::PairwiseLogistic | Objective::NdcgScaledPairwise => Ok(labels
            .iter()
            .zip(predictions)
            .map(|(y, f)| y - sigmoid(*f))
            .collect()),
    }
}

/// RankNet-style gradient: for each (i, j) with y_i > y_j,
/// g = -σ / (1 + exp(σ(s_i - s_j))); +g goes to i and -g to j.
pub fn pairwise_logistic_gradients(scores: &[f64], labels: &[f64], sigma: f64) -> Vec<f64> {
    let mut grad = vec![0.0; scores.len()];
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] > labels[j] {
                let g = -sigma / (1.0 + (sigma * (scores[i] - scores[j])).exp());
                grad[i] += g;
                grad[j] -= g;
            }
        }
    }
    grad
}

/// Pair weights |ΔNDCG| for every ordered pair with y_i > y_j, computed from
/// the current score-sorted order. Gains are 2^rel - 1, discounts log2(pos+1)
/// with 1-based positions; the weight is the absolute NDCG change of
/// swapping the two items.
fn ndcg_pair_weight_table(scores: &[f64], labels: &[f64]) -> Vec<Vec<f64>> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut position = vec![0usize; n]; // 0-based rank in current order
    for (pos, &idx) in order.iter().enumerate() {
        position[idx] = pos;
    }
    let mut ideal: Vec<f64> = labels.to_vec();
    ideal.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let idcg: f64 = ideal
        .iter()
        .enumerate()
        .map(|(i, rel)| (2f64.powf(*rel) - 1.0) / ((i + 2) as f64).log2())
        .sum();
    let mut weights = vec![vec![0.0; n]; n];
    if idcg == 0.0 {
        return weights;
    }
    for i in 0..n {
        for j in 0..n {
            if labels[i] > labels[j] {
                let gain_diff = 2f64.powf(labels[i]) - 2f64.powf(labels[j]);
                let disc_i = 1.0 / ((position[i] + 2) as f64).log2();
                let disc_j = 1.0 / ((position[j] + 2) as f64).log2();
                weights[i][j] = (gain_diff * (disc_i - disc_j) / idcg).abs();
            }
        }
    }
    weights
}

/// Pairwise logistic gradient with each pair scaled by |ΔNDCG| of swapping
/// the pair in the current score-sorted order.
pub fn ndcg_scaled_pairwise_gradients(scores: &[f64], labels: &[f64], sigma: f64) -> Vec<f64> {
    let weights = ndcg_pair_weight_table(scores, labels);
    let mut grad = vec![0.0; scores.len()];
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] > labels[j] {
                let g = weights[i][j] * (-sigma / (1.0 + (sigma * (scores[i] - scores[j])).exp()));
                grad[i] += g;
                grad[j] -= g;
            }
        }
    }
    grad
}

/// One boosting stage: the fitted tree, its learning rate, and the
/// line-searched step per leaf (indexed by leaf id).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostStage {
    pub tree: RegressionTree,
    pub learning_rate: f64,
    pub leaf_steps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub f0: f64,
    pub objective: Objective,
    pub n_features: usize,
    pub stages: Vec<BoostStage>,
    /// training objective value after each round
    pub round_objectives: Vec<f64>,
    pub config: BoostConfig,
}

impl PartialEq for BoostConfig {
    fn eq(&self, other: &Self) -> bool {
        self.rounds == other.rounds
            && self.max_depth == other.max_depth
            && self.min_samples_leaf == other.min_samples_leaf
            && self.learning_rate == other.learning_rate
            && self.objective == other.objective
            && self.sigma == other.sigma
    }
}

impl BoostedEnsemble {
    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        self.predict_row_prefix(row, self.stages.len())
    }

    pub fn predict_row_prefix(&self, row: &[f64], rounds: usize) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let mut f = self.f0;
        for stage in self.stages.iter().take(rounds) {
            f += stage.learning_rate * stage.leaf_steps[stage.tree.leaf_index(row)];
        }
        Ok(f)
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }
}

/// Training data: plain rows for pointwise objectives, query groups for the
/// ranking objectives.
#[derive(Debug, Clone)]
pub enum BoostData {
    Rows { rows: Vec<Vec<f64>>, labels: Vec<f64> },
    Groups(Vec<QueryGroup>),
}

pub struct FlatData {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    /// (start, end) row span per group; a single span for pointwise data
    pub groups: Vec<(usize, usize)>,
}

fn flatten(data: &BoostData) -> Result<FlatData> {
    match data {
        BoostData::Rows { rows, labels } => {
            if rows.is_empty() || rows.len() != labels.len() {
                return Err(Error::validation("rows and labels must be nonempty and aligned"));
            }
            Ok(FlatData {
                rows: rows.clone(),
                labels: labels.clone(),
                groups: vec![(0, rows.len())],
            })
        }
        BoostData::Groups(groups) => {
            if groups.is_empty() {
                return Err(Error::validation("no query groups"));
            }
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            let mut spans = Vec::new();
            for g in groups {
                if g.rows.len() != g.labels.len() || g.rows.is_empty() {
                    return Err(Error::validation(format!(
                        "group {} rows and labels must be nonempty and aligned",
                        g.key
                    )));
                }
                let start = rows.len();
                rows.extend(g.rows.iter().cloned());
                labels.extend(g.labels.iter().cloned());
                spans.push((start, rows.len()));
            }
            Ok(FlatData {
                rows,
                labels,
                groups: spans,
            })
        }
    }
}

/// Per-group pair list (i, j, weight) with y_i > y_j, indices local to the
/// group span. Weights are 1 for plain pairwise, |ΔNDCG| for the scaled
/// objective (fixed at the current predictions for the round).
fn build_pair_lists(
    flat: &FlatData,
    preds: &[f64],
    objective: Objective,
) -> Vec<Vec<(usize, usize, f64)>> {
    flat.groups
        .iter()
        .map(|&(start, end)| {
            let labels = &flat.labels[start..end];
            let scores = &preds[start..end];
            let weights = if objective == Objective::NdcgScaledPairwise {
                Some(ndcg_pair_weight_table(scores, labels))
            } else {
                None
            };
            let mut pairs = Vec::new();
            for i in 0..labels.len() {
                for j in 0..labels.len() {
                    if labels[i] > labels[j] {
                        let w = weights.as_ref().map_or(1.0, |t| t[i][j]);
                        pairs.push((i, j, w));
                    }
                }
            }
            pairs
        })
        .collect()
}

fn objective_value(
    flat: &FlatData,
    preds: &[f64],
    pair_lists: Option<&[Vec<(usize, usize, f64)>]>,
    config: &BoostConfig,
) -> f64 {
    match config.objective {
        Objective::SquaredError => flat
            .labels
            .iter()
            .zip(preds)
            .map(|(y, f)| 0.5 * (y - f) * (y - f))
            .sum(),
        Objective::PairwiseLogistic | Objective::NdcgScaledPairwise => {
            let pair_lists = pair_lists.expect("pair lists required for ranking objectives");
            let sigma = config.sigma;
            flat.groups
                .iter()
                .zip(pair_lists)
                .map(|(&(start, _), pairs)| {
                    pairs
                        .iter()
                        .map(|&(i, j, w)| {
                            let diff = preds[start + i] - preds[start + j];
                            w * (1.0 + (-sigma * diff).exp()).ln()
                        })
                        .sum::<f64>()
                })
                .sum()
        }
    }
}

fn negative_gradient(
    flat: &FlatData,
    preds: &[f64],
    pair_lists: Option<&[Vec<(usize, usize, f64)>]>,
    config: &BoostConfig,
) -> Vec<f64> {
    match config.objective {
        Objective::SquaredError => flat.labels.iter().zip(preds).map(|(y, f)| y - f).collect(),
        Objective::PairwiseLogistic | Objective::NdcgScaledPairwise => {
            let pair_lists = pair_lists.expect("pair lists required for ranking objectives");
            let sigma = config.sigma;
            let mut grad = vec![0.0; preds.len()];
            for (&(start, _), pairs) in flat.groups.iter().zip(pair_lists) {
                for &(i, j, w) in pairs {
                    let diff = preds[start + i] - preds[start + j];
                    let g = w * (-sigma / (1.0 + (sigma * diff).exp()));
                    grad[start + i] += g;
                    grad[start + j] -= g;
                }
            }
            grad.iter().map(|g| -g).collect()
        }
    }
}

/// Per-leaf step: γ = argmin Σ L over golden-section search on [-10, 10].
///
/// Only the loss terms a leaf shift can change are evaluated: the leaf's own
/// rows for squared error, and the pairs with exactly one endpoint in the
/// leaf for the ranking objectives (pairs with both or neither endpoint in
/// the leaf keep their score difference).
pub fn line_search_leaf_steps(
    tree: &RegressionTree,
    flat: &FlatData,
    preds: &[f64],
    pair_lists: Option<&[Vec<(usize, usize, f64)>]>,
    config: &BoostConfig,
) -> Vec<f64> {
    let leaf_of: Vec<usize> = flat.rows.iter().map(|r| tree.leaf_index(r)).collect();
    let mut steps = vec![0.0; tree.n_leaves];
    for leaf in 0..tree.n_leaves {
        let loss: Box<dyn Fn(f64) -> f64> = match config.objective {
            Objective::SquaredError => {
                let members: Vec<usize> =
                    (0..flat.rows.len()).filter(|&i| leaf_of[i] == leaf).collect();
                if members.is_empty() {
                    continue;
                }
                let terms: Vec<(f64, f64)> = members
                    .iter()
                    .map(|&i| (flat.labels[i], preds[i]))
                    .collect();
                Box::new(move |gamma: f64| {
                    terms
                        .iter()
                        .map(|&(y, f)| 0.5 * (y - f - gamma) * (y - f - gamma))
                        .sum()
                })
            }
            Objective::PairwiseLogistic | Objective::NdcgScaledPairwise => {
                let pair_lists = pair_lists.expect("pair lists required for ranking objectives");
                // (score diff, sign of the member endpoint, weight)
                let mut affected: Vec<(f64, f64, f64)> = Vec::new();
                for (&(start, _), pairs) in flat.groups.iter().zip(pair_lists) {
                    for &(i, j, w) in pairs {
                        let in_i = leaf_of[start + i] == leaf;
                        let in_j = leaf_of[start + j] == leaf;
                        if in_i == in_j {
                            continue;
                        }
                        let diff = preds[start + i] - preds[start + j];
                        affected.push((diff, if in_i { 1.0 } else { -1.0 }, w));
                    }
                }
                if affected.is_empty() {
                    continue;
                }
                let sigma = config.sigma;
                Box::new(move |gamma: f64| {
                    affected
                        .iter()
                        .map(|&(diff, sign, w)| {
                            w * (1.0 + (-sigma * (diff + sign * gamma)).exp()).ln()
                        })
                        .sum()
                })
            }
        };
        let gamma = golden_section(&loss, -10.0, 10.0, 1e-8);
        // a step is only taken when it actually improves on γ = 0; this also
        // pins leaves the objective is indifferent to (e.g. a whole group
        // shifting together under a pairwise loss) at exactly zero
        steps[leaf] = if loss(gamma) < loss(0.0) { gamma } else { 0.0 };
    }
    steps
}

/// Run the boosting recurrence for the configured number of rounds.
pub fn boost_fit(data: &BoostData, config: &BoostConfig) -> Result<BoostedEnsemble> {
    config.validate()?;
    let flat = flatten(data)?;
    let n_features = flat.rows[0].len();
    if flat.rows.iter().any(|r| r.len() != n_features) {
        return Err(Error::validation("inconsistent feature widths"));
    }
    let f0 = fit_constant(&flat.labels, config.objective)?;
    let mut preds = vec![f0; flat.rows.len()];
    let mut stages = Vec::with_capacity(config.rounds);
    let mut round_objectives = Vec::with_capacity(config.rounds);
    let ranking = matches!(
        config.objective,
        Objective::PairwiseLogistic | Objective::NdcgScaledPairwise
    );
    for _ in 0..config.rounds {
        let pair_lists = if ranking {
            Some(build_pair_lists(&flat, &preds, config.objective))
        } else {
            None
        };
        let residuals = negative_gradient(&flat, &preds, pair_lists.as_deref(), config);
        if residuals.iter().any(|r| !r.is_finite()) {
            return Err(Error::Training("non-finite pseudo-residual".to_string()));
        }
        let tree = fit_tree(&flat.rows, &residuals, config)?;
        let steps = line_search_leaf_steps(&tree, &flat, &preds, pair_lists.as_deref(), config);
        for (i, row) in flat.rows.iter().enumerate() {
            preds[i] += config.learning_rate * steps[tree.leaf_index(row)];
        }
        round_objectives.push(objective_value(&flat, &preds, pair_lists.as_deref(), config));
        stages.push(BoostStage {
            tree,
            learning_rate: config.learning_rate,
            leaf_steps: steps,
        });
    }
    Ok(BoostedEnsemble {
        f0,
        objective: config.objective,
        n_features,
        stages,
        round_objectives,
        config: config.clone(),
    })
}

fn write_node(node: &Node, out: &mut String) {
    match node {
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push_str(&format!("S {feature} {threshold}\n"));
            write_node(left, out);
            write_node(right, out);
        }
        Node::Leaf { id, value } => {
            out.push_str(&format!("L {id} {value}\n"));
        }
    }
}

fn read_node(lines: &mut std::iter::Peekable<std::str::Lines>) -> Result<Node> {
    let line = lines
        .next()
        .ok_or_else(|| Error::validation("truncated tree"))?;
    let mut tokens = line.split_whitespace();
    match tokens.next() {
        Some("S") => {
            let feature: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::validation("bad split line"))?;
            let threshold: f64 = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::validation("bad split line"))?;
            let left = read_node(lines)?;
            let right = read_node(lines)?;
            Ok(Node::Split {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        Some("L") => {
            let id: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::validation("bad leaf line"))?;
            let value: f64 = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::validation("bad leaf line"))?;
            Ok(Node::Leaf { id, value })
        }
        other => Err(Error::validation(format!("bad node tag: {other:?}"))),
    }
}

impl BoostedEnsemble {
    /// Versioned text serialization; floats use shortest round-trip form so
    /// the round-trip is exact.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "seasonrank-gbm v1\nobjective {}\nf0 {}\nn_features {}\nrounds {}\nlearning_rate {}\nsigma {}\nmax_depth {}\nmin_samples_leaf {}\n",
            self.objective.tag(),
            self.f0,
            self.n_features,
            self.config.rounds,
            self.config.learning_rate,
            self.config.sigma,
            self.config.max_depth,
            self.config.min_samples_leaf,
        );
        for stage in &self.stages {
            out.push_str(&format!("tree {} {}\n", stage.tree.n_leaves, stage.learning_rate));
            write_node(&stage.tree.root, &mut out);
            out.push_str("steps");
            for s in &stage.leaf_steps {
                out.push_str(&format!(" {s}"));
            }
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().peekable();
        match lines.next() {
            Some("seasonrank-gbm v1") => {}
            other => {
                return Err(Error::validation(format!(
                    "unsupported ensemble file header: {other:?}"
                )))
            }
        }
        let mut header = std::collections::HashMap::new();
        for _ in 0..8 {
            let line = lines
                .next()
                .ok_or_else(|| Error::validation("truncated ensemble header"))?;
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| Error::validation("bad header line"))?;
            header.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| -> Result<String> {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| Error::validation(format!("missing header field {k}")))
        };
        let objective = Objective::from_tag(&get("objective")?)?;
        let parse_f = |s: String| -> Result<f64> {
            s.parse().map_err(|_| Error::validation("bad header float"))
        };
        let parse_u = |s: String| -> Result<usize> {
            s.parse().map_err(|_| Error::validation("bad header integer"))
        };
        let f0 = parse_f(get("f0")?)?;
        let n_features = parse_u(get("n_features")?)?;
        let config = BoostConfig {
            rounds: parse_u(get("rounds")?)?,
            max_depth: parse_u(get("max_depth")?)?,
            min_samples_leaf: parse_u(get("min_samples_leaf")?)?,
            learning_rate: parse_f(get("learning_rate")?)?,
            objective,
            sigma: parse_f(get("sigma")?)?,
            rng_seed: 0,
        };
        let mut stages = Vec::new();
        loop {
            let line = lines
                .next()
                .ok_or_else(|| Error::validation("truncated ensemble file"))?;
            if line == "end" {
                break;
            }
            let mut tokens = line.split_whitespace();
            if tokens.next() != Some("tree") {
                return Err(Error::validation(format!("expected tree line, got: {line}")));
            }
            let n_leaves: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::validation("bad tree line"))?;
            let learning_rate: f64 = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::validation("bad tree line"))?;
            let root = read_node(&mut lines)?;
            let steps_line = lines
                .next()
                .ok_or_else(|| Error::validation("missing steps line"))?;
            let mut tokens = steps_line.split_whitespace();
            if tokens.next() != Some("steps") {
                return Err(Error::validation("malformed steps line"));
            }
            let leaf_steps: Vec<f64> = tokens
                .map(|t| t.parse().map_err(|_| Error::validation("bad step value")))
                .collect::<Result<_>>()?;
            if leaf_steps.len() != n_leaves {
                return Err(Error::validation("leaf step count mismatch"));
            }
            stages.push(BoostStage {
                tree: RegressionTree { root, n_leaves },
                learning_rate,
                leaf_steps,
            });
        }
        Ok(BoostedEnsemble {
            f0,
            objective,
            n_features,
            stages,
            round_objectives: Vec::new(),
            config,
        })
    }
}
