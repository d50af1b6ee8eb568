//! Shared-weight feed-forward network for team embeddings, trained with
//! contrastive or triplet loss under RMSprop.
//!
//! One parameter set backs every branch: the two (contrastive) or three
//! (triplet) forward passes of a training example reference the same
//! weights, and each parameter's gradient is the sum of the contributions
//! from every branch. Hidden layers are rectified, the output layer is
//! linear, and the rectifier subgradient at exactly zero is taken as zero.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{TeamSeasonStats, TrainingPair, TrainingTriplet};

pub const HIDDEN_1: usize = 70;
pub const HIDDEN_2: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// weights[out][in]
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            weights: vec![vec![0.0; inputs]; outputs],
            biases: vec![0.0; outputs],
        }
    }
}

/// MLP parameters for shape in -> 70 -> 20 -> 1. The same storage serves as
/// the gradient and optimizer-accumulator container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiameseParams {
    pub shape: Vec<usize>,
    pub layers: Vec<Layer>,
}

impl SiameseParams {
    pub fn zeros(shape: &[usize]) -> Self {
        let layers = shape
            .windows(2)
            .map(|w| Layer::zeros(w[0], w[1]))
            .collect();
        SiameseParams {
            shape: shape.to_vec(),
            layers,
        }
    }

    /// Seeded uniform init in ±sqrt(6 / (fan_in + fan_out)), zero biases.
    pub fn init(shape: &[usize], rng_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut params = SiameseParams::zeros(shape);
        for layer in &mut params.layers {
            let fan_in = layer.weights[0].len();
            let fan_out = layer.weights.len();
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for row in &mut layer.weights {
                for w in row.iter_mut() {
                    *w = rng.gen_range(-bound..bound);
                }
            }
        }
        params
    }

    pub fn default_shape(input_width: usize) -> Vec<usize> {
        vec![input_width, HIDDEN_1, HIDDEN_2, 1]
    }

    pub fn input_width(&self) -> usize {
        self.shape[0]
    }

    /// Flat parameter vector in a fixed traversal order (weights row-major,
    /// then biases, per layer). Used by the finite-difference oracle.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for row in &layer.weights {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    pub fn from_flat(shape: &[usize], flat: &[f64]) -> Result<Self> {
        let mut params = SiameseParams::zeros(shape);
        let mut it = flat.iter();
        for layer in &mut params.layers {
            for row in &mut layer.weights {
                for w in row.iter_mut() {
                    *w = *it.next().ok_or_else(|| Error::validation("flat vector too short"))?;
                }
            }
            for b in &mut layer.biases {
                *b = *it.next().ok_or_else(|| Error::validation("flat vector too short"))?;
            }
        }
        if it.next().is_some() {
            return Err(Error::validation("flat vector too long"));
        }
        Ok(params)
    }

    pub fn is_finite(&self) -> bool {
        let mut ok = true;
        for layer in &self.layers {
            for row in &layer.weights {
                ok &= row.iter().all(|w| w.is_finite());
            }
            ok &= layer.biases.iter().all(|b| b.is_finite());
        }
        ok
    }

    /// Versioned text serialization; floats use shortest round-trip form.
    pub fn to_text(&self, seed: u64, config_tag: &str) -> String {
        let mut out = format!("seasonrank-snn v1\nshape {}\nseed {seed}\nconfig {config_tag}\n",
            self.shape
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" "));
        for layer in &self.layers {
            for row in &layer.weights {
                out.push_str("w");
                for w in row {
                    out.push_str(&format!(" {w}"));
                }
                out.push('\n');
            }
            out.push_str("b");
            for b in &layer.biases {
                out.push_str(&format!(" {b}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("seasonrank-snn v1") => {}
            other => {
                return Err(Error::validation(format!(
                    "unsupported parameter file header: {other:?}"
                )))
            }
        }
        let shape_line = lines
            .next()
            .ok_or_else(|| Error::validation("missing shape line"))?;
        let shape: Vec<usize> = shape_line
            .strip_prefix("shape ")
            .ok_or_else(|| Error::validation("malformed shape line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::validation("bad shape value")))
            .collect::<Result<_>>()?;
        // seed and config lines are informational
        lines.next();
        lines.next();
        let mut params = SiameseParams::zeros(&shape);
        for layer in &mut params.layers {
            for row in &mut layer.weights {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::validation("truncated parameter file"))?;
                let values = parse_value_line(line, 'w', row.len())?;
                row.copy_from_slice(&values);
            }
            let line = lines
                .next()
                .ok_or_else(|| Error::validation("truncated parameter file"))?;
            let values = parse_value_line(line, 'b', layer.biases.len())?;
            layer.biases.copy_from_slice(&values);
        }
        Ok(params)
    }
}

fn parse_value_line(line: &str, tag: char, expected: usize) -> Result<Vec<f64>> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(&tag.to_string()[..]) {
        return Err(Error::validation(format!("expected '{tag}' line, got: {line}")));
    }
    let values: Vec<f64> = tokens
        .map(|t| t.parse().map_err(|_| Error::validation("bad float in parameter file")))
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: values.len(),
        });
    }
    Ok(values)
}

/// Per-layer pre- and post-activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Activations {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("network has at least one layer")
    }

    pub fn output_scalar(&self) -> f64 {
        self.output()[0]
    }

    /// Post-activation of the last hidden layer.
    pub fn penultimate(&self) -> &[f64] {
        &self.post[self.post.len() - 2]
    }
}

/// Forward pass: rectified hidden layers, linear output layer.
pub fn forward(params: &SiameseParams, x: &[f64]) -> Result<Activations> {
    if x.len() != params.input_width() {
        return Err(Error::DimensionMismatch {
            expected: params.input_width(),
            got: x.len(),
        });
    }
    let n_layers = params.layers.len();
    let mut pre = Vec::with_capacity(n_layers);
    let mut post = Vec::with_capacity(n_layers);
    let mut input: Vec<f64> = x.to_vec();
    for (l, layer) in params.layers.iter().enumerate() {
        let z: Vec<f64> = layer
            .weights
            .iter()
            .zip(&layer.biases)
            .map(|(row, b)| row.iter().zip(&input).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect();
        let a: Vec<f64> = if l + 1 == n_layers {
            z.clone()
        } else {
            z.iter().map(|v| v.max(0.0)).collect()
        };
        pre.push(z);
        post.push(a.clone());
        input = a;
    }
    Ok(Activations { pre, post })
}

/// sqrt(Σ (b_k - a_k)²)
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (y - x) * (y - x))
        .sum::<f64>()
        .sqrt())
}

/// (1-Y)·½D² + Y·½·max(0, m-D)²
pub fn contrastive_loss(label: u8, distance: f64, margin: f64) -> Result<f64> {
    if distance < 0.0 {
        return Err(Error::validation("distance must be non-negative"));
    }
    let y = label as f64;
    let hinge = (margin - distance).max(0.0);
    Ok((1.0 - y) * 0.5 * distance * distance + y * 0.5 * hinge * hinge)
}

/// max(D_ap - D_an + m, 0)
pub fn triplet_loss(d_ap: f64, d_an: f64, margin: f64) -> Result<f64> {
    if d_ap < 0.0 || d_an < 0.0 {
        return Err(Error::validation("distances must be non-negative"));
    }
    Ok((d_ap - d_an + margin).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Contrastive,
    Triplet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingTap {
    FinalScalar,
    Penultimate20,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub margin: f64,
    pub epochs: usize,
    pub rng_seed: u64,
    pub embedding_tap: EmbeddingTap,
    /// None = full batch.
    pub batch_size: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::Triplet,
            margin: 1.0,
            epochs: 13,
            rng_seed: 0,
            embedding_tap: EmbeddingTap::Penultimate20,
            batch_size: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TrainData {
    Pairs(Vec<TrainingPair>),
    Triplets(Vec<TrainingTriplet>),
}

impl TrainData {
    pub fn len(&self) -> usize {
        match self {
            TrainData::Pairs(p) => p.len(),
            TrainData::Triplets(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Backpropagate one branch: seed `out_grad` at the output layer,
/// accumulating weight and bias gradients into `grads`.
fn backprop_branch(
    params: &SiameseParams,
    x: &[f64],
    acts: &Activations,
    out_grad: &[f64],
    grads: &mut SiameseParams,
) {
    let n_layers = params.layers.len();
    let mut delta: Vec<f64> = out_grad.to_vec();
    for l in (0..n_layers).rev() {
        // rectifier derivative on hidden layers; output layer is linear
        if l + 1 != n_layers {
            for (d, z) in delta.iter_mut().zip(&acts.pre[l]) {
                if *z <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        let input: &[f64] = if l == 0 { x } else { &acts.post[l - 1] };
        let glayer = &mut grads.layers[l];
        for (i, d) in delta.iter().enumerate() {
            glayer.biases[i] += d;
            for (j, v) in input.iter().enumerate() {
                glayer.weights[i][j] += d * v;
            }
        }
        if l > 0 {
            let layer = &params.layers[l];
            let mut next = vec![0.0; layer.weights[0].len()];
            for (i, d) in delta.iter().enumerate() {
                for (j, w) in layer.weights[i].iter().enumerate() {
                    next[j] += d * w;
                }
            }
            delta = next;
        }
    }
}

/// d(D)/d(a) for D = ||a - b||; zero vector when D == 0.
fn distance_grad(a: &[f64], b: &[f64], d: f64) -> Vec<f64> {
    if d == 0.0 {
        vec![0.0; a.len()]
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y) / d).collect()
    }
}

/// Mean batch loss and its gradient with respect to the shared parameters.
pub fn loss_gradients(
    params: &SiameseParams,
    data: &TrainData,
    margin: f64,
) -> Result<(f64, SiameseParams)> {
    if data.is_empty() {
        return Err(Error::validation("empty training batch"));
    }
    let mut grads = SiameseParams::zeros(&params.shape);
    let mut total_loss = 0.0;
    let n = data.len() as f64;
    match data {
        TrainData::Pairs(pairs) => {
            for pair in pairs {
                let acts_a = forward(params, &pair.home)?;
                let acts_b = forward(params, &pair.away)?;
                let d = euclidean_distance(acts_a.output(), acts_b.output())?;
                total_loss += contrastive_loss(pair.label, d, margin)?;
                let dl_dd = if pair.label == 0 {
                    d
                } else {
                    -(margin - d).max(0.0)
                };
                if dl_dd == 0.0 {
                    continue;
                }
                let ga: Vec<f64> = distance_grad(acts_a.output(), acts_b.output(), d)
                    .iter()
                    .map(|g| g * dl_dd / n)
                    .collect();
                let gb: Vec<f64> = ga.iter().map(|g| -g).collect();
                backprop_branch(params, &pair.home, &acts_a, &ga, &mut grads);
                backprop_branch(params, &pair.away, &acts_b, &gb, &mut grads);
            }
        }
        TrainData::Triplets(triplets) => {
            for t in triplets {
                let acts_a = forward(params, &t.anchor)?;
                let acts_p = forward(params, &t.positive)?;
                let acts_n = forward(params, &t.negative)?;
                let d_ap = euclidean_distance(acts_a.output(), acts_p.output())?;
                let d_an = euclidean_distance(acts_a.output(), acts_n.output())?;
                let loss = triplet_loss(d_ap, d_an, margin)?;
                total_loss += loss;
                if loss == 0.0 {
                    continue;
                }
                let g_ap_a = distance_grad(acts_a.output(), acts_p.output(), d_ap);
                let g_an_a = distance_grad(acts_a.output(), acts_n.output(), d_an);
                let ga: Vec<f64> = g_ap_a
                    .iter()
                    .zip(&g_an_a)
                    .map(|(p, q)| (p - q) / n)
                    .collect();
                let gp: Vec<f64> = distance_grad(acts_p.output(), acts_a.output(), d_ap)
                    .iter()
                    .map(|g| g / n)
                    .collect();
                let gn: Vec<f64> = distance_grad(acts_n.output(), acts_a.output(), d_an)
                    .iter()
                    .map(|g| -g / n)
                    .collect();
                backprop_branch(params, &t.anchor, &acts_a, &ga, &mut grads);
                backprop_branch(params, &t.positive, &acts_p, &gp, &mut grads);
                backprop_branch(params, &t.negative, &acts_n, &gn, &mut grads);
            }
        }
    }
    Ok((total_loss / n, grads))
}

/// RMSprop: lr 0.001, discount 0.9, epsilon 1e-7, momentum 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RmsPropState {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub accumulator: SiameseParams,
}

impl RmsPropState {
    pub fn new(shape: &[usize]) -> Self {
        RmsPropState {
            learning_rate: 0.001,
            discount: 0.9,
            epsilon: 1e-7,
            accumulator: SiameseParams::zeros(shape),
        }
    }
}

/// acc <- ρ·acc + (1-ρ)·g²; θ <- θ - lr·g / (sqrt(acc) + ε)
pub fn rmsprop_step(
    params: &mut SiameseParams,
    grads: &SiameseParams,
    state: &mut RmsPropState,
) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::Training(
            "non-finite gradient encountered".to_string(),
        ));
    }
    let rho = state.discount;
    let lr = state.learning_rate;
    let eps = state.epsilon;
    for (l, layer) in params.layers.iter_mut().enumerate() {
        let glayer = &grads.layers[l];
        let alayer = &mut state.accumulator.layers[l];
        for i in 0..layer.weights.len() {
            for j in 0..layer.weights[i].len() {
                let g = glayer.weights[i][j];
                alayer.weights[i][j] = rho * alayer.weights[i][j] + (1.0 - rho) * g * g;
                layer.weights[i][j] -= lr * g / (alayer.weights[i][j].sqrt() + eps);
            }
            let g = glayer.biases[i];
            alayer.biases[i] = rho * alayer.biases[i] + (1.0 - rho) * g * g;
            layer.biases[i] -= lr * g / (alayer.biases[i].sqrt() + eps);
        }
    }
    Ok(())
}

/// One trained model plus its per-epoch mean-loss log.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: SiameseParams,
    pub epoch_losses: Vec<f64>,
}

/// Train for exactly `config.epochs` full passes; deterministic given seed.
pub fn train(data: &TrainData, input_width: usize, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_rate(data, input_width, config, 0.001)
}

pub fn train_with_rate(
    data: &TrainData,
    input_width: usize,
    config: &TrainConfig,
    learning_rate: f64,
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::validation("empty training data"));
    }
    if config.epochs == 0 {
        return Err(Error::validation("epochs must be >= 1"));
    }
    if config.margin <= 0.0 {
        return Err(Error::validation("margin must be > 0"));
    }
    let shape = SiameseParams::default_shape(input_width);
    let mut params = SiameseParams::init(&shape, config.rng_seed);
    let mut state = RmsPropState::new(&shape);
    state.learning_rate = learning_rate;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let batch = config.batch_size.unwrap_or(data.len()).max(1);
    for _ in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for start in (0..data.len()).step_by(batch) {
            let end = (start + batch).min(data.len());
            let slice = match data {
                TrainData::Pairs(p) => TrainData::Pairs(p[start..end].to_vec()),
                TrainData::Triplets(t) => TrainData::Triplets(t[start..end].to_vec()),
            };
            let (loss, grads) = loss_gradients(&params, &slice, config.margin)?;
            rmsprop_step(&mut params, &grads, &mut state)?;
            epoch_loss += loss * (end - start) as f64;
            seen += end - start;
        }
        epoch_losses.push(epoch_loss / seen as f64);
    }
    Ok(TrainOutcome {
        params,
        epoch_losses,
    })
}

/// One scored fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameScore {
    pub game_index: u32,
    pub score: f64,
    pub predicted_home_win: bool,
}

/// Antisymmetric game score f(home) - f(away) on the final scalar output.
/// Ties resolve to a home win.
pub fn score_game(
    params: &SiameseParams,
    game_index: u32,
    home: &[f64],
    away: &[f64],
) -> Result<GameScore> {
    let fh = forward(params, home)?.output_scalar();
    let fa = forward(params, away)?.output_scalar();
    let score = fh - fa;
    Ok(GameScore {
        game_index,
        score,
        predicted_home_win: score >= 0.0,
    })
}

/// Team embeddings under the configured tap: the 20-unit penultimate
/// activation or the 1-d output.
pub fn embed_teams(
    params: &SiameseParams,
    stats: &[TeamSeasonStats],
    tap: EmbeddingTap,
) -> Result<Vec<(String, Vec<f64>)>> {
    stats
        .iter()
        .map(|s| {
            let acts = forward(params, &s.features)?;
            let emb = match tap {
                EmbeddingTap::FinalScalar => vec![acts.output_scalar()],
                EmbeddingTap::Penultimate20 => acts.penultimate().to_vec(),
            };
            Ok((s.team_id.clone(), emb))
        })
        .collect()
}

pub fn embed_vec(params: &SiameseParams, features: &[f64], tap: EmbeddingTap) -> Result<Vec<f64>> {
    let acts = forward(params, features)?;
    Ok(match tap {
        EmbeddingTap::FinalScalar => vec![acts.output_scalar()],
        EmbeddingTap::Penultimate20 => acts.penultimate().to_vec(),
    })
}
