//! Federated training of a 13-10-1 regression network.

use rand::Rng;
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng;
use crate::usba::Selection;

pub const N_FEATURES: usize = 13;
pub const N_HIDDEN: usize = 10;
pub const N_PARAMS: usize = N_FEATURES * N_HIDDEN + N_HIDDEN + N_HIDDEN + 1;

/// Sigmoid hidden layer, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// `w1[i][j]`: input `i` to hidden unit `j`.
    pub w1: [[f64; N_HIDDEN]; N_FEATURES],
    pub b1: [f64; N_HIDDEN],
    pub w2: [f64; N_HIDDEN],
    pub b2: f64,
}

impl MlpModel {
    pub fn zeros() -> Self {
        Self { w1: [[0.0; N_HIDDEN]; N_FEATURES], b1: [0.0; N_HIDDEN], w2: [0.0; N_HIDDEN], b2: 0.0 }
    }

    /// Every parameter uniform in `[-0.5, 0.5]`.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut p = [0.0; N_PARAMS];
        for v in p.iter_mut() {
            *v = rng.gen_range(-0.5..=0.5);
        }
        Self::from_params(&p).expect("length matches")
    }

    pub fn init(seed: u64) -> Self {
        Self::random(&mut rng::stream(seed, rng::MODEL_INIT))
    }

    /// Flat view: `w1` row-major, then `b1`, `w2`, `b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(N_PARAMS);
        self.w1.iter().for_each(|row| v.extend_from_slice(row));
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn from_params(p: &[f64]) -> Result<Self> {
        if p.len() != N_PARAMS {
            return Err(Error::InvalidArgument(format!("expected {N_PARAMS} parameters, got {}", p.len())));
        }
        let mut m = Self::zeros();
        let mut it = p.iter().copied();
        for row in m.w1.iter_mut() {
            for w in row.iter_mut() {
                *w = it.next().unwrap();
            }
        }
        for b in m.b1.iter_mut() {
            *b = it.next().unwrap();
        }
        for w in m.w2.iter_mut() {
            *w = it.next().unwrap();
        }
        m.b2 = it.next().unwrap();
        Ok(m)
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    fn hidden(&self, x: &[f64; N_FEATURES]) -> [f64; N_HIDDEN] {
        let mut h = self.b1;
        for (xi, row) in x.iter().zip(&self.w1) {
            for (hj, w) in h.iter_mut().zip(row) {
                *hj += xi * w;
            }
        }
        h.map(sigmoid)
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataShard {
    pub inputs: Vec<[f64; N_FEATURES]>,
    pub targets: Vec<f64>,
    pub owner: usize,
}

impl DataShard {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

pub fn forward(model: &MlpModel, x: &[f64; N_FEATURES]) -> f64 {
    let h = model.hidden(x);
    h.iter().zip(&model.w2).map(|(a, b)| a * b).sum::<f64>() + model.b2
}

/// Mean of `½(ŷ − y)²` over the shard.
pub fn loss(model: &MlpModel, shard: &DataShard) -> f64 {
    let sum: f64 = shard.inputs.iter().zip(&shard.targets).map(|(x, y)| 0.5 * (forward(model, x) - y).powi(2)).sum();
    sum / shard.len() as f64
}

/// Gradient of [`loss`] with respect to every parameter, in model shape.
pub fn gradient(model: &MlpModel, shard: &DataShard) -> MlpModel {
    let mut g = MlpModel::zeros();
    let scale = 1.0 / shard.len() as f64;
    for (x, y) in shard.inputs.iter().zip(&shard.targets) {
        let h = model.hidden(x);
        let yhat = h.iter().zip(&model.w2).map(|(a, b)| a * b).sum::<f64>() + model.b2;
        let e = (yhat - y) * scale;
        g.b2 += e;
        for j in 0..N_HIDDEN {
            g.w2[j] += e * h[j];
            let dz = e * model.w2[j] * h[j] * (1.0 - h[j]);
            g.b1[j] += dz;
            for i in 0..N_FEATURES {
                g.w1[i][j] += dz * x[i];
            }
        }
    }
    g
}

fn axpy(model: &mut MlpModel, a: f64, g: &MlpModel) {
    for (row, grow) in model.w1.iter_mut().zip(&g.w1) {
        for (w, d) in row.iter_mut().zip(grow) {
            *w += a * d;
        }
    }
    for (b, d) in model.b1.iter_mut().zip(&g.b1) {
        *b += a * d;
    }
    for (w, d) in model.w2.iter_mut().zip(&g.w2) {
        *w += a * d;
    }
    model.b2 += a * g.b2;
}

/// `epochs` full-batch gradient steps on one shard.
pub fn local_train(model: &MlpModel, shard: &DataShard, epochs: usize, lr: f64) -> Result<MlpModel> {
    if shard.is_empty() {
        return Err(Error::InvalidArgument(format!("shard of user {} is empty", shard.owner)));
    }
    if !(lr >= 0.0) {
        return Err(Error::InvalidArgument(format!("learning rate must be non-negative, got {lr}")));
    }
    let mut m = model.clone();
    for _ in 0..epochs {
        let g = gradient(&m, shard);
        axpy(&mut m, -lr, &g);
    }
    Ok(m)
}

/// Parameter-wise average weighted by shard size.
pub fn aggregate(models: &[MlpModel], shard_sizes: &[usize]) -> Result<MlpModel> {
    if models.is_empty() || models.len() != shard_sizes.len() {
        return Err(Error::InvalidArgument(format!("{} models but {} shard sizes", models.len(), shard_sizes.len())));
    }
    let total: usize = shard_sizes.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("total sample count is zero".into()));
    }
    let mut acc = MlpModel::zeros();
    for (m, &d) in models.iter().zip(shard_sizes) {
        axpy(&mut acc, d as f64 / total as f64, m);
    }
    Ok(acc)
}

pub fn r_squared(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if truth.is_empty() || predictions.len() != truth.len() {
        return Err(Error::InvalidArgument(format!("{} predictions for {} targets", predictions.len(), truth.len())));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    let ss_res: f64 = predictions.iter().zip(truth).map(|(p, y)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// `⌈1/(1−θ)⌉`, the global-round bound for local accuracy `θ`.
pub fn required_global_rounds(local_accuracy: f64) -> Result<usize> {
    if !(local_accuracy > 0.0 && local_accuracy < 1.0) {
        return Err(Error::InvalidArgument(format!("local accuracy must lie in (0, 1), got {local_accuracy}")));
    }
    let k = 1.0 / (1.0 - local_accuracy);
    // Values within rounding noise of an integer (1/(1−0.9) lands a hair
    // above 10) and the θ → 0 limit both snap to the nearest integer.
    let rounded = k.round();
    let k = if (k - rounded).abs() <= 1e-6 * rounded { rounded } else { k.ceil() };
    Ok((k as usize).max(1))
}

/// Per-column affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub feature_mean: [f64; N_FEATURES],
    pub feature_std: [f64; N_FEATURES],
    pub target_mean: f64,
    pub target_std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    // Constant columns pass through centred but unscaled.
    let std = if var > 0.0 { var.sqrt() } else { 1.0 };
    (mean, std)
}

impl Standardizer {
    pub fn identity() -> Self {
        Self { feature_mean: [0.0; N_FEATURES], feature_std: [1.0; N_FEATURES], target_mean: 0.0, target_std: 1.0 }
    }

    pub fn fit(inputs: &[[f64; N_FEATURES]], targets: &[f64]) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::InvalidArgument("standardizer needs matching, non-empty inputs and targets".into()));
        }
        let mut feature_mean = [0.0; N_FEATURES];
        let mut feature_std = [1.0; N_FEATURES];
        for i in 0..N_FEATURES {
            (feature_mean[i], feature_std[i]) = mean_std(inputs.iter().map(|x| x[i]));
        }
        let (target_mean, target_std) = mean_std(targets.iter().copied());
        Ok(Self { feature_mean, feature_std, target_mean, target_std })
    }

    pub fn transform_input(&self, x: &[f64; N_FEATURES]) -> [f64; N_FEATURES] {
        std::array::from_fn(|i| (x[i] - self.feature_mean[i]) / self.feature_std[i])
    }

    pub fn transform_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    pub fn inverse_target(&self, y: f64) -> f64 {
        y * self.target_std + self.target_mean
    }
}

/// Standardized shards indexed by user id, plus the shared test split.
#[derive(Debug, Clone, PartialEq)]
pub struct FederatedData {
    pub shards: Vec<DataShard>,
    pub test: DataShard,
    pub scaler: Standardizer,
}

impl FederatedData {
    /// R² of `model` on the test split, on the original target scale.
    pub fn test_r2(&self, model: &MlpModel) -> Result<f64> {
        let pred: Vec<f64> = self.test.inputs.iter().map(|x| self.scaler.inverse_target(forward(model, x))).collect();
        let truth: Vec<f64> = self.test.targets.iter().map(|&y| self.scaler.inverse_target(y)).collect();
        r_squared(&pred, &truth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub round_r2: Vec<f64>,
    pub final_r2: f64,
    /// Sample-weighted training loss of the global model after each round.
    pub loss_curve: Vec<f64>,
    pub model: MlpModel,
}

/// Federated averaging over the selected users' shards.
pub fn run_federated_training(
    selection: &Selection,
    data: &FederatedData,
    config: &SimConfig,
    seed: u64,
) -> Result<TrainingReport> {
    if selection.is_empty() {
        return Err(Error::NoParticipants);
    }
    let ids = selection.ids();
    let shards: Vec<&DataShard> = ids
        .iter()
        .map(|&id| {
            data.shards
                .get(id)
                .filter(|s| s.owner == id)
                .ok_or_else(|| Error::InvalidArgument(format!("no shard for user {id}")))
        })
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = shards.iter().map(|s| s.len()).collect();
    let total = sizes.iter().sum::<usize>() as f64;

    let mut global = MlpModel::init(seed);
    let mut round_r2 = Vec::with_capacity(config.global_rounds);
    let mut loss_curve = Vec::with_capacity(config.global_rounds);
    for _ in 0..config.global_rounds {
        let locals = shards
            .par_iter()
            .map(|s| local_train(&global, s, config.local_epochs, config.learning_rate))
            .collect::<Result<Vec<_>>>()?;
        global = aggregate(&locals, &sizes)?;
        round_r2.push(data.test_r2(&global)?);
        loss_curve.push(shards.iter().map(|s| loss(&global, s) * s.len() as f64).sum::<f64>() / total);
    }
    let final_r2 = match round_r2.last() {
        Some(&r) => r,
        None => data.test_r2(&global)?,
    };
    Ok(TrainingReport { round_r2, final_r2, loss_curve, model: global })
}
