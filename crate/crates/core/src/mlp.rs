//! Fully connected sigmoid network trained by per-example stochastic
//! gradient descent.
//!
//! Every layer computes `sigmoid(W x + b)`. The output layer's bias exists in
//! the parameter layout but is held at zero: it is initialized to zero, its
//! gradient is reported as zero and training never touches it.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;
use crate::math::{exp, ln_1p, sqrt};
use crate::patching::{PatchKind, PatchSet};
use crate::{Error, Result};

const MAGIC: &[u8; 3] = b"MFG";
const VERSION: u8 = b'1';

/// Smallest and largest values the logistic output is allowed to take, so
/// outputs stay strictly inside `(0, 1)` even when saturated.
const SIGMOID_LO: f64 = f64::MIN_POSITIVE;
const SIGMOID_HI: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    let y = if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    };
    y.clamp(SIGMOID_LO, SIGMOID_HI)
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + ln_1p(exp(-z.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Layer {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    #[inline]
    pub fn row(&self, out: usize) -> &[f64] {
        &self.weights[out * self.inputs..(out + 1) * self.inputs]
    }

    fn forward_into(&self, input: &[f64], pre: &mut Vec<f64>, act: &mut Vec<f64>) {
        pre.clear();
        act.clear();
        for o in 0..self.outputs {
            let z = self.biases[o] + crate::math::dot(self.row(o), input);
            pre.push(z);
            act.push(sigmoid(z));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    layers: Vec<Layer>,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    /// Summed binary cross-entropy over output units.
    CrossEntropy,
    /// `0.5 * sum (y - t)^2`.
    MeanSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub loss: Loss,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 0.05,
            loss: Loss::CrossEntropy,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning rate must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Parameter gradients, laid out like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

/// Glorot-uniform weights `U(-a, a)`, `a = sqrt(6 / (fan_in + fan_out))`,
/// zero biases.
pub fn init_model(layer_sizes: &[usize], seed: u64) -> Result<MlpModel> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidConfig("a network needs at least two layers"));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::InvalidConfig("layer sizes must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = layer_sizes
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = sqrt(6.0 / (fan_in + fan_out) as f64);
            let mut layer = Layer::zeros(fan_in, fan_out);
            for w in &mut layer.weights {
                // (0, 1) excludes both endpoints, so |w| < bound strictly.
                let u = loop {
                    let u: f64 = rng.gen();
                    if u > 0.0 {
                        break u;
                    }
                };
                *w = bound * (2.0 * u - 1.0);
            }
            layer
        })
        .collect();
    Ok(MlpModel {
        layer_sizes: layer_sizes.to_vec(),
        layers,
        seed,
    })
}

struct Activations {
    /// `acts[0]` is the input; `acts[l + 1]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl MlpModel {
    /// Assembles a model from explicit layers. The output bias must be zero.
    pub fn from_layers(layers: Vec<Layer>, seed: u64) -> Result<MlpModel> {
        let first = layers.first().ok_or(Error::InvalidConfig("no layers"))?;
        let mut sizes = vec![first.inputs];
        for layer in &layers {
            if layer.inputs != *sizes.last().unwrap_or(&0) || layer.outputs == 0 {
                return Err(Error::InvalidConfig("layer dimensions do not chain"));
            }
            if layer.weights.len() != layer.inputs * layer.outputs
                || layer.biases.len() != layer.outputs
            {
                return Err(Error::InvalidConfig("layer parameter count mismatch"));
            }
            if layer.weights.iter().chain(&layer.biases).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("model parameters"));
            }
            sizes.push(layer.outputs);
        }
        if layers.last().is_some_and(|l| l.biases.iter().any(|&b| b != 0.0)) {
            return Err(Error::InvalidConfig("output layer bias must be zero"));
        }
        Ok(MlpModel {
            layer_sizes: sizes,
            layers,
            seed,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().unwrap_or(&0)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_len() {
            return Err(Error::LengthMismatch {
                expected: self.input_len(),
                found: input.len(),
            });
        }
        Ok(())
    }

    fn forward_trace(&self, input: &[f64]) -> Result<Activations> {
        self.check_input(input)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        acts.push(input.to_vec());
        for layer in &self.layers {
            let mut z = Vec::with_capacity(layer.outputs);
            let mut a = Vec::with_capacity(layer.outputs);
            layer.forward_into(acts.last().map(Vec::as_slice).unwrap_or(&[]), &mut z, &mut a);
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("pre-activation"));
            }
            pre.push(z);
            acts.push(a);
        }
        Ok(Activations { acts, pre })
    }
}

/// Runs the network; every output lies strictly inside `(0, 1)`.
pub fn forward(model: &MlpModel, input: &[f64]) -> Result<Vec<f64>> {
    let mut trace = model.forward_trace(input)?;
    Ok(trace.acts.pop().unwrap_or_default())
}

fn check_target(model: &MlpModel, target: &[f64]) -> Result<()> {
    if target.len() != model.output_len() {
        return Err(Error::LengthMismatch {
            expected: model.output_len(),
            found: target.len(),
        });
    }
    if let Some((index, &value)) = target
        .iter()
        .enumerate()
        .find(|(_, &t)| t != 0.0 && t != 1.0)
    {
        return Err(Error::InvalidTarget { index, value });
    }
    Ok(())
}

fn loss_value(loss: Loss, pre: &[f64], out: &[f64], target: &[f64]) -> f64 {
    match loss {
        // -[t ln y + (1 - t) ln(1 - y)] = softplus(z) - t z
        Loss::CrossEntropy => pre
            .iter()
            .zip(target)
            .map(|(&z, &t)| softplus(z) - t * z)
            .sum(),
        Loss::MeanSquared => {
            0.5 * out
                .iter()
                .zip(target)
                .map(|(y, t)| (y - t) * (y - t))
                .sum::<f64>()
        }
    }
}

fn output_delta(loss: Loss, out: &[f64], target: &[f64]) -> Vec<f64> {
    out.iter()
        .zip(target)
        .map(|(&y, &t)| match loss {
            Loss::CrossEntropy => y - t,
            Loss::MeanSquared => (y - t) * y * (1.0 - y),
        })
        .collect()
}

/// `W^T delta` scaled by the sigmoid derivative of the layer below.
fn backpropagate(layer: &Layer, delta: &[f64], below: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; layer.inputs];
    for (o, &d) in delta.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        for (a, w) in acc.iter_mut().zip(layer.row(o)) {
            *a += w * d;
        }
    }
    for (a, &h) in acc.iter_mut().zip(below) {
        *a *= h * (1.0 - h);
    }
    acc
}

/// Loss of one example and the exact gradient of every parameter.
pub fn loss_and_gradient(
    model: &MlpModel,
    input: &[f64],
    target: &[f64],
    loss: Loss,
) -> Result<(f64, Gradients)> {
    check_target(model, target)?;
    let trace = model.forward_trace(input)?;
    let depth = model.layers.len();
    let out = &trace.acts[depth];
    let value = loss_value(loss, &trace.pre[depth - 1], out, target);

    let mut grads: Vec<Layer> = model
        .layers
        .iter()
        .map(|l| Layer::zeros(l.inputs, l.outputs))
        .collect();
    let mut delta = output_delta(loss, out, target);
    for l in (0..depth).rev() {
        let below = &trace.acts[l];
        let g = &mut grads[l];
        for (o, &d) in delta.iter().enumerate() {
            let row = &mut g.weights[o * g.inputs..(o + 1) * g.inputs];
            for (gw, &x) in row.iter_mut().zip(below) {
                *gw = d * x;
            }
            if l + 1 < depth {
                g.biases[o] = d;
            }
        }
        if l > 0 {
            delta = backpropagate(&model.layers[l], &delta, below);
        }
    }
    Ok((value, Gradients { layers: grads }))
}

/// Per-example SGD. Examples are visited in a fresh seeded shuffle each
/// epoch. Returns the trained model and, per epoch, the mean loss of the
/// examples as measured just before their update (summed in dataset order).
pub fn train_sgd(
    model: MlpModel,
    data: &[TrainingPair],
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    train_sgd_with(model, data, cfg, |_, _| {})
}

/// [`train_sgd`] with a callback invoked after every epoch with
/// `(epoch, mean_loss)`.
pub fn train_sgd_with(
    mut model: MlpModel,
    data: &[TrainingPair],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(MlpModel, Vec<f64>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    for pair in data {
        model.check_input(&pair.input)?;
        check_target(&model, &pair.target)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = vec![0.0; data.len()];
    let mut trace = Vec::with_capacity(cfg.epochs);
    let depth = model.layers.len();
    let lr = cfg.learning_rate;

    for epoch in 0..cfg.epochs {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for &idx in &order {
            let pair = &data[idx];
            let act = model.forward_trace(&pair.input)?;
            let out = &act.acts[depth];
            let value = loss_value(cfg.loss, &act.pre[depth - 1], out, &pair.target);
            if value.is_nan() {
                return Err(Error::NanLoss {
                    epoch,
                    example: idx,
                });
            }
            losses[idx] = value;
            if lr == 0.0 {
                continue;
            }
            let mut delta = output_delta(cfg.loss, out, &pair.target);
            for l in (0..depth).rev() {
                let below = &act.acts[l];
                // The next delta needs this layer's weights before the update.
                let next = if l > 0 {
                    Some(backpropagate(&model.layers[l], &delta, below))
                } else {
                    None
                };
                let layer = &mut model.layers[l];
                let inputs = layer.inputs;
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let step = lr * d;
                    let row = &mut layer.weights[o * inputs..(o + 1) * inputs];
                    for (w, &x) in row.iter_mut().zip(below) {
                        *w -= step * x;
                    }
                    if l + 1 < depth {
                        layer.biases[o] -= step;
                    }
                }
                if let Some(next) = next {
                    delta = next;
                }
            }
        }
        let mean = losses.iter().sum::<f64>() / data.len() as f64;
        trace.push(mean);
        on_epoch(epoch, mean);
    }
    Ok((model, trace))
}

/// Flattens each patch, runs the network and reshapes the output.
pub fn predict_masks(model: &MlpModel, patches: &PatchSet) -> Result<PatchSet> {
    let (bins, width) = patches
        .patch_shape()
        .ok_or(Error::Empty("patch set"))?;
    if bins * width != model.input_len() || model.output_len() != model.input_len() {
        return Err(Error::ShapeMismatch {
            expected: (model.input_len(), model.output_len()),
            found: (bins * width, bins * width),
        });
    }
    let predicted = patches
        .patches
        .iter()
        .map(|p| {
            p.ensure_shape((bins, width))?;
            Grid::from_vec(bins, width, forward(model, p.as_slice())?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(patches.with_patches(predicted, PatchKind::Prediction))
}

/// Model file: `"MFG1"`, layer count (u32), layer sizes (u32 each), seed
/// (u64), then per layer the row-major weights and the biases as f64. All
/// integers and floats little-endian.
pub fn to_bytes(model: &MlpModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * model.parameter_count());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(model.layer_sizes.len() as u32).to_le_bytes());
    for &n in &model.layer_sizes {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&model.seed.to_le_bytes());
    for layer in &model.layers {
        for v in layer.weights.iter().chain(&layer.biases) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Truncated);
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(u64::from_le_bytes(a))
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or(Error::Corrupt("length overflow"))?;
        let b = self.take(len)?;
        Ok(b.chunks_exact(8)
            .map(|c| {
                let mut a = [0u8; 8];
                a.copy_from_slice(c);
                f64::from_le_bytes(a)
            })
            .collect())
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<MlpModel> {
    let mut r = Reader::new(bytes);
    let head = r.take(4).map_err(|_| Error::BadMagic)?;
    if &head[..3] != MAGIC {
        return Err(Error::BadMagic);
    }
    if head[3] != VERSION {
        return Err(Error::Corrupt("unsupported model version"));
    }
    let count = r.u32()? as usize;
    if !(2..=64).contains(&count) {
        return Err(Error::Corrupt("implausible layer count"));
    }
    let sizes = (0..count)
        .map(|_| r.u32().map(|n| n as usize))
        .collect::<Result<Vec<_>>>()?;
    if sizes.contains(&0) {
        return Err(Error::Corrupt("zero layer size"));
    }
    let seed = r.u64()?;
    let layers = sizes
        .windows(2)
        .map(|pair| {
            let (inputs, outputs) = (pair[0], pair[1]);
            let n = inputs.checked_mul(outputs).ok_or(Error::Corrupt("layer too large"))?;
            Ok(Layer {
                inputs,
                outputs,
                weights: r.f64s(n)?,
                biases: r.f64s(outputs)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if !r.is_empty() {
        return Err(Error::Corrupt("trailing bytes after model"));
    }
    MlpModel::from_layers(layers, seed)
}
