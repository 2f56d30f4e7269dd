//! Small fully connected networks trained with backpropagation.
//!
//! Parameters live in one flat vector (per layer: weights row-major as
//! `outputs × inputs`, then biases) so optimizers and the model file treat
//! them uniformly. Inputs may be standardized with a stored shift and scale
//! before the first layer.

mod io;
mod optim;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_alpha, load_model, read_alpha, read_model, save_alpha, save_model, write_alpha, write_model, FORMAT_VERSION, MAGIC};
pub use optim::{Optimizer, OptimizerKind};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("expected input of width {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("batch has {inputs} inputs but {targets} targets")]
    BatchShape { inputs: usize, targets: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("loss became {loss} at update {update}")]
    NonFinite { update: u64, loss: f64 },
    #[error("malformed model file at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Linear,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Self::Relu => z.max(0.0),
            Self::Tanh => z.tanh(),
            Self::Sigmoid => sigmoid(z),
            Self::Linear => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Self::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tanh => 1.0 - a * a,
            Self::Sigmoid => a * (1.0 - a),
            Self::Linear => 1.0,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Self::Relu => 0,
            Self::Tanh => 1,
            Self::Sigmoid => 2,
            Self::Linear => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Self::Relu,
            1 => Self::Tanh,
            2 => Self::Sigmoid,
            3 => Self::Linear,
            _ => return None,
        })
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub neurons: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub const fn new(neurons: usize, activation: Activation) -> Self {
        Self { neurons, activation }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// Binary cross-entropy.
    Bce,
    /// Squared error.
    Mse,
}

impl Loss {
    pub(crate) fn code(self) -> u8 {
        match self {
            Self::Bce => 0,
            Self::Mse => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Bce),
            1 => Some(Self::Mse),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub loss: Loss,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub updates: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Layer {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    offset: usize,
}

impl Layer {
    fn weights(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.inputs * self.outputs
    }

    fn biases(&self) -> std::ops::Range<usize> {
        let start = self.offset + self.inputs * self.outputs;
        start..start + self.outputs
    }
}

/// A feedforward network with a single output.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    input_width: usize,
    layers: Vec<Layer>,
    params: Vec<f64>,
    shift: Vec<f64>,
    scale: Vec<f64>,
    pub meta: TrainingMeta,
}

/// Per-layer pre-activations and outputs from one forward pass.
struct Trace {
    input: Vec<f64>,
    z: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
}

impl Mlp {
    /// Zero-initialized network. The last layer must have one neuron.
    pub fn new(input_width: usize, specs: &[LayerSpec], meta: TrainingMeta) -> Self {
        assert!(input_width >= 1, "input width must be positive");
        assert!(specs.last().is_some_and(|s| s.neurons == 1), "last layer must have one neuron");
        let mut layers = Vec::with_capacity(specs.len());
        let mut inputs = input_width;
        let mut offset = 0;
        for s in specs {
            assert!(s.neurons >= 1);
            layers.push(Layer { inputs, outputs: s.neurons, activation: s.activation, offset });
            offset += inputs * s.neurons + s.neurons;
            inputs = s.neurons;
        }
        Self {
            input_width,
            layers,
            params: vec![0.0; offset],
            shift: vec![0.0; input_width],
            scale: vec![1.0; input_width],
            meta,
        }
    }

    /// Weights uniform in `±sqrt(k / fan_in)` (k = 6 before a ReLU, 3
    /// otherwise). ReLU biases start at 0.1 so fresh units are active; other
    /// biases start at zero.
    pub fn init_weights(&mut self, rng: &mut impl Rng) {
        for layer in &self.layers {
            let k = if layer.activation == Activation::Relu { 6.0 } else { 3.0 };
            let limit = (k / layer.inputs as f64).sqrt();
            for w in &mut self.params[layer.weights()] {
                *w = rng.random_range(-limit..limit);
            }
            let bias = if layer.activation == Activation::Relu { 0.1 } else { 0.0 };
            self.params[layer.biases()].fill(bias);
        }
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| LayerSpec::new(l.outputs, l.activation)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn standardization(&self) -> (&[f64], &[f64]) {
        (&self.shift, &self.scale)
    }

    pub fn set_standardization(&mut self, shift: Vec<f64>, scale: Vec<f64>) {
        assert_eq!(shift.len(), self.input_width);
        assert_eq!(scale.len(), self.input_width);
        self.shift = shift;
        self.scale = scale;
    }

    /// Sets the input shift and scale to the mean and standard deviation of
    /// each column of `inputs`; constant columns keep scale 1.
    pub fn fit_standardization(&mut self, inputs: &[Vec<f64>]) {
        let n = inputs.len().max(1) as f64;
        let mut mean = vec![0.0; self.input_width];
        for x in inputs {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; self.input_width];
        for x in inputs {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let scale = var.into_iter().map(|v| if v > 1e-12 { v.sqrt() } else { 1.0 }).collect();
        self.set_standardization(mean, scale);
    }

    fn check_width(&self, x: &[f64]) -> Result<(), NeuralError> {
        if x.len() == self.input_width {
            Ok(())
        } else {
            Err(NeuralError::Dimension { expected: self.input_width, got: x.len() })
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64, NeuralError> {
        self.check_width(x)?;
        Ok(self.eval(x))
    }

    /// [`forward`](Self::forward) without the width check.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut a: Vec<f64> = x.iter().zip(&self.shift).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect();
        for layer in &self.layers {
            a = self.layer_forward(layer, &a).1;
        }
        a[0]
    }

    fn layer_forward(&self, layer: &Layer, input: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = &self.params[layer.weights()];
        let b = &self.params[layer.biases()];
        let z: Vec<f64> = (0..layer.outputs)
            .map(|o| {
                let row = &w[o * layer.inputs..(o + 1) * layer.inputs];
                b[o] + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect();
        let a = z.iter().map(|&z| layer.activation.apply(z)).collect();
        (z, a)
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let input: Vec<f64> = x.iter().zip(&self.shift).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect();
        let mut zs = Vec::with_capacity(self.layers.len());
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (z, a) = self.layer_forward(layer, acts.last().unwrap_or(&input));
            zs.push(z);
            acts.push(a);
        }
        Trace { input, z: zs, a: acts }
    }

    /// Loss of one sample and its derivative with respect to the output
    /// layer's pre-activation.
    fn loss_and_delta(&self, trace: &Trace, target: f64) -> (f64, f64) {
        let out = self.layers.last().unwrap().activation;
        let z = trace.z.last().unwrap()[0];
        let y_hat = trace.a.last().unwrap()[0];
        match (self.meta.loss, out) {
            (Loss::Bce, Activation::Sigmoid) => {
                // log(1 + e^z) - y·z, stable in z.
                let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
                (softplus - target * z, y_hat - target)
            }
            (Loss::Bce, act) => {
                let p = y_hat.clamp(1e-12, 1.0 - 1e-12);
                let loss = -(target * p.ln() + (1.0 - target) * (1.0 - p).ln());
                let d = (p - target) / (p * (1.0 - p));
                (loss, d * act.derivative(z, y_hat))
            }
            (Loss::Mse, act) => {
                let e = y_hat - target;
                (e * e, 2.0 * e * act.derivative(z, y_hat))
            }
        }
    }

    /// Mean loss over the batch and its gradient with respect to every
    /// parameter.
    pub fn loss_and_gradient(&self, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(f64, Vec<f64>), NeuralError> {
        check_batch(self, inputs, targets)?;
        let n = inputs.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut total = 0.0;
        for (x, &y) in inputs.iter().zip(targets) {
            let trace = self.trace(x);
            let (loss, d_out) = self.loss_and_delta(&trace, y);
            total += loss;
            let mut delta = vec![d_out];
            for l in (0..self.layers.len()).rev() {
                let layer = self.layers[l];
                let input = if l == 0 { &trace.input } else { &trace.a[l - 1] };
                let w = &self.params[layer.weights()];
                let gw = layer.weights().start;
                let gb = layer.biases().start;
                for o in 0..layer.outputs {
                    grad[gb + o] += delta[o] / n;
                    for i in 0..layer.inputs {
                        grad[gw + o * layer.inputs + i] += delta[o] * input[i] / n;
                    }
                }
                if l > 0 {
                    let prev = self.layers[l - 1];
                    delta = (0..layer.inputs)
                        .map(|i| {
                            let back: f64 = (0..layer.outputs).map(|o| w[o * layer.inputs + i] * delta[o]).sum();
                            back * prev.activation.derivative(trace.z[l - 1][i], trace.a[l - 1][i])
                        })
                        .collect();
                }
            }
        }
        Ok((total / n, grad))
    }

    /// Mean loss over a batch without updating anything.
    pub fn loss(&self, inputs: &[Vec<f64>], targets: &[f64]) -> Result<f64, NeuralError> {
        check_batch(self, inputs, targets)?;
        let total: f64 = inputs.iter().zip(targets).map(|(x, &y)| self.loss_and_delta(&self.trace(x), y).0).sum();
        Ok(total / inputs.len() as f64)
    }
}

fn check_batch(model: &Mlp, inputs: &[Vec<f64>], targets: &[f64]) -> Result<(), NeuralError> {
    if inputs.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    if inputs.len() != targets.len() {
        return Err(NeuralError::BatchShape { inputs: inputs.len(), targets: targets.len() });
    }
    for x in inputs {
        model.check_width(x)?;
    }
    Ok(())
}

/// A batch of inputs with one scalar target each.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainBatch {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

/// One optimizer update from the batch gradient. Returns the mean loss
/// before the update.
pub fn train_step(model: &mut Mlp, optimizer: &mut Optimizer, batch: &TrainBatch) -> Result<f64, NeuralError> {
    let (loss, grad) = model.loss_and_gradient(&batch.inputs, &batch.targets)?;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(NeuralError::NonFinite { update: model.meta.updates, loss });
    }
    optimizer.step(&mut model.params, &grad);
    model.meta.updates += 1;
    Ok(loss)
}

/// One pass over `inputs` in shuffled mini-batches. Returns the mean of the
/// batch losses.
pub fn train_epoch(
    model: &mut Mlp,
    optimizer: &mut Optimizer,
    inputs: &[Vec<f64>],
    targets: &[f64],
    batch_size: usize,
    rng: &mut impl Rng,
) -> Result<f64, NeuralError> {
    check_batch(model, inputs, targets)?;
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    crate::rng::shuffle(&mut order, rng);
    let mut total = 0.0;
    let mut batches = 0;
    for chunk in order.chunks(batch_size.max(1)) {
        let batch = TrainBatch {
            inputs: chunk.iter().map(|&k| inputs[k].clone()).collect(),
            targets: chunk.iter().map(|&k| targets[k]).collect(),
        };
        total += train_step(model, optimizer, &batch)?;
        batches += 1;
    }
    Ok(total / batches as f64)
}

/// Binary classifier: two ReLU layers as wide as the input, two of width 5,
/// sigmoid output; cross-entropy loss with Adam.
pub fn build_classifier(input_width: usize) -> Mlp {
    Mlp::new(
        input_width,
        &[
            LayerSpec::new(input_width, Activation::Relu),
            LayerSpec::new(input_width, Activation::Relu),
            LayerSpec::new(5, Activation::Relu),
            LayerSpec::new(5, Activation::Relu),
            LayerSpec::new(1, Activation::Sigmoid),
        ],
        TrainingMeta { loss: Loss::Bce, optimizer: OptimizerKind::Adam, learning_rate: 1e-3, updates: 0 },
    )
}

/// Q-network over a `sub × sub` window: layers of width `sub²` with ReLU,
/// tanh, linear, linear, then one tanh output; squared error with RMSprop.
pub fn build_qnet(sub: usize) -> Mlp {
    assert!(sub % 2 == 1, "window size must be odd");
    let w = sub * sub;
    Mlp::new(
        w,
        &[
            LayerSpec::new(w, Activation::Relu),
            LayerSpec::new(w, Activation::Tanh),
            LayerSpec::new(w, Activation::Linear),
            LayerSpec::new(w, Activation::Linear),
            LayerSpec::new(1, Activation::Tanh),
        ],
        TrainingMeta { loss: Loss::Mse, optimizer: OptimizerKind::RmsProp, learning_rate: 1e-3, updates: 0 },
    )
}

/// Largest relative difference between the analytic gradient and central
/// finite differences with step `h`. Differences are taken relative to
/// `max(|analytic| + |numeric|, floor)`.
pub fn gradient_check(model: &Mlp, inputs: &[Vec<f64>], targets: &[f64], h: f64, floor: f64) -> Result<f64, NeuralError> {
    let (_, analytic) = model.loss_and_gradient(inputs, targets)?;
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for k in 0..model.params.len() {
        let orig = probe.params[k];
        probe.params[k] = orig + h;
        let up = probe.loss(inputs, targets)?;
        probe.params[k] = orig - h;
        let down = probe.loss(inputs, targets)?;
        probe.params[k] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = (analytic[k].abs() + numeric.abs()).max(floor);
        worst = worst.max((analytic[k] - numeric).abs() / denom);
    }
    Ok(worst)
}
