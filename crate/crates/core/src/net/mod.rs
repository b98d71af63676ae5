//! A small convolutional classifier trained from scratch.
//!
//! Layers run on `f64` throughout, so finite-difference gradient checks are
//! meaningful. The network always ends in a softmax; the last layer must be a
//! fully-connected layer with one output per class.

mod checkpoint;
mod gradcheck;
mod layers;
mod train;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{gradient_check, GradientCheck, GRADIENT_FLOOR};
pub use layers::Shape;
pub use train::{lr_at, train, LossRecord, Sgd, TrainConfig};

use layers::{Conv, Dense, MaxPool};

use crate::volume::InputVolume;
use crate::{Error, Result, Rng, ScoreVector};

/// Dropout rates of the two hidden fully-connected layers in the full-scale
/// recipe.
pub const PAPER_FC_DROPOUT: [f64; 2] = [0.9, 0.8];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv {
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    Relu,
    /// 2x2, stride 2.
    MaxPool,
    /// Fully connected; flattens its input.
    Dense { outputs: usize },
    /// Inverted dropout with the given drop probability.
    Dropout { rate: f64 },
}

impl LayerSpec {
    pub fn conv3(out_channels: usize) -> Self {
        LayerSpec::Conv {
            out_channels,
            kernel: 3,
            stride: 1,
            padding: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    pub input: Shape,
    pub classes: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetConfig {
    /// conv3x3-`c1`/ReLU/pool, conv3x3-`c2`/ReLU/pool, FC-`hidden`/ReLU/dropout, FC-K.
    pub fn small(input: Shape, classes: usize, c1: usize, c2: usize, hidden: usize, dropout: f64) -> Self {
        Self {
            input,
            classes,
            layers: vec![
                LayerSpec::conv3(c1),
                LayerSpec::Relu,
                LayerSpec::MaxPool,
                LayerSpec::conv3(c2),
                LayerSpec::Relu,
                LayerSpec::MaxPool,
                LayerSpec::Dense { outputs: hidden },
                LayerSpec::Relu,
                LayerSpec::Dropout { rate: dropout },
                LayerSpec::Dense { outputs: classes },
            ],
        }
    }

    /// Desk-scale default: 20x56x56 input, 16 and 32 conv channels, FC-64
    /// with dropout 0.5.
    pub fn desk_default(classes: usize) -> Self {
        Self::small(Shape::new(20, 56, 56), classes, 16, 32, 64, 0.5)
    }

    /// Two hidden fully-connected layers carrying the full-scale dropout
    /// rates (0.9, 0.8).
    pub fn with_paper_dropout(input: Shape, classes: usize, c1: usize, c2: usize, hidden: usize) -> Self {
        let mut cfg = Self::small(input, classes, c1, c2, hidden, PAPER_FC_DROPOUT[0]);
        let last = cfg.layers.pop().expect("final layer");
        cfg.layers.extend([
            LayerSpec::Dense { outputs: hidden },
            LayerSpec::Relu,
            LayerSpec::Dropout {
                rate: PAPER_FC_DROPOUT[1],
            },
            last,
        ]);
        cfg
    }

    /// Output shape of every layer, validating compatibility.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        if self.input.is_empty() || self.classes == 0 {
            return Err(Error::InvalidParameter(
                "input shape and class count must be positive".into(),
            ));
        }
        let mut shape = self.input;
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, spec) in self.layers.iter().enumerate() {
            shape = match *spec {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => {
                    if out_channels == 0 {
                        return Err(shape_err(i, "convolution needs at least one output channel"));
                    }
                    Conv::new(shape, out_channels, kernel, stride, padding)
                        .ok_or_else(|| shape_err(i, format!("kernel {kernel} does not fit {shape:?}")))?
                        .output
                }
                LayerSpec::Relu => shape,
                LayerSpec::MaxPool => {
                    MaxPool::new(shape)
                        .ok_or_else(|| shape_err(i, format!("cannot pool {shape:?}")))?
                        .output
                }
                LayerSpec::Dense { outputs } => {
                    if outputs == 0 {
                        return Err(shape_err(i, "dense layer needs at least one output"));
                    }
                    Shape::new(outputs, 1, 1)
                }
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(shape_err(i, format!("dropout rate {rate} not in [0, 1)")));
                    }
                    shape
                }
            };
            out.push(shape);
        }
        match self.layers.last() {
            Some(LayerSpec::Dense { outputs }) if *outputs == self.classes => Ok(out),
            _ => Err(shape_err(
                self.layers.len().saturating_sub(1),
                format!("last layer must be dense with {} outputs", self.classes),
            )),
        }
    }
}

fn shape_err(layer: usize, message: impl Into<String>) -> Error {
    Error::Shape {
        layer,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Layer {
    Conv(Conv),
    Relu,
    MaxPool(MaxPool),
    Dense(Dense),
    Dropout(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    config: NetConfig,
    layers: Vec<Layer>,
}

pub enum Mode<'a> {
    Train(&'a mut Rng),
    Eval,
}

/// Intermediate values kept by a train-mode forward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    /// Input of every layer.
    inputs: Vec<Vec<f64>>,
    /// Scaled keep-masks of dropout layers, pool argmax indices.
    aux: Vec<Aux>,
}

#[derive(Debug, Clone)]
enum Aux {
    None,
    Mask(Vec<f64>),
    Argmax(Vec<usize>),
}

/// Result of a forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub scores: ScoreVector,
    pub logits: Vec<f64>,
    pub cache: Option<Cache>,
}

/// Gradients in parameter order: per parametrized layer, weights then bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Net) -> Self {
        Self {
            tensors: net.params().iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.tensors {
            t.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn norm(&self) -> f64 {
        self.tensors
            .iter()
            .flatten()
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

impl Net {
    /// Randomly initialized network: He-uniform weights and zero biases,
    /// except the classifier layer, which starts at zero so the initial
    /// prediction is uniform.
    pub fn new(config: NetConfig, rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(config)?;
        let last = net.layers.len() - 1;
        for layer in &mut net.layers[..last] {
            match layer {
                Layer::Conv(c) => c.init(rng),
                Layer::Dense(d) => d.init(rng),
                _ => {}
            }
        }
        Ok(net)
    }

    /// Network with every parameter set to zero.
    pub fn zeros(config: NetConfig) -> Result<Self> {
        config.shapes()?;
        let mut shape = config.input;
        let mut layers = Vec::with_capacity(config.layers.len());
        for spec in &config.layers {
            let layer = match *spec {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => Layer::Conv(Conv::new(shape, out_channels, kernel, stride, padding).expect("validated")),
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::MaxPool => Layer::MaxPool(MaxPool::new(shape).expect("validated")),
                LayerSpec::Dense { outputs } => Layer::Dense(Dense::new(shape.len(), outputs)),
                LayerSpec::Dropout { rate } => Layer::Dropout(rate),
            };
            shape = match &layer {
                Layer::Conv(c) => c.output,
                Layer::MaxPool(p) => p.output,
                Layer::Dense(d) => Shape::new(d.outputs, 1, 1),
                _ => shape,
            };
            layers.push(layer);
        }
        Ok(Self { config, layers })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn classes(&self) -> usize {
        self.config.classes
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv(c) => out.extend([&c.weights[..], &c.bias[..]]),
                Layer::Dense(d) => out.extend([&d.weights[..], &d.bias[..]]),
                _ => {}
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(c) => out.extend([&mut c.weights[..], &mut c.bias[..]]),
                Layer::Dense(d) => out.extend([&mut d.weights[..], &mut d.bias[..]]),
                _ => {}
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn forward(&self, input: &InputVolume, mode: Mode<'_>) -> Result<Forward> {
        let (c, h, w) = input.shape();
        if Shape::new(c, h, w) != self.config.input {
            return Err(shape_err(
                0,
                format!(
                    "input is {c}x{h}x{w}, network expects {}x{}x{}",
                    self.config.input.c, self.config.input.h, self.config.input.w
                ),
            ));
        }
        let (mut rng, keep_cache) = match mode {
            Mode::Train(rng) => (Some(rng), true),
            Mode::Eval => (None, false),
        };
        let mut x = input.data().to_vec();
        let mut inputs = Vec::new();
        let mut aux = Vec::new();
        for layer in &self.layers {
            let (next, a) = match layer {
                Layer::Conv(conv) => (conv.forward(&x), Aux::None),
                Layer::Relu => (x.iter().map(|&v| v.max(0.0)).collect(), Aux::None),
                Layer::MaxPool(pool) => {
                    let (out, idx) = pool.forward(&x);
                    (out, if keep_cache { Aux::Argmax(idx) } else { Aux::None })
                }
                Layer::Dense(dense) => (dense.forward(&x), Aux::None),
                Layer::Dropout(rate) => match rng.as_deref_mut() {
                    Some(rng) => {
                        let keep = 1.0 - rate;
                        let mask: Vec<f64> = (0..x.len())
                            .map(|_| if rng.unit() < *rate { 0.0 } else { 1.0 / keep })
                            .collect();
                        (x.iter().zip(&mask).map(|(v, m)| v * m).collect(), Aux::Mask(mask))
                    }
                    None => (x.clone(), Aux::None),
                },
            };
            if keep_cache {
                inputs.push(std::mem::replace(&mut x, next));
                aux.push(a);
            } else {
                x = next;
            }
        }
        let scores = ScoreVector::softmax(&x);
        Ok(Forward {
            scores,
            logits: x,
            cache: keep_cache.then_some(Cache { inputs, aux }),
        })
    }

    /// Eval-mode class probabilities.
    pub fn predict(&self, input: &InputVolume) -> Result<ScoreVector> {
        Ok(self.forward(input, Mode::Eval)?.scores)
    }

    /// Gradients of `-ln p[target]` with respect to every parameter.
    pub fn backward(&self, forward: &Forward, target: usize) -> Result<(f64, Gradients)> {
        let cache = forward.cache.as_ref().ok_or_else(|| {
            Error::InvalidParameter("backward needs the cache of a train-mode forward pass".into())
        })?;
        if target >= self.classes() {
            return Err(Error::InvalidParameter(format!(
                "target class {target} out of range for {} classes",
                self.classes()
            )));
        }
        let p = forward.scores.scores();
        let loss = -p[target].max(f64::MIN_POSITIVE).ln();
        let mut grad: Vec<f64> = p.to_vec();
        grad[target] -= 1.0;

        let mut grads = Gradients::zeros_like(self);
        let mut slot = grads.tensors.len();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &cache.inputs[i];
            grad = match layer {
                Layer::Conv(conv) => {
                    slot -= 2;
                    let (w, b) = grads.tensors[slot..].split_at_mut(1);
                    conv.backward(x, &grad, &mut w[0], &mut b[0])
                }
                Layer::Dense(dense) => {
                    slot -= 2;
                    let (w, b) = grads.tensors[slot..].split_at_mut(1);
                    dense.backward(x, &grad, &mut w[0], &mut b[0])
                }
                Layer::Relu => grad
                    .iter()
                    .zip(x)
                    .map(|(g, &v)| if v > 0.0 { *g } else { 0.0 })
                    .collect(),
                Layer::MaxPool(pool) => match &cache.aux[i] {
                    Aux::Argmax(idx) => pool.backward(idx, &grad),
                    _ => unreachable!("pool cache"),
                },
                Layer::Dropout(_) => match &cache.aux[i] {
                    Aux::Mask(mask) => grad.iter().zip(mask).map(|(g, m)| g * m).collect(),
                    _ => unreachable!("dropout cache"),
                },
            };
        }
        Ok((loss, grads))
    }
}
