//! Small dense feed-forward engine: ReLU/linear layers, inverted dropout,
//! MSE loss, analytic backprop and Adam.
//!
//! Weights are stored `fan_out × fan_in`; activations flow as `n × width`
//! matrices with one sample per row. Dropout attaches to a layer's
//! post-activation output.

mod adam;
mod gradcheck;

pub use adam::{adam_step, AdamState, TrainConfig};
pub use gradcheck::{gradient_check, max_relative_error, numerical_gradient};

use crate::error::{AimeError, Result};
use crate::matrix::{matmul, matmul_transpose_a, matmul_transpose_b, Matrix};
use crate::rng::{streams, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `fan_out × fan_in`
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn fan_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.rows()
    }

    /// He-uniform for ReLU layers, Glorot-uniform for linear ones; zero bias.
    pub fn init(fan_in: usize, fan_out: usize, activation: Activation, rng: &mut RngStream) -> Self {
        let limit = match activation {
            Activation::Relu => (6.0 / fan_in as f64).sqrt(),
            Activation::Linear => (6.0 / (fan_in + fan_out) as f64).sqrt(),
        };
        let weights = Matrix::from_fn(fan_out, fan_in, |_, _| rng.uniform_range(-limit, limit));
        Self {
            weights,
            bias: vec![0.0; fan_out],
            activation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
    dropout: Vec<f64>,
    bottleneck_index: usize,
}

/// Per-layer dropout scale factors (`0` or `1/(1-rate)`), `None` where the
/// layer has no dropout.
pub type DropoutMasks = Vec<Option<Matrix>>;

/// Everything `backward` needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Matrix>,
    pre_activations: Vec<Matrix>,
    masks: DropoutMasks,
}

impl ForwardCache {
    pub fn masks(&self) -> &DropoutMasks {
        &self.masks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    /// Flattened in parameter order: each layer's weights (row-major) then bias.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in &self.layers {
            out.extend_from_slice(g.weights.as_slice());
            out.extend_from_slice(&g.bias);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.flatten().iter().all(|g| *g == 0.0)
    }
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>, dropout: Vec<f64>, bottleneck_index: usize) -> Result<Self> {
        if layers.is_empty() {
            return Err(AimeError::Domain("network needs at least one layer".into()));
        }
        if dropout.len() != layers.len() {
            return Err(AimeError::Domain(format!(
                "{} dropout rates for {} layers",
                dropout.len(),
                layers.len()
            )));
        }
        if let Some(r) = dropout.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(AimeError::Domain(format!("dropout rate {r} outside [0, 1)")));
        }
        if bottleneck_index >= layers.len() {
            return Err(AimeError::Index {
                what: "bottleneck layer",
                index: bottleneck_index,
                len: layers.len(),
            });
        }
        for w in layers.windows(2) {
            if w[0].fan_out() != w[1].fan_in() {
                return Err(AimeError::shape(
                    "layer chain",
                    w[0].weights.shape(),
                    w[1].weights.shape(),
                ));
            }
        }
        for l in &layers {
            if l.bias.len() != l.fan_out() {
                return Err(AimeError::shape("bias", l.weights.shape(), (l.bias.len(), 1)));
            }
        }
        if layers.last().map(|l| l.activation) != Some(Activation::Linear) {
            return Err(AimeError::Domain("output layer must be linear".into()));
        }
        Ok(Self {
            layers,
            dropout,
            bottleneck_index,
        })
    }

    /// Builds a freshly initialised network with widths `sizes[0] → … → sizes[L]`.
    /// Each layer draws its weights from its own stream
    /// `(seed, streams::INIT + layer_index)`.
    pub fn initialized(
        sizes: &[usize],
        activations: &[Activation],
        dropout: Vec<f64>,
        bottleneck_index: usize,
        seed: u64,
    ) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(AimeError::Domain(format!(
                "{} sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(AimeError::Domain("layer widths must be at least 1".into()));
        }
        let layers = sizes
            .windows(2)
            .zip(activations)
            .enumerate()
            .map(|(i, (w, &act))| {
                let mut rng = RngStream::new(seed, streams::INIT + i as u64);
                DenseLayer::init(w[0], w[1], act, &mut rng)
            })
            .collect();
        Self::new(layers, dropout, bottleneck_index)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn dropout(&self) -> &[f64] {
        &self.dropout
    }

    pub fn bottleneck_index(&self) -> usize {
        self.bottleneck_index
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.rows() * l.weights.cols() + l.bias.len())
            .sum()
    }

    /// Parameter by flat index (same order as [`Gradients::flatten`]).
    pub fn parameter(&self, mut idx: usize) -> f64 {
        for l in &self.layers {
            let nw = l.weights.as_slice().len();
            if idx < nw {
                return l.weights.as_slice()[idx];
            }
            idx -= nw;
            if idx < l.bias.len() {
                return l.bias[idx];
            }
            idx -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_parameter(&mut self, mut idx: usize, value: f64) {
        for l in &mut self.layers {
            let nw = l.weights.as_slice().len();
            if idx < nw {
                l.weights.as_mut_slice()[idx] = value;
                return;
            }
            idx -= nw;
            if idx < l.bias.len() {
                l.bias[idx] = value;
                return;
            }
            idx -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    /// Draws inverted-dropout masks for a batch of `n` rows.
    pub fn sample_masks(&self, n: usize, rng: &mut RngStream) -> DropoutMasks {
        self.layers
            .iter()
            .zip(&self.dropout)
            .map(|(l, &rate)| {
                (rate > 0.0).then(|| {
                    let keep = 1.0 / (1.0 - rate);
                    Matrix::from_fn(n, l.fan_out(), |_, _| {
                        if rng.uniform() < rate {
                            0.0
                        } else {
                            keep
                        }
                    })
                })
            })
            .collect()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_width() {
            return Err(AimeError::shape(
                "forward",
                x.shape(),
                (x.rows(), self.input_width()),
            ));
        }
        Ok(())
    }

    /// Full forward pass. Eval mode ignores `rng` and applies no dropout.
    pub fn forward(&self, x: &Matrix, mode: Mode, rng: &mut RngStream) -> Result<(Matrix, ForwardCache)> {
        self.check_input(x)?;
        let masks = match mode {
            Mode::Train => self.sample_masks(x.rows(), rng),
            Mode::Eval => vec![None; self.layers.len()],
        };
        self.forward_with_masks(x, masks)
    }

    /// Forward pass with caller-supplied dropout masks.
    pub fn forward_with_masks(&self, x: &Matrix, masks: DropoutMasks) -> Result<(Matrix, ForwardCache)> {
        self.check_input(x)?;
        if masks.len() != self.layers.len() {
            return Err(AimeError::Cache(format!(
                "{} masks for {} layers",
                masks.len(),
                self.layers.len()
            )));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        for (layer, mask) in self.layers.iter().zip(&masks) {
            if let Some(m) = mask {
                if m.shape() != (x.rows(), layer.fan_out()) {
                    return Err(AimeError::Cache(format!(
                        "mask {:?} does not fit layer output {:?}",
                        m.shape(),
                        (x.rows(), layer.fan_out())
                    )));
                }
            }
            let z = affine(layer, &a)?;
            let mut out = z.clone();
            for (o, m) in out.as_mut_slice().iter_mut().enumerate() {
                *m = layer.activation.apply(*m);
                if let Some(mask) = mask {
                    *m *= mask.as_slice()[o];
                }
            }
            inputs.push(a);
            pre_activations.push(z);
            a = out;
        }
        Ok((
            a,
            ForwardCache {
                inputs,
                pre_activations,
                masks,
            },
        ))
    }

    /// Eval-mode output of layer `last` (inclusive), without caching.
    pub fn forward_to(&self, x: &Matrix, last: usize) -> Result<Matrix> {
        self.check_input(x)?;
        if last >= self.layers.len() {
            return Err(AimeError::Index {
                what: "layer",
                index: last,
                len: self.layers.len(),
            });
        }
        let mut a = x.clone();
        for layer in &self.layers[..=last] {
            let mut z = affine(layer, &a)?;
            for v in z.as_mut_slice() {
                *v = layer.activation.apply(*v);
            }
            a = z;
        }
        Ok(a)
    }

    /// Eval-mode prediction.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        self.forward_to(x, self.layers.len() - 1)
    }

    /// Gradients of the loss with respect to every weight and bias, given
    /// `loss_grad = ∂loss/∂output` and the cache of the matching forward pass.
    pub fn backward(&self, cache: &ForwardCache, loss_grad: &Matrix) -> Result<Gradients> {
        let nl = self.layers.len();
        if cache.inputs.len() != nl || cache.pre_activations.len() != nl || cache.masks.len() != nl {
            return Err(AimeError::Cache(format!(
                "cache has {} layers, network has {nl}",
                cache.inputs.len()
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let n = cache.inputs[i].rows();
            if cache.inputs[i].cols() != layer.fan_in()
                || cache.pre_activations[i].shape() != (n, layer.fan_out())
            {
                return Err(AimeError::Cache(format!(
                    "layer {i} shapes {:?}/{:?} do not match weights {:?}",
                    cache.inputs[i].shape(),
                    cache.pre_activations[i].shape(),
                    layer.weights.shape()
                )));
            }
        }
        let n = cache.inputs[0].rows();
        if loss_grad.shape() != (n, self.output_width()) {
            return Err(AimeError::shape(
                "backward",
                loss_grad.shape(),
                (n, self.output_width()),
            ));
        }

        let mut grads = Vec::with_capacity(nl);
        let mut g = loss_grad.clone();
        for i in (0..nl).rev() {
            let layer = &self.layers[i];
            let z = &cache.pre_activations[i];
            let mask = cache.masks[i].as_ref();
            for (k, v) in g.as_mut_slice().iter_mut().enumerate() {
                if let Some(m) = mask {
                    *v *= m.as_slice()[k];
                }
                if layer.activation == Activation::Relu && z.as_slice()[k] <= 0.0 {
                    *v = 0.0;
                }
            }
            let dw = matmul_transpose_a(&g, &cache.inputs[i])?;
            let mut db = vec![0.0; layer.fan_out()];
            for r in 0..g.rows() {
                for (acc, v) in db.iter_mut().zip(g.row(r)) {
                    *acc += v;
                }
            }
            if i > 0 {
                g = matmul(&g, &layer.weights)?;
            }
            grads.push(LayerGradient {
                weights: dw,
                bias: db,
            });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    /// All-zero gradient shaped like this network's parameters.
    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Matrix::zeros(l.fan_out(), l.fan_in()),
                    bias: vec![0.0; l.fan_out()],
                })
                .collect(),
        }
    }
}

fn affine(layer: &DenseLayer, a: &Matrix) -> Result<Matrix> {
    let mut z = matmul_transpose_b(a, &layer.weights)?;
    for r in 0..z.rows() {
        for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
            *v += b;
        }
    }
    Ok(z)
}

/// Mean squared error over all entries and its gradient with respect to `pred`.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    if pred.shape() != target.shape() {
        return Err(AimeError::shape("mse_loss", pred.shape(), target.shape()));
    }
    let count = (pred.rows() * pred.cols()) as f64;
    let diff = pred.sub(target)?;
    let loss = diff.as_slice().iter().map(|d| d * d).sum::<f64>() / count;
    Ok((loss, diff.scale(2.0 / count)))
}
