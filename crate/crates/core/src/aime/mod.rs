//! The cross-modal autoencoder: an encoder reads the input data type `X`
//! (`n × p`), a decoder reconstructs the paired output data type `Y`
//! (`n × q`), and the narrow layer in between is the embedding.
//!
//! Layer chain for `(p, q, d)`:
//!
//! ```text
//! p → ⌈p/5⌉ → ⌈p/25⌉ → ⌈p/625⌉ → d → ⌈q/625⌉ → ⌈q/25⌉ → ⌈q/5⌉ → q
//!     drop .2  drop .1                        drop .1   drop .2
//! ```
//!
//! Every hidden width is at least `d`.
//!
//! Hidden layers use ReLU; the bottleneck and the output layer are linear.

mod format;

pub use format::{load_model, model_from_bytes, model_to_bytes, save_model, FORMAT_VERSION, MAGIC};

use crate::error::{AimeError, Result};
use crate::matrix::{column_stats, standardize_columns, ColumnStats, Matrix};
use crate::neural_net::{adam_step, mse_loss, Activation, AdamState, Mode, Network, TrainConfig};
use crate::rng::{streams, RngStream};

/// Index of the bottleneck among the eight dense layers.
pub const BOTTLENECK_LAYER: usize = 3;

const ENCODER_DROPOUT: [f64; 3] = [0.20, 0.10, 0.0];
const DECODER_DROPOUT: [f64; 3] = [0.0, 0.10, 0.20];

#[derive(Debug, Clone, PartialEq)]
pub struct AimeArchitecture {
    pub p: usize,
    pub q: usize,
    pub d: usize,
    pub encoder_sizes: [usize; 3],
    pub encoder_dropout: [f64; 3],
    pub decoder_sizes: [usize; 3],
    pub decoder_dropout: [f64; 3],
}

/// Derives the layer widths from the input width `p`, output width `q` and
/// embedding width `d`. Widths use ceiling division and never drop below
/// `d`, so the embedding stays the narrowest layer when `p` or `q` is small
/// (a one-unit ReLU layer would otherwise carry the whole signal).
pub fn build_architecture(p: usize, q: usize, d: usize) -> Result<AimeArchitecture> {
    if p == 0 || q == 0 || d == 0 {
        return Err(AimeError::Domain(format!(
            "p, q and d must all be >= 1 (got p={p}, q={q}, d={d})"
        )));
    }
    let width = |features: usize, divisor: usize| features.div_ceil(divisor).max(d);
    Ok(AimeArchitecture {
        p,
        q,
        d,
        encoder_sizes: [width(p, 5), width(p, 25), width(p, 625)],
        encoder_dropout: ENCODER_DROPOUT,
        decoder_sizes: [width(q, 625), width(q, 25), width(q, 5)],
        decoder_dropout: DECODER_DROPOUT,
    })
}

impl AimeArchitecture {
    /// All nine widths from input to output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.p];
        w.extend(self.encoder_sizes);
        w.push(self.d);
        w.extend(self.decoder_sizes);
        w.push(self.q);
        w
    }

    /// Dropout rate on each dense layer's output.
    pub fn layer_dropout(&self) -> Vec<f64> {
        let mut r = self.encoder_dropout.to_vec();
        r.push(0.0);
        r.extend(self.decoder_dropout);
        r.push(0.0);
        r
    }

    pub fn activations(&self) -> Vec<Activation> {
        (0..8)
            .map(|i| {
                if i == BOTTLENECK_LAYER || i == 7 {
                    Activation::Linear
                } else {
                    Activation::Relu
                }
            })
            .collect()
    }

    pub fn init_network(&self, seed: u64) -> Result<Network> {
        Network::initialized(
            &self.widths(),
            &self.activations(),
            self.layer_dropout(),
            BOTTLENECK_LAYER,
            seed,
        )
    }

    fn check_network(&self, net: &Network) -> Result<()> {
        let widths = self.widths();
        let layers = net.layers();
        let ok = layers.len() == widths.len() - 1
            && net.bottleneck_index() == BOTTLENECK_LAYER
            && layers
                .iter()
                .zip(widths.windows(2))
                .all(|(l, w)| l.fan_in() == w[0] && l.fan_out() == w[1]);
        if !ok {
            return Err(AimeError::Validation(format!(
                "network does not match architecture widths {widths:?}"
            )));
        }
        Ok(())
    }
}

/// Anything that maps an `m × p` input to an `m × d` embedding.
pub trait Embedder: Sync {
    fn input_width(&self) -> usize;
    fn embed(&self, x: &Matrix) -> Result<Matrix>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    architecture: AimeArchitecture,
    network: Network,
    input_stats: ColumnStats,
    output_stats: ColumnStats,
    loss_history: Vec<f64>,
    seed: u64,
}

impl TrainedModel {
    pub fn new(
        architecture: AimeArchitecture,
        network: Network,
        input_stats: ColumnStats,
        output_stats: ColumnStats,
        loss_history: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        architecture.check_network(&network)?;
        let (p, q) = (architecture.p, architecture.q);
        if input_stats.means.len() != p || input_stats.sds.len() != p {
            return Err(AimeError::Validation(format!("input statistics must have length {p}")));
        }
        if output_stats.means.len() != q || output_stats.sds.len() != q {
            return Err(AimeError::Validation(format!("output statistics must have length {q}")));
        }
        Ok(Self {
            architecture,
            network,
            input_stats,
            output_stats,
            loss_history,
            seed,
        })
    }

    pub fn architecture(&self) -> &AimeArchitecture {
        &self.architecture
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn input_stats(&self) -> &ColumnStats {
        &self.input_stats
    }

    pub fn output_stats(&self) -> &ColumnStats {
        &self.output_stats
    }

    /// Full-data eval-mode MSE (standardized scale) after each epoch.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Embeds `x` (raw scale) with the training statistics, eval mode.
    pub fn embed(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.architecture.p {
            return Err(AimeError::shape(
                "embed",
                x.shape(),
                (x.rows(), self.architecture.p),
            ));
        }
        let z = standardize_columns(x, &self.input_stats)?;
        self.network.forward_to(&z, BOTTLENECK_LAYER)
    }

    /// Decoder output for `x`, on the standardized output scale.
    pub fn reconstruct_standardized(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.architecture.p {
            return Err(AimeError::shape(
                "reconstruct",
                x.shape(),
                (x.rows(), self.architecture.p),
            ));
        }
        let z = standardize_columns(x, &self.input_stats)?;
        self.network.predict(&z)
    }
}

impl Embedder for TrainedModel {
    fn input_width(&self) -> usize {
        self.architecture.p
    }

    fn embed(&self, x: &Matrix) -> Result<Matrix> {
        TrainedModel::embed(self, x)
    }
}

/// Trains the cross-modal autoencoder mapping `x` to `y` through a
/// `d`-wide embedding.
///
/// Both matrices are z-scored per column with statistics that are stored in
/// the model. Each epoch reshuffles the sample order from
/// `(seed, SHUFFLE)`, runs Adam over minibatches (the whole set when
/// `batch_size > n`) with dropout masks from `(seed, DROPOUT)`, then records
/// the eval-mode MSE over all samples.
pub fn fit(x: &Matrix, y: &Matrix, d: usize, cfg: &TrainConfig) -> Result<TrainedModel> {
    if x.rows() != y.rows() {
        return Err(AimeError::Alignment(format!(
            "X has {} rows but Y has {}",
            x.rows(),
            y.rows()
        )));
    }
    if x.rows() < 2 {
        return Err(AimeError::InsufficientData(format!(
            "training needs at least 2 samples, got {}",
            x.rows()
        )));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(AimeError::Data("training data contains NaN or infinite values".into()));
    }
    cfg.validate()?;
    let architecture = build_architecture(x.cols(), y.cols(), d)?;

    let input_stats = column_stats(x)?;
    let output_stats = column_stats(y)?;
    let xs = standardize_columns(x, &input_stats)?;
    let ys = standardize_columns(y, &output_stats)?;

    let mut network = architecture.init_network(cfg.seed)?;
    let mut adam = AdamState::new(&network);
    let mut shuffle_rng = RngStream::new(cfg.seed, streams::SHUFFLE);
    let mut dropout_rng = RngStream::new(cfg.seed, streams::DROPOUT);

    let n = x.rows();
    let batch = cfg.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        for idx in order.chunks(batch) {
            let xb = xs.select_rows(idx);
            let yb = ys.select_rows(idx);
            let (pred, cache) = network.forward(&xb, Mode::Train, &mut dropout_rng)?;
            let (_, grad) = mse_loss(&pred, &yb)?;
            let grads = network.backward(&cache, &grad)?;
            adam_step(&mut network, &grads, &mut adam, cfg)?;
        }
        let (loss, _) = mse_loss(&network.predict(&xs)?, &ys)?;
        if !loss.is_finite() {
            return Err(AimeError::Numerical(format!(
                "training loss became non-finite at epoch {}",
                epoch + 1
            )));
        }
        loss_history.push(loss);
    }

    TrainedModel::new(
        architecture,
        network,
        input_stats,
        output_stats,
        loss_history,
        cfg.seed,
    )
}
