//! Binary model file.
//!
//! Integers are little-endian (`u64` unless marked otherwise), reals are
//! little-endian IEEE-754 `f64`, in this order:
//!
//! ```text
//! magic            8 bytes  "AIMEMODL"
//! version          u32      FORMAT_VERSION
//! p, q, d          u64 ×3
//! encoder_sizes    u64 ×3
//! encoder_dropout  f64 ×3
//! decoder_sizes    u64 ×3
//! decoder_dropout  f64 ×3
//! seed             u64
//! layer_count      u64
//! bottleneck_index u64
//! per layer:
//!   fan_in, fan_out  u64 ×2
//!   activation       u8     0 = relu, 1 = linear
//!   dropout          f64
//!   weights          f64 × fan_out·fan_in   (row-major, fan_out rows)
//!   bias             f64 × fan_out
//! input_means      f64 × p
//! input_sds        f64 × p
//! output_means     f64 × q
//! output_sds       f64 × q
//! epochs           u64
//! loss_history     f64 × epochs
//! ```
//!
//! Trailing bytes are an error.

use std::path::Path;

use crate::data_io::write_atomic;
use crate::error::{AimeError, Result};
use crate::matrix::{ColumnStats, Matrix};
use crate::neural_net::{Activation, DenseLayer, Network};

use super::{AimeArchitecture, TrainedModel};

pub const MAGIC: &[u8; 8] = b"AIMEMODL";
pub const FORMAT_VERSION: u32 = 1;

// Sanity bound on any length field read from disk.
const MAX_LEN: u64 = 1 << 32;

pub fn model_to_bytes(m: &TrainedModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let a = &m.architecture;
    w.u64s(&[a.p, a.q, a.d]);
    w.u64s(&a.encoder_sizes);
    w.f64s(&a.encoder_dropout);
    w.u64s(&a.decoder_sizes);
    w.f64s(&a.decoder_dropout);
    w.0.extend_from_slice(&m.seed.to_le_bytes());
    let net = &m.network;
    w.u64(net.layers().len());
    w.u64(net.bottleneck_index());
    for (layer, rate) in net.layers().iter().zip(net.dropout()) {
        w.u64(layer.fan_in());
        w.u64(layer.fan_out());
        w.0.push(match layer.activation {
            Activation::Relu => 0,
            Activation::Linear => 1,
        });
        w.f64s(&[*rate]);
        w.f64s(layer.weights.as_slice());
        w.f64s(&layer.bias);
    }
    w.f64s(&m.input_stats.means);
    w.f64s(&m.input_stats.sds);
    w.f64s(&m.output_stats.means);
    w.f64s(&m.output_stats.sds);
    w.u64(m.loss_history.len());
    w.f64s(&m.loss_history);
    w.0
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<TrainedModel> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(AimeError::Format("not an AIME model file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(AimeError::Format(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let p = r.len()?;
    let q = r.len()?;
    let d = r.len()?;
    let encoder_sizes = [r.len()?, r.len()?, r.len()?];
    let encoder_dropout = [r.f64()?, r.f64()?, r.f64()?];
    let decoder_sizes = [r.len()?, r.len()?, r.len()?];
    let decoder_dropout = [r.f64()?, r.f64()?, r.f64()?];
    let architecture = AimeArchitecture {
        p,
        q,
        d,
        encoder_sizes,
        encoder_dropout,
        decoder_sizes,
        decoder_dropout,
    };
    let seed = r.u64()?;
    let n_layers = r.len()?;
    let bottleneck = r.len()?;
    let mut layers = Vec::with_capacity(n_layers.min(64));
    let mut dropout = Vec::with_capacity(n_layers.min(64));
    for _ in 0..n_layers {
        let fan_in = r.len()?;
        let fan_out = r.len()?;
        let activation = match r.take(1)?[0] {
            0 => Activation::Relu,
            1 => Activation::Linear,
            other => {
                return Err(AimeError::Format(format!("unknown activation tag {other}")))
            }
        };
        dropout.push(r.f64()?);
        let weights = Matrix::from_vec(fan_out, fan_in, r.f64_vec(fan_out * fan_in)?)?;
        let bias = r.f64_vec(fan_out)?;
        layers.push(DenseLayer {
            weights,
            bias,
            activation,
        });
    }
    let network = Network::new(layers, dropout, bottleneck)?;
    let input_stats = ColumnStats {
        means: r.f64_vec(p)?,
        sds: r.f64_vec(p)?,
    };
    let output_stats = ColumnStats {
        means: r.f64_vec(q)?,
        sds: r.f64_vec(q)?,
    };
    let epochs = r.len()?;
    let loss_history = r.f64_vec(epochs)?;
    if r.pos != bytes.len() {
        return Err(AimeError::Format(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    TrainedModel::new(
        architecture,
        network,
        input_stats,
        output_stats,
        loss_history,
        seed,
    )
    .map_err(|e| AimeError::Format(e.to_string()))
}

pub fn save_model(m: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &model_to_bytes(m))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| AimeError::io(path, e))?;
    model_from_bytes(&bytes)
}

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn u64s(&mut self, vs: &[usize]) {
        vs.iter().for_each(|v| self.u64(*v));
    }
    fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(AimeError::Format(format!(
                "truncated at byte {} (wanted {n} more)",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        if v > MAX_LEN {
            return Err(AimeError::Format(format!("implausible length field {v}")));
        }
        Ok(v as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| AimeError::Format("overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
