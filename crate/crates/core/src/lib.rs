//! Cross-modal autoencoder embedding for paired high-dimensional data.

pub mod aime;
pub mod cca;
pub mod cli;
pub mod config;
pub mod data_io;
pub mod error;
pub mod importance;
pub mod linalg;
pub mod matrix;
pub mod neural_net;
pub mod plot;
pub mod rng;
pub mod synth;

pub use error::{AimeError, Result};
pub use matrix::Matrix;
pub use rng::RngStream;
