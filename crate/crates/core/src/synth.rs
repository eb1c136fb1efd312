//! Paired synthetic data with a planted two-dimensional latent factor.
//!
//! `z ~ N(0, I₂)` per sample. Signal X features are `u·z₁ + v·z₂ + ε` with a
//! unit-norm `(u, v)`; the rest of X is pure noise `ε`. Y is either linear in
//! `z` or built from centred second-order terms
//! `a(z₁²−1) + b(z₂²−1) + c·z₁z₂`, which are uncorrelated with every linear
//! function of `z` (odd Gaussian moments vanish), so the population
//! cross-covariance between X and a quadratic Y is exactly zero.
//!
//! Samples are labelled by the quadrant of `z`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::data_io::LabeledMatrix;
use crate::error::{AimeError, Result};
use crate::matrix::{column_stats, standardize_columns, Matrix};
use crate::rng::{streams, RngStream};

pub const LATENT_DIM: usize = 2;
pub const FOLDS: usize = 5;
/// Base seed of the fold assignment used by [`evaluate_embedding`].
pub const FOLD_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Design {
    Linear,
    Quadratic,
}

impl FromStr for Design {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Design::Linear),
            "quadratic" => Ok(Design::Quadratic),
            _ => Err(format!("unknown design '{s}' (expected linear or quadratic)")),
        }
    }
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Design::Linear => "linear",
            Design::Quadratic => "quadratic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub n_signal: usize,
    pub noise_sd: f64,
    pub design: Design,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(AimeError::Domain(format!("n must be >= 10, got {}", self.n)));
        }
        if self.p == 0 || self.q == 0 {
            return Err(AimeError::Domain("p and q must be >= 1".into()));
        }
        if self.n_signal > self.p {
            return Err(AimeError::Domain(format!(
                "n_signal ({}) exceeds p ({})",
                self.n_signal, self.p
            )));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(AimeError::Domain(format!(
                "noise_sd must be > 0, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub x: LabeledMatrix,
    pub y: LabeledMatrix,
    /// `n × 2`
    pub latent: Matrix,
    /// Quadrant of the latent point: 0 = (+,+), 1 = (−,+), 2 = (−,−), 3 = (+,−).
    pub labels: Vec<usize>,
    /// Planted informative X features, ascending.
    pub signal_indices: Vec<usize>,
}

pub fn quadrant(z1: f64, z2: f64) -> usize {
    match (z1 >= 0.0, z2 >= 0.0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    }
}

fn unit_vector(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let SynthSpec { n, p, q, .. } = *spec;

    let latent = Matrix::random_normal(n, LATENT_DIM, &mut RngStream::new(spec.seed, streams::SYNTH_LATENT));

    let mut order: Vec<usize> = (0..p).collect();
    RngStream::new(spec.seed, streams::SYNTH_SIGNAL).shuffle(&mut order);
    let mut signal_indices = order[..spec.n_signal].to_vec();
    signal_indices.sort_unstable();

    let mut load_rng = RngStream::new(spec.seed, streams::SYNTH_LOADINGS);
    let mut x_loadings = vec![None; p];
    for &i in &signal_indices {
        x_loadings[i] = Some(unit_vector(2, &mut load_rng));
    }
    let y_dim = match spec.design {
        Design::Linear => 2,
        Design::Quadratic => 3,
    };
    let y_loadings: Vec<Vec<f64>> = (0..q).map(|_| unit_vector(y_dim, &mut load_rng)).collect();

    let mut noise = RngStream::new(spec.seed, streams::SYNTH_NOISE);
    let x = Matrix::from_fn(n, p, |i, j| {
        let eps = spec.noise_sd * noise.normal();
        match &x_loadings[j] {
            Some(uv) => uv[0] * latent[(i, 0)] + uv[1] * latent[(i, 1)] + eps,
            None => eps,
        }
    });
    let y = Matrix::from_fn(n, q, |i, j| {
        let (z1, z2) = (latent[(i, 0)], latent[(i, 1)]);
        let c = &y_loadings[j];
        let signal = match spec.design {
            Design::Linear => c[0] * z1 + c[1] * z2,
            Design::Quadratic => c[0] * (z1 * z1 - 1.0) + c[1] * (z2 * z2 - 1.0) + c[2] * z1 * z2,
        };
        signal + spec.noise_sd * noise.normal()
    });
    let labels = (0..n).map(|i| quadrant(latent[(i, 0)], latent[(i, 1)])).collect();

    Ok(SynthData {
        x: LabeledMatrix::with_generated_ids(x, "s", "x"),
        y: LabeledMatrix::with_generated_ids(y, "s", "y"),
        latent,
        labels,
        signal_indices,
    })
}

/// Sidecar text: a `# signal_indices=` comment line, then `sample_id<TAB>label`
/// rows under a header.
pub fn labels_to_string(sample_ids: &[String], labels: &[usize], signal_indices: &[usize]) -> String {
    let mut out = String::from("# signal_indices=");
    let idx: Vec<String> = signal_indices.iter().map(|i| i.to_string()).collect();
    out.push_str(&idx.join(","));
    out.push_str("\nsample_id\tlabel\n");
    for (id, l) in sample_ids.iter().zip(labels) {
        let _ = writeln!(out, "{id}\t{l}");
    }
    out
}

/// Labels file contents: sample IDs, integer class labels, signal indices
/// (empty when the file has no `# signal_indices=` line).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelFile {
    pub sample_ids: Vec<String>,
    pub labels: Vec<usize>,
    pub signal_indices: Vec<usize>,
}

pub fn parse_labels(text: &str) -> Result<LabelFile> {
    let mut out = LabelFile {
        sample_ids: vec![],
        labels: vec![],
        signal_indices: vec![],
    };
    let mut seen_header = false;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        let parse_err = |msg: String| AimeError::Parse {
            line: k + 1,
            column: None,
            msg,
        };
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(list) = rest.trim().strip_prefix("signal_indices=") {
                out.signal_indices = list
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse().map_err(|_| parse_err(format!("bad index '{s}'"))))
                    .collect::<Result<_>>()?;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            seen_header = true;
            continue;
        }
        let mut cells = line.split(['\t', ',']);
        let (Some(id), Some(label), None) = (cells.next(), cells.next(), cells.next()) else {
            return Err(parse_err("expected 'sample_id<TAB>label'".into()));
        };
        out.sample_ids.push(id.trim().to_string());
        out.labels.push(
            label
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("label '{label}' is not a nonnegative integer")))?,
        );
    }
    Ok(out)
}

/// 5-fold cross-validated accuracy of a nearest-centroid classifier on the
/// column-standardized embedding. Folds come from a Fisher–Yates shuffle of
/// the sample indices with stream `(FOLD_SEED, FOLDS)`; sample at shuffled
/// position `k` goes to fold `k mod 5`.
pub fn evaluate_embedding(embedding: &Matrix, labels: &[usize]) -> Result<f64> {
    evaluate_embedding_seeded(embedding, labels, FOLD_SEED)
}

pub fn evaluate_embedding_seeded(embedding: &Matrix, labels: &[usize], seed: u64) -> Result<f64> {
    let n = embedding.rows();
    if labels.len() != n {
        return Err(AimeError::shape("evaluate_embedding", embedding.shape(), (labels.len(), 1)));
    }
    if embedding.cols() == 0 {
        return Err(AimeError::Domain("embedding has no columns".into()));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let present = {
        let mut seen = vec![false; n_classes];
        labels.iter().for_each(|&l| seen[l] = true);
        seen.iter().filter(|s| **s).count()
    };
    if present < 2 {
        return Err(AimeError::Domain("need at least two classes".into()));
    }
    let z = standardize_columns(embedding, &column_stats(embedding)?)?;

    let mut perm: Vec<usize> = (0..n).collect();
    RngStream::new(seed, streams::FOLDS).shuffle(&mut perm);
    let mut fold = vec![0; n];
    for (k, &i) in perm.iter().enumerate() {
        fold[i] = k % FOLDS;
    }

    let d = z.cols();
    let mut correct = 0;
    for f in 0..FOLDS {
        let mut sums = vec![vec![0.0; d]; n_classes];
        let mut counts = vec![0usize; n_classes];
        for i in (0..n).filter(|&i| fold[i] != f) {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(z.row(i)) {
                *s += v;
            }
        }
        let centroids: Vec<(usize, Vec<f64>)> = sums
            .into_iter()
            .zip(&counts)
            .enumerate()
            .filter(|(_, (_, &c))| c > 0)
            .map(|(k, (s, &c))| (k, s.into_iter().map(|v| v / c as f64).collect()))
            .collect();
        for i in (0..n).filter(|&i| fold[i] == f) {
            let row = z.row(i);
            let mut best = (f64::INFINITY, usize::MAX);
            for (k, c) in &centroids {
                let dist: f64 = row.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist < best.0 {
                    best = (dist, *k);
                }
            }
            if best.1 == labels[i] {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / n as f64)
}
