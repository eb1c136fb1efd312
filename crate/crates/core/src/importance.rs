//! Permutation importance of input variables, measured as the shift of the
//! embedding when one variable is shuffled across samples.

use rayon::prelude::*;

use crate::aime::Embedder;
use crate::error::{AimeError, Result};
use crate::matrix::{permute_column, Matrix};
use crate::rng::RngStream;

pub const DEFAULT_REPEATS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    /// Mean squared Frobenius shift of the embedding, one per input variable.
    pub scores: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    /// Variable indices by descending score, ties by ascending index.
    pub ranking: Vec<usize>,
}

impl ImportanceReport {
    pub fn from_scores(scores: Vec<f64>, repeats: usize, seed: u64) -> Self {
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self {
            scores,
            repeats,
            seed,
            ranking,
        }
    }

    /// 1-based rank of every variable.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.scores.len()];
        for (pos, &j) in self.ranking.iter().enumerate() {
            ranks[j] = pos + 1;
        }
        ranks
    }
}

/// Stream id for variable `j`, repeat `r`.
pub fn stream_id(variable: usize, repeat: usize) -> u64 {
    ((variable as u64) << 32) | repeat as u64
}

/// Shift of the embedding caused by permuting each column of `x`, averaged
/// over `repeats` independent shuffles. Shuffle `(j, r)` uses stream
/// `(seed, j·2³² + r)`, so scores do not depend on evaluation order.
pub fn permutation_importance<E: Embedder + ?Sized>(
    model: &E,
    x: &Matrix,
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if x.cols() != model.input_width() {
        return Err(AimeError::shape(
            "permutation_importance",
            x.shape(),
            (x.rows(), model.input_width()),
        ));
    }
    if repeats == 0 {
        return Err(AimeError::Domain("repeats must be >= 1".into()));
    }
    let base = model.embed(x)?;
    let scores = (0..x.cols())
        .into_par_iter()
        .map(|j| variable_score(model, x, &base, j, repeats, seed))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ImportanceReport::from_scores(scores, repeats, seed))
}

/// Per-repeat shifts for one variable.
pub fn variable_shifts<E: Embedder + ?Sized>(
    model: &E,
    x: &Matrix,
    base: &Matrix,
    variable: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..repeats)
        .map(|r| {
            let mut rng = RngStream::new(seed, stream_id(variable, r));
            let permuted = permute_column(x, variable, &mut rng)?;
            model.embed(&permuted)?.squared_distance(base)
        })
        .collect()
}

fn variable_score<E: Embedder + ?Sized>(
    model: &E,
    x: &Matrix,
    base: &Matrix,
    j: usize,
    repeats: usize,
    seed: u64,
) -> Result<f64> {
    let shifts = variable_shifts(model, x, base, j, repeats, seed)?;
    Ok(shifts.iter().sum::<f64>() / repeats as f64)
}

/// The first `⌈fraction·p⌉` variables of the ranking.
pub fn top_fraction(report: &ImportanceReport, fraction: f64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(AimeError::Domain(format!(
            "fraction must be in (0, 1], got {fraction}"
        )));
    }
    let p = report.ranking.len();
    let k = ((fraction * p as f64).ceil() as usize).min(p);
    Ok(report.ranking[..k].to_vec())
}
