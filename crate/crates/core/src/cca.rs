//! Ridge-regularized canonical correlation analysis.
//!
//! With centred `X`, `Y`:
//!
//! ```text
//! Sxx = XᵀX/(n-1) + λx·I     Syy = YᵀY/(n-1) + λy·I     Sxy = XᵀY/(n-1)
//! Sxx = Lx·Lxᵀ, Syy = Ly·Lyᵀ
//! Lx⁻¹ · Sxy · Ly⁻ᵀ = U·diag(ρ)·Vᵀ
//! x_directions = Lx⁻ᵀ·U,  y_directions = Ly⁻ᵀ·V
//! ```
//!
//! Each component is signed so the largest-magnitude coefficient of its X
//! direction is positive; the paired Y direction is flipped with it so the
//! variates stay positively correlated.

use crate::error::{AimeError, Result};
use crate::linalg::{cholesky, solve_lower, solve_lower_transpose, svd_thin};
use crate::matrix::{matmul, matmul_transpose_a, Matrix};

/// Scale of the default ridge relative to the mean feature variance.
pub const AUTO_RIDGE_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    /// `λ = 1e-3 · trace(S)/dim`, chosen separately for X and Y.
    Auto,
    /// The same `λ` added to both covariance blocks.
    Fixed(f64),
}

impl std::str::FromStr for Ridge {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Ridge::Auto);
        }
        let v: f64 = s.parse().map_err(|_| format!("expected 'auto' or a number, got '{s}'"))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(format!("ridge must be a finite number >= 0, got {v}"));
        }
        Ok(Ridge::Fixed(v))
    }
}

impl std::fmt::Display for Ridge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ridge::Auto => write!(f, "auto"),
            Ridge::Fixed(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcaResult {
    /// `p × k`
    pub x_directions: Matrix,
    /// `q × k`
    pub y_directions: Matrix,
    pub correlations: Vec<f64>,
    /// `n × k`
    pub x_variates: Matrix,
    /// `n × k`
    pub y_variates: Matrix,
    pub ridge_x: f64,
    pub ridge_y: f64,
    pub x_means: Vec<f64>,
    pub y_means: Vec<f64>,
}

fn center(m: &Matrix) -> (Matrix, Vec<f64>) {
    let n = m.rows() as f64;
    let means: Vec<f64> = (0..m.cols())
        .map(|j| m.column(j).iter().sum::<f64>() / n)
        .collect();
    let c = Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] - means[j]);
    (c, means)
}

fn covariance(a: &Matrix, b: &Matrix, n: usize) -> Result<Matrix> {
    Ok(matmul_transpose_a(a, b)?.scale(1.0 / (n as f64 - 1.0)))
}

fn trace(m: &Matrix) -> f64 {
    (0..m.rows()).map(|i| m[(i, i)]).sum()
}

fn regularize(s: &mut Matrix, ridge: Ridge) -> f64 {
    let lambda = match ridge {
        Ridge::Auto => AUTO_RIDGE_SCALE * trace(s) / s.rows() as f64,
        Ridge::Fixed(v) => v,
    };
    for i in 0..s.rows() {
        s[(i, i)] += lambda;
    }
    lambda
}

const RIDGE_HINT: &str = "; covariance is singular, use a positive ridge";

fn whiten_factor(s: &Matrix) -> Result<Matrix> {
    cholesky(s).map_err(|e| match e {
        AimeError::Definiteness { pivot, value, .. } => AimeError::Definiteness {
            pivot,
            value,
            hint: RIDGE_HINT,
        },
        other => other,
    })
}

/// Fits `k` canonical components between `x` (`n × p`) and `y` (`n × q`).
pub fn fit_cca(x: &Matrix, y: &Matrix, k: usize, ridge: Ridge) -> Result<CcaResult> {
    let n = x.rows();
    if y.rows() != n {
        return Err(AimeError::Alignment(format!(
            "X has {n} rows but Y has {}",
            y.rows()
        )));
    }
    if n < 3 {
        return Err(AimeError::InsufficientData(format!(
            "CCA needs at least 3 samples, got {n}"
        )));
    }
    let (p, q) = (x.cols(), y.cols());
    if k == 0 || k > p.min(q) {
        return Err(AimeError::Domain(format!(
            "k must be in 1..={} (min(p, q)), got {k}",
            p.min(q)
        )));
    }
    if let Ridge::Fixed(v) = ridge {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(AimeError::Domain(format!("ridge must be >= 0, got {v}")));
        }
        if v == 0.0 && (p >= n || q >= n) {
            return Err(AimeError::Domain(format!(
                "ridge must be > 0 when features outnumber samples (p={p}, q={q}, n={n})"
            )));
        }
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(AimeError::Data("CCA input contains NaN or infinite values".into()));
    }

    let (xc, x_means) = center(x);
    let (yc, y_means) = center(y);
    let mut sxx = covariance(&xc, &xc, n)?;
    let mut syy = covariance(&yc, &yc, n)?;
    let sxy = covariance(&xc, &yc, n)?;
    let ridge_x = regularize(&mut sxx, ridge);
    let ridge_y = regularize(&mut syy, ridge);

    let lx = whiten_factor(&sxx)?;
    let ly = whiten_factor(&syy)?;
    // Lx⁻¹ Sxy Ly⁻ᵀ = (Ly⁻¹ (Lx⁻¹ Sxy)ᵀ)ᵀ
    let a = solve_lower(&lx, &sxy)?;
    let m = solve_lower(&ly, &a.transpose())?.transpose();
    let svd = svd_thin(&m)?;

    let mut x_directions = solve_lower_transpose(&lx, &svd.u.leading_columns(k))?;
    let mut y_directions = solve_lower_transpose(&ly, &svd.v.leading_columns(k))?;
    for t in 0..k {
        let col = x_directions.column(t);
        let lead = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if lead < 0.0 {
            for i in 0..p {
                x_directions[(i, t)] = -x_directions[(i, t)];
            }
            for i in 0..q {
                y_directions[(i, t)] = -y_directions[(i, t)];
            }
        }
    }

    Ok(CcaResult {
        x_variates: matmul(&xc, &x_directions)?,
        y_variates: matmul(&yc, &y_directions)?,
        x_directions,
        y_directions,
        correlations: svd.singular_values[..k].to_vec(),
        ridge_x,
        ridge_y,
        x_means,
        y_means,
    })
}

fn project(x: &Matrix, means: &[f64], dirs: &Matrix) -> Result<Matrix> {
    if x.cols() != means.len() {
        return Err(AimeError::shape(
            "project_cca",
            x.shape(),
            (x.rows(), means.len()),
        ));
    }
    let c = Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - means[j]);
    matmul(&c, dirs)
}

/// Canonical variates of new X samples (centred with the training means).
pub fn project_cca(result: &CcaResult, x_new: &Matrix) -> Result<Matrix> {
    project(x_new, &result.x_means, &result.x_directions)
}

/// Canonical variates of new Y samples.
pub fn project_cca_y(result: &CcaResult, y_new: &Matrix) -> Result<Matrix> {
    project(y_new, &result.y_means, &result.y_directions)
}
