//! Cholesky factorisation, one-sided Jacobi SVD, and triangular solves.

use crate::error::{AimeError, Result};
use crate::matrix::{dot, Matrix};

pub const SVD_TOLERANCE: f64 = 1e-10;
pub const SVD_MAX_SWEEPS: usize = 100;
const SYMMETRY_TOLERANCE: f64 = 1e-10;
const PIVOT_RELATIVE_FLOOR: f64 = 4.0 * f64::EPSILON;

/// Lower-triangular `L` with `L·Lᵀ = s`.
pub fn cholesky(s: &Matrix) -> Result<Matrix> {
    let n = s.rows();
    if s.cols() != n {
        return Err(AimeError::shape("cholesky", s.shape(), (n, n)));
    }
    let scale = s.as_slice().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..i {
            if (s[(i, j)] - s[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(AimeError::Domain(format!(
                    "cholesky input not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let d = s[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
        // pivots lost in rounding noise count as non-positive
        if d <= PIVOT_RELATIVE_FLOOR * n as f64 * s[(j, j)].abs() || !d.is_finite() {
            return Err(AimeError::Definiteness {
                pivot: j,
                value: d,
                hint: "",
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let v = (s[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j])) / djj;
            l[(i, j)] = v;
        }
    }
    Ok(l)
}

/// Solves `L·X = B` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = l.rows();
    if l.cols() != n || b.rows() != n {
        return Err(AimeError::shape("solve_lower", l.shape(), b.shape()));
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut v = x[(i, c)];
            for k in 0..i {
                v -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = v / l[(i, i)];
        }
    }
    Ok(x)
}

/// Solves `Lᵀ·X = B` for lower-triangular `L`.
pub fn solve_lower_transpose(l: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = l.rows();
    if l.cols() != n || b.rows() != n {
        return Err(AimeError::shape("solve_lower_transpose", l.shape(), b.shape()));
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in (0..n).rev() {
            let mut v = x[(i, c)];
            for k in i + 1..n {
                v -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = v / l[(i, i)];
        }
    }
    Ok(x)
}

/// Thin SVD `m = U·diag(s)·Vᵀ`, `U` is `r×k`, `V` is `c×k`, `k = min(r, c)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let k = self.singular_values.len();
        Matrix::from_fn(self.u.rows(), self.v.rows(), |i, j| {
            (0..k)
                .map(|t| self.u[(i, t)] * self.singular_values[t] * self.v[(j, t)])
                .sum()
        })
    }
}

/// One-sided (Hestenes) Jacobi SVD. Singular values come back nonincreasing.
pub fn svd_thin(m: &Matrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(AimeError::Data("svd input contains non-finite values".into()));
    }
    if m.rows() < m.cols() {
        let t = svd_thin(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let (r, c) = m.shape();
    // work on a max-abs-scaled copy so squared norms neither underflow nor overflow
    let scale = m.as_slice().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let unscale = if scale > 0.0 { scale } else { 1.0 };
    // column-major working copies
    let mut a: Vec<Vec<f64>> = (0..c).map(|j| m.column(j).into_iter().map(|x| x / unscale).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..c)
        .map(|j| (0..c).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = c < 2;
    let mut residual = 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < SVD_MAX_SWEEPS {
        sweeps += 1;
        residual = 0.0_f64;
        for i in 0..c - 1 {
            for j in i + 1..c {
                let alpha = dot(&a[i], &a[i]);
                let beta = dot(&a[j], &a[j]);
                let gamma = dot(&a[i], &a[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let off = gamma.abs() / (alpha * beta).sqrt();
                residual = residual.max(off);
                if off <= SVD_TOLERANCE {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut a, i, j, cs, sn);
                rotate(&mut v, i, j, cs, sn);
            }
        }
        converged = residual <= SVD_TOLERANCE;
    }
    if !converged {
        return Err(AimeError::Convergence { sweeps, residual });
    }

    let mut order: Vec<(f64, usize)> = a
        .iter()
        .enumerate()
        .map(|(j, col)| (dot(col, col).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let smax = order.first().map_or(0.0, |o| o.0);
    let negligible = smax * f64::EPSILON * (r.max(c) as f64) * 10.0;

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(c);
    let mut s = Vec::with_capacity(c);
    let mut v_cols = Vec::with_capacity(c);
    let mut deficient = Vec::new();
    for (k, &(sigma, j)) in order.iter().enumerate() {
        s.push(sigma * unscale);
        v_cols.push(v[j].clone());
        if sigma > negligible && sigma > 0.0 {
            u_cols.push(a[j].iter().map(|x| x / sigma).collect());
        } else {
            u_cols.push(vec![0.0; r]);
            deficient.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &deficient);

    let u = Matrix::from_fn(r, c, |i, k| u_cols[k][i]);
    let vm = Matrix::from_fn(c, c, |i, k| v_cols[k][i]);
    Ok(Svd {
        u,
        singular_values: s,
        v: vm,
    })
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, cs: f64, sn: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    let (ci, cj) = (&mut lo[i], &mut hi[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = cs * xi - sn * yj;
        *y = sn * xi + cs * yj;
    }
}

/// Fills the listed columns with unit vectors orthogonal to all others
/// (Gram–Schmidt over the standard basis).
fn complete_orthonormal(cols: &mut [Vec<f64>], missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let r = cols[0].len();
    let mut basis = 0;
    for &k in missing {
        while basis < r {
            let mut e = vec![0.0; r];
            e[basis] = 1.0;
            basis += 1;
            // two passes of Gram–Schmidt for stability
            for _ in 0..2 {
                for (t, other) in cols.iter().enumerate() {
                    if t == k || other.iter().all(|x| *x == 0.0) {
                        continue;
                    }
                    let proj = dot(&e, other);
                    for (ei, oi) in e.iter_mut().zip(other) {
                        *ei -= proj * oi;
                    }
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > 1e-6 {
                cols[k] = e.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}
