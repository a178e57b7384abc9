//! Independent finite-difference eigensolver for the mixed-boundary
//! Laplacian on the rectangle.
//!
//! The 5-point discretization of -Δ with Dirichlet rows eliminated on
//! the inlet and walls and a mirrored ghost node enforcing dψ/dx = 0
//! on the outlet separates into a Kronecker sum
//!
//! ```text
//! A = Ax ⊗ Iy + Ix ⊗ Ay
//! ```
//!
//! so its full spectrum is {λx_p + λy_q} with outer-product
//! eigenvectors. The 1-D blocks are diagonalized numerically (symmetric
//! tridiagonal QR); no trigonometric closed forms enter anywhere, which
//! keeps this solver independent of the analytic basis it verifies.

use crate::error::{Error, Result};
use crate::geometry::Domain;
use nalgebra::{DMatrix, SymmetricEigen};

/// One discrete eigenpair on the unknown grid.
///
/// Unknown nodes are x_i = i L/n for i = 1..n (the outlet column is an
/// unknown) and y_j = j H/n for j = 1..n-1. Values are stored y-major:
/// `values[(j-1) * n + (i-1)]`.
#[derive(Debug, Clone)]
pub struct FdEigenPair {
    pub lambda: f64,
    pub values: Vec<f64>,
}

/// Coordinates of the unknown nodes used by [`fd_eigen_oracle`].
pub fn fd_unknown_nodes(domain: &Domain, n: usize) -> (Vec<f64>, Vec<f64>) {
    let hx = domain.length / n as f64;
    let hy = domain.height / n as f64;
    let xs = (1..=n).map(|i| i as f64 * hx).collect();
    let ys = (1..n).map(|j| j as f64 * hy).collect();
    (xs, ys)
}

/// Symmetrized 1-D second-difference operator along x: Dirichlet at 0,
/// mirrored Neumann at L. The mirror makes the last row (2u_n - 2u_{n-1})/h²;
/// conjugating by diag(1,..,1,1/√2) restores symmetry without moving the
/// spectrum. Returns the dense matrix and the per-entry scale that maps
/// eigenvectors back to grid values.
fn x_block(n: usize, h: f64) -> (DMatrix<f64>, Vec<f64>) {
    let s = 1.0 / (h * h);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 2.0 * s;
        if i + 1 < n {
            let off = if i + 1 == n - 1 {
                -std::f64::consts::SQRT_2 * s
            } else {
                -s
            };
            m[(i, i + 1)] = off;
            m[(i + 1, i)] = off;
        }
    }
    let mut unscale = vec![1.0; n];
    unscale[n - 1] = std::f64::consts::SQRT_2;
    (m, unscale)
}

/// 1-D second-difference operator along y with Dirichlet ends.
fn y_block(n_unknowns: usize, h: f64) -> DMatrix<f64> {
    let s = 1.0 / (h * h);
    let mut m = DMatrix::zeros(n_unknowns, n_unknowns);
    for j in 0..n_unknowns {
        m[(j, j)] = 2.0 * s;
        if j + 1 < n_unknowns {
            m[(j, j + 1)] = -s;
            m[(j + 1, j)] = -s;
        }
    }
    m
}

fn sorted_eigen(m: DMatrix<f64>, context: &'static str) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = m.nrows();
    let max_iter = 100 * dim.max(32);
    let eigen = SymmetricEigen::try_new(m, f64::EPSILON, max_iter).ok_or(Error::Numerical {
        context,
        detail: format!("symmetric QR did not converge within {max_iter} iterations"),
    })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let values = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eigen.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Ok((values, vectors))
}

/// Computes the `count` smallest eigenvalues (ascending) of the 5-point
/// mixed-boundary Laplacian on an n x n mesh, with grid eigenvectors.
pub fn fd_eigen_oracle(domain: &Domain, n: usize, count: usize) -> Result<Vec<FdEigenPair>> {
    if n < 16 {
        return Err(Error::InvalidParameter {
            name: "fd_eigen_oracle.n",
            reason: format!("mesh must have n >= 16 intervals, got {n}"),
        });
    }
    let total = n * (n - 1);
    if count == 0 || count > total {
        return Err(Error::InvalidParameter {
            name: "fd_eigen_oracle.count",
            reason: format!("count must be in 1..={total}, got {count}"),
        });
    }

    let hx = domain.length / n as f64;
    let hy = domain.height / n as f64;
    let (bx, unscale_x) = x_block(n, hx);
    let by = y_block(n - 1, hy);
    let (lx, vx) = sorted_eigen(bx, "fd eigen oracle, x block")?;
    let (ly, vy) = sorted_eigen(by, "fd eigen oracle, y block")?;

    // The count smallest Kronecker sums lie within the leading count x count
    // block of the two sorted 1-D spectra.
    let px = count.min(lx.len());
    let py = count.min(ly.len());
    let mut sums: Vec<(f64, usize, usize)> = Vec::with_capacity(px * py);
    for (p, &lam_x) in lx.iter().take(px).enumerate() {
        for (q, &lam_y) in ly.iter().take(py).enumerate() {
            sums.push((lam_x + lam_y, p, q));
        }
    }
    sums.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    sums.truncate(count);

    let pairs = sums
        .into_iter()
        .map(|(lambda, p, q)| {
            let mut values = vec![0.0; n * (n - 1)];
            for j in 0..n - 1 {
                for i in 0..n {
                    values[j * n + i] = vx[p][i] * unscale_x[i] * vy[q][j];
                }
            }
            // Deterministic sign: largest-magnitude entry positive.
            let pivot = values
                .iter()
                .cloned()
                .fold(0.0_f64, |a, v| if v.abs() > a.abs() { v } else { a });
            if pivot < 0.0 {
                for v in &mut values {
                    *v = -*v;
                }
            }
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut values {
                    *v /= norm;
                }
            }
            FdEigenPair { lambda, values }
        })
        .collect();
    Ok(pairs)
}
