//! Eigenbasis of -Δ adapted to the mixed boundary conditions.
//!
//! On the rectangle the eigenpairs separate:
//!
//! ```text
//! ψ(x, y) = norm · sin((kx - 1/2) π x / L) · sin(my π y / H)
//! λ       = ((kx - 1/2) π / L)² + (my π / H)²
//! ```
//!
//! Each mode vanishes on the inlet and the walls, and the half-integer
//! x wavenumber makes dψ/dx vanish identically on the outlet. With
//! norm = 2/√(LH) the family is orthonormal in L², so the Galerkin mass
//! matrix is the identity and the stiffness matrix is diag(λ).
//!
//! The basis is built analytically; an independent finite-difference
//! eigensolver lives in [`oracle`] purely as a verification device.

pub mod oracle;

use crate::error::{Error, Result};
use crate::geometry::{Domain, QuadratureGrid};
use std::f64::consts::PI;

/// One separable eigenpair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    /// Eigenvalue of -Δ, in 1/length².
    pub lambda: f64,
    /// Half-wave index along x (>= 1).
    pub kx: usize,
    /// Wave index along y (>= 1).
    pub my: usize,
    /// L² normalization constant, 2/√(LH).
    pub norm: f64,
}

impl EigenPair {
    fn mu_x(&self, domain: &Domain) -> f64 {
        (self.kx as f64 - 0.5) * PI / domain.length
    }

    fn mu_y(&self, domain: &Domain) -> f64 {
        self.my as f64 * PI / domain.height
    }

    pub fn eval(&self, domain: &Domain, x: f64, y: f64) -> f64 {
        self.norm * (self.mu_x(domain) * x).sin() * (self.mu_y(domain) * y).sin()
    }

    pub fn grad(&self, domain: &Domain, x: f64, y: f64) -> (f64, f64) {
        let (mx, my) = (self.mu_x(domain), self.mu_y(domain));
        (
            self.norm * mx * (mx * x).cos() * (my * y).sin(),
            self.norm * my * (mx * x).sin() * (my * y).cos(),
        )
    }
}

/// The `m` lowest eigenpairs, sorted by ascending eigenvalue with
/// (kx, my) lexicographic tie-breaking.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    domain: Domain,
    pairs: Vec<EigenPair>,
}

fn lambda_of(domain: &Domain, kx: usize, my: usize) -> f64 {
    let a = (kx as f64 - 0.5) * PI / domain.length;
    let b = my as f64 * PI / domain.height;
    a * a + b * b
}

impl EigenBasis {
    /// Enumerates separable modes and keeps the `m` smallest eigenvalues.
    ///
    /// A first pass over the m x m index box yields an upper bound for
    /// the m-th eigenvalue; the second pass enumerates every index pair
    /// that can beat the bound, which makes the selection exhaustive for
    /// any aspect ratio.
    pub fn build(domain: &Domain, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter {
                name: "basis.m",
                reason: "need at least one mode".into(),
            });
        }
        let norm = 2.0 / domain.area().sqrt();

        let mut probe: Vec<f64> = Vec::with_capacity(m * m);
        for kx in 1..=m {
            for my in 1..=m {
                probe.push(lambda_of(domain, kx, my));
            }
        }
        probe.sort_by(f64::total_cmp);
        let bound = probe[m - 1];

        let kx_max = (domain.length * bound.sqrt() / PI + 0.5).ceil() as usize + 1;
        let my_max = (domain.height * bound.sqrt() / PI).ceil() as usize + 1;
        let mut candidates: Vec<EigenPair> = Vec::new();
        for kx in 1..=kx_max {
            for my in 1..=my_max {
                let lambda = lambda_of(domain, kx, my);
                if lambda <= bound {
                    candidates.push(EigenPair {
                        lambda,
                        kx,
                        my,
                        norm,
                    });
                }
            }
        }
        candidates.sort_by(|a, b| {
            a.lambda
                .total_cmp(&b.lambda)
                .then(a.kx.cmp(&b.kx))
                .then(a.my.cmp(&b.my))
        });
        candidates.truncate(m);
        debug_assert_eq!(candidates.len(), m);
        Ok(Self {
            domain: *domain,
            pairs: candidates,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn eval(&self, j: usize, x: f64, y: f64) -> f64 {
        self.pairs[j].eval(&self.domain, x, y)
    }

    /// Precomputes the 1-D factor tables of every mode on a tensor grid.
    pub fn tables(&self, xs: &[f64], ys: &[f64]) -> GridTables {
        GridTables::new(self, xs, ys)
    }

    /// Modal coefficients c_j = (field | ψ_j) by quadrature.
    pub fn project(&self, field: &[f64], grid: &QuadratureGrid) -> Result<Vec<f64>> {
        grid.check_len(field, "project")?;
        let tables = self.tables(&grid.xs, &grid.ys);
        Ok(tables.project(field, &grid.wx, &grid.wy))
    }

    /// Grid samples of Σ c_j ψ_j.
    pub fn synthesize(&self, coeffs: &[f64], grid: &QuadratureGrid) -> Result<Vec<f64>> {
        if coeffs.len() != self.len() {
            return Err(Error::ShapeMismatch {
                context: "synthesize coefficients",
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        let tables = self.tables(&grid.xs, &grid.ys);
        Ok(tables.synthesize(coeffs))
    }

    /// Gram matrix (ψ_i | ψ_j) under quadrature; identity up to rounding.
    pub fn gram_matrix(&self, grid: &QuadratureGrid) -> nalgebra::DMatrix<f64> {
        let tables = self.tables(&grid.xs, &grid.ys);
        let m = self.len();
        let mut g = nalgebra::DMatrix::zeros(m, m);
        for j in 0..m {
            let ej: Vec<f64> = (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            let psi_j = tables.synthesize(&ej);
            let coeffs = tables.project(&psi_j, &grid.wx, &grid.wy);
            for (i, c) in coeffs.iter().enumerate() {
                g[(i, j)] = *c;
            }
        }
        g
    }

    /// Stiffness entries ∫ ∇ψ_i · ∇ψ_j by quadrature; diag(λ) up to rounding.
    pub fn stiffness_matrix(&self, grid: &QuadratureGrid) -> nalgebra::DMatrix<f64> {
        let m = self.len();
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(m);
        for p in &self.pairs {
            let mut gx = Vec::with_capacity(grid.node_count());
            let mut gy = Vec::with_capacity(grid.node_count());
            for &y in &grid.ys {
                for &x in &grid.xs {
                    let (dx, dy) = p.grad(&self.domain, x, y);
                    gx.push(dx);
                    gy.push(dy);
                }
            }
            grads.push((gx, gy));
        }
        let mut s = nalgebra::DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let (gix, giy) = &grads[i];
                let (gjx, gjy) = &grads[j];
                let mut acc = 0.0;
                for (iy, &wy) in grid.wy.iter().enumerate() {
                    let base = iy * grid.nx();
                    let mut row = 0.0;
                    for (ix, &wx) in grid.wx.iter().enumerate() {
                        let k = base + ix;
                        row += wx * (gix[k] * gjx[k] + giy[k] * gjy[k]);
                    }
                    acc += wy * row;
                }
                s[(i, j)] = acc;
                s[(j, i)] = acc;
            }
        }
        s
    }
}

/// 1-D factor tables of an [`EigenBasis`] on a tensor grid of points
/// `xs` x `ys`. Distinct wavenumbers are stored once; every basis index
/// maps to a (x-slot, y-slot) pair. Projection, synthesis and operator
/// assembly all reduce to contractions against these tables.
#[derive(Debug, Clone)]
pub struct GridTables {
    pub(crate) norm: f64,
    pub(crate) sin_x: Vec<Vec<f64>>,
    pub(crate) dsin_x: Vec<Vec<f64>>,
    pub(crate) sin_y: Vec<Vec<f64>>,
    pub(crate) dsin_y: Vec<Vec<f64>>,
    /// (x-slot, y-slot) per basis index.
    pub(crate) slots: Vec<(usize, usize)>,
    pub(crate) nx: usize,
    pub(crate) ny: usize,
}

impl GridTables {
    pub fn new(basis: &EigenBasis, xs: &[f64], ys: &[f64]) -> Self {
        let domain = basis.domain;
        let mut kx_values: Vec<usize> = basis.pairs.iter().map(|p| p.kx).collect();
        kx_values.sort_unstable();
        kx_values.dedup();
        let mut my_values: Vec<usize> = basis.pairs.iter().map(|p| p.my).collect();
        my_values.sort_unstable();
        my_values.dedup();

        let sin_x: Vec<Vec<f64>> = kx_values
            .iter()
            .map(|&kx| {
                let mu = (kx as f64 - 0.5) * PI / domain.length;
                xs.iter().map(|&x| (mu * x).sin()).collect()
            })
            .collect();
        let dsin_x: Vec<Vec<f64>> = kx_values
            .iter()
            .map(|&kx| {
                let mu = (kx as f64 - 0.5) * PI / domain.length;
                xs.iter().map(|&x| mu * (mu * x).cos()).collect()
            })
            .collect();
        let sin_y: Vec<Vec<f64>> = my_values
            .iter()
            .map(|&my| {
                let mu = my as f64 * PI / domain.height;
                ys.iter().map(|&y| (mu * y).sin()).collect()
            })
            .collect();
        let dsin_y: Vec<Vec<f64>> = my_values
            .iter()
            .map(|&my| {
                let mu = my as f64 * PI / domain.height;
                ys.iter().map(|&y| mu * (mu * y).cos()).collect()
            })
            .collect();
        let slots = basis
            .pairs
            .iter()
            .map(|p| {
                let sx = kx_values.binary_search(&p.kx).expect("kx slot");
                let sy = my_values.binary_search(&p.my).expect("my slot");
                (sx, sy)
            })
            .collect();
        Self {
            norm: basis.pairs.first().map(|p| p.norm).unwrap_or(0.0),
            sin_x,
            dsin_x,
            sin_y,
            dsin_y,
            slots,
            nx: xs.len(),
            ny: ys.len(),
        }
    }

    pub fn mode_count(&self) -> usize {
        self.slots.len()
    }

    /// c_j = Σ_{i,l} wx_i wy_l field(i,l) ψ_j(i,l), factored through the
    /// y-contraction so the grid is traversed once per distinct my.
    pub fn project(&self, field: &[f64], wx: &[f64], wy: &[f64]) -> Vec<f64> {
        assert_eq!(field.len(), self.nx * self.ny, "field shape");
        // R[sy][ix] = Σ_iy wy sin_y[sy][iy] field[iy, ix]
        let mut reduced = vec![vec![0.0; self.nx]; self.sin_y.len()];
        for (sy, sy_tab) in self.sin_y.iter().enumerate() {
            let dst = &mut reduced[sy];
            for iy in 0..self.ny {
                let c = wy[iy] * sy_tab[iy];
                let row = &field[iy * self.nx..(iy + 1) * self.nx];
                for (d, v) in dst.iter_mut().zip(row) {
                    *d += c * v;
                }
            }
        }
        self.slots
            .iter()
            .map(|&(sx, sy)| {
                let sx_tab = &self.sin_x[sx];
                let red = &reduced[sy];
                let mut acc = 0.0;
                for ix in 0..self.nx {
                    acc += wx[ix] * sx_tab[ix] * red[ix];
                }
                self.norm * acc
            })
            .collect()
    }

    /// Grid samples of Σ c_j ψ_j in field layout.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synthesize_with(coeffs, |t, sx| &t.sin_x[sx], |t, sy| &t.sin_y[sy])
    }

    /// Grid samples of the gradient (Σ c_j ∂x ψ_j, Σ c_j ∂y ψ_j).
    pub fn synthesize_gradient(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let gx = self.synthesize_with(coeffs, |t, sx| &t.dsin_x[sx], |t, sy| &t.sin_y[sy]);
        let gy = self.synthesize_with(coeffs, |t, sx| &t.sin_x[sx], |t, sy| &t.dsin_y[sy]);
        (gx, gy)
    }

    fn synthesize_with<'a>(
        &'a self,
        coeffs: &[f64],
        x_tab: impl Fn(&'a Self, usize) -> &'a [f64],
        y_tab: impl Fn(&'a Self, usize) -> &'a [f64],
    ) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.slots.len(), "coefficient count");
        // A[sy][ix] = Σ_{j: slot_y(j)=sy} c_j norm x_tab[sx_j][ix]
        let mut partial = vec![vec![0.0; self.nx]; self.sin_y.len()];
        for (j, &(sx, sy)) in self.slots.iter().enumerate() {
            let c = coeffs[j] * self.norm;
            if c == 0.0 {
                continue;
            }
            let tab = x_tab(self, sx);
            let dst = &mut partial[sy];
            for (d, v) in dst.iter_mut().zip(tab) {
                *d += c * v;
            }
        }
        let mut out = vec![0.0; self.nx * self.ny];
        for (sy, part) in partial.iter().enumerate() {
            let tab = y_tab(self, sy);
            for iy in 0..self.ny {
                let s = tab[iy];
                if s == 0.0 {
                    continue;
                }
                let row = &mut out[iy * self.nx..(iy + 1) * self.nx];
                for (o, v) in row.iter_mut().zip(part) {
                    *o += s * v;
                }
            }
        }
        out
    }
}
