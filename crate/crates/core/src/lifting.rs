//! Harmonic lifting of the wall temperature and the affine temperature
//! rescalings around it.
//!
//! The lifting θ_s solves
//!
//! ```text
//! Δθ_s = 0      in the rectangle,
//! θ_s  = 0      on the inlet  {x = 0},
//! θ_s  = 1      on the walls  {y = 0} ∪ {y = H},
//! dθ_s/dx = 0   on the outlet {x = L},
//! ```
//!
//! and has the separated series
//!
//! ```text
//! θ_s = 1 - Σ_{k odd} (4/(kπ)) sin(kπy/H) cosh(kπ(L-x)/H) / cosh(kπL/H).
//! ```
//!
//! All hyperbolic ratios are evaluated in shifted-exponential form, so
//! no term overflows no matter how deep the truncation. The boundary
//! data jumps at the inlet corners (0,0) and (0,H); the gradient blows
//! up like 1/r there, which is exactly the ∩_{p<2} W^{1,p} regularity
//! this module's Sobolev report makes visible.
//!
//! On the inlet itself the sine series converges only like 1/depth, so
//! the evaluator returns the prescribed datum (the pointwise limit of
//! the series) for x = 0; everywhere else, including the other two
//! boundary segments, the truncated series is used verbatim.

use crate::error::{Error, Result};
use crate::geometry::{Domain, QuadratureGrid};
use std::f64::consts::PI;

/// Physical problem parameters in raw (dimensional) variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Thermal diffusivity a > 0 (length²/time).
    pub diffusivity: f64,
    /// Free-stream temperature imposed on the inlet.
    pub theta_inf: f64,
    /// Wall temperature imposed on the walls.
    pub theta_p: f64,
    /// Time horizon T > 0.
    pub horizon: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        if self.diffusivity <= 0.0 || !self.diffusivity.is_finite() {
            return Err(Error::InvalidParameter {
                name: "physics.a",
                reason: format!("diffusivity must be positive, got {}", self.diffusivity),
            });
        }
        if self.horizon <= 0.0 || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "physics.T",
                reason: format!("horizon must be positive, got {}", self.horizon),
            });
        }
        if self.theta_p == self.theta_inf {
            return Err(Error::DegenerateScaling {
                value: self.theta_p,
            });
        }
        Ok(())
    }

    /// θ* = (θ - θ_inf) / (θ_p - θ_inf).
    pub fn to_dimensionless(&self, theta: f64) -> f64 {
        (theta - self.theta_inf) / (self.theta_p - self.theta_inf)
    }

    /// Inverse of [`Self::to_dimensionless`]; exact affine round trip.
    pub fn to_dimensional(&self, theta_star: f64) -> f64 {
        self.theta_inf + (self.theta_p - self.theta_inf) * theta_star
    }
}

/// Applies the affine rescaling pointwise to a sampled field.
pub fn nondimensionalize(theta_raw: &[f64], params: &PhysicalParams) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(theta_raw
        .iter()
        .map(|&t| params.to_dimensionless(t))
        .collect())
}

/// Inverse affine map back to raw temperatures.
pub fn redimensionalize(theta_star: &[f64], params: &PhysicalParams) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(theta_star
        .iter()
        .map(|&t| params.to_dimensional(t))
        .collect())
}

/// Subtracts the lifting from a dimensionless field: θ̃ = θ* - θ_s.
pub fn homogenize(theta_star: &[f64], lifting: &LiftingField) -> Result<Vec<f64>> {
    if theta_star.len() != lifting.samples.len() {
        return Err(Error::ShapeMismatch {
            context: "homogenize",
            expected: lifting.samples.len(),
            got: theta_star.len(),
        });
    }
    Ok(theta_star
        .iter()
        .zip(&lifting.samples)
        .map(|(t, s)| t - s)
        .collect())
}

/// The harmonic lifting, sampled with its analytic gradient on the
/// domain's quadrature grid.
#[derive(Debug, Clone)]
pub struct LiftingField {
    domain: Domain,
    depth: usize,
    wall_value: f64,
    pub grid: QuadratureGrid,
    /// θ_s at the quadrature nodes (field layout).
    pub samples: Vec<f64>,
    /// Term-wise series gradient at the quadrature nodes.
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    /// (p, ‖∇θ_s‖_{L^p}) by quadrature, for p < 2.
    pub sobolev_report: Vec<(f64, f64)>,
}

/// Exponents probed by the Sobolev report.
pub const SOBOLEV_PS: [f64; 5] = [1.0, 1.25, 1.5, 1.75, 1.9];

/// Solves the lifting problem with the canonical wall datum 1.
pub fn solve_lifting(domain: &Domain, depth: usize) -> Result<LiftingField> {
    LiftingField::with_wall_value(domain, depth, 1.0)
}

/// Hyperbolic ratios in overflow-free form. With E1 = e^{-κx},
/// E2 = e^{-κ(2L-x)} and E3 = e^{-2κL} (all exponents <= 0 inside the
/// closed domain):
///
/// ```text
/// cosh(κ(L-x))/cosh(κL) = (E1 + E2)/(1 + E3)
/// sinh(κ(L-x))/cosh(κL) = (E1 - E2)/(1 + E3)
/// ```
#[inline]
fn hyperbolic_ratios(kappa: f64, x: f64, length: f64) -> (f64, f64) {
    let e1 = (-kappa * x).exp();
    let e2 = (-kappa * (2.0 * length - x)).exp();
    let e3 = (-2.0 * kappa * length).exp();
    let denom = 1.0 + e3;
    ((e1 + e2) / denom, (e1 - e2) / denom)
}

impl LiftingField {
    /// Builds the lifting for wall datum `wall_value` (the canonical
    /// problem uses 1; the solution scales linearly in the datum).
    pub fn with_wall_value(domain: &Domain, depth: usize, wall_value: f64) -> Result<Self> {
        if depth < 1 {
            return Err(Error::InvalidParameter {
                name: "lifting.depth",
                reason: "series depth must be at least 1".into(),
            });
        }
        let grid = domain.grid();
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut samples = vec![wall_value; nx * ny];
        let mut grad_x = vec![0.0; nx * ny];
        let mut grad_y = vec![0.0; nx * ny];

        let mut cosh_ratio = vec![0.0; nx];
        let mut sinh_ratio = vec![0.0; nx];
        for term in 0..depth {
            let k = (2 * term + 1) as f64;
            let kappa = k * PI / domain.height;
            for (i, &x) in grid.xs.iter().enumerate() {
                let (c, s) = hyperbolic_ratios(kappa, x, domain.length);
                cosh_ratio[i] = c;
                sinh_ratio[i] = s;
            }
            let coef = 4.0 * wall_value / (k * PI);
            let gcoef = 4.0 * wall_value / domain.height;
            for (iy, &y) in grid.ys.iter().enumerate() {
                let (sin_y, cos_y) = (kappa * y).sin_cos();
                let a = coef * sin_y;
                let bx = gcoef * sin_y;
                let by = gcoef * cos_y;
                let row = iy * nx;
                for i in 0..nx {
                    samples[row + i] -= a * cosh_ratio[i];
                    grad_x[row + i] += bx * sinh_ratio[i];
                    grad_y[row + i] -= by * cosh_ratio[i];
                }
            }
        }

        let grad_mag: Vec<f64> = grad_x
            .iter()
            .zip(&grad_y)
            .map(|(gx, gy)| gx.hypot(*gy))
            .collect();
        let sobolev_report = SOBOLEV_PS
            .iter()
            .map(|&p| (p, grid.lp_norm(&grad_mag, p).expect("grid-sized field")))
            .collect();

        Ok(Self {
            domain: *domain,
            depth,
            wall_value,
            grid,
            samples,
            grad_x,
            grad_y,
            sobolev_report,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Series value at an arbitrary point of the closed rectangle.
    /// On the inlet the prescribed datum (the series' pointwise limit)
    /// is returned directly.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let mut acc = self.wall_value;
        for term in 0..self.depth {
            let k = (2 * term + 1) as f64;
            let kappa = k * PI / self.domain.height;
            let (c, _) = hyperbolic_ratios(kappa, x, self.domain.length);
            acc -= 4.0 * self.wall_value / (k * PI) * (kappa * y).sin() * c;
        }
        acc
    }

    /// Term-wise series gradient; meaningful in the open domain and on
    /// the outlet, where the x-derivative vanishes term by term.
    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        let gcoef = 4.0 * self.wall_value / self.domain.height;
        for term in 0..self.depth {
            let k = (2 * term + 1) as f64;
            let kappa = k * PI / self.domain.height;
            let (c, s) = hyperbolic_ratios(kappa, x, self.domain.length);
            let (sin_y, cos_y) = (kappa * y).sin_cos();
            gx += gcoef * sin_y * s;
            gy -= gcoef * cos_y * c;
        }
        (gx, gy)
    }

    /// θ_s on the uniform (n+1) x (n+1) node grid, y-major
    /// (`values[j * (n+1) + i]`), including boundary nodes. Same series
    /// as the quadrature samples, batched so the exponentials are
    /// evaluated once per (term, column) rather than once per node.
    /// The inlet column carries the exact datum.
    pub fn sample_uniform(&self, n: usize) -> Vec<f64> {
        let stride = n + 1;
        let mut out = vec![self.wall_value; stride * stride];
        let hx = self.domain.length / n as f64;
        let hy = self.domain.height / n as f64;
        let mut cosh_ratio = vec![0.0; stride];
        for term in 0..self.depth {
            let k = (2 * term + 1) as f64;
            let kappa = k * PI / self.domain.height;
            for (i, c) in cosh_ratio.iter_mut().enumerate() {
                *c = hyperbolic_ratios(kappa, i as f64 * hx, self.domain.length).0;
            }
            let coef = 4.0 * self.wall_value / (k * PI);
            for j in 0..=n {
                let a = coef * (kappa * j as f64 * hy).sin();
                if a == 0.0 {
                    continue;
                }
                let row = &mut out[j * stride..(j + 1) * stride];
                for (o, c) in row.iter_mut().zip(&cosh_ratio) {
                    *o -= a * c;
                }
            }
        }
        for j in 0..=n {
            out[j * stride] = 0.0;
        }
        out
    }

    /// ‖∇θ_s‖_{L^p} for each requested exponent, on a fresh quadrature
    /// grid of the given per-axis resolution; the refinement study
    /// behind the W^{1,p} signature. One refined field serves all
    /// exponents.
    pub fn gradient_lp_norms_at_resolution(
        &self,
        resolution: usize,
        ps: &[f64],
    ) -> Result<Vec<f64>> {
        let dom = Domain::new(
            self.domain.length,
            self.domain.height,
            resolution,
            resolution,
        )?;
        let refined = LiftingField::with_wall_value(&dom, self.depth, self.wall_value)?;
        let mag: Vec<f64> = refined
            .grad_x
            .iter()
            .zip(&refined.grad_y)
            .map(|(gx, gy)| gx.hypot(*gy))
            .collect();
        ps.iter().map(|&p| refined.grid.lp_norm(&mag, p)).collect()
    }

    pub fn gradient_lp_norm_at_resolution(&self, resolution: usize, p: f64) -> Result<f64> {
        Ok(self.gradient_lp_norms_at_resolution(resolution, &[p])?[0])
    }
}

/// Five-point harmonicity residual of a scalar function on a uniform
/// n x n mesh, scaled by the cell area:
///
/// ```text
/// r(i,j) = hx·hy · [ (u_E - 2u + u_W)/hx² + (u_N - 2u + u_S)/hy² ]
/// ```
///
/// For an exactly harmonic u the divided bracket is pure truncation
/// error O(h² ∂⁴u), so r = O(h⁴) wherever ∂⁴u is bounded. Nodes within
/// `corner_exclusion` of the two singular inlet corners are skipped.
pub fn harmonic_residual(
    f: impl Fn(f64, f64) -> f64,
    domain: &Domain,
    n: usize,
    corner_exclusion: f64,
) -> f64 {
    let hx = domain.length / n as f64;
    let hy = domain.height / n as f64;
    let stride = n + 1;
    let mut samples = vec![0.0; stride * stride];
    for j in 0..=n {
        for i in 0..=n {
            samples[j * stride + i] = f(i as f64 * hx, j as f64 * hy);
        }
    }
    harmonic_residual_from_samples(&samples, domain, n, corner_exclusion)
}

/// Same residual, from uniform-grid samples laid out as in
/// [`LiftingField::sample_uniform`].
pub fn harmonic_residual_from_samples(
    samples: &[f64],
    domain: &Domain,
    n: usize,
    corner_exclusion: f64,
) -> f64 {
    let stride = n + 1;
    assert_eq!(samples.len(), stride * stride, "uniform sample layout");
    let hx = domain.length / n as f64;
    let hy = domain.height / n as f64;
    let cell = hx * hy;
    let corners = [(0.0, 0.0), (0.0, domain.height)];
    let mut worst = 0.0_f64;
    for j in 1..n {
        let y = j as f64 * hy;
        for i in 1..n {
            let x = i as f64 * hx;
            if corners
                .iter()
                .any(|&(cx, cy)| (x - cx).hypot(y - cy) < corner_exclusion)
            {
                continue;
            }
            let k = j * stride + i;
            let lap = (samples[k + 1] - 2.0 * samples[k] + samples[k - 1]) / (hx * hx)
                + (samples[k + stride] - 2.0 * samples[k] + samples[k - stride]) / (hy * hy);
            worst = worst.max((cell * lap).abs());
        }
    }
    worst
}

/// Direct finite-difference solution of the lifting problem on a
/// uniform n x n mesh; the independent check of the series solution.
///
/// The 5-point system (Dirichlet inlet/walls, mirrored Neumann outlet)
/// is solved exactly by expanding along the y-eigenvectors of the 1-D
/// Dirichlet second-difference operator, which leaves one tridiagonal
/// solve per mode. Values are returned on the full (n+1) x (n+1) node
/// grid including boundary nodes, y-major: `values[j * (n+1) + i]`.
#[derive(Debug, Clone)]
pub struct LiftingOracle {
    pub n: usize,
    pub values: Vec<f64>,
    domain: Domain,
}

impl LiftingOracle {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.n + 1) + i]
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (
            i as f64 * self.domain.length / self.n as f64,
            j as f64 * self.domain.height / self.n as f64,
        )
    }
}

pub fn fd_lifting_oracle(domain: &Domain, n: usize) -> Result<LiftingOracle> {
    if n < 32 {
        return Err(Error::InvalidParameter {
            name: "fd_lifting_oracle.n",
            reason: format!("mesh must have n >= 32 intervals, got {n}"),
        });
    }
    let hx = domain.length / n as f64;
    let hy = domain.height / n as f64;
    let sx = 1.0 / (hx * hx);
    let sy = 1.0 / (hy * hy);

    // y eigendecomposition (Dirichlet second differences, n-1 unknowns).
    let by = {
        let mut m = nalgebra::DMatrix::zeros(n - 1, n - 1);
        for j in 0..n - 1 {
            m[(j, j)] = 2.0 * sy;
            if j + 1 < n - 1 {
                m[(j, j + 1)] = -sy;
                m[(j + 1, j)] = -sy;
            }
        }
        m
    };
    let eigen =
        nalgebra::SymmetricEigen::try_new(by, f64::EPSILON, 100 * n).ok_or(Error::Numerical {
            context: "fd lifting oracle, y eigendecomposition",
            detail: "symmetric QR did not converge".into(),
        })?;

    // Wall contribution, projected mode by mode. The RHS of row j is
    // sy·(δ_{j,1} + δ_{j,n-1}); its coefficient against mode q is
    // sy·(v_q[0] + v_q[n-2]), identical for every x column.
    let mut solution = nalgebra::DMatrix::zeros(n, n - 1); // û[i-1, q]
    for q in 0..n - 1 {
        let vq = eigen.eigenvectors.column(q);
        let r = sy * (vq[0] + vq[n - 2]);
        let shift = eigen.eigenvalues[q];
        // Tridiagonal (Ax + shift·I) û = r·1 with the mirror row at i = n.
        let dim = n;
        let mut diag = vec![2.0 * sx + shift; dim];
        let mut lower = vec![-sx; dim - 1];
        let upper = vec![-sx; dim - 1];
        lower[dim - 2] = -2.0 * sx; // mirror: ghost u_{n+1} = u_{n-1}
        let mut rhs = vec![r; dim];
        // Thomas sweep.
        for i in 1..dim {
            let w = lower[i - 1] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut u = vec![0.0; dim];
        u[dim - 1] = rhs[dim - 1] / diag[dim - 1];
        for i in (0..dim - 1).rev() {
            u[i] = (rhs[i] - upper[i] * u[i + 1]) / diag[i];
        }
        for i in 0..dim {
            solution[(i, q)] = u[i];
        }
    }

    // Back-transform: u(i, j) = Σ_q û(i, q) v_q[j].
    let grid_interior = &solution * eigen.eigenvectors.transpose();

    let stride = n + 1;
    let mut values = vec![0.0; stride * stride];
    for j in 0..=n {
        for i in 0..=n {
            values[j * stride + i] = if i == 0 {
                0.0 // inlet (owns its corners)
            } else if j == 0 || j == n {
                1.0 // walls
            } else {
                grid_interior[(i - 1, j - 1)]
            };
        }
    }
    Ok(LiftingOracle {
        n,
        values,
        domain: *domain,
    })
}
