//! Modal Galerkin system and its time integrators.
//!
//! Expanding the homogenized temperature in the eigenbasis turns the
//! weak problem into the linear ODE system
//!
//! ```text
//! g'(t) + (α Λ + B(t)) g(t) = f(t),      Λ = diag(λ_j),
//! B_jk(t) = ∫ (v·∇ψ_k) ψ_j,             f_j(t) = (h(t) | ψ_j),
//! ```
//!
//! with identity mass matrix thanks to the basis normalization. B is
//! skew-symmetric for validated velocities, so the convection term is
//! energy-neutral: the implicit midpoint (Crank-Nicolson) step is a
//! contraction whenever the forcing vanishes, at any step size.
//!
//! Time integrators are interchangeable strategies behind [`TimeScheme`],
//! registered by name and selected from the configuration.

pub mod scheme;

pub use scheme::{make_scheme, registered_schemes, TimeScheme};

use crate::eigenbasis::{EigenBasis, GridTables};
use crate::error::{Error, Result};
use crate::estimates::{EstimateLedger, LedgerConstants, LedgerSettings};
use crate::geometry::{Domain, QuadratureGrid};
use crate::velocity::{Forcing, VelocityModel};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Integration parameters of one run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Basis truncation m.
    pub modes: usize,
    /// Fixed time step.
    pub dt: f64,
    /// Registry name of the time scheme.
    pub scheme: String,
    /// Horizon T; the run takes round(T/dt) steps.
    pub horizon: f64,
    /// Field snapshots every this many steps.
    pub snapshot_stride: usize,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modes < 1 {
            return Err(Error::InvalidParameter {
                name: "solver.m",
                reason: "need at least one mode".into(),
            });
        }
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "solver.dt",
                reason: format!("time step must be positive, got {}", self.dt),
            });
        }
        if self.dt > self.horizon {
            return Err(Error::InvalidParameter {
                name: "solver.dt",
                reason: format!("dt = {} exceeds the horizon {}", self.dt, self.horizon),
            });
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter {
                name: "solver.snapshot_stride",
                reason: "stride must be positive".into(),
            });
        }
        make_scheme(&self.scheme)?;
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }
}

/// Modal state at one time level. The diagonalization identities make
/// every norm a weighted coefficient sum:
/// |θ|² = Σ g², ‖θ‖² = Σ λ g², |Δθ|² = Σ λ² g².
#[derive(Debug, Clone)]
pub struct GalerkinState {
    pub t: f64,
    pub coeffs: DVector<f64>,
    /// Modal θ', the ODE right side evaluated at this state.
    pub rate: DVector<f64>,
}

impl GalerkinState {
    pub fn l2_sq(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub fn h1_sq(&self, lambdas: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(lambdas)
            .map(|(c, l)| l * c * c)
            .sum()
    }

    pub fn laplacian_sq(&self, lambdas: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(lambdas)
            .map(|(c, l)| l * l * c * c)
            .sum()
    }

    pub fn rate_sq(&self) -> f64 {
        self.rate.norm_squared()
    }
}

/// Convection matrix B_jk(t) = ∫ (v(·,t)·∇ψ_k) ψ_j by quadrature.
///
/// The quadratures factor through the tensor structure of the basis:
/// the grid is traversed once per distinct wavenumber pair instead of
/// once per (j, k), which turns the m² x grid cost into
/// (slots² x grid + m² x axis).
pub fn assemble_convection(
    velocity: &dyn VelocityModel,
    basis: &EigenBasis,
    grid: &QuadratureGrid,
    t: f64,
) -> DMatrix<f64> {
    let tables = basis.tables(&grid.xs, &grid.ys);
    assemble_convection_with_tables(velocity, &tables, grid, t)
}

pub fn assemble_convection_with_tables(
    velocity: &dyn VelocityModel,
    tables: &GridTables,
    grid: &QuadratureGrid,
    t: f64,
) -> DMatrix<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut vx = vec![0.0; nx * ny];
    let mut vy = vec![0.0; nx * ny];
    for (iy, &y) in grid.ys.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            let (a, b) = velocity.velocity(x, y, t);
            vx[iy * nx + ix] = a;
            vy[iy * nx + ix] = b;
        }
    }

    let nys = tables.sin_y.len();
    let nxs = tables.sin_x.len();
    // P[(a,b)][ix] = Σ_iy wy vx sy_a sy_b  (for the vx ψ_j ∂xψ_k term)
    let mut p = vec![vec![0.0; nx]; nys * nys];
    for iy in 0..ny {
        let row = &vx[iy * nx..(iy + 1) * nx];
        let wy = grid.wy[iy];
        for a in 0..nys {
            let sa = tables.sin_y[a][iy];
            if sa == 0.0 {
                continue;
            }
            for b in a..nys {
                let c = wy * sa * tables.sin_y[b][iy];
                let dst = &mut p[a * nys + b];
                for (d, v) in dst.iter_mut().zip(row) {
                    *d += c * v;
                }
            }
        }
    }
    // Q[(a,b)][iy] = Σ_ix wx vy sx_a sx_b  (for the vy ψ_j ∂yψ_k term)
    let mut q = vec![vec![0.0; ny]; nxs * nxs];
    for iy in 0..ny {
        let row = &vy[iy * nx..(iy + 1) * nx];
        for a in 0..nxs {
            let sxa = &tables.sin_x[a];
            for b in a..nxs {
                let sxb = &tables.sin_x[b];
                let mut acc = 0.0;
                for ix in 0..nx {
                    acc += grid.wx[ix] * sxa[ix] * sxb[ix] * row[ix];
                }
                q[a * nxs + b][iy] = acc;
            }
        }
    }
    fn sym_row(table: &[Vec<f64>], dim: usize, a: usize, b: usize) -> &[f64] {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        &table[lo * dim + hi]
    }

    let m = tables.mode_count();
    let nsq = tables.norm * tables.norm;
    let mut out = DMatrix::zeros(m, m);
    for j in 0..m {
        let (sxj, syj) = tables.slots[j];
        for k in 0..m {
            let (sxk, syk) = tables.slots[k];
            // Σ_ix wx sx_j dsx_k P[(syj, syk)]
            let p_row = sym_row(&p, nys, syj, syk);
            let acc_x: f64 = grid
                .wx
                .iter()
                .zip(&tables.sin_x[sxj])
                .zip(&tables.dsin_x[sxk])
                .zip(p_row)
                .map(|(((w, s), d), pr)| w * s * d * pr)
                .sum();
            // Σ_iy wy sy_j dsy_k Q[(sxj, sxk)]
            let q_row = sym_row(&q, nxs, sxj, sxk);
            let acc_y: f64 = grid
                .wy
                .iter()
                .zip(&tables.sin_y[syj])
                .zip(&tables.dsin_y[syk])
                .zip(q_row)
                .map(|(((w, s), d), qr)| w * s * d * qr)
                .sum();
            out[(j, k)] = nsq * (acc_x + acc_y);
        }
    }
    out
}

/// Time-dependent convection operator with the reuse policy implied by
/// the velocity model: separable fields rescale one assembled matrix,
/// tabulated fields interpolate between per-frame assemblies.
pub struct ConvectionOperator {
    mode: ConvectionMode,
}

enum ConvectionMode {
    Separable {
        base: DMatrix<f64>,
        velocity: Arc<dyn VelocityModel>,
    },
    Tabulated {
        times: Vec<f64>,
        matrices: Vec<DMatrix<f64>>,
    },
}

impl ConvectionOperator {
    pub fn build(
        velocity: &Arc<dyn VelocityModel>,
        basis: &EigenBasis,
        grid: &QuadratureGrid,
    ) -> Result<Self> {
        let tables = basis.tables(&grid.xs, &grid.ys);
        let mode = if velocity.time_factor(0.0).is_some() {
            ConvectionMode::Separable {
                base: assemble_convection_with_tables(velocity.as_ref(), &tables, grid, 0.0),
                velocity: Arc::clone(velocity),
            }
        } else {
            let times = velocity
                .frame_times()
                .ok_or_else(|| Error::InvalidParameter {
                    name: "velocity",
                    reason: "non-separable velocity must expose frame times".into(),
                })?;
            let matrices = times
                .iter()
                .map(|&t| assemble_convection_with_tables(velocity.as_ref(), &tables, grid, t))
                .collect();
            ConvectionMode::Tabulated { times, matrices }
        };
        Ok(Self { mode })
    }

    pub fn at(&self, t: f64) -> DMatrix<f64> {
        match &self.mode {
            ConvectionMode::Separable { base, velocity } => {
                base * velocity.time_factor(t).unwrap_or(1.0)
            }
            ConvectionMode::Tabulated { times, matrices } => {
                let (i, s) = crate::velocity::interp_bracket(times, t);
                if s == 0.0 {
                    matrices[i].clone()
                } else {
                    &matrices[i] * (1.0 - s) + &matrices[i + 1] * s
                }
            }
        }
    }
}

/// Everything a scheme needs to evaluate aΛ + B(t) and the forcing.
pub struct ModalSystem<'a> {
    pub lambdas: &'a [f64],
    pub diffusivity: f64,
    pub convection: &'a ConvectionOperator,
    pub forcing: &'a Forcing,
}

impl ModalSystem<'_> {
    /// aΛ + B(t).
    pub fn operator_at(&self, t: f64) -> DMatrix<f64> {
        let mut op = self.convection.at(t);
        for (j, &l) in self.lambdas.iter().enumerate() {
            op[(j, j)] += self.diffusivity * l;
        }
        op
    }

    /// θ' = f(t) - (aΛ + B(t)) g.
    pub fn rate(&self, coeffs: &DVector<f64>, t: f64) -> DVector<f64> {
        self.forcing.modal_at(t) - self.operator_at(t) * coeffs
    }
}

/// Analytic initial conditions for the homogenized problem. All of them
/// vanish on the inlet and the walls, as the projection precondition
/// requires.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// One separable eigenmode ψ_{kx,my}, scaled.
    Mode {
        kx: usize,
        my: usize,
        amplitude: f64,
    },
    /// Smoothstep in x times the first wall-compatible sine in y; excites
    /// every x wavenumber with polynomially decaying weights.
    Bump {
        amplitude: f64,
    },
}

impl InitialCondition {
    pub fn eval(&self, domain: &Domain, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Self::Zero => 0.0,
            Self::Mode { kx, my, amplitude } => {
                let norm = 2.0 / domain.area().sqrt();
                amplitude
                    * norm
                    * ((*kx as f64 - 0.5) * PI * x / domain.length).sin()
                    * (*my as f64 * PI * y / domain.height).sin()
            }
            Self::Bump { amplitude } => {
                let u = x / domain.length;
                amplitude * u * u * (3.0 - 2.0 * u) * (PI * y / domain.height).sin()
            }
        }
    }

    pub fn grad(&self, domain: &Domain, x: f64, y: f64) -> (f64, f64) {
        use std::f64::consts::PI;
        match self {
            Self::Zero => (0.0, 0.0),
            Self::Mode { kx, my, amplitude } => {
                let norm = 2.0 / domain.area().sqrt();
                let mx = (*kx as f64 - 0.5) * PI / domain.length;
                let my_ = *my as f64 * PI / domain.height;
                (
                    amplitude * norm * mx * (mx * x).cos() * (my_ * y).sin(),
                    amplitude * norm * my_ * (mx * x).sin() * (my_ * y).cos(),
                )
            }
            Self::Bump { amplitude } => {
                let u = x / domain.length;
                let s = u * u * (3.0 - 2.0 * u);
                let ds = 6.0 * u * (1.0 - u) / domain.length;
                let my_ = PI / domain.height;
                (
                    amplitude * ds * (my_ * y).sin(),
                    amplitude * s * my_ * (my_ * y).cos(),
                )
            }
        }
    }
}

/// Outcome of projecting the initial field onto the basis.
#[derive(Debug, Clone)]
pub struct InitialProjection {
    pub coeffs: DVector<f64>,
    /// |θ₀|² of the full field under quadrature.
    pub l2_sq: f64,
    /// ‖θ₀‖² of the full field under quadrature.
    pub h1_sq: f64,
    /// ‖θ₀ - θ₀m‖ in the H¹ seminorm (spectral truncation error).
    pub truncation_h1: f64,
    /// Largest |θ₀| sampled on the Dirichlet part of the boundary.
    pub boundary_max: f64,
    /// Set when boundary_max exceeds 1e-4; recorded, not fatal.
    pub boundary_warning: bool,
}

/// Projects θ₀ onto the basis and records the diagnostics the
/// convergence monitor needs.
pub fn initial_coefficients(
    init: &InitialCondition,
    basis: &EigenBasis,
    grid: &QuadratureGrid,
) -> Result<InitialProjection> {
    let domain = basis.domain();
    let field = grid.sample(|x, y| init.eval(domain, x, y));
    let coeffs = basis.project(&field, grid)?;

    let l2_sq = crate::geometry::inner_l2(&field, &field, grid)?;
    let mut gx = vec![0.0; grid.node_count()];
    let mut gy = vec![0.0; grid.node_count()];
    for (iy, &y) in grid.ys.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            let (a, b) = init.grad(domain, x, y);
            gx[grid.index(ix, iy)] = a;
            gy[grid.index(ix, iy)] = b;
        }
    }
    let h1_sq =
        crate::geometry::inner_l2(&gx, &gx, grid)? + crate::geometry::inner_l2(&gy, &gy, grid)?;

    let tables = basis.tables(&grid.xs, &grid.ys);
    let (px, py) = tables.synthesize_gradient(&coeffs);
    let mut trunc_sq = 0.0;
    for (iy, &wy) in grid.wy.iter().enumerate() {
        let mut row = 0.0;
        for (ix, &wx) in grid.wx.iter().enumerate() {
            let k = grid.index(ix, iy);
            let dx = gx[k] - px[k];
            let dy = gy[k] - py[k];
            row += wx * (dx * dx + dy * dy);
        }
        trunc_sq += wy * row;
    }

    const BOUNDARY_SAMPLES: usize = 128;
    let mut boundary_max = 0.0_f64;
    for k in 0..=BOUNDARY_SAMPLES {
        let fx = domain.length * k as f64 / BOUNDARY_SAMPLES as f64;
        let fy = domain.height * k as f64 / BOUNDARY_SAMPLES as f64;
        boundary_max = boundary_max
            .max(init.eval(domain, 0.0, fy).abs())
            .max(init.eval(domain, fx, 0.0).abs())
            .max(init.eval(domain, fx, domain.height).abs());
    }

    Ok(InitialProjection {
        coeffs: DVector::from_vec(coeffs),
        l2_sq,
        h1_sq,
        truncation_h1: trunc_sq.max(0.0).sqrt(),
        boundary_max,
        boundary_warning: boundary_max > 1e-4,
    })
}

/// Bundled inputs for [`run`].
pub struct RunInputs<'a> {
    pub basis: &'a EigenBasis,
    pub grid: &'a QuadratureGrid,
    pub velocity: &'a Arc<dyn VelocityModel>,
    pub forcing: &'a Forcing,
    pub initial: &'a InitialProjection,
    pub diffusivity: f64,
    pub config: &'a SolverConfig,
    pub ledger_settings: LedgerSettings,
}

/// A completed (or aborted) integration with its estimate ledger.
#[derive(Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub coeffs: Vec<DVector<f64>>,
    pub rates: Vec<DVector<f64>>,
    /// (t, synthesized field) every snapshot_stride steps plus the final
    /// state.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub ledger: EstimateLedger,
}

impl Trajectory {
    pub fn final_coeffs(&self) -> &DVector<f64> {
        self.coeffs.last().expect("at least the initial state")
    }

    /// One row per step: t, g_1..g_m.
    pub fn coefficients_csv(&self, stride: usize) -> String {
        let m = self.coeffs[0].len();
        let mut out = String::from("t");
        for j in 1..=m {
            out.push_str(&format!(",g_{j}"));
        }
        out.push('\n');
        let last = self.times.len() - 1;
        for n in 0..self.times.len() {
            if n % stride != 0 && n != last {
                continue;
            }
            out.push_str(&format!("{}", self.times[n]));
            for v in self.coeffs[n].iter() {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// One row per snapshot: t, then the field values in grid layout.
    pub fn snapshots_csv(&self) -> String {
        let mut out = String::new();
        for (t, field) in &self.snapshots {
            out.push_str(&format!("{t}"));
            for v in field {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed-step integration over [0, T], feeding every accepted state to
/// the estimate ledger. Deterministic: identical inputs take identical
/// float paths.
pub fn run(inputs: &RunInputs) -> Result<Trajectory> {
    inputs.config.validate()?;
    let m = inputs.basis.len();
    if inputs.initial.coeffs.len() != m || inputs.forcing.mode_count() != m {
        return Err(Error::ShapeMismatch {
            context: "run inputs",
            expected: m,
            got: inputs.initial.coeffs.len().min(inputs.forcing.mode_count()),
        });
    }
    let scheme = make_scheme(&inputs.config.scheme)?;
    let lambdas = inputs.basis.lambdas();
    let convection = ConvectionOperator::build(inputs.velocity, inputs.basis, inputs.grid)?;
    let system = ModalSystem {
        lambdas: &lambdas,
        diffusivity: inputs.diffusivity,
        convection: &convection,
        forcing: inputs.forcing,
    };
    let tables = inputs.basis.tables(&inputs.grid.xs, &inputs.grid.ys);

    let dt = inputs.config.dt;
    let steps = inputs.config.step_count();
    let alpha = inputs.diffusivity;
    let constants = LedgerConstants {
        alpha,
        poincare: 1.0 / lambdas[0].sqrt(),
        c3: EstimateLedger::resolve_c3(&inputs.ledger_settings, alpha),
        theta0_l2_sq: inputs.initial.l2_sq,
        theta0_h1_sq: inputs.initial.h1_sq,
    };
    let mut ledger = EstimateLedger::new(constants, &inputs.ledger_settings, dt);

    let mut times = Vec::with_capacity(steps + 1);
    let mut coeffs = Vec::with_capacity(steps + 1);
    let mut rates = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();

    let mut g = inputs.initial.coeffs.clone();
    let record = |n: usize,
                  g: &DVector<f64>,
                  ledger: &mut EstimateLedger,
                  times: &mut Vec<f64>,
                  coeffs: &mut Vec<DVector<f64>>,
                  rates: &mut Vec<DVector<f64>>,
                  snapshots: &mut Vec<(f64, Vec<f64>)>| {
        let t = n as f64 * dt;
        let rate = system.rate(g, t);
        let state = GalerkinState {
            t,
            coeffs: g.clone(),
            rate,
        };
        ledger.record_step(
            t,
            state.l2_sq(),
            state.h1_sq(&lambdas),
            state.laplacian_sq(&lambdas),
            state.rate_sq(),
            inputs.forcing.l2_norm_sq_at(t),
            inputs.velocity.sup_norm(t),
        );
        if n.is_multiple_of(inputs.config.snapshot_stride) || n == steps {
            snapshots.push((t, tables.synthesize(state.coeffs.as_slice())));
        }
        times.push(t);
        coeffs.push(state.coeffs);
        rates.push(state.rate);
    };

    record(
        0,
        &g,
        &mut ledger,
        &mut times,
        &mut coeffs,
        &mut rates,
        &mut snapshots,
    );
    for n in 0..steps {
        let t = n as f64 * dt;
        let g_next = scheme.step(&system, &g, t, dt)?;
        if !g_next.iter().all(|v| v.is_finite()) {
            return Err(Error::Blowup { t, step: n + 1 });
        }
        ledger.record_half_step(
            inputs.forcing.l2_norm_sq_at(t + 0.5 * dt),
            inputs.velocity.sup_norm(t + 0.5 * dt),
        );
        g = g_next;
        record(
            n + 1,
            &g,
            &mut ledger,
            &mut times,
            &mut coeffs,
            &mut rates,
            &mut snapshots,
        );
    }
    ledger.finalize();

    Ok(Trajectory {
        dt,
        times,
        coeffs,
        rates,
        snapshots,
        ledger,
    })
}
