//! Runtime-checkable forms of the a-priori energy estimates and the
//! sweep-based convergence monitor.
//!
//! Three differential inequalities are tracked along every trajectory,
//! written here with α the diffusivity, |·| the L² norm, ‖·‖ the H¹
//! seminorm, C the Poincaré constant λ₁^{-1/2} and h the forcing:
//!
//! ```text
//! E1:  d/dt|θ|²  + α‖θ‖²   <=  (C²/α)|h|²
//! E2:  d/dt‖θ‖²  + α|Δθ|²  <=  (3/2α)(‖v‖²_∞‖θ‖² + |h|²)
//! E3:  |θ'|² + α d/dt‖θ‖²  <=  c₃(‖v‖²_∞‖θ‖² + |h|²)
//! ```
//!
//! The time derivative is replaced by second-order differences (centered
//! interiorly, one-sided at the ends), so the discrete residuals must
//! stay below max(floor, K·dt²·scale). Integrating E1 and E2 yields the
//! Gronwall envelopes that the trajectory must never cross.
//!
//! A note on constants: E1 as written above carries (C²/α), which is
//! what the Cauchy-Schwarz/Young chain produces; the inverted form
//! 1/(αC²) circulating in some statements of the estimate differs
//! unless C = 1. The ledger stores C so either constant can be read
//! off. E3's constant is not pinned by the derivation; c₃ defaults to
//! 3/(2α) for symmetry with E2 and is configurable.

use crate::error::{Error, Result};
use crate::geometry::Domain;
use nalgebra::DVector;
use serde::Serialize;

/// Tolerance policy for the residual checks.
#[derive(Debug, Clone, Copy)]
pub struct LedgerSettings {
    /// Absolute floor of every residual tolerance.
    pub tol_floor: f64,
    /// Multiplier of the dt²-scaled part of the tolerance.
    pub k_tol: f64,
    /// E3 constant; None means 3/(2α).
    pub c3: Option<f64>,
}

impl Default for LedgerSettings {
    fn default() -> Self {
        Self {
            tol_floor: 1e-8,
            k_tol: 10.0,
            c3: None,
        }
    }
}

/// Constants frozen at the start of a run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LedgerConstants {
    /// Diffusivity (called a and α interchangeably).
    pub alpha: f64,
    /// Poincaré constant λ₁^{-1/2} on the modal space.
    pub poincare: f64,
    /// E3 constant actually used.
    pub c3: f64,
    /// |θ₀|² of the full initial field under quadrature.
    pub theta0_l2_sq: f64,
    /// ‖θ₀‖² of the full initial field under quadrature.
    pub theta0_h1_sq: f64,
}

/// One step of the ledger. Norm squares come straight from the modal
/// diagonalization identities; residuals and envelopes are filled in by
/// [`EstimateLedger::finalize`].
#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub l2_sq: f64,
    pub h1_sq: f64,
    pub lap_sq: f64,
    pub rate_sq: f64,
    pub h_sq: f64,
    pub v_sup: f64,
    pub res_e1: f64,
    pub res_e2: f64,
    pub res_e3: f64,
    pub tol_e1: f64,
    pub tol_e2: f64,
    pub tol_e3: f64,
    pub env_l2: f64,
    pub env_h1: f64,
}

#[derive(Debug, Clone)]
pub struct EstimateLedger {
    pub constants: LedgerConstants,
    pub settings_tol_floor: f64,
    pub settings_k_tol: f64,
    dt: f64,
    rows: Vec<LedgerRow>,
    /// |h(t_{n+1/2})|² per step, recorded by the integrator.
    half_h_sq: Vec<f64>,
    /// ‖v(t_{n+1/2})‖_∞ per step.
    half_v_sup: Vec<f64>,
    finalized: bool,
}

impl EstimateLedger {
    pub fn new(constants: LedgerConstants, settings: &LedgerSettings, dt: f64) -> Self {
        Self {
            constants,
            settings_tol_floor: settings.tol_floor,
            settings_k_tol: settings.k_tol,
            dt,
            rows: Vec::new(),
            half_h_sq: Vec::new(),
            half_v_sup: Vec::new(),
            finalized: false,
        }
    }

    /// Resolves the E3 constant of a settings block against α.
    pub fn resolve_c3(settings: &LedgerSettings, alpha: f64) -> f64 {
        settings.c3.unwrap_or(1.5 / alpha)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record_step(
        &mut self,
        t: f64,
        l2_sq: f64,
        h1_sq: f64,
        lap_sq: f64,
        rate_sq: f64,
        h_sq: f64,
        v_sup: f64,
    ) {
        debug_assert!(!self.finalized, "ledger already finalized");
        self.rows.push(LedgerRow {
            t,
            l2_sq,
            h1_sq,
            lap_sq,
            rate_sq,
            h_sq,
            v_sup,
            res_e1: f64::NAN,
            res_e2: f64::NAN,
            res_e3: f64::NAN,
            tol_e1: f64::NAN,
            tol_e2: f64::NAN,
            tol_e3: f64::NAN,
            env_l2: f64::NAN,
            env_h1: f64::NAN,
        });
    }

    /// Mid-step forcing and velocity magnitudes, in step order.
    pub fn record_half_step(&mut self, h_sq: f64, v_sup: f64) {
        self.half_h_sq.push(h_sq);
        self.half_v_sup.push(v_sup);
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Second-order discrete time derivative of a row quantity.
    fn d_t(&self, pick: impl Fn(&LedgerRow) -> f64, n: usize) -> f64 {
        let r = &self.rows;
        let dt = self.dt;
        let last = r.len() - 1;
        if r.len() < 2 {
            0.0
        } else if r.len() == 2 {
            (pick(&r[1]) - pick(&r[0])) / dt
        } else if n == 0 {
            (-3.0 * pick(&r[0]) + 4.0 * pick(&r[1]) - pick(&r[2])) / (2.0 * dt)
        } else if n == last {
            (3.0 * pick(&r[last]) - 4.0 * pick(&r[last - 1]) + pick(&r[last - 2])) / (2.0 * dt)
        } else {
            (pick(&r[n + 1]) - pick(&r[n - 1])) / (2.0 * dt)
        }
    }

    fn tolerance(&self, scale: f64) -> f64 {
        self.settings_tol_floor
            .max(self.settings_k_tol * self.dt * self.dt * scale)
    }

    /// Computes residuals, their tolerances, and the Gronwall envelopes.
    pub fn finalize(&mut self) {
        let alpha = self.constants.alpha;
        let cpsq = self.constants.poincare * self.constants.poincare;
        let c3 = self.constants.c3;
        let e2c = 1.5 / alpha;

        for n in 0..self.rows.len() {
            let dt_l2 = self.d_t(|r| r.l2_sq, n);
            let dt_h1 = self.d_t(|r| r.h1_sq, n);
            let row = &self.rows[n];
            let drive = row.v_sup * row.v_sup * row.h1_sq + row.h_sq;

            let res_e1 = dt_l2 + alpha * row.h1_sq - (cpsq / alpha) * row.h_sq;
            let scale_e1 = 1.0_f64
                .max(dt_l2.abs())
                .max(alpha * row.h1_sq)
                .max((cpsq / alpha) * row.h_sq);

            let res_e2 = dt_h1 + alpha * row.lap_sq - e2c * drive;
            let scale_e2 = 1.0_f64
                .max(dt_h1.abs())
                .max(alpha * row.lap_sq)
                .max(e2c * drive);

            let res_e3 = row.rate_sq + alpha * dt_h1 - c3 * drive;
            let scale_e3 = 1.0_f64
                .max(row.rate_sq)
                .max((alpha * dt_h1).abs())
                .max(c3 * drive);

            let tol_e1 = self.tolerance(scale_e1);
            let tol_e2 = self.tolerance(scale_e2);
            let tol_e3 = self.tolerance(scale_e3);
            let row = &mut self.rows[n];
            row.res_e1 = res_e1;
            row.res_e2 = res_e2;
            row.res_e3 = res_e3;
            row.tol_e1 = tol_e1;
            row.tol_e2 = tol_e2;
            row.tol_e3 = tol_e3;
        }

        // L² envelope from integrating E1, seeded by the larger of the
        // two initial norms (the estimate's seed mixes them).
        let steps = self.rows.len().saturating_sub(1);
        debug_assert!(
            self.half_h_sq.len() >= steps && self.half_v_sup.len() >= steps,
            "integrator must record one half-step per step"
        );
        let seed = self.constants.theta0_l2_sq.max(self.constants.theta0_h1_sq);
        let mut env = seed;
        self.rows[0].env_l2 = env;
        for n in 0..steps {
            env += self.dt * (cpsq / alpha) * self.half_h_sq[n];
            self.rows[n + 1].env_l2 = env;
        }

        // H¹ envelope from E2 with the diffusion term dropped; the
        // midpoint form of the step gives the rational one-step bound.
        let mut env = self.rows[0].h1_sq;
        self.rows[0].env_h1 = env;
        for n in 0..steps {
            let beta = e2c * self.half_v_sup[n] * self.half_v_sup[n];
            let gamma = e2c * self.half_h_sq[n];
            let half = 0.5 * self.dt * beta;
            env = if half < 1.0 {
                (env * (1.0 + half) + self.dt * gamma) / (1.0 - half)
            } else {
                f64::INFINITY
            };
            self.rows[n + 1].env_h1 = env;
        }

        self.finalized = true;
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    /// Every residual below its tolerance?
    pub fn residuals_ok(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.res_e1 <= r.tol_e1 && r.res_e2 <= r.tol_e2 && r.res_e3 <= r.tol_e3)
    }

    /// Trajectory below both envelopes everywhere? A relative slack of
    /// 1e-9 absorbs the rounding of the quadrature-level skew defect.
    pub fn envelope_ok(&self) -> bool {
        self.rows.iter().all(|r| {
            r.l2_sq <= r.env_l2 * (1.0 + 1e-9) + 1e-12 && r.h1_sq <= r.env_h1 * (1.0 + 1e-9) + 1e-12
        })
    }

    /// Worst signed margin (residual - tolerance) over each family, plus
    /// the worst envelope excess; all <= 0 on a passing run.
    pub fn worst_margins(&self) -> WorstMargins {
        let mut w = WorstMargins {
            e1: f64::NEG_INFINITY,
            e2: f64::NEG_INFINITY,
            e3: f64::NEG_INFINITY,
            envelope: f64::NEG_INFINITY,
        };
        for r in &self.rows {
            w.e1 = w.e1.max(r.res_e1 - r.tol_e1);
            w.e2 = w.e2.max(r.res_e2 - r.tol_e2);
            w.e3 = w.e3.max(r.res_e3 - r.tol_e3);
            let env_excess = (r.l2_sq - r.env_l2).max(r.h1_sq - r.env_h1);
            w.envelope = w.envelope.max(env_excess);
        }
        w
    }

    /// One row per step; stable column order, full float round trip.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t,l2_sq,h1_sq,lap_sq,rate_sq,h_sq,v_sup,residual_e1,residual_e2,residual_e3,tol_e1,tol_e2,tol_e3,env_l2,env_h1\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.t,
                r.l2_sq,
                r.h1_sq,
                r.lap_sq,
                r.rate_sq,
                r.h_sq,
                r.v_sup,
                r.res_e1,
                r.res_e2,
                r.res_e3,
                r.tol_e1,
                r.tol_e2,
                r.tol_e3,
                r.env_l2,
                r.env_h1,
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WorstMargins {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub envelope: f64,
}

/// Norm families of one trajectory, the quantities the uniform-in-m
/// boundedness argument controls.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryNorms {
    pub m: usize,
    /// sup_t |θ_m(t)|.
    pub sup_l2: f64,
    /// ∫₀ᵀ ‖θ_m‖² dt.
    pub int_h1_sq: f64,
    /// ∫₀ᵀ |Δθ_m|² dt.
    pub int_lap_sq: f64,
    /// ∫₀ᵀ |θ'_m|² dt.
    pub int_rate_sq: f64,
}

/// Everything the sweep monitor needs from one run.
pub struct SweepInput<'a> {
    pub m: usize,
    pub lambdas: &'a [f64],
    pub dt: f64,
    pub coeffs: &'a [DVector<f64>],
    pub rates: &'a [DVector<f64>],
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub m_values: Vec<usize>,
    pub norms: Vec<TrajectoryNorms>,
    /// ‖θ_{2m} - θ_m‖_{L²(0,T;H¹)} per consecutive pair.
    pub cauchy_gaps: Vec<f64>,
    pub gaps_decreasing: bool,
    pub norms_bounded: bool,
    /// Regression factor for the boundedness check (norms must stay
    /// within this multiple of the smallest-m values).
    pub bound_factor: f64,
}

impl SweepReport {
    pub fn pass(&self) -> bool {
        self.gaps_decreasing && self.norms_bounded
    }
}

fn trapezoid(values: impl Iterator<Item = f64>, dt: f64) -> f64 {
    let vals: Vec<f64> = values.collect();
    if vals.len() < 2 {
        return 0.0;
    }
    let inner: f64 = vals[1..vals.len() - 1].iter().sum();
    dt * (0.5 * vals[0] + inner + 0.5 * vals[vals.len() - 1])
}

/// Builds the convergence report from trajectories at increasing m.
/// Bases must be nested (they are: modes are enumerated in a fixed
/// order), so the coarse coefficient vectors zero-pad into the fine
/// ones index by index.
pub fn sweep_report(inputs: &[SweepInput], bound_factor: f64) -> Result<SweepReport> {
    if inputs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "sweep.m_values",
            reason: "need at least two basis sizes".into(),
        });
    }
    for w in inputs.windows(2) {
        if w[0].m >= w[1].m {
            return Err(Error::InvalidParameter {
                name: "sweep.m_values",
                reason: "basis sizes must be strictly increasing".into(),
            });
        }
        if w[0].coeffs.len() != w[1].coeffs.len() || w[0].dt != w[1].dt {
            return Err(Error::InvalidParameter {
                name: "sweep",
                reason: "sweep runs must share dt and step count".into(),
            });
        }
        debug_assert!(
            w[0].lambdas.iter().zip(w[1].lambdas).all(|(a, b)| a == b),
            "bases are not nested"
        );
    }

    let norms: Vec<TrajectoryNorms> = inputs
        .iter()
        .map(|run| {
            let sup_l2 = run
                .coeffs
                .iter()
                .map(|g| g.norm_squared().sqrt())
                .fold(0.0_f64, f64::max);
            let h1 = |g: &DVector<f64>| {
                g.iter()
                    .zip(run.lambdas)
                    .map(|(c, l)| l * c * c)
                    .sum::<f64>()
            };
            let lap = |g: &DVector<f64>| {
                g.iter()
                    .zip(run.lambdas)
                    .map(|(c, l)| l * l * c * c)
                    .sum::<f64>()
            };
            TrajectoryNorms {
                m: run.m,
                sup_l2,
                int_h1_sq: trapezoid(run.coeffs.iter().map(h1), run.dt),
                int_lap_sq: trapezoid(run.coeffs.iter().map(lap), run.dt),
                int_rate_sq: trapezoid(run.rates.iter().map(|g| g.norm_squared()), run.dt),
            }
        })
        .collect();

    let cauchy_gaps: Vec<f64> = inputs
        .windows(2)
        .map(|w| {
            let (coarse, fine) = (&w[0], &w[1]);
            let gap_sq = trapezoid(
                coarse.coeffs.iter().zip(fine.coeffs).map(|(gc, gf)| {
                    let mut acc = 0.0;
                    for j in 0..gf.len() {
                        let c = if j < gc.len() { gc[j] } else { 0.0 };
                        let d = gf[j] - c;
                        acc += fine.lambdas[j] * d * d;
                    }
                    acc
                }),
                fine.dt,
            );
            gap_sq.sqrt()
        })
        .collect();

    // Converged-to-floor pairs (both gaps at rounding level) count as
    // decreasing: dynamics confined to the coarse span are already exact.
    let floor = 1e-13 * (1.0 + norms.iter().map(|n| n.sup_l2).fold(0.0, f64::max));
    let gaps_decreasing = cauchy_gaps.windows(2).all(|w| w[1] < w[0] || w[1] <= floor);

    let base = &norms[0];
    let norms_bounded = norms.iter().all(|n| {
        n.sup_l2 <= bound_factor * base.sup_l2 + 1e-30
            && n.int_h1_sq <= bound_factor * base.int_h1_sq + 1e-30
            && n.int_lap_sq <= bound_factor * base.int_lap_sq + 1e-30
            && n.int_rate_sq <= bound_factor * base.int_rate_sq + 1e-30
    });

    Ok(SweepReport {
        m_values: inputs.iter().map(|r| r.m).collect(),
        norms,
        cauchy_gaps,
        gaps_decreasing,
        norms_bounded,
        bound_factor,
    })
}

/// W^{2,p}-proxy and L^p-rate indicators of a completed trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityEntry {
    pub p: f64,
    /// ∫₀ᵀ (‖Δθ‖_{L^p} + ‖D²θ‖_{L^p})² dt.
    pub w2p_sq_integral: f64,
    /// ∫₀ᵀ ‖θ'‖²_{L^p} dt.
    pub rate_lp_sq_integral: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub quad_resolution: usize,
    pub uniform_n: usize,
    pub entries: Vec<RegularityEntry>,
}

/// Evaluates the regularity indicators by synthesizing the trajectory
/// at `time_samples` evenly spaced steps. The W^{2,p} proxy combines
/// the L^p norm of the modal Laplacian (quadrature grid of the given
/// resolution) with the L^p norms of both second differences on a
/// uniform grid.
#[allow(clippy::too_many_arguments)]
pub fn regularity_report(
    basis: &crate::eigenbasis::EigenBasis,
    times: &[f64],
    coeffs: &[DVector<f64>],
    rates: &[DVector<f64>],
    p_values: &[f64],
    quad_resolution: usize,
    uniform_n: usize,
    time_samples: usize,
) -> Result<RegularityReport> {
    if coeffs.is_empty() || coeffs.len() != times.len() || rates.len() != times.len() {
        return Err(Error::InvalidParameter {
            name: "regularity_report",
            reason: "trajectory arrays must be non-empty and equally long".into(),
        });
    }
    let domain = Domain::new(
        basis.domain().length,
        basis.domain().height,
        quad_resolution,
        quad_resolution,
    )?;
    let grid = domain.grid();
    let tables = basis.tables(&grid.xs, &grid.ys);
    let lambdas = basis.lambdas();

    let hx = domain.length / uniform_n as f64;
    let hy = domain.height / uniform_n as f64;
    let uxs: Vec<f64> = (0..=uniform_n).map(|i| i as f64 * hx).collect();
    let uys: Vec<f64> = (0..=uniform_n).map(|j| j as f64 * hy).collect();
    let utables = basis.tables(&uxs, &uys);
    let ustride = uniform_n + 1;
    let ucell = hx * hy;

    let count = time_samples.clamp(2, times.len());
    let sample_idx: Vec<usize> = (0..count)
        .map(|k| k * (times.len() - 1) / (count - 1))
        .collect();

    // Per p, per sampled time: proxy norm and rate norm.
    let mut proxy = vec![Vec::with_capacity(count); p_values.len()];
    let mut rate_lp = vec![Vec::with_capacity(count); p_values.len()];
    for &n in &sample_idx {
        let lap_coeffs: Vec<f64> = coeffs[n]
            .iter()
            .zip(&lambdas)
            .map(|(c, l)| -l * c)
            .collect();
        let lap_field = tables.synthesize(&lap_coeffs);
        let rate_field = tables.synthesize(rates[n].as_slice());
        let ufield = utables.synthesize(coeffs[n].as_slice());

        for (pi, &p) in p_values.iter().enumerate() {
            let lap_norm = grid.lp_norm(&lap_field, p)?;
            // Second differences on the uniform grid, interior nodes.
            let mut acc_x = 0.0;
            let mut acc_y = 0.0;
            for j in 1..uniform_n {
                for i in 1..uniform_n {
                    let k = j * ustride + i;
                    let d2x = (ufield[k + 1] - 2.0 * ufield[k] + ufield[k - 1]) / (hx * hx);
                    let d2y =
                        (ufield[k + ustride] - 2.0 * ufield[k] + ufield[k - ustride]) / (hy * hy);
                    acc_x += d2x.abs().powf(p) * ucell;
                    acc_y += d2y.abs().powf(p) * ucell;
                }
            }
            proxy[pi].push(lap_norm + acc_x.powf(1.0 / p) + acc_y.powf(1.0 / p));
            rate_lp[pi].push(grid.lp_norm(&rate_field, p)?);
        }
    }

    // Trapezoid over the (possibly uneven) sampled times.
    let int_sq = |vals: &[f64]| -> f64 {
        let mut acc = 0.0;
        for w in sample_idx.windows(2).zip(vals.windows(2)) {
            let (idx, v) = w;
            let dt = times[idx[1]] - times[idx[0]];
            acc += 0.5 * dt * (v[0] * v[0] + v[1] * v[1]);
        }
        acc
    };

    let entries = p_values
        .iter()
        .enumerate()
        .map(|(pi, &p)| RegularityEntry {
            p,
            w2p_sq_integral: int_sq(&proxy[pi]),
            rate_lp_sq_integral: int_sq(&rate_lp[pi]),
        })
        .collect();

    Ok(RegularityReport {
        quad_resolution,
        uniform_n,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constants(alpha: f64, lambda1: f64) -> LedgerConstants {
        LedgerConstants {
            alpha,
            poincare: 1.0 / lambda1.sqrt(),
            c3: 1.5 / alpha,
            theta0_l2_sq: 1.0,
            theta0_h1_sq: lambda1,
        }
    }

    /// Single decaying mode: g(t) = e^{-αλt}, h = 0. All residuals are
    /// negative up to O(dt²) and the envelopes are flat.
    #[test]
    fn pure_decay_mode_passes_everything() {
        let alpha = 1.0;
        let lambda = 5.0 * std::f64::consts::PI.powi(2) / 4.0;
        let dt = 1e-3;
        let mut ledger =
            EstimateLedger::new(constants(alpha, lambda), &LedgerSettings::default(), dt);
        let steps = 400;
        for n in 0..=steps {
            let t = n as f64 * dt;
            let g = (-alpha * lambda * t).exp();
            let g2 = g * g;
            ledger.record_step(
                t,
                g2,
                lambda * g2,
                lambda * lambda * g2,
                (alpha * lambda * g).powi(2),
                0.0,
                0.0,
            );
            if n < steps {
                ledger.record_half_step(0.0, 0.0);
            }
        }
        ledger.finalize();
        assert!(
            ledger.residuals_ok(),
            "margins {:?}",
            ledger.worst_margins()
        );
        assert!(ledger.envelope_ok());
        // E1 residual is genuinely negative here, not just within tolerance.
        assert!(ledger.rows()[5].res_e1 < 0.0);
        // Envelope is the constant seed.
        assert_eq!(ledger.rows()[0].env_l2, lambda.max(1.0));
        assert_eq!(ledger.rows()[steps].env_l2, lambda.max(1.0));
    }

    /// Single mode with constant forcing: the closed-form trajectory
    /// g(t) = (f/αλ)(1 - e^{-αλt}) must sit below the closed-form L²
    /// envelope seed + (C²/α) f² t at every step.
    #[test]
    fn constant_forcing_trajectory_stays_below_envelope() {
        let alpha = 1.0;
        let lambda = 12.0_f64;
        let f = 2.5;
        let dt = 1e-3;
        let steps = 500;
        let mut ledger = EstimateLedger::new(
            LedgerConstants {
                alpha,
                poincare: 1.0 / lambda.sqrt(),
                c3: 1.5,
                theta0_l2_sq: 0.0,
                theta0_h1_sq: 0.0,
            },
            &LedgerSettings::default(),
            dt,
        );
        let g = |t: f64| f / (alpha * lambda) * (1.0 - (-alpha * lambda * t).exp());
        for n in 0..=steps {
            let t = n as f64 * dt;
            let gv = g(t);
            let rate = f - alpha * lambda * gv;
            ledger.record_step(
                t,
                gv * gv,
                lambda * gv * gv,
                lambda * lambda * gv * gv,
                rate * rate,
                f * f,
                0.0,
            );
            if n < steps {
                ledger.record_half_step(f * f, 0.0);
            }
        }
        ledger.finalize();
        assert!(ledger.envelope_ok(), "margins {:?}", ledger.worst_margins());
        assert!(ledger.residuals_ok());
        // The envelope is the explicit line (C²/α) f² t here.
        let cpsq = 1.0 / lambda;
        let last = ledger.rows().last().unwrap();
        let want = cpsq / alpha * f * f * (steps as f64 * dt);
        assert!((last.env_l2 - want).abs() < 1e-12 * want);
    }

    #[test]
    fn zero_trajectory_is_trivially_green() {
        let mut ledger =
            EstimateLedger::new(constants(1.0, 10.0), &LedgerSettings::default(), 0.01);
        for n in 0..=10 {
            ledger.record_step(n as f64 * 0.01, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            if n < 10 {
                ledger.record_half_step(0.0, 0.0);
            }
        }
        ledger.finalize();
        assert!(ledger.residuals_ok());
        assert!(ledger.envelope_ok());
        for r in ledger.rows() {
            assert!(r.res_e1 <= 0.0 && r.res_e2 <= 0.0 && r.res_e3 <= 0.0);
        }
    }

    /// A fabricated growth faster than the envelope allows must be flagged.
    #[test]
    fn envelope_violation_is_detected() {
        let mut ledger = EstimateLedger::new(constants(1.0, 10.0), &LedgerSettings::default(), 0.1);
        // theta0 norms say the seed is 10, but the "trajectory" jumps to 100
        // with no forcing to justify it.
        for n in 0..=3 {
            let l2 = if n == 0 { 1.0 } else { 100.0 };
            ledger.record_step(n as f64 * 0.1, l2, 1.0, 1.0, 0.0, 0.0, 0.0);
            if n < 3 {
                ledger.record_half_step(0.0, 0.0);
            }
        }
        ledger.finalize();
        assert!(!ledger.envelope_ok());
        assert!(ledger.worst_margins().envelope > 0.0);
    }

    #[test]
    fn poincare_inequality_holds_on_modal_vectors() {
        // |θ|² <= C² ‖θ‖² with C = λ₁^{-1/2}, i.e. Σg² <= λ₁^{-1} Σ λ g².
        let lambdas = [12.0, 17.0, 31.0, 40.0];
        let c_sq = 1.0 / lambdas[0];
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut rand = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..100 {
            let g: Vec<f64> = (0..4).map(|_| rand() * 4.0).collect();
            let l2: f64 = g.iter().map(|v| v * v).sum();
            let h1: f64 = g.iter().zip(&lambdas).map(|(v, l)| l * v * v).sum();
            assert!(l2 <= c_sq * h1 * (1.0 + 1e-12), "{l2} vs {}", c_sq * h1);
        }
    }

    #[test]
    fn sweep_report_flags_monotonicity() {
        use nalgebra::DVector;
        let lam_fine: Vec<f64> = (1..=4).map(|j| j as f64 * 3.0).collect();
        let lam_mid = &lam_fine[..3];
        let lam_coarse = &lam_fine[..2];
        let steps = 5;
        // Coefficients decaying geometrically in mode index: gaps shrink.
        let make = |m: usize, leak: f64| -> Vec<DVector<f64>> {
            (0..=steps)
                .map(|n| {
                    DVector::from_fn(m, |j, _| {
                        let base = 0.5_f64.powi(j as i32);
                        base * (1.0 - 0.01 * n as f64) + if j == m - 1 { leak } else { 0.0 }
                    })
                })
                .collect()
        };
        let rates =
            |m: usize| -> Vec<DVector<f64>> { (0..=steps).map(|_| DVector::zeros(m)).collect() };
        let (c2, c3, c4) = (make(2, 0.05), make(3, 0.01), make(4, 0.001));
        let (r2, r3, r4) = (rates(2), rates(3), rates(4));
        let report = sweep_report(
            &[
                SweepInput {
                    m: 2,
                    lambdas: lam_coarse,
                    dt: 0.1,
                    coeffs: &c2,
                    rates: &r2,
                },
                SweepInput {
                    m: 3,
                    lambdas: lam_mid,
                    dt: 0.1,
                    coeffs: &c3,
                    rates: &r3,
                },
                SweepInput {
                    m: 4,
                    lambdas: &lam_fine,
                    dt: 0.1,
                    coeffs: &c4,
                    rates: &r4,
                },
            ],
            2.0,
        )
        .unwrap();
        assert_eq!(report.cauchy_gaps.len(), 2);
        assert!(report.cauchy_gaps[1] < report.cauchy_gaps[0]);
        assert!(report.gaps_decreasing);
        assert!(report.norms_bounded);
        assert!(report.pass());
    }

    #[test]
    fn regularity_report_of_zero_run_is_zero() {
        use crate::eigenbasis::EigenBasis;
        use nalgebra::DVector;
        let dom = crate::geometry::Domain::unit(32);
        let basis = EigenBasis::build(&dom, 3).unwrap();
        let times = [0.0, 0.1, 0.2];
        let zeros: Vec<DVector<f64>> = vec![DVector::zeros(3); 3];
        let report =
            regularity_report(&basis, &times, &zeros, &zeros, &[1.0, 1.5, 1.9], 32, 16, 3).unwrap();
        for e in &report.entries {
            assert_eq!(e.w2p_sq_integral, 0.0);
            assert_eq!(e.rate_lp_sq_integral, 0.0);
        }
    }

    #[test]
    fn sweep_report_rejects_bad_inputs() {
        use nalgebra::DVector;
        let lam = [1.0, 2.0];
        let c: Vec<DVector<f64>> = vec![DVector::zeros(2); 3];
        let r = c.clone();
        let one = SweepInput {
            m: 2,
            lambdas: &lam,
            dt: 0.1,
            coeffs: &c,
            rates: &r,
        };
        assert!(sweep_report(std::slice::from_ref(&one), 2.0).is_err());
    }
}
