//! Prescribed divergence-free velocity fields and the forcing they
//! induce through the lifting gradient.
//!
//! The transported temperature sees the velocity as given data, so the
//! solver accepts a family of interchangeable velocity models behind
//! one trait: analytic stream-function vortices (steady or modulated in
//! time), the zero field, and externally sampled grid data. Models are
//! registered by name and selected at runtime from the configuration.
//!
//! Every model must satisfy the incompressibility contract div v = 0
//! with vanishing normal trace v·n on the boundary; [`validate_velocity`]
//! checks both, and the command layer refuses fields that fail it.
//! These two conditions are what make the convection matrix
//! skew-symmetric, which in turn is why the velocity never enters the
//! discrete energy balance.

mod sampled;
mod vortex;
mod zero;

pub use sampled::SampledVelocity;
pub use vortex::StreamVortex;
pub use zero::ZeroVelocity;

use crate::eigenbasis::EigenBasis;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::lifting::LiftingField;
use nalgebra::DVector;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, LazyLock};

/// Divergence tolerance for [`validate_velocity`].
pub const DIVERGENCE_TOL: f64 = 1e-6;
/// Normal-trace tolerance for [`validate_velocity`].
pub const NORMAL_TRACE_TOL: f64 = 1e-8;

/// A prescribed velocity field v(x, y, t).
pub trait VelocityModel: Send + Sync {
    /// Registry name of the model.
    fn kind(&self) -> &'static str;

    /// (vx, vy) at a point of the closed rectangle.
    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64);

    /// Pointwise divergence. Analytic models return the literal sum of
    /// their closed-form partial derivatives, so the stream-function
    /// cancellation shows up as rounding noise; sampled models report
    /// the central-difference divergence of their grid data.
    fn divergence(&self, x: f64, y: f64, t: f64) -> f64;

    /// Grid sup-norm ‖v(·, t)‖_∞ over the closed rectangle.
    fn sup_norm(&self, t: f64) -> f64;

    /// Some(f(t)) when the field factorizes as v(x, y, t) = f(t)·v(x, y, 0)
    /// with f(0) = 1. Operators assembled once at t = 0 can then be
    /// rescaled instead of reassembled.
    fn time_factor(&self, t: f64) -> Option<f64>;

    /// Native frame times of tabulated models; non-separable models must
    /// return them so operators can be assembled per frame and
    /// interpolated (exact for data that is linear in t between frames).
    fn frame_times(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Construction request, as read from the configuration.
#[derive(Debug, Clone)]
pub struct VelocitySpec {
    pub kind: String,
    /// Amplitude V0 (length/time).
    pub amplitude: f64,
    /// Modulation period for time-dependent kinds (the run horizon).
    pub period: f64,
    /// Sample file for the user-sampled kind.
    pub file: Option<PathBuf>,
}

type Constructor = fn(&VelocitySpec, &Domain) -> Result<Arc<dyn VelocityModel>>;

static REGISTRY: LazyLock<BTreeMap<&'static str, Constructor>> = LazyLock::new(|| {
    let mut map: BTreeMap<&'static str, Constructor> = BTreeMap::new();
    map.insert("zero", zero::construct);
    map.insert("steady-vortex", vortex::construct_steady);
    map.insert("time-modulated-vortex", vortex::construct_modulated);
    map.insert("user-sampled", sampled::construct);
    map
});

/// Names of all registered velocity models.
pub fn registered_kinds() -> Vec<&'static str> {
    REGISTRY.keys().copied().collect()
}

/// Instantiates the velocity model named in the spec.
pub fn make_velocity(spec: &VelocitySpec, domain: &Domain) -> Result<Arc<dyn VelocityModel>> {
    if !spec.amplitude.is_finite() {
        return Err(Error::InvalidParameter {
            name: "velocity.V0",
            reason: format!("amplitude must be finite, got {}", spec.amplitude),
        });
    }
    let ctor = REGISTRY
        .get(spec.kind.as_str())
        .ok_or_else(|| Error::UnknownStrategy {
            family: "velocity kind",
            name: spec.kind.clone(),
            available: registered_kinds().join(", "),
        })?;
    ctor(spec, domain)
}

/// Per-time validation record.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationRow {
    pub t: f64,
    pub max_divergence: f64,
    pub max_normal_trace: f64,
}

/// Incompressibility / impermeability report for a velocity model.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub kind: String,
    pub rows: Vec<ValidationRow>,
    pub divergence_tol: f64,
    pub normal_trace_tol: f64,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| {
            r.max_divergence <= self.divergence_tol && r.max_normal_trace <= self.normal_trace_tol
        })
    }
}

/// NaN-poisoning max: once a NaN enters, the maximum stays NaN so the
/// comparison against the tolerance fails.
fn poison_max(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

/// Checks div v at interior nodes and v·n on all four boundary sides at
/// the given times.
pub fn validate_velocity(
    model: &dyn VelocityModel,
    domain: &Domain,
    times: &[f64],
) -> ValidationReport {
    const N_INTERIOR: usize = 64;
    const N_BOUNDARY: usize = 256;
    let rows = times
        .iter()
        .map(|&t| {
            let mut max_div = 0.0;
            for j in 1..N_INTERIOR {
                let y = domain.height * j as f64 / N_INTERIOR as f64;
                for i in 1..N_INTERIOR {
                    let x = domain.length * i as f64 / N_INTERIOR as f64;
                    max_div = poison_max(max_div, model.divergence(x, y, t).abs());
                }
            }
            let mut max_trace = 0.0;
            for k in 0..=N_BOUNDARY {
                let fx = domain.length * k as f64 / N_BOUNDARY as f64;
                let fy = domain.height * k as f64 / N_BOUNDARY as f64;
                // Inlet / outlet: n = ∓e_x; walls: n = ∓e_y.
                let (vx0, _) = model.velocity(0.0, fy, t);
                let (vx1, _) = model.velocity(domain.length, fy, t);
                let (_, vy0) = model.velocity(fx, 0.0, t);
                let (_, vy1) = model.velocity(fx, domain.height, t);
                for v in [vx0, vx1, vy0, vy1] {
                    max_trace = poison_max(max_trace, v.abs());
                }
            }
            ValidationRow {
                t,
                max_divergence: max_div,
                max_normal_trace: max_trace,
            }
        })
        .collect();
    ValidationReport {
        kind: model.kind().to_string(),
        rows,
        divergence_tol: DIVERGENCE_TOL,
        normal_trace_tol: NORMAL_TRACE_TOL,
    }
}

/// The modal forcing h = -(v·∇)θ_s expanded in the eigenbasis, together
/// with the L² and L^p norms of the underlying field.
///
/// The integrand is bounded even though ∇θ_s blows up at the inlet
/// corners: admissible velocities vanish on the boundary, and they do so
/// fast enough to cancel the 1/r gradient there.
pub struct Forcing {
    velocity: Arc<dyn VelocityModel>,
    data: ForcingData,
    /// (p, list of (t, ‖v·∇θ_s‖_{L^p})) at the build-time sample times.
    pub lp_report: Vec<(f64, Vec<(f64, f64)>)>,
}

enum ForcingData {
    Zero {
        m: usize,
    },
    /// v(·,t) = f(t)·v(·,0): modal(t) = f(t)·modal0.
    Separable {
        modal0: DVector<f64>,
        l2_sq0: f64,
    },
    /// Piecewise-linear in t between the sample frames. Norms use the
    /// exact quadratic form of the interpolation, via the cross inner
    /// products of consecutive integrands.
    Tabulated {
        times: Vec<f64>,
        modals: Vec<DVector<f64>>,
        l2_sq: Vec<f64>,
        cross: Vec<f64>,
    },
}

/// Exponents reported by [`build_forcing`] (all below the critical 2).
pub const FORCING_PS: [f64; 3] = [1.0, 1.5, 1.9];

/// Assembles the forcing for a validated velocity and a lifting with
/// analytic gradient samples. `sample_times` controls where the L^p
/// integrability report is evaluated.
pub fn build_forcing(
    velocity: &Arc<dyn VelocityModel>,
    lifting: &LiftingField,
    basis: &EigenBasis,
    sample_times: &[f64],
) -> Result<Forcing> {
    let grid = &lifting.grid;
    let tables = basis.tables(&grid.xs, &grid.ys);

    let integrand_at = |t: f64| -> Vec<f64> {
        let mut out = vec![0.0; grid.node_count()];
        for (iy, &y) in grid.ys.iter().enumerate() {
            for (ix, &x) in grid.xs.iter().enumerate() {
                let k = grid.index(ix, iy);
                let (vx, vy) = velocity.velocity(x, y, t);
                out[k] = vx * lifting.grad_x[k] + vy * lifting.grad_y[k];
            }
        }
        out
    };
    let modal_of = |integrand: &[f64]| -> DVector<f64> {
        let mut c = tables.project(integrand, &grid.wx, &grid.wy);
        for v in &mut c {
            *v = -*v;
        }
        DVector::from_vec(c)
    };

    let data = if velocity.kind() == "zero" {
        ForcingData::Zero { m: basis.len() }
    } else if velocity.time_factor(0.0).is_some() {
        let g0 = integrand_at(0.0);
        let l2_sq0 = crate::geometry::inner_l2(&g0, &g0, grid)?;
        ForcingData::Separable {
            modal0: modal_of(&g0),
            l2_sq0,
        }
    } else {
        let times = velocity
            .frame_times()
            .ok_or_else(|| Error::InvalidParameter {
                name: "velocity",
                reason: "non-separable velocity must expose frame times".into(),
            })?;
        let integrands: Vec<Vec<f64>> = times.iter().map(|&t| integrand_at(t)).collect();
        let modals = integrands.iter().map(|g| modal_of(g)).collect();
        let l2_sq = integrands
            .iter()
            .map(|g| crate::geometry::inner_l2(g, g, grid))
            .collect::<Result<Vec<_>>>()?;
        let cross = integrands
            .windows(2)
            .map(|w| crate::geometry::inner_l2(&w[0], &w[1], grid))
            .collect::<Result<Vec<_>>>()?;
        ForcingData::Tabulated {
            times,
            modals,
            l2_sq,
            cross,
        }
    };

    let mut lp_report = Vec::new();
    for &p in &FORCING_PS {
        let mut per_time = Vec::with_capacity(sample_times.len());
        for &t in sample_times {
            let g = integrand_at(t);
            per_time.push((t, grid.lp_norm(&g, p)?));
        }
        lp_report.push((p, per_time));
    }

    Ok(Forcing {
        velocity: Arc::clone(velocity),
        data,
        lp_report,
    })
}

impl Forcing {
    pub fn mode_count(&self) -> usize {
        match &self.data {
            ForcingData::Zero { m } => *m,
            ForcingData::Separable { modal0, .. } => modal0.len(),
            ForcingData::Tabulated { modals, .. } => modals[0].len(),
        }
    }

    /// Modal coefficients (h(t) | ψ_j), j = 1..m.
    pub fn modal_at(&self, t: f64) -> DVector<f64> {
        match &self.data {
            ForcingData::Zero { m } => DVector::zeros(*m),
            ForcingData::Separable { modal0, .. } => {
                let f = self.velocity.time_factor(t).unwrap_or(1.0);
                modal0 * f
            }
            ForcingData::Tabulated { times, modals, .. } => {
                let (i, s) = interp_bracket(times, t);
                if s == 0.0 {
                    modals[i].clone()
                } else {
                    &modals[i] * (1.0 - s) + &modals[i + 1] * s
                }
            }
        }
    }

    /// |h(t)|²_{L²(Ω)} of the full forcing field (not its truncation).
    pub fn l2_norm_sq_at(&self, t: f64) -> f64 {
        match &self.data {
            ForcingData::Zero { .. } => 0.0,
            ForcingData::Separable { l2_sq0, .. } => {
                let f = self.velocity.time_factor(t).unwrap_or(1.0);
                f * f * l2_sq0
            }
            ForcingData::Tabulated {
                times,
                l2_sq,
                cross,
                ..
            } => {
                let (i, s) = interp_bracket(times, t);
                if s == 0.0 {
                    l2_sq[i]
                } else {
                    (1.0 - s) * (1.0 - s) * l2_sq[i]
                        + 2.0 * s * (1.0 - s) * cross[i]
                        + s * s * l2_sq[i + 1]
                }
            }
        }
    }
}

/// Clamped linear bracket within a sorted time list: returns the left
/// index and the interpolation weight toward the right neighbour.
pub(crate) fn interp_bracket(times: &[f64], t: f64) -> (usize, f64) {
    if times.len() == 1 || t <= times[0] {
        return (0, 0.0);
    }
    if t >= *times.last().unwrap() {
        return (times.len() - 1, 0.0);
    }
    let mut i = match times.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(i) => return (i, 0.0),
        Err(i) => i - 1,
    };
    if i >= times.len() - 1 {
        i = times.len() - 2;
    }
    let s = (t - times[i]) / (times[i + 1] - times[i]);
    (i, s)
}
