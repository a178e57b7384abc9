//! Stream-function vortex, steady or sinusoidally modulated in time.
//!
//! The stream function Ψ = V0 sin²(πx/L) sin²(πy/H) has double zeros on
//! every boundary edge, so v = (∂Ψ/∂y, -∂Ψ/∂x) vanishes on the whole
//! boundary (trace condition) and is divergence-free by construction.
//! The quadratic vanishing at the corners is what keeps v·∇θ_s bounded
//! against the 1/r gradient of the lifting.

use super::{VelocityModel, VelocitySpec};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use std::f64::consts::PI;
use std::sync::Arc;

pub struct StreamVortex {
    amplitude: f64,
    length: f64,
    height: f64,
    /// Modulation period; None for the steady variant.
    period: Option<f64>,
    /// max |v(·, 0)| over a scan grid, cached at construction.
    spatial_sup: f64,
}

pub(super) fn construct_steady(
    spec: &VelocitySpec,
    domain: &Domain,
) -> Result<Arc<dyn VelocityModel>> {
    Ok(Arc::new(StreamVortex::new(spec.amplitude, domain, None)))
}

pub(super) fn construct_modulated(
    spec: &VelocitySpec,
    domain: &Domain,
) -> Result<Arc<dyn VelocityModel>> {
    if spec.period <= 0.0 || spec.period.is_nan() {
        return Err(Error::InvalidParameter {
            name: "velocity.period",
            reason: format!(
                "modulated vortex needs a positive period, got {}",
                spec.period
            ),
        });
    }
    Ok(Arc::new(StreamVortex::new(
        spec.amplitude,
        domain,
        Some(spec.period),
    )))
}

impl StreamVortex {
    fn new(amplitude: f64, domain: &Domain, period: Option<f64>) -> Self {
        let mut vortex = Self {
            amplitude,
            length: domain.length,
            height: domain.height,
            period,
            spatial_sup: 0.0,
        };
        const SCAN: usize = 256;
        let mut sup = 0.0_f64;
        for j in 1..SCAN {
            let y = domain.height * j as f64 / SCAN as f64;
            for i in 1..SCAN {
                let x = domain.length * i as f64 / SCAN as f64;
                let (vx, vy) = vortex.spatial(x, y);
                sup = sup.max(vx.hypot(vy));
            }
        }
        vortex.spatial_sup = sup;
        vortex
    }

    fn spatial(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = (PI * x / self.length).sin();
        let sy = (PI * y / self.height).sin();
        let vx = self.amplitude * sx * sx * (PI / self.height) * (2.0 * PI * y / self.height).sin();
        let vy =
            -self.amplitude * (PI / self.length) * (2.0 * PI * x / self.length).sin() * sy * sy;
        (vx, vy)
    }

    fn factor(&self, t: f64) -> f64 {
        match self.period {
            Some(p) => 1.0 + 0.5 * (2.0 * PI * t / p).sin(),
            None => 1.0,
        }
    }
}

impl VelocityModel for StreamVortex {
    fn kind(&self) -> &'static str {
        if self.period.is_some() {
            "time-modulated-vortex"
        } else {
            "steady-vortex"
        }
    }

    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let f = self.factor(t);
        let (vx, vy) = self.spatial(x, y);
        (f * vx, f * vy)
    }

    /// Sum of the two closed-form partial derivatives. One arrives via
    /// sin(2πy/H), the other via 2 sin cos, so the cancellation is a
    /// genuine floating-point event rather than a syntactic identity.
    fn divergence(&self, x: f64, y: f64, t: f64) -> f64 {
        let f = self.factor(t) * self.amplitude * (PI / self.length) * (PI / self.height);
        let s2x = (2.0 * PI * x / self.length).sin();
        let dvx_dx = f * s2x * (2.0 * PI * y / self.height).sin();
        let sy = (PI * y / self.height).sin();
        let cy = (PI * y / self.height).cos();
        let dvy_dy = -f * s2x * 2.0 * sy * cy;
        dvx_dx + dvy_dy
    }

    fn sup_norm(&self, t: f64) -> f64 {
        self.factor(t).abs() * self.spatial_sup
    }

    fn time_factor(&self, t: f64) -> Option<f64> {
        Some(self.factor(t))
    }
}
