//! The quiescent field: pure diffusion runs.

use super::{VelocityModel, VelocitySpec};
use crate::error::Result;
use crate::geometry::Domain;
use std::sync::Arc;

pub struct ZeroVelocity;

pub(super) fn construct(_: &VelocitySpec, _: &Domain) -> Result<Arc<dyn VelocityModel>> {
    Ok(Arc::new(ZeroVelocity))
}

impl VelocityModel for ZeroVelocity {
    fn kind(&self) -> &'static str {
        "zero"
    }

    fn velocity(&self, _: f64, _: f64, _: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn divergence(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }

    fn sup_norm(&self, _: f64) -> f64 {
        0.0
    }

    fn time_factor(&self, _: f64) -> Option<f64> {
        Some(1.0)
    }
}
