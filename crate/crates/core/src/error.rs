//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Geometric query outside the closed domain.
    #[error("point ({x}, {y}) lies outside the closed domain [0, {length}] x [0, {height}]")]
    OutsideDomain {
        x: f64,
        y: f64,
        length: f64,
        height: f64,
    },

    /// Two sampled fields (or a field and a grid) disagree in size.
    #[error("shape mismatch: {context} (expected {expected}, got {got})")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A parameter violates its documented constraint.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Wall and free-stream temperatures coincide, so the affine
    /// temperature rescaling has no inverse.
    #[error("degenerate temperature scaling: theta_p = theta_inf = {value}")]
    DegenerateScaling { value: f64 },

    /// An iterative eigensolver or linear solver gave up.
    #[error("numerical solver failed: {context} ({detail})")]
    Numerical {
        context: &'static str,
        detail: String,
    },

    /// Unknown strategy name passed to a registry lookup.
    #[error("unknown {family} \"{name}\" (available: {available})")]
    UnknownStrategy {
        family: &'static str,
        name: String,
        available: String,
    },

    /// Configuration file or override problem; carries the offending key.
    #[error("configuration error: {0}")]
    Config(String),

    /// Coefficients left the representable range during time integration.
    #[error("numerical blowup at t = {t}: non-finite coefficient in step {step}")]
    Blowup { t: f64, step: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
