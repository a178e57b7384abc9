//! Interchangeable one-step integrators for the modal system, selected
//! by registry name. Both schemes treat diffusion and convection
//! implicitly in a single dense solve; the system is linear, so no
//! iteration is involved.

use super::ModalSystem;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::sync::LazyLock;

pub trait TimeScheme: Send + Sync {
    fn name(&self) -> &'static str;

    /// Convergence order of the global error on smooth problems.
    fn order(&self) -> usize;

    /// Advance the coefficients from t to t + dt.
    fn step(
        &self,
        system: &ModalSystem,
        coeffs: &DVector<f64>,
        t: f64,
        dt: f64,
    ) -> Result<DVector<f64>>;
}

fn solve(matrix: DMatrix<f64>, rhs: DVector<f64>, scheme: &'static str) -> Result<DVector<f64>> {
    // The step matrix I + c·(αΛ + B) is nonsingular for any positive c:
    // αΛ is positive definite and B is skew. A failed factorization
    // means the operator itself is corrupt, so fail loudly.
    matrix.lu().solve(&rhs).ok_or(Error::Numerical {
        context: "time step linear solve",
        detail: format!("singular step matrix in {scheme}"),
    })
}

/// Implicit midpoint rule: second order, unconditionally stable, and
/// energy-neutral for the skew convection part.
///
/// ```text
/// (I + dt/2 A(t+dt/2)) g⁺ = (I - dt/2 A(t+dt/2)) g + dt f(t+dt/2)
/// ```
pub struct CrankNicolson;

impl TimeScheme for CrankNicolson {
    fn name(&self) -> &'static str {
        "crank-nicolson"
    }

    fn order(&self) -> usize {
        2
    }

    fn step(
        &self,
        system: &ModalSystem,
        coeffs: &DVector<f64>,
        t: f64,
        dt: f64,
    ) -> Result<DVector<f64>> {
        let half = t + 0.5 * dt;
        let a = system.operator_at(half);
        let m = a.nrows();
        let mut plus = &a * (0.5 * dt);
        let mut minus = &a * (-0.5 * dt);
        for j in 0..m {
            plus[(j, j)] += 1.0;
            minus[(j, j)] += 1.0;
        }
        let rhs = minus * coeffs + system.forcing.modal_at(half) * dt;
        solve(plus, rhs, self.name())
    }
}

/// First-order fully implicit step, kept as the robust fallback and the
/// order-comparison baseline.
///
/// ```text
/// (I + dt A(t+dt)) g⁺ = g + dt f(t+dt)
/// ```
pub struct BackwardEuler;

impl TimeScheme for BackwardEuler {
    fn name(&self) -> &'static str {
        "backward-euler"
    }

    fn order(&self) -> usize {
        1
    }

    fn step(
        &self,
        system: &ModalSystem,
        coeffs: &DVector<f64>,
        t: f64,
        dt: f64,
    ) -> Result<DVector<f64>> {
        let next = t + dt;
        let mut matrix = system.operator_at(next) * dt;
        for j in 0..matrix.nrows() {
            matrix[(j, j)] += 1.0;
        }
        let rhs = coeffs + system.forcing.modal_at(next) * dt;
        solve(matrix, rhs, self.name())
    }
}

static CRANK_NICOLSON: CrankNicolson = CrankNicolson;
static BACKWARD_EULER: BackwardEuler = BackwardEuler;

static REGISTRY: LazyLock<BTreeMap<&'static str, &'static dyn TimeScheme>> = LazyLock::new(|| {
    let mut map: BTreeMap<&'static str, &'static dyn TimeScheme> = BTreeMap::new();
    map.insert(CRANK_NICOLSON.name(), &CRANK_NICOLSON);
    map.insert(BACKWARD_EULER.name(), &BACKWARD_EULER);
    map
});

pub fn registered_schemes() -> Vec<&'static str> {
    REGISTRY.keys().copied().collect()
}

pub fn make_scheme(name: &str) -> Result<&'static dyn TimeScheme> {
    REGISTRY
        .get(name)
        .copied()
        .ok_or_else(|| Error::UnknownStrategy {
            family: "time scheme",
            name: name.to_string(),
            available: registered_schemes().join(", "),
        })
}
