//! Spectral Galerkin solver for the 2-D advection-diffusion energy
//! equation with nonhomogeneous mixed boundary conditions, together
//! with the machinery that certifies its a-priori energy estimates
//! numerically.
//!
//! The pipeline mirrors the constructive existence argument for the
//! problem: nondimensionalize the temperature, lift the wall data
//! harmonically, expand the homogenized unknown in the Laplacian
//! eigenbasis adapted to the mixed boundary conditions, integrate the
//! resulting modal ODE system, and check the energy inequalities and
//! convergence indicators on the discrete trajectory.

pub mod config;
pub mod eigenbasis;
pub mod error;
pub mod estimates;
pub mod galerkin;
pub mod geometry;
pub mod lifting;
pub mod velocity;

pub use error::{Error, Result};
