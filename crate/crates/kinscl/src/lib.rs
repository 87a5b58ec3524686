//! Solver and verification laboratory for stochastic scalar conservation
//! laws on the periodic torus.
//!
//! Three approximation schemes (monotone finite volume, vanishing viscosity,
//! stochastic BGK) advance the same equation on shared Brownian paths; the
//! `kinetic`, `verify` and `converge` modules check the kinetic-formulation
//! identities, the martingale characterization, the contraction and
//! invariant-region bounds, and coupled-noise pathwise convergence on the
//! outputs.

pub mod config;
pub mod converge;
pub mod error;
pub mod field;
pub mod flux;
pub mod grid;
pub mod kinetic;
pub mod noise;
pub mod report;
pub mod schemes;
pub mod verify;

pub use error::{Error, Result};
