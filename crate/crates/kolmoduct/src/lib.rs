//! Spectral toolkit for the wall-bounded Kolmogorov flow with Hartmann-layer
//! friction.
//!
//! The flow lives in the duct `0 <= y <= 2*N*pi` with slip walls, is driven by
//! a `sin y` body force, damped by a linear friction term, and is governed by
//! the dimensionless vorticity equation for the stream function. This crate
//! computes, and cross-validates against each other:
//!
//! - the real linear spectrum `sigma(R)` of the basic flow via a
//!   continued-fraction dispersion relation, with an independent
//!   tridiagonal-determinant oracle ([`linstab`]);
//! - critical Reynolds numbers and neutral curves ([`linstab`]);
//! - Landau coefficients of the supercritical bifurcation and the circle of
//!   secondary steady states, from a centre-manifold reduction
//!   ([`bifurcation`]);
//! - fully nonlinear transients and steady states by exponential time
//!   differencing on the Galerkin mode lattice ([`dynamics`]).
//!
//! Every runnable capability has an example under `examples/`; the thin
//! `kolmoduct` binary exposes the same operations as subcommands for batch
//! sweeps and CSV/JSON output ([`cli`]).

pub mod bifurcation;
pub mod cli;
pub mod domain;
pub mod dynamics;
pub mod linstab;
pub mod spectral;

pub use domain::{GeometryParams, ModeIndex, PhysicalParams};
pub use linstab::EigenSolution;
// re-exported once the module lands
pub use spectral::SpectralField;
