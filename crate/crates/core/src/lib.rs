//! Simulation toolkit for stimulated Raman adiabatic passage (STIRAP) and its
//! variants.
//!
//! The crate builds driven few-level Hamiltonians from pulse descriptions,
//! propagates the Schrödinger and Liouville equations, analyzes the adiabatic
//! structure of the instantaneous Hamiltonian and sweeps parameters over
//! N-dimensional grids.
//!
//! Units: every time is measured in units of a reference pulse width `T` and
//! every frequency (Rabi frequency, detuning, loss or dephasing rate) in units
//! of `1/T`, with `ħ = 1`. Levels are numbered from 1 in configuration files
//! and from 0 inside the library.

pub mod analogue;
pub mod config;
pub mod error;
pub mod model;
pub mod numerics;
pub mod output;
pub mod propagate;
pub mod protocols;
pub mod pulse;
pub mod spectral;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{HamiltonianAt, ModelSpec, Topology};
pub use propagate::{IntegratorOptions, Method, SimResult};
pub use pulse::{Envelope, Link, PulseSet, PulseShape};
pub use state::{BlochVector, DensityMatrix, StateVector, TimeGrid, C64};

/// Version string embedded in every output file header.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default tolerance for norm and trace checks.
pub const NORM_TOL: f64 = 1e-9;

/// Default tolerance for eigen-residual checks.
pub const EIGEN_TOL: f64 = 1e-10;
