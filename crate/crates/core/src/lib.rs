//! Lattice Boltzmann toolkit for the shallow water equations.
//!
//! * [`lattice`]: velocity sets, equilibrium families and their Jacobians.
//! * [`stability`]: structural stability checks of the BGK collision and scans
//!   over gravity and equilibrium parameters.
//! * [`solver`]: a D2Q9 BGK solver with bed slope, friction, wind and Coriolis
//!   forcing and open, periodic, slip and no-slip boundaries.
//! * [`benchmarks`]: flow over a hump, a tidal wave and a sudden expansion,
//!   with their reference solutions.
//! * [`diagnostics`]: error norms and convergence monitoring.
//! * [`cli`]: the `swlbm` command line front end.

pub mod benchmarks;
pub mod cli;
pub mod diagnostics;
pub mod lattice;
pub mod solver;
pub mod stability;
