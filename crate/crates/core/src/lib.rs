//! Radial numerics for the supercritical Lane-Emden heat flow
//! `u_t - Δu = |u|^(p-2) u` on a ball with Dirichlet data.
//!
//! The crate is `no_std` (with `alloc`). File formats and the command line
//! runner live in the companion `lane-emden-lab` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod exponents;
pub mod flow;
pub mod geometry;
pub mod heat;
pub mod mild;
pub mod minimal;
pub mod norms;
pub mod profile;
pub mod tridiag;

pub use error::{Error, Result};
pub use exponents::{derive_params, joseph_lundgren, FlowParams};
pub use geometry::{make_grid, RadialField, RadialGrid, SpaceTimeField};
pub use heat::{LinearStepper, Scheme};
pub use profile::Profile;
