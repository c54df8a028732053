//! Finite-volume kernels for the ideal MHD equations with gravity.
//!
//! The scheme splits the flux into a convective part, advanced explicitly with a
//! Rusanov flux on minmod-reconstructed data, and a pressure part, advanced
//! implicitly through a scalar elliptic equation for the pressure that is solved
//! matrix-free with restarted GMRES. The conserved state is evolved as a
//! deviation from an analytic magnetohydrostatic equilibrium so that discrete
//! equilibria are preserved to rounding. Face-centred magnetic fields are
//! advanced with constrained transport. Time integration uses the two-stage
//! LSDIRK2(2,2,2) IMEX pair.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, configuration and
//! the command-line driver live in the `wbmhd` crate.

#![no_std]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod boundary;
pub mod ct;
pub mod error;
pub mod explicit;
pub mod grid;
pub mod imex;
pub mod implicit;
pub mod krylov;
pub mod physics;
pub mod problems;
pub mod reference;
pub mod state;
pub mod wellbalance;

pub use error::{Error, Result};
pub use grid::{Field, FieldSet, Grid, ScalarField};
pub use state::{ConservedState, Eos, PrimitiveState};
