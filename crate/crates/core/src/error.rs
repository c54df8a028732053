use alloc::string::String;
use core::fmt;

use crate::krylov::KrylovReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid construction rejected its inputs.
    InvalidGrid(&'static str),
    /// A pointwise state failed a precondition (non-positive density, pressure, ...).
    InvalidState { what: &'static str, value: f64 },
    /// A recomposed state inside the domain is not admissible.
    Inadmissible { cell: [isize; 3], what: &'static str },
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// Constrained transport was requested on a one-dimensional grid.
    NotMultiDimensional,
    /// The pressure solve did not reach its tolerance.
    SolverFailed { step: usize, report: KrylovReport },
    /// A NaN or infinity appeared in the solution.
    NonFinite { step: usize, cell: [isize; 3] },
    /// Name lookup failed (problem, profile, boundary kind).
    Unknown(String),
    /// A configuration value is out of range.
    InvalidParameter { name: &'static str, value: f64 },
    /// An equilibrium profile does not satisfy the magnetohydrostatic balance.
    NotInEquilibrium { coarse: f64, fine: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::InvalidState { what, value } => write!(f, "invalid state: {what} = {value}"),
            Error::Inadmissible { cell, what } => {
                write!(f, "inadmissible state at cell {cell:?}: {what}")
            }
            Error::GridMismatch => write!(f, "fields are defined on different grids"),
            Error::NotMultiDimensional => {
                write!(f, "constrained transport needs at least two active axes")
            }
            Error::SolverFailed { step, report } => write!(
                f,
                "pressure solve failed at step {step}: {} iterations, relative residual {:e}",
                report.iterations, report.residual
            ),
            Error::NonFinite { step, cell } => {
                write!(f, "non-finite value at step {step} in cell {cell:?}")
            }
            Error::Unknown(name) => write!(f, "unknown name `{name}`"),
            Error::InvalidParameter { name, value } => {
                write!(f, "parameter {name} out of range: {value}")
            }
            Error::NotInEquilibrium { coarse, fine } => write!(
                f,
                "equilibrium residual does not converge (coarse {coarse:e}, fine {fine:e})"
            ),
        }
    }
}

impl core::error::Error for Error {}
