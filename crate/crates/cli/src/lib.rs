//! Library side of the `wbmhd` command.

pub mod config;
pub mod harness;
pub mod output;

pub use config::{ConfigLayer, RunConfig};
pub use harness::{convergence_study, execute, ConvergenceTable, RunSummary};
