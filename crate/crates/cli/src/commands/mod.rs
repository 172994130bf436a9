//! One module per subcommand.

use pspectra_core::SolveOptions;

use crate::config::ExperimentConfig;
use crate::factors::sub_seed;

pub mod balance;
pub mod dirichlet;
pub mod eigen;
pub mod reflect;
pub mod sweep;
pub mod verify;

/// Solver options for the `k`-th independent case of a batch.
pub fn case_options(cfg: &ExperimentConfig, k: usize) -> SolveOptions {
    SolveOptions { seed: sub_seed(cfg.seed, k), ..cfg.solve_options() }
}
