//! The JSON experiment document shared by all commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pspectra_core::bounds::BoundSource;
use pspectra_core::io::{read_1d_csv, read_off};
use pspectra_core::{DiscreteManifold, SolveOptions};

use crate::error::CliError;
use crate::factors::{FactorSpec, RandomBatch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Interval { n: usize, a: f64, b: f64 },
    Circle { n: usize, length: f64 },
    Icosphere { level: usize },
    /// Upper hemisphere of an icosphere, around its pole.
    Hemisphere { level: usize },
    /// OFF triangle mesh, or a 1-D CSV mesh when `circle_length` is set or
    /// the file has the `.csv` extension.
    File { path: PathBuf, circle_length: Option<f64> },
}

impl MeshSpec {
    pub fn build(&self, base: &Path) -> Result<DiscreteManifold, CliError> {
        Ok(match self {
            Self::Interval { n, a, b } => DiscreteManifold::interval(*n, *a, *b)?,
            Self::Circle { n, length } => DiscreteManifold::circle(*n, *length)?,
            Self::Icosphere { level } => DiscreteManifold::icosphere(*level)?,
            Self::Hemisphere { level } => {
                let sphere = DiscreteManifold::icosphere(*level)?;
                let pole = sphere.pole().expect("icosphere has a pole");
                sphere.extract_hemisphere(pole)?.mesh
            }
            Self::File { path, circle_length } => {
                let path = base.join(path);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                if circle_length.is_some() || path.extension().is_some_and(|e| e == "csv") {
                    read_1d_csv(&text, *circle_length)?
                } else {
                    read_off(&text)?
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    #[default]
    Closed,
    Neumann,
    Dirichlet,
}

/// Solver settings other than `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub delta: f64,
    pub multistart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self { max_iterations: d.max_iterations, tolerance: d.tolerance, delta: d.delta, multistart: d.multistart }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub command: Option<String>,
    pub mesh: MeshSpec,
    pub p: f64,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file; `--out` overrides.
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub problem: Problem,
    /// Factor for single-solve commands.
    #[serde(default)]
    pub factor: FactorSpec,
    /// Rescale the factor to unit volume before solving.
    #[serde(default)]
    pub normalize_volume: bool,
    /// Explicit factors or densities for batch commands.
    #[serde(default)]
    pub factors: Vec<FactorSpec>,
    /// Seeded random factors appended after `factors`.
    pub random_factors: Option<RandomBatch>,
    pub bound: Option<BoundSource>,
    /// Prepend the round metric to a bound batch.
    #[serde(default)]
    pub include_round: bool,
    /// Moment-norm target for balancing.
    pub balance_tolerance: Option<f64>,
    /// Relative slack for inequality checks; defaults to 2%.
    pub slack: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            p: self.p,
            max_iterations: self.solver.max_iterations,
            tolerance: self.solver.tolerance,
            delta: self.solver.delta,
            multistart: self.solver.multistart,
            seed: self.seed,
        }
    }

    pub fn validate(&self, command: &str) -> Result<(), CliError> {
        if let Some(c) = &self.command {
            if c != command {
                return Err(CliError::Config(format!("config is for `{c}`, not `{command}`")));
            }
        }
        self.solve_options().validate()?;
        if self.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(CliError::Config("ε values must be positive".into()));
        }
        if let Some(s) = self.slack {
            if !(s >= 0.0) {
                return Err(CliError::Config(format!("slack must be ≥ 0, got {s}")));
            }
        }
        Ok(())
    }

    pub fn slack(&self) -> f64 {
        self.slack.unwrap_or(pspectra_core::bounds::MESH_SLACK)
    }

    /// `factors` followed by the generated random batch.
    pub fn factor_list(&self) -> Vec<FactorSpec> {
        let mut out = self.factors.clone();
        if let Some(batch) = &self.random_factors {
            out.extend(batch.expand(self.seed));
        }
        out
    }
}
