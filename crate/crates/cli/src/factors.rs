//! Conformal factors and densities named in a config.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use pspectra_core::conformal::f_eps_smooth;
use pspectra_core::io::read_field_csv;
use pspectra_core::{ConformalFactor, DiscreteManifold, MeshKind};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorSpec {
    #[default]
    Identity,
    Constant { value: f64 },
    /// `vertex,value` CSV, relative to the config file.
    Csv { path: PathBuf },
    /// `exp(P)` for a random polynomial `P` of degree ≤ 3 in the ambient
    /// coordinates (Fourier modes ≤ 3 on 1-D meshes), coefficients
    /// uniform in `[−amplitude, amplitude]`.
    RandomSmooth { amplitude: f64, seed: u64 },
    /// As `random_smooth` with even powers of `z` only, so `f(r) = f(π−r)`.
    RandomSymmetric { amplitude: f64, seed: u64 },
    /// `floor + exp(concentration (⟨x, pole⟩ − 1))`.
    Cap { pole: [f64; 3], concentration: f64, floor: f64 },
    /// The smooth equatorial band factor for the config's `p`.
    SmoothBand { eps: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBatch {
    pub count: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub symmetric: bool,
}

impl RandomBatch {
    pub fn expand(&self, seed: u64) -> Vec<FactorSpec> {
        (0..self.count)
            .map(|k| {
                let seed = sub_seed(seed, k);
                if self.symmetric {
                    FactorSpec::RandomSymmetric { amplitude: self.amplitude, seed }
                } else {
                    FactorSpec::RandomSmooth { amplitude: self.amplitude, seed }
                }
            })
            .collect()
    }
}

/// Seed of the `k`-th case derived from a config seed.
pub fn sub_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

impl FactorSpec {
    pub fn build(&self, mesh: &DiscreteManifold, p: f64, base: &Path) -> Result<ConformalFactor, CliError> {
        Ok(match self {
            Self::Identity => ConformalFactor::identity(mesh),
            Self::Constant { value } => ConformalFactor::constant(mesh, *value)?,
            Self::Csv { path } => {
                let path = base.join(path);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                let field = read_field_csv(&text)?;
                mesh.check_aligned(&field)?;
                ConformalFactor::from_field(&field)?
            }
            Self::RandomSmooth { amplitude, seed } => random_factor(mesh, *amplitude, *seed, false)?,
            Self::RandomSymmetric { amplitude, seed } => random_factor(mesh, *amplitude, *seed, true)?,
            Self::Cap { pole, concentration, floor } => {
                let n = (pole[0] * pole[0] + pole[1] * pole[1] + pole[2] * pole[2]).sqrt();
                if mesh.dim() != 2 || !(n > 0.0) || !(*floor > 0.0) {
                    return Err(CliError::Config("cap factor needs a surface mesh, a nonzero pole and floor > 0".into()));
                }
                let a = pole.map(|x| x / n);
                ConformalFactor::new(
                    mesh.vertices()
                        .iter()
                        .map(|v| floor + (concentration * (v[0] * a[0] + v[1] * a[1] + v[2] * a[2] - 1.0)).exp())
                        .collect(),
                )?
            }
            Self::SmoothBand { eps } => f_eps_smooth(mesh, *eps, p)?,
        })
    }
}

fn random_factor(mesh: &DiscreteManifold, amplitude: f64, seed: u64, symmetric: bool) -> Result<ConformalFactor, CliError> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(CliError::Config(format!("amplitude must be ≥ 0, got {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts = mesh.vertices();
    let log: Vec<f64> = if mesh.dim() == 1 {
        if symmetric {
            return Err(CliError::Config("symmetric random factors need a surface mesh".into()));
        }
        let (a, b, period) = match mesh.kind() {
            MeshKind::Circle { length } => (0.0, length, 2.0),
            _ => {
                let (lo, hi) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v[0]), h.max(v[0])));
                (lo, hi, 1.0)
            }
        };
        let coeffs: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(-amplitude..=amplitude), rng.gen_range(-amplitude..=amplitude)))
            .collect();
        verts
            .iter()
            .map(|v| {
                let t = period * std::f64::consts::PI * (v[0] - a) / (b - a);
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (c, s))| c * ((k + 1) as f64 * t).cos() + s * ((k + 1) as f64 * t).sin())
                    .sum()
            })
            .collect()
    } else {
        let mut terms = Vec::new();
        for i in 0..=3i32 {
            for j in 0..=3 - i {
                for k in 0..=3 - i - j {
                    if i + j + k > 0 && !(symmetric && k % 2 == 1) {
                        terms.push(([i, j, k], rng.gen_range(-amplitude..=amplitude)));
                    }
                }
            }
        }
        verts
            .iter()
            .map(|v| terms.iter().map(|(e, c)| c * v[0].powi(e[0]) * v[1].powi(e[1]) * v[2].powi(e[2])).sum())
            .collect()
    };
    Ok(ConformalFactor::new(log.into_iter().map(f64::exp).collect())?)
}
