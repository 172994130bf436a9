//! First eigenvalues of the p-Laplacian by Rayleigh-quotient minimization.
//!
//! Closed and Neumann problems minimize `∫|du|^p f^{(m−p)/2} / ∫|u−c|^p f^{m/2}`
//! where `c` is the p-shift of `u`; the minimizer then satisfies the p-mean
//! constraint. Dirichlet problems pin boundary vertices to zero instead.

mod descent;
mod functional;
pub mod compare;
pub mod reflect;
pub mod shift;
pub mod shooting;
pub mod symmetrize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conformal::ConformalFactor;
use crate::error::{Error, Result};
use crate::mesh::{DiscreteManifold, MeshKind, ScalarField};
use descent::Descent;
use functional::{Constraint, Functional};

pub use shift::{apply_split, p_shift, signed_pow, t_split_shift};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub p: f64,
    /// Budget of descent iterations per start, over all δ stages.
    pub max_iterations: usize,
    /// Relative quotient decrease below which a stage counts as stalled.
    pub tolerance: f64,
    /// Final gradient regularization, relative to the rms element gradient.
    pub delta: f64,
    /// Number of seeded random starts added to the deterministic ones.
    pub multistart: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { p: 2.0, max_iterations: 2000, tolerance: 1e-12, delta: 1e-8, multistart: 2, seed: 0 }
    }
}

impl SolveOptions {
    pub fn with_p(p: f64) -> Self {
        Self { p, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidArgument(format!("p must be a finite value > 1, got {}", self.p)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidArgument(format!("delta must be ≥ 0, got {}", self.delta)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub lambda: f64,
    /// Normalized so that `∫|u|^p f^{m/2} ν = 1`.
    #[serde(skip)]
    pub eigenfunction: ScalarField,
    /// `|∫|u|^{p−2}u f^{m/2} ν|`; zero for Dirichlet problems.
    pub constraint_defect: f64,
    /// `‖∇N − λ∇D‖ / ‖∇N‖` at the returned field.
    pub gradient_residual: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Regularized quotient after each accepted step of the winning start.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// `Σ_e |e| mean_e(f^{(m−p)/2}) |∇u|_e^p / ∫|u|^p f^{m/2} ν`, without any
/// shift.
pub fn rayleigh_quotient(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    p: f64,
    u: &ScalarField,
) -> Result<f64> {
    mesh.check_aligned(u)?;
    let func = Functional::new(mesh, f, p, Constraint::None)?;
    quotient_with(&func, u)
}

/// The quotient of `u − c` with `c` the p-shift of `u` against `f^{m/2}`.
pub fn shifted_quotient(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    p: f64,
    u: &ScalarField,
) -> Result<f64> {
    mesh.check_aligned(u)?;
    let func = Functional::new(mesh, f, p, Constraint::PMean)?;
    quotient_with(&func, u)
}

/// The shifted quotient and its gradient in the vertex values. The shift
/// is a critical point of the denominator, so it contributes no term.
pub fn shifted_quotient_gradient(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    p: f64,
    u: &ScalarField,
) -> Result<(f64, ScalarField)> {
    mesh.check_aligned(u)?;
    let func = Functional::new(mesh, f, p, Constraint::PMean)?;
    let q = quotient_with(&func, u)?;
    let val = func.value(u.values());
    let mut grad = vec![0.0; u.len()];
    func.quotient_gradient(u.values(), &val, &mut grad);
    Ok((q, ScalarField::new(grad)?))
}

fn quotient_with(func: &Functional<'_>, u: &ScalarField) -> Result<f64> {
    if !(u.spread() > 0.0) {
        return Err(Error::Degenerate("constant field has no Rayleigh quotient".into()));
    }
    let val = func.value(u.values());
    if !(val.den > 0.0) {
        return Err(Error::Degenerate("denominator vanishes".into()));
    }
    Ok(val.q)
}

/// First nonzero eigenvalue on a closed mesh.
pub fn solve_closed(mesh: &DiscreteManifold, f: &ConformalFactor, opts: &SolveOptions) -> Result<SpectralResult> {
    require_closed(mesh)?;
    solve(mesh, f, opts, Constraint::PMean, None)
}

/// As [`solve_closed`], from a single given start.
pub fn solve_closed_from(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    opts: &SolveOptions,
    start: &ScalarField,
) -> Result<SpectralResult> {
    require_closed(mesh)?;
    solve(mesh, f, opts, Constraint::PMean, Some(start))
}

/// First Dirichlet eigenvalue for the base metric.
pub fn solve_dirichlet(mesh: &DiscreteManifold, opts: &SolveOptions) -> Result<SpectralResult> {
    if !mesh.has_boundary() {
        return Err(Error::NoBoundary);
    }
    solve(mesh, &ConformalFactor::identity(mesh), opts, Constraint::Dirichlet, None)
}

/// First nonzero Neumann eigenvalue; the boundary condition is natural.
pub fn solve_neumann(mesh: &DiscreteManifold, f: &ConformalFactor, opts: &SolveOptions) -> Result<SpectralResult> {
    if !mesh.has_boundary() {
        return Err(Error::NoBoundary);
    }
    solve(mesh, f, opts, Constraint::PMean, None)
}

pub fn solve_neumann_from(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    opts: &SolveOptions,
    start: &ScalarField,
) -> Result<SpectralResult> {
    if !mesh.has_boundary() {
        return Err(Error::NoBoundary);
    }
    solve(mesh, f, opts, Constraint::PMean, Some(start))
}

fn require_closed(mesh: &DiscreteManifold) -> Result<()> {
    let nb = mesh.boundary().iter().filter(|b| **b).count();
    if nb > 0 {
        return Err(Error::NotClosed(nb));
    }
    Ok(())
}

fn solve(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    opts: &SolveOptions,
    constraint: Constraint,
    start: Option<&ScalarField>,
) -> Result<SpectralResult> {
    opts.validate()?;
    f.check_aligned(mesh)?;
    let starts = match start {
        Some(s) => {
            mesh.check_aligned(s)?;
            vec![s.values().to_vec()]
        }
        None => initial_fields(mesh, f, opts, constraint)?,
    };
    let mut func = Functional::new(mesh, f, opts.p, constraint)?;
    let mut best: Option<SpectralResult> = None;
    let restarts = starts.len().saturating_sub(1);
    for s in starts {
        if !admissible(&func, &s) {
            continue;
        }
        let outcome = Descent {
            func: &mut func,
            max_iterations: opts.max_iterations,
            tolerance: opts.tolerance,
            final_delta: opts.delta,
        }
        .run(s);
        let residual = func.residual(&outcome.u, &func.value(&outcome.u));
        func.delta = 0.0;
        let val = func.value(&outcome.u);
        let defect = match constraint {
            Constraint::Dirichlet => 0.0,
            _ => outcome
                .u
                .iter()
                .zip(&func.vert_mass)
                .map(|(x, m)| m * signed_pow(x - val.shift, opts.p - 1.0))
                .sum::<f64>()
                .abs(),
        };
        let candidate = SpectralResult {
            lambda: val.q,
            eigenfunction: ScalarField::new(outcome.u)?,
            constraint_defect: defect,
            gradient_residual: residual,
            iterations: outcome.iterations,
            restarts,
            converged: outcome.converged,
            trace: outcome.trace,
        };
        let better = match &best {
            None => true,
            Some(b) => (candidate.converged && !b.converged)
                || (candidate.converged == b.converged && candidate.lambda < b.lambda),
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| Error::Degenerate("no admissible start field".into()))
}

fn admissible(func: &Functional<'_>, u: &[f64]) -> bool {
    let free: Vec<f64> = u
        .iter()
        .zip(&func.fixed)
        .filter(|(_, f)| !**f)
        .map(|(x, _)| *x)
        .collect();
    let (lo, hi) = free
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    match func.constraint {
        Constraint::Dirichlet => hi > 0.0 || lo < 0.0,
        _ => hi > lo,
    }
}

/// Deterministic starts followed by `opts.multistart` seeded random ones.
/// For `p ≠ 2` the `p = 2` eigenfunction replaces the deterministic starts.
fn initial_fields(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    opts: &SolveOptions,
    constraint: Constraint,
) -> Result<Vec<Vec<f64>>> {
    let mut starts = Vec::new();
    if opts.p == 2.0 {
        starts.extend(coordinate_starts(mesh, constraint));
    } else {
        let linear = SolveOptions { p: 2.0, ..opts.clone() };
        let r = solve(mesh, f, &linear, constraint, None)?;
        starts.push(r.eigenfunction.into_values());
    }
    for k in 0..opts.multistart {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        starts.push(random_smooth_field(mesh, &mut rng));
    }
    Ok(starts)
}

fn coordinate_starts(mesh: &DiscreteManifold, constraint: Constraint) -> Vec<Vec<f64>> {
    let verts = mesh.vertices();
    match mesh.kind() {
        MeshKind::Circle { length } => {
            let th = |v: &[f64; 3]| 2.0 * std::f64::consts::PI * v[0] / length;
            vec![
                verts.iter().map(|v| th(v).cos()).collect(),
                verts.iter().map(|v| th(v).sin()).collect(),
            ]
        }
        _ if mesh.dim() == 1 => {
            let (a, b) = interval_ends(mesh);
            let t = |v: &[f64; 3]| std::f64::consts::PI * (v[0] - a) / (b - a);
            if constraint == Constraint::Dirichlet {
                vec![verts.iter().map(|v| t(v).sin()).collect()]
            } else {
                vec![verts.iter().map(|v| t(v).cos()).collect()]
            }
        }
        _ => {
            let mut out: Vec<Vec<f64>> = (0..3).map(|i| verts.iter().map(|v| v[i]).collect()).collect();
            if constraint == Constraint::Dirichlet {
                if let Some(pole) = mesh.pole() {
                    let c = verts[pole];
                    out.insert(0, verts.iter().map(|v| v[0] * c[0] + v[1] * c[1] + v[2] * c[2]).collect());
                }
            }
            out
        }
    }
}

fn interval_ends(mesh: &DiscreteManifold) -> (f64, f64) {
    mesh.vertices()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v[0]), b.max(v[0])))
}

/// Low-frequency random field: Fourier modes up to 3 in 1-D, cubic
/// polynomials of the ambient coordinates in 2-D.
fn random_smooth_field(mesh: &DiscreteManifold, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let verts = mesh.vertices();
    if mesh.dim() == 1 {
        let (a, b, period) = match mesh.kind() {
            MeshKind::Circle { length } => (0.0, length, 2.0),
            _ => {
                let (a, b) = interval_ends(mesh);
                (a, b, 1.0)
            }
        };
        let coeffs: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        verts
            .iter()
            .map(|v| {
                let t = period * std::f64::consts::PI * (v[0] - a) / (b - a);
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (c, s))| {
                        let kt = (k + 1) as f64 * t;
                        c * kt.cos() + s * kt.sin()
                    })
                    .sum()
            })
            .collect()
    } else {
        let mut exps = Vec::new();
        for i in 0..=3u32 {
            for j in 0..=3 - i {
                for k in 0..=3 - i - j {
                    if i + j + k > 0 {
                        exps.push([i as i32, j as i32, k as i32]);
                    }
                }
            }
        }
        let coeffs: Vec<f64> = exps.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        verts
            .iter()
            .map(|v| {
                exps.iter()
                    .zip(&coeffs)
                    .map(|(e, c)| c * v[0].powi(e[0]) * v[1].powi(e[1]) * v[2].powi(e[2]))
                    .sum()
            })
            .collect()
    }
}
