use serde::Serialize;

use pspectra_core::psolve::shooting::{shooting_oracle_1d, BoundaryCondition};
use pspectra_core::psolve::solve_dirichlet;
use pspectra_core::DiscreteManifold;

use super::case_options;
use crate::config::MeshSpec;
use crate::error::CliError;
use crate::output::{line_chart, Series, Table};
use crate::{Context, Outcome};

/// Spread of `λ ε^p` across ε, relative, for the FEM column.
pub const FEM_SPREAD_TOL: f64 = 1e-6;
/// Same for the shooting column.
pub const ORACLE_SPREAD_TOL: f64 = 1e-9;
/// FEM against shooting at each ε, relative.
pub const AGREEMENT_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub lambda_fem: f64,
    pub lambda_fem_scaled: f64,
    pub lambda_oracle: f64,
    pub lambda_oracle_scaled: f64,
    pub fem_oracle_gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    pub p: f64,
    pub rows: Vec<ScalingRow>,
    /// `max/min − 1` of the scaled FEM column.
    pub fem_spread: f64,
    pub oracle_spread: f64,
    pub max_gap: f64,
}

impl ScalingSummary {
    pub fn holds(&self) -> bool {
        self.fem_spread <= FEM_SPREAD_TOL && self.oracle_spread <= ORACLE_SPREAD_TOL && self.max_gap <= AGREEMENT_TOL
    }
}

fn spread(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.fold(f64::NEG_INFINITY, f64::max);
    hi / lo - 1.0
}

/// Each ε rescales the configured interval about the origin, so a mesh on
/// `(a, b)` becomes one on `(εa, εb)` with the same vertex count.
pub fn compute(ctx: &Context) -> Result<ScalingSummary, CliError> {
    let cfg = &ctx.config;
    let MeshSpec::Interval { n, a, b } = cfg.mesh else {
        return Err(CliError::Config("dirichlet-scaling needs an interval mesh".into()));
    };
    if cfg.eps.is_empty() {
        return Err(CliError::Config("ε list is empty".into()));
    }
    let rows: Vec<Result<ScalingRow, CliError>> = ctx.map(&cfg.eps, |k, &eps| {
        let mesh = DiscreteManifold::interval(n, eps * a, eps * b)?;
        let fem = solve_dirichlet(&mesh, &case_options(cfg, k))?;
        let oracle = shooting_oracle_1d(cfg.p, BoundaryCondition::Dirichlet, 0.5 * eps * (b - a))?;
        let scale = eps.powf(cfg.p);
        Ok(ScalingRow {
            eps,
            lambda_fem: fem.lambda,
            lambda_fem_scaled: fem.lambda * scale,
            lambda_oracle: oracle,
            lambda_oracle_scaled: oracle * scale,
            fem_oracle_gap: (fem.lambda - oracle).abs() / oracle,
            converged: fem.converged,
        })
    });
    let rows: Vec<ScalingRow> = rows.into_iter().collect::<Result<_, _>>()?;
    let fem_spread = spread(rows.iter().map(|r| r.lambda_fem_scaled));
    let oracle_spread = spread(rows.iter().map(|r| r.lambda_oracle_scaled));
    let max_gap = rows.iter().map(|r| r.fem_oracle_gap).fold(0.0, f64::max);
    Ok(ScalingSummary { p: cfg.p, rows, fem_spread, oracle_spread, max_gap })
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let summary = compute(ctx)?;
    let mut table = Table::new(&[
        "eps",
        "lambda_fem",
        "lambda_fem_scaled",
        "lambda_oracle",
        "lambda_oracle_scaled",
        "fem_oracle_gap",
    ]);
    for r in &summary.rows {
        table.push(vec![
            r.eps.into(),
            r.lambda_fem.into(),
            r.lambda_fem_scaled.into(),
            r.lambda_oracle.into(),
            r.lambda_oracle_scaled.into(),
            r.fem_oracle_gap.into(),
        ]);
    }
    let series = [
        Series { name: "FEM λ".into(), points: summary.rows.iter().map(|r| (r.eps, r.lambda_fem)).collect() },
        Series { name: "shooting λ".into(), points: summary.rows.iter().map(|r| (r.eps, r.lambda_oracle)).collect() },
    ];
    ctx.artifacts.json(&summary)?;
    ctx.artifacts.rows(&table)?;
    ctx.artifacts.chart(&line_chart(
        &format!("Dirichlet eigenvalue of (−ε, ε), p = {}", summary.p),
        "ε",
        "λ",
        &series,
        true,
        true,
    ))?;
    println!(
        "spread of λ ε^p: FEM {:.3e}, shooting {:.3e}; max FEM/shooting gap {:.3e}",
        summary.fem_spread, summary.oracle_spread, summary.max_gap
    );
    let converged = summary.rows.iter().all(|r| r.converged);
    Ok(Outcome::from_flags(summary.holds(), converged))
}
