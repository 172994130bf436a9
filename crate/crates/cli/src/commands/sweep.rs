use serde::Serialize;

use pspectra_core::conformal::{f_eps_smooth, normalize_unit_volume, volume};
use pspectra_core::psolve::{solve_closed, solve_closed_from};
use pspectra_core::{DiscreteManifold, Error, ScalarField, SpectralResult};

use super::case_options;
use crate::error::CliError;
use crate::output::{line_chart, Series, Table};
use crate::{Context, Outcome};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub lambda: f64,
    /// Volume of the band factor before normalization.
    pub volume_before: f64,
    /// `λ ε^{p/m}`.
    pub lambda_scaled: f64,
    pub converged: bool,
    /// The start from the previous ε's eigenfunction beat the cold solve.
    pub warm_start_won: bool,
    pub iterations: usize,
    pub gradient_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub p: f64,
    pub m: usize,
    pub rows: Vec<SweepRow>,
    pub strictly_increasing: bool,
    pub scaled_nondecreasing: bool,
    /// Last λ over first λ.
    pub growth: f64,
}

impl SweepSummary {
    pub fn converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

struct Case {
    h: pspectra_core::ConformalFactor,
    volume_before: f64,
    cold: SpectralResult,
}

/// Solves the unit-volume band metric for every ε. Cold solves run
/// through the context's pool; a sequential pass then restarts each ε from
/// the previous eigenfunction and keeps the lower quotient.
pub fn compute(ctx: &Context, mesh: &DiscreteManifold) -> Result<SweepSummary, CliError> {
    let cfg = &ctx.config;
    let p = cfg.p;
    let m = mesh.dim();
    if !(p > m as f64) {
        return Err(CliError::Config(format!("the band sweep needs p > m = {m}, got {p}")));
    }
    if cfg.eps.is_empty() {
        return Err(CliError::Config("ε list is empty".into()));
    }
    if cfg.eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config("ε list must be strictly decreasing".into()));
    }
    if mesh.has_boundary() {
        return Err(Error::NotClosed(mesh.boundary().iter().filter(|b| **b).count()).into());
    }
    // Validate every ε before spending time on solves.
    let factors: Vec<_> = cfg.eps.iter().map(|&e| f_eps_smooth(mesh, e, p)).collect::<Result<_, _>>()?;
    let cases: Vec<Result<Case, CliError>> = ctx.map(&factors, |k, f| {
        let volume_before = volume(mesh, f)?;
        let h = normalize_unit_volume(mesh, f)?;
        let cold = solve_closed(mesh, &h, &case_options(cfg, k))?;
        Ok(Case { h, volume_before, cold })
    });
    let mut rows = Vec::with_capacity(cases.len());
    let mut previous: Option<ScalarField> = None;
    for (k, case) in cases.into_iter().enumerate() {
        let Case { h, volume_before, cold } = case?;
        let mut best = cold;
        let mut warm_start_won = false;
        if let Some(start) = &previous {
            let warm = solve_closed_from(mesh, &h, &case_options(cfg, k), start)?;
            if warm.lambda < best.lambda {
                best = warm;
                warm_start_won = true;
            }
        }
        let eps = cfg.eps[k];
        rows.push(SweepRow {
            eps,
            lambda: best.lambda,
            volume_before,
            lambda_scaled: best.lambda * eps.powf(p / m as f64),
            converged: best.converged,
            warm_start_won,
            iterations: best.iterations,
            gradient_residual: best.gradient_residual,
        });
        previous = Some(best.eigenfunction);
    }
    let strictly_increasing = rows.windows(2).all(|w| w[1].lambda > w[0].lambda);
    let scaled_nondecreasing = rows.windows(2).all(|w| w[1].lambda_scaled >= w[0].lambda_scaled);
    let growth = rows[rows.len() - 1].lambda / rows[0].lambda;
    Ok(SweepSummary { p, m, rows, strictly_increasing, scaled_nondecreasing, growth })
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let mesh = ctx.config.mesh.build(&ctx.base)?;
    let summary = compute(ctx, &mesh)?;
    let mut table = Table::new(&["eps", "lambda", "volume_before", "lambda_scaled", "converged"]);
    for r in &summary.rows {
        table.push(vec![r.eps.into(), r.lambda.into(), r.volume_before.into(), r.lambda_scaled.into(), r.converged.into()]);
    }
    let series = [
        Series { name: "λ".into(), points: summary.rows.iter().map(|r| (r.eps, r.lambda)).collect() },
        Series { name: "λ ε^(p/m)".into(), points: summary.rows.iter().map(|r| (r.eps, r.lambda_scaled)).collect() },
    ];
    let title = format!("unit-volume band metrics, p = {}, m = {}", summary.p, summary.m);
    ctx.artifacts.json(&summary)?;
    ctx.artifacts.rows(&table)?;
    ctx.artifacts.chart(&line_chart(&title, "ε", "eigenvalue", &series, true, true))?;
    ctx.artifacts.mesh(&mesh)?;
    for r in &summary.rows {
        println!("eps = {:<8} lambda = {:.10e}  lambda*eps^(p/m) = {:.6e}", r.eps, r.lambda, r.lambda_scaled);
    }
    if !summary.strictly_increasing {
        eprintln!("check failed: λ is not strictly increasing along the sweep");
    }
    if !summary.scaled_nondecreasing {
        eprintln!("check failed: λ ε^(p/m) decreases along the sweep");
    }
    Ok(Outcome::from_flags(summary.strictly_increasing && summary.scaled_nondecreasing, summary.converged()))
}
