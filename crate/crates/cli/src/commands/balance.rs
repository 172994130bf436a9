use serde::Serialize;

use pspectra_core::conformal::normalize_unit_volume;
use pspectra_core::mobius::{balance, identity_image, lemma2_bound, Balancing};
use pspectra_core::psolve::solve_closed;
use pspectra_core::{ConformalFactor, DiscreteManifold, MeshKind};

use super::case_options;
use super::verify::factor_label;
use crate::error::CliError;
use crate::factors::FactorSpec;
use crate::output::Table;
use crate::{Context, Outcome};

pub const DEFAULT_BALANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct BalanceCase {
    pub density: FactorSpec,
    pub balancing: Balancing,
    /// `None` when balancing failed and no bound was evaluated.
    pub lemma_bound: Option<f64>,
    pub lambda: f64,
    pub converged: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceBatch {
    pub p: f64,
    pub tolerance: f64,
    pub slack: f64,
    pub cases: Vec<BalanceCase>,
}

impl BalanceBatch {
    pub fn all_balanced(&self) -> bool {
        self.cases.iter().all(|c| c.balancing.converged)
    }

    pub fn all_hold(&self) -> bool {
        self.cases.iter().all(|c| c.holds)
    }
}

/// For each density `f`: rescale to unit volume, balance the identity
/// immersion for the measure of `f·can`, evaluate the map-energy bound of
/// the balanced map and compare it with the solved eigenvalue.
pub fn compute(ctx: &Context, mesh: &DiscreteManifold) -> Result<BalanceBatch, CliError> {
    let cfg = &ctx.config;
    if mesh.kind() != MeshKind::Sphere {
        return Err(CliError::Config("balance needs an icosphere mesh".into()));
    }
    let tol = cfg.balance_tolerance.unwrap_or(DEFAULT_BALANCE_TOL);
    if !(tol > 0.0) {
        return Err(CliError::Config(format!("balance tolerance must be > 0, got {tol}")));
    }
    let mut specs = cfg.factor_list();
    if specs.is_empty() {
        specs.push(cfg.factor.clone());
    }
    let factors: Vec<ConformalFactor> = specs
        .iter()
        .map(|s| Ok(normalize_unit_volume(mesh, &s.build(mesh, cfg.p, &ctx.base)?)?))
        .collect::<Result<_, CliError>>()?;
    let image = identity_image(mesh)?;
    let slack = cfg.slack();
    let results = ctx.map(&factors, |k, h| -> Result<(Balancing, Option<f64>, f64, bool), CliError> {
        let density = h.measure_density(mesh.dim());
        let bal = balance(mesh, &image, &density, cfg.p, tol)?;
        let solved = solve_closed(mesh, h, &case_options(cfg, k))?;
        let bound = if bal.converged {
            let psi: Vec<[f64; 3]> = image.iter().map(|x| bal.map.apply(*x)).collect();
            Some(lemma2_bound(mesh, h, &psi, cfg.p, tol)?)
        } else {
            None
        };
        Ok((bal, bound, solved.lambda, solved.converged))
    });
    let mut cases = Vec::with_capacity(specs.len());
    for (spec, r) in specs.into_iter().zip(results) {
        let (balancing, lemma_bound, lambda, converged) = r?;
        let holds = lemma_bound.is_some_and(|b| lambda <= b * (1.0 + slack));
        cases.push(BalanceCase { density: spec, balancing, lemma_bound, lambda, converged, holds });
    }
    Ok(BalanceBatch { p: cfg.p, tolerance: tol, slack, cases })
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let mesh = ctx.config.mesh.build(&ctx.base)?;
    let batch = compute(ctx, &mesh)?;
    let mut table =
        Table::new(&["case", "density", "moment_norm", "t", "lemma_bound", "lambda", "slack", "balanced", "holds"]);
    for (k, c) in batch.cases.iter().enumerate() {
        let bound = c.lemma_bound.unwrap_or(f64::NAN);
        table.push(vec![
            k.into(),
            factor_label(&c.density).as_str().into(),
            c.balancing.moment_norm.into(),
            c.balancing.map.t().into(),
            bound.into(),
            c.lambda.into(),
            (bound - c.lambda).into(),
            c.balancing.converged.into(),
            c.holds.into(),
        ]);
        println!(
            "case {k}: |F| = {:.3e}, t = {:.6}, bound {:.8e}, lambda {:.8e}",
            c.balancing.moment_norm,
            c.balancing.map.t(),
            bound,
            c.lambda
        );
    }
    ctx.artifacts.json(&batch)?;
    ctx.artifacts.rows(&table)?;
    ctx.artifacts.mesh(&mesh)?;
    if !batch.all_balanced() {
        eprintln!("balancing did not reach ‖F‖ ≤ {:e}; best candidates are in results.json", batch.tolerance);
        return Ok(Outcome::NotConverged);
    }
    let converged = batch.cases.iter().all(|c| c.converged);
    Ok(Outcome::from_flags(batch.all_hold(), converged))
}
