use serde::Serialize;

use pspectra_core::bounds::{report, BoundReport, BoundSource};
use pspectra_core::conformal::normalize_unit_volume;
use pspectra_core::psolve::solve_closed;
use pspectra_core::{ConformalFactor, DiscreteManifold};

use super::case_options;
use crate::error::CliError;
use crate::factors::FactorSpec;
use crate::output::Table;
use crate::{Context, Outcome};

/// Scale applied to the bound by `--corrupt-bound`.
pub const CORRUPTION: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct BoundCase {
    pub factor: FactorSpec,
    pub report: BoundReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundBatch {
    pub bound_value: f64,
    pub corrupted: bool,
    pub cases: Vec<BoundCase>,
    pub all_hold: bool,
    /// Largest `λ / bound` over the batch.
    pub max_ratio: f64,
}

/// `ConformalVolume` with `V = 4π, n = 2` at `p = 2`, the genus-zero
/// surface bound otherwise.
pub fn default_source(p: f64) -> BoundSource {
    if p == 2.0 {
        BoundSource::ConformalVolume { n: 2, conformal_volume: 4.0 * std::f64::consts::PI }
    } else {
        BoundSource::Genus { genus: 0, orientable: true }
    }
}

pub fn compute(ctx: &Context, mesh: &DiscreteManifold, corrupt: bool) -> Result<BoundBatch, CliError> {
    let cfg = &ctx.config;
    let m = mesh.dim();
    if !(cfg.p > 1.0 && cfg.p <= m as f64) {
        return Err(CliError::Config(format!("bound checks need 1 < p ≤ m = {m}, got {}", cfg.p)));
    }
    if mesh.has_boundary() {
        return Err(CliError::Config("bound checks need a closed mesh".into()));
    }
    let source = cfg.bound.unwrap_or_else(|| default_source(cfg.p));
    let mut bound_value = source.evaluate(cfg.p, m)?;
    if corrupt {
        bound_value *= CORRUPTION;
    }
    let mut specs = Vec::new();
    if cfg.include_round {
        specs.push(FactorSpec::Identity);
    }
    specs.extend(cfg.factor_list());
    if specs.is_empty() {
        return Err(CliError::Config("no factors: set `factors`, `random_factors` or `include_round`".into()));
    }
    let factors: Vec<ConformalFactor> = specs
        .iter()
        .map(|s| Ok(normalize_unit_volume(mesh, &s.build(mesh, cfg.p, &ctx.base)?)?))
        .collect::<Result<_, CliError>>()?;
    let tolerance = cfg.slack();
    let results = ctx.map(&factors, |k, h| solve_closed(mesh, h, &case_options(cfg, k)));
    let mut cases = Vec::with_capacity(specs.len());
    for (spec, r) in specs.into_iter().zip(results) {
        let r = r?;
        let mut rep = report(bound_value, r.lambda, cfg.p, m, source, r.converged);
        rep.tolerance = tolerance;
        cases.push(BoundCase { factor: spec, report: rep });
    }
    let all_hold = cases.iter().all(|c| c.report.holds());
    let max_ratio = cases.iter().map(|c| c.report.computed_lambda / bound_value).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundBatch { bound_value, corrupted: corrupt, cases, all_hold, max_ratio })
}

pub fn run(ctx: &Context, corrupt: bool) -> Result<Outcome, CliError> {
    let mesh = ctx.config.mesh.build(&ctx.base)?;
    let batch = compute(ctx, &mesh, corrupt)?;
    let mut table = Table::new(&["case", "factor", "bound", "lambda", "slack", "ratio", "converged", "holds"]);
    for (k, c) in batch.cases.iter().enumerate() {
        let r = &c.report;
        table.push(vec![
            k.into(),
            factor_label(&c.factor).as_str().into(),
            r.bound_value.into(),
            r.computed_lambda.into(),
            r.slack.into(),
            (r.computed_lambda / r.bound_value).into(),
            r.converged.into(),
            r.holds().into(),
        ]);
    }
    ctx.artifacts.json(&batch)?;
    ctx.artifacts.rows(&table)?;
    ctx.artifacts.mesh(&mesh)?;
    let failed = batch.cases.iter().filter(|c| !c.report.holds()).count();
    println!(
        "bound = {:.10e}, max lambda/bound = {:.6}, {failed} of {} cases violate it",
        batch.bound_value,
        batch.max_ratio,
        batch.cases.len()
    );
    let converged = batch.cases.iter().all(|c| c.report.converged);
    Ok(Outcome::from_flags(batch.all_hold, converged))
}

pub fn factor_label(spec: &FactorSpec) -> String {
    match spec {
        FactorSpec::Identity => "identity".into(),
        FactorSpec::Constant { .. } => "constant".into(),
        FactorSpec::Csv { path } => format!("csv:{}", path.display()),
        FactorSpec::RandomSmooth { seed, .. } => format!("random:{seed}"),
        FactorSpec::RandomSymmetric { seed, .. } => format!("symmetric:{seed}"),
        FactorSpec::Cap { .. } => "cap".into(),
        FactorSpec::SmoothBand { eps } => format!("band:{eps}"),
    }
}
