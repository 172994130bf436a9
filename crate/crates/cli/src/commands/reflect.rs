use serde::Serialize;

use pspectra_core::psolve::reflect::{reflection_chain, ReflectionReport};
use pspectra_core::{ConformalFactor, DiscreteManifold, MeshKind};

use super::case_options;
use super::verify::factor_label;
use crate::error::CliError;
use crate::factors::FactorSpec;
use crate::output::Table;
use crate::{Context, Outcome};

/// Largest accepted p-mean defect of the reflected field.
pub const REFLECTED_DEFECT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ReflectCase {
    pub factor: FactorSpec,
    pub report: ReflectionReport,
    pub holds: bool,
    pub defect_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectBatch {
    pub slack: f64,
    pub cases: Vec<ReflectCase>,
}

impl ReflectBatch {
    pub fn all_hold(&self) -> bool {
        self.cases.iter().all(|c| c.holds && c.defect_ok)
    }

    pub fn converged(&self) -> bool {
        self.cases.iter().all(|c| c.report.closed_converged && c.report.neumann_converged)
    }
}

/// Runs the reflection chain for `factors` (or the single `factor` when the
/// list is empty). Asymmetric factors are rejected before any solve.
pub fn compute(ctx: &Context, sphere: &DiscreteManifold) -> Result<ReflectBatch, CliError> {
    let cfg = &ctx.config;
    if sphere.kind() != MeshKind::Sphere {
        return Err(CliError::Config("reflect needs an icosphere mesh".into()));
    }
    let mut specs = cfg.factor_list();
    if specs.is_empty() {
        specs.push(cfg.factor.clone());
    }
    let factors: Vec<ConformalFactor> =
        specs.iter().map(|s| s.build(sphere, cfg.p, &ctx.base)).collect::<Result<_, _>>()?;
    if let Some(k) = factors.iter().position(|f| !f.is_mirror_symmetric(sphere)) {
        return Err(CliError::Config(format!("factor {k} is not symmetric about the equator")));
    }
    let slack = cfg.slack();
    let results = ctx.map(&factors, |k, f| reflection_chain(sphere, f, &case_options(cfg, k)));
    let mut cases = Vec::with_capacity(specs.len());
    for (spec, r) in specs.into_iter().zip(results) {
        let report = r?;
        cases.push(ReflectCase {
            factor: spec,
            holds: report.holds(slack),
            defect_ok: report.reflected_defect <= REFLECTED_DEFECT_LIMIT,
            report,
        });
    }
    Ok(ReflectBatch { slack, cases })
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let sphere = ctx.config.mesh.build(&ctx.base)?;
    let batch = compute(ctx, &sphere)?;
    let mut table = Table::new(&[
        "case",
        "factor",
        "lambda_closed",
        "lambda_neumann",
        "reflected_quotient",
        "reflected_defect",
        "slack",
        "holds",
    ]);
    for (k, c) in batch.cases.iter().enumerate() {
        let r = &c.report;
        table.push(vec![
            k.into(),
            factor_label(&c.factor).as_str().into(),
            r.lambda_closed.into(),
            r.lambda_neumann.into(),
            r.reflected_quotient.into(),
            r.reflected_defect.into(),
            r.slack.into(),
            (c.holds && c.defect_ok).into(),
        ]);
        println!(
            "case {k}: closed {:.8e}  neumann {:.8e}  reflected {:.8e}  defect {:.2e}",
            r.lambda_closed, r.lambda_neumann, r.reflected_quotient, r.reflected_defect
        );
    }
    ctx.artifacts.json(&batch)?;
    ctx.artifacts.rows(&table)?;
    ctx.artifacts.mesh(&sphere)?;
    Ok(Outcome::from_flags(batch.all_hold(), batch.converged()))
}
