use serde::Serialize;

use pspectra_core::conformal::{normalize_unit_volume, volume};
use pspectra_core::io::write_field_csv;
use pspectra_core::psolve::{solve_closed, solve_dirichlet, solve_neumann};
use pspectra_core::{MeshKind, SpectralResult};

use crate::config::Problem;
use crate::error::CliError;
use crate::output::Table;
use crate::{Context, Outcome};

#[derive(Debug, Serialize)]
struct EigenReport<'a> {
    command: &'static str,
    p: f64,
    problem: Problem,
    mesh: MeshKind,
    vertices: usize,
    volume: f64,
    result: &'a SpectralResult,
}

pub fn run(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let mesh = cfg.mesh.build(&ctx.base)?;
    let mut f = cfg.factor.build(&mesh, cfg.p, &ctx.base)?;
    if cfg.normalize_volume {
        f = normalize_unit_volume(&mesh, &f)?;
    }
    let opts = cfg.solve_options();
    let result = match cfg.problem {
        Problem::Closed => solve_closed(&mesh, &f, &opts)?,
        Problem::Neumann => solve_neumann(&mesh, &f, &opts)?,
        Problem::Dirichlet => {
            if f.values().iter().any(|x| *x != 1.0) {
                return Err(CliError::Config("Dirichlet problems use the base metric only".into()));
            }
            solve_dirichlet(&mesh, &opts)?
        }
    };
    let vol = volume(&mesh, &f)?;
    let report = EigenReport {
        command: "eigen",
        p: cfg.p,
        problem: cfg.problem,
        mesh: mesh.kind(),
        vertices: mesh.num_vertices(),
        volume: vol,
        result: &result,
    };
    let mut table = Table::new(&[
        "problem",
        "vertices",
        "volume",
        "lambda",
        "gradient_residual",
        "constraint_defect",
        "iterations",
        "converged",
    ]);
    let problem = match cfg.problem {
        Problem::Closed => "closed",
        Problem::Neumann => "neumann",
        Problem::Dirichlet => "dirichlet",
    };
    table.push(vec![
        problem.into(),
        mesh.num_vertices().into(),
        vol.into(),
        result.lambda.into(),
        result.gradient_residual.into(),
        result.constraint_defect.into(),
        result.iterations.into(),
        result.converged.into(),
    ]);
    ctx.artifacts.json(&report)?;
    ctx.artifacts.rows(&table)?;
    ctx.artifacts.write("eigenfunction.csv", &write_field_csv(&result.eigenfunction))?;
    ctx.artifacts.mesh(&mesh)?;
    println!("lambda = {} (converged: {})", result.lambda, result.converged);
    Ok(Outcome::from_flags(true, result.converged))
}
