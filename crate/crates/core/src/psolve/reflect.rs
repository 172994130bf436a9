//! Even reflection of hemisphere fields across the equator, and the
//! comparison between the closed sphere and the Neumann hemisphere.

use serde::Serialize;

use crate::conformal::ConformalFactor;
use crate::error::{Error, Result};
use crate::mesh::{DiscreteManifold, ScalarField, Submesh};
use crate::psolve::{rayleigh_quotient, signed_pow, solve_closed, solve_neumann, SolveOptions};

/// Extends a field on `hemi` to the whole sphere by `w(x) = v(mirror(x))`
/// below the equator.
pub fn reflect_even(hemi: &Submesh, v: &ScalarField, sphere: &DiscreteManifold) -> Result<ScalarField> {
    hemi.mesh.check_aligned(v)?;
    let mirror = sphere
        .mirror()
        .ok_or_else(|| Error::Asymmetric("sphere mesh has no mirror pairing".into()))?;
    let mut local = vec![usize::MAX; sphere.num_vertices()];
    for (i, &g) in hemi.parent.iter().enumerate() {
        if g >= sphere.num_vertices() {
            return Err(Error::InvalidArgument("hemisphere does not belong to this sphere".into()));
        }
        local[g] = i;
    }
    let mut w = vec![0.0; sphere.num_vertices()];
    for (j, wj) in w.iter_mut().enumerate() {
        let i = if local[j] != usize::MAX { local[j] } else { local[mirror[j]] };
        if i == usize::MAX {
            return Err(Error::Asymmetric(format!(
                "vertex {j} and its mirror image both lie outside the hemisphere"
            )));
        }
        *wj = v.values()[i];
    }
    ScalarField::new(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectionReport {
    pub p: f64,
    pub lambda_closed: f64,
    pub lambda_neumann: f64,
    /// Quotient of the reflected Neumann eigenfunction on the sphere.
    pub reflected_quotient: f64,
    /// `|∫|w|^{p−2}w f^{m/2} ν|` for the reflected field.
    pub reflected_defect: f64,
    /// `lambda_neumann − lambda_closed`.
    pub slack: f64,
    pub closed_converged: bool,
    pub neumann_converged: bool,
}

impl ReflectionReport {
    /// `λ_closed ≤ λ_neumann (1 + rel_slack)`.
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lambda_closed <= self.lambda_neumann * (1.0 + rel_slack)
    }
}

/// Solves the closed problem on `sphere` and the Neumann problem on the
/// hemisphere around the mesh pole, then reflects the Neumann
/// eigenfunction. The factor must be mirror symmetric.
pub fn reflection_chain(
    sphere: &DiscreteManifold,
    f: &ConformalFactor,
    opts: &SolveOptions,
) -> Result<ReflectionReport> {
    if !f.is_mirror_symmetric(sphere) {
        return Err(Error::Asymmetric("conformal factor is not equator symmetric".into()));
    }
    let pole = sphere.pole().ok_or_else(|| Error::InvalidArgument("sphere has no pole".into()))?;
    let hemi = sphere.extract_hemisphere(pole)?;
    let f_hemi = f.restrict(&hemi.parent);
    let closed = solve_closed(sphere, f, opts)?;
    let neumann = solve_neumann(&hemi.mesh, &f_hemi, opts)?;
    let w = reflect_even(&hemi, &neumann.eigenfunction, sphere)?;
    let reflected_quotient = rayleigh_quotient(sphere, f, opts.p, &w)?;
    let density = f.measure_density(sphere.dim());
    let reflected_defect = w
        .values()
        .iter()
        .zip(density.values())
        .zip(sphere.lumped_mass())
        .map(|((x, d), m)| m * d * signed_pow(*x, opts.p - 1.0))
        .sum::<f64>()
        .abs();
    Ok(ReflectionReport {
        p: opts.p,
        lambda_closed: closed.lambda,
        lambda_neumann: neumann.lambda,
        reflected_quotient,
        reflected_defect,
        slack: neumann.lambda - closed.lambda,
        closed_converged: closed.converged,
        neumann_converged: neumann.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflected_field_is_continuous_on_the_ring() {
        let sphere = DiscreteManifold::icosphere(3).unwrap();
        let hemi = sphere.extract_hemisphere(sphere.pole().unwrap()).unwrap();
        let v = ScalarField::from_fn(&hemi.mesh, |x, _| x[0] + x[2] * x[1]);
        let w = reflect_even(&hemi, &v, &sphere).unwrap();
        let mirror = sphere.mirror().unwrap();
        for (j, &k) in mirror.iter().enumerate() {
            assert_eq!(w.values()[j], w.values()[k]);
        }
        for (i, &g) in hemi.parent.iter().enumerate() {
            assert_eq!(w.values()[g], v.values()[i]);
        }
    }

    #[test]
    fn equatorial_coordinate_quotients_agree() {
        let sphere = DiscreteManifold::icosphere(4).unwrap();
        let f = ConformalFactor::identity(&sphere);
        let hemi = sphere.extract_hemisphere(sphere.pole().unwrap()).unwrap();
        let fh = f.restrict(&hemi.parent);
        let v = ScalarField::from_fn(&hemi.mesh, |x, _| x[0]);
        let w = reflect_even(&hemi, &v, &sphere).unwrap();
        let qs = rayleigh_quotient(&sphere, &f, 2.0, &w).unwrap();
        let qh = rayleigh_quotient(&hemi.mesh, &fh, 2.0, &v).unwrap();
        assert!((qs - qh).abs() < 1e-12 * qh);
        assert!((qs - 2.0).abs() < 0.05, "{qs}");
    }

    #[test]
    fn asymmetric_factor_is_rejected() {
        let sphere = DiscreteManifold::icosphere(2).unwrap();
        let f = ConformalFactor::new(sphere.vertices().iter().map(|v| 1.0 + 0.5 * v[2]).collect()).unwrap();
        assert!(matches!(
            reflection_chain(&sphere, &f, &SolveOptions::default()),
            Err(Error::Asymmetric(_))
        ));
    }
}
