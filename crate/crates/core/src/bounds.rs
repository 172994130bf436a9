//! Closed-form upper bounds for the first eigenvalue under a volume
//! constraint, and their comparison with solved eigenvalues.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::conformal::{volume, ConformalFactor};
use crate::error::{Error, Result};
use crate::mesh::DiscreteManifold;
use crate::psolve::{solve_closed, SolveOptions};

/// Relative slack for comparing discrete eigenvalues with continuum bounds.
pub const MESH_SLACK: f64 = 0.02;

/// `m^{p/2} (n+1)^{|p/2−1|} V^{p/m}` for `1 < p ≤ m ≤ n`.
pub fn theorem1_bound(p: f64, m: usize, n: usize, conformal_volume: f64) -> Result<f64> {
    let mf = m as f64;
    if !(p > 1.0) || p > mf {
        return Err(Error::InvalidArgument(format!("the bound needs 1 < p ≤ m, got p = {p}, m = {m}")));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!("target dimension n = {n} is below m = {m}")));
    }
    if !(conformal_volume > 0.0) || !conformal_volume.is_finite() {
        return Err(Error::InvalidArgument(format!("conformal volume must be > 0, got {conformal_volume}")));
    }
    Ok(mf.powf(0.5 * p) * ((n + 1) as f64).powf((0.5 * p - 1.0).abs()) * conformal_volume.powf(p / mf))
}

/// Genus bound for surfaces, `k_p ⌊(genus+3)/2⌋^{p/2}` with
/// `k_p = 3^{|p/2−1|}(8π)^{p/2}` (orientable) or `5^{|p/2−1|}(24π)^{p/2}`.
pub fn corollary_surface_bound(p: f64, genus: u32, orientable: bool) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidArgument(format!("the surface bound needs 1 < p ≤ 2, got {p}")));
    }
    let bracket = ((genus as f64 + 3.0) / 2.0).floor();
    let (base, area) = if orientable { (3.0, 8.0 * PI) } else { (5.0, 24.0 * PI) };
    let k = f64::powf(base, (0.5 * p - 1.0).abs()) * area.powf(0.5 * p);
    Ok(k * bracket.powf(0.5 * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundSphere {
    /// The unit circle.
    S1,
    /// The unit 2-sphere.
    S2,
}

impl RoundSphere {
    pub fn dim(self) -> usize {
        match self {
            Self::S1 => 1,
            Self::S2 => 2,
        }
    }

    pub fn volume(self) -> f64 {
        match self {
            Self::S1 => 2.0 * PI,
            Self::S2 => 4.0 * PI,
        }
    }
}

/// `Vol(S^m, (λ₁,₂/m)·can)` with the round value `λ₁,₂ = m`, i.e. the
/// round volume.
pub fn canonical_conformal_volume(sphere: RoundSphere) -> f64 {
    sphere.volume()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertifiedVolume {
    pub value: f64,
    /// Solved `λ₁,₂` of the round sphere.
    pub lambda: f64,
    /// `|λ − m| / m`.
    pub lambda_error: f64,
}

/// As [`canonical_conformal_volume`], after checking on `mesh` that the
/// solved `λ₁,₂` equals `m` within [`MESH_SLACK`].
pub fn certified_canonical_conformal_volume(sphere: RoundSphere, mesh: &DiscreteManifold) -> Result<CertifiedVolume> {
    if mesh.dim() != sphere.dim() || mesh.has_boundary() {
        return Err(Error::InvalidArgument("mesh does not model the requested sphere".into()));
    }
    if (mesh.total_measure() - sphere.volume()).abs() > MESH_SLACK * sphere.volume() {
        return Err(Error::InvalidArgument("mesh is not a unit round sphere".into()));
    }
    let r = solve_closed(mesh, &ConformalFactor::identity(mesh), &SolveOptions::with_p(2.0))?;
    let m = sphere.dim() as f64;
    let lambda_error = (r.lambda - m).abs() / m;
    if lambda_error > MESH_SLACK {
        return Err(Error::Degenerate(format!("solved λ₁,₂ = {} is not within {MESH_SLACK} of {m}", r.lambda)));
    }
    Ok(CertifiedVolume { value: sphere.volume(), lambda: r.lambda, lambda_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundSource {
    ConformalVolume { n: usize, conformal_volume: f64 },
    Genus { genus: u32, orientable: bool },
    /// A precomputed bound value.
    Value { value: f64 },
}

impl BoundSource {
    pub fn evaluate(&self, p: f64, m: usize) -> Result<f64> {
        match *self {
            Self::ConformalVolume { n, conformal_volume } => theorem1_bound(p, m, n, conformal_volume),
            Self::Genus { genus, orientable } => {
                if m != 2 {
                    return Err(Error::InvalidArgument("the genus bound is for surfaces".into()));
                }
                corollary_surface_bound(p, genus, orientable)
            }
            Self::Value { value } => Ok(value),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub bound_value: f64,
    pub computed_lambda: f64,
    /// `bound − λ`.
    pub slack: f64,
    pub p: f64,
    pub m: usize,
    pub source: BoundSource,
    pub tolerance: f64,
    pub converged: bool,
}

impl BoundReport {
    /// `λ ≤ bound·(1 + tolerance)`.
    pub fn holds(&self) -> bool {
        self.computed_lambda <= self.bound_value * (1.0 + self.tolerance)
    }
}

/// Solves for `λ₁,p` of the unit-volume metric `f·g` and compares it with
/// the bound from `source`.
pub fn verify_bound(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    opts: &SolveOptions,
    source: BoundSource,
) -> Result<BoundReport> {
    let vol = volume(mesh, f)?;
    if !((vol - 1.0).abs() <= 1e-6) {
        return Err(Error::NotNormalized { volume: vol });
    }
    let m = mesh.dim();
    if !(opts.p > 1.0) || opts.p > m as f64 {
        return Err(Error::InvalidArgument(format!("bound check needs 1 < p ≤ m, got p = {}, m = {m}", opts.p)));
    }
    let bound_value = source.evaluate(opts.p, m)?;
    let r = solve_closed(mesh, f, opts)?;
    Ok(report(bound_value, r.lambda, opts.p, m, source, r.converged))
}

pub fn report(bound_value: f64, lambda: f64, p: f64, m: usize, source: BoundSource, converged: bool) -> BoundReport {
    BoundReport {
        bound_value,
        computed_lambda: lambda,
        slack: bound_value - lambda,
        p,
        m,
        source,
        tolerance: MESH_SLACK,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::normalize_unit_volume;

    #[test]
    fn theorem1_values() {
        assert!((theorem1_bound(2.0, 2, 2, 4.0 * PI).unwrap() - 8.0 * PI).abs() < 1e-12);
        let v = theorem1_bound(1.5, 2, 2, 4.0 * PI).unwrap();
        let expect = 2f64.powf(0.75) * 3f64.powf(0.25) * (4.0 * PI).powf(0.75);
        assert!((v - expect).abs() < 1e-12 * expect);
        let a = theorem1_bound(2.0, 2, 3, 5.0).unwrap();
        let b = theorem1_bound(2.0, 2, 3, 10.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
        assert!(theorem1_bound(3.0, 2, 2, 1.0).is_err());
        assert!(theorem1_bound(2.0, 2, 1, 1.0).is_err());
        assert!(theorem1_bound(2.0, 2, 2, 0.0).is_err());
    }

    #[test]
    fn prefactor_monotone_in_target_dimension() {
        for n in 2..10 {
            let up = |p| theorem1_bound(p, 2, n + 1, 1.0).unwrap() / theorem1_bound(p, 2, n, 1.0).unwrap();
            // The exponent |p/2 − 1| is positive on both sides of p = 2.
            assert!(up(1.5) >= 1.0);
            assert!(up(2.0) == 1.0);
        }
        for n in 3..10 {
            assert!(theorem1_bound(3.0, 3, n + 1, 1.0).unwrap() >= theorem1_bound(3.0, 3, n, 1.0).unwrap());
        }
    }

    #[test]
    fn genus_bracket() {
        assert!((corollary_surface_bound(2.0, 0, true).unwrap() - 8.0 * PI).abs() < 1e-12);
        assert!((corollary_surface_bound(2.0, 1, true).unwrap() - 16.0 * PI).abs() < 1e-12);
        assert!((corollary_surface_bound(2.0, 2, true).unwrap() - 16.0 * PI).abs() < 1e-12);
        assert!((corollary_surface_bound(2.0, 0, false).unwrap() - 24.0 * PI).abs() < 1e-12);
        let k15 = 3f64.powf(0.25) * (8.0 * PI).powf(0.75);
        assert!((corollary_surface_bound(1.5, 0, true).unwrap() - k15).abs() < 1e-12);
        for g in 0..20 {
            assert!(corollary_surface_bound(1.7, g + 1, true).unwrap() >= corollary_surface_bound(1.7, g, true).unwrap());
        }
        assert!(corollary_surface_bound(2.5, 0, true).is_err());
        assert!(corollary_surface_bound(1.0, 0, true).is_err());
        assert_eq!(
            theorem1_bound(2.0, 2, 2, canonical_conformal_volume(RoundSphere::S2)).unwrap(),
            corollary_surface_bound(2.0, 0, true).unwrap()
        );
    }

    #[test]
    fn certified_circle_volume() {
        let mesh = DiscreteManifold::circle(400, 2.0 * PI).unwrap();
        let c = certified_canonical_conformal_volume(RoundSphere::S1, &mesh).unwrap();
        assert!((c.value - 2.0 * PI).abs() < 1e-12);
        assert!(c.lambda_error < 0.01);
        let wrong = DiscreteManifold::circle(400, 3.0).unwrap();
        assert!(certified_canonical_conformal_volume(RoundSphere::S1, &wrong).is_err());
    }

    #[test]
    fn verify_requires_unit_volume() {
        let mesh = DiscreteManifold::icosphere(2).unwrap();
        let f = ConformalFactor::identity(&mesh);
        let src = BoundSource::Genus { genus: 0, orientable: true };
        assert!(matches!(verify_bound(&mesh, &f, &SolveOptions::default(), src), Err(Error::NotNormalized { .. })));
        let h = normalize_unit_volume(&mesh, &f).unwrap();
        let r = verify_bound(&mesh, &h, &SolveOptions::default(), src).unwrap();
        assert!(r.holds());
        assert!(r.computed_lambda > 0.9 * 8.0 * PI, "{r:?}");
        assert!(verify_bound(&mesh, &h, &SolveOptions::with_p(3.0), src).is_err());
    }
}
