//! Conformal factors `f > 0` defining metrics `g̃ = f·g` on a mesh.
//!
//! In dimension `m` the volume density of `g̃` against the base measure is
//! `f^{m/2}`, and the p-energy density `|du|^p_{g̃} ν_{g̃}` equals the base
//! `|du|^p` times `f^{(m−p)/2}`. Both powers are taken at the vertices and
//! then handed to the vertex-mean quadrature.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::mesh::{DiscreteManifold, MeshKind, ScalarField};

/// Minimum number of element layers across the equatorial band.
pub const BAND_RESOLUTION: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor(Vec<f64>);

impl ConformalFactor {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "conformal factor must be finite and positive, vertex {i} has {}",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    /// `f ≡ 1`, the base metric itself.
    pub fn identity(mesh: &DiscreteManifold) -> Self {
        Self(vec![1.0; mesh.num_vertices()])
    }

    pub fn constant(mesh: &DiscreteManifold, c: f64) -> Result<Self> {
        Self::new(vec![c; mesh.num_vertices()])
    }

    pub fn from_field(field: &ScalarField) -> Result<Self> {
        Self::new(field.values().to_vec())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_field(&self) -> ScalarField {
        ScalarField::new(self.0.clone()).expect("factor values are finite")
    }

    /// `c·f` for a constant `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }

    /// Restriction to a submesh given the parent index of each vertex.
    pub fn restrict(&self, parent: &[usize]) -> Self {
        Self(parent.iter().map(|&i| self.0[i]).collect())
    }

    pub fn check_aligned(&self, mesh: &DiscreteManifold) -> Result<()> {
        mesh.check_len(self.len())
    }

    /// Volume density `f^{m/2}` of `f·g` against `ν_g`.
    pub fn measure_density(&self, m: usize) -> ScalarField {
        let e = 0.5 * m as f64;
        ScalarField::new(self.0.iter().map(|f| f.powf(e)).collect()).expect("finite powers")
    }

    /// Weight `f^{(m−p)/2}` turning the base p-energy density into the one
    /// of `f·g`.
    pub fn energy_density_weight(&self, m: usize, p: f64) -> ScalarField {
        let e = 0.5 * (m as f64 - p);
        ScalarField::new(self.0.iter().map(|f| f.powf(e)).collect()).expect("finite powers")
    }

    /// Whether `f(x) = f(mirror(x))` exactly at every vertex.
    pub fn is_mirror_symmetric(&self, mesh: &DiscreteManifold) -> bool {
        match mesh.mirror() {
            Some(mirror) => mirror.iter().enumerate().all(|(i, &j)| self.0[i] == self.0[j]),
            None => false,
        }
    }
}

/// Plateau value `ε^{4p/(m(p−m))}` taken by the band family away from the
/// equator.
pub fn plateau_value(eps: f64, p: f64, m: usize) -> Result<f64> {
    let m = m as f64;
    if !(p > m) {
        return Err(Error::InvalidArgument(format!(
            "band family needs p > m, got p = {p}, m = {m}"
        )));
    }
    Ok(eps.powf(4.0 * p / (m * (p - m))))
}

fn check_band(mesh: &DiscreteManifold, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, π/2), got {eps}")));
    }
    let h = mesh.max_edge_angle();
    if eps < BAND_RESOLUTION * h {
        return Err(Error::InvalidArgument(format!(
            "ε = {eps} is under-resolved: need ε ≥ {BAND_RESOLUTION} × max edge ({h:.4e})"
        )));
    }
    folded_colatitudes(mesh)
}

/// Colatitude folded into `[0, π/2]`. On spheres it is computed as
/// `π/2 − asin|⟨x, pole⟩|` so that mirror-image vertices get bitwise equal
/// values.
fn folded_colatitudes(mesh: &DiscreteManifold) -> Result<Vec<f64>> {
    match (mesh.kind(), mesh.pole()) {
        (MeshKind::Sphere | MeshKind::Hemisphere, Some(pole)) => {
            let a = mesh.vertices()[pole];
            Ok(mesh
                .vertices()
                .iter()
                .map(|x| FRAC_PI_2 - (x[0] * a[0] + x[1] * a[1] + x[2] * a[2]).abs().min(1.0).asin())
                .collect())
        }
        _ => Ok(mesh.colatitudes()?.into_iter().map(|r| r.min(PI - r)).collect()),
    }
}

/// Indicator-type factor: 1 on the open band `|r − π/2| < ε`, plateau
/// value elsewhere.
pub fn f_eps_singular(mesh: &DiscreteManifold, eps: f64, p: f64) -> Result<ConformalFactor> {
    let plateau = plateau_value(eps, p, mesh.dim())?;
    let colat = check_band(mesh, eps)?;
    ConformalFactor::new(
        colat
            .iter()
            .map(|&r| if (r - FRAC_PI_2).abs() < eps { 1.0 } else { plateau })
            .collect(),
    )
}

/// Smooth radial factor below [`f_eps_singular`]: 1 on `|r − π/2| ≤ ε/2`,
/// plateau for `|r − π/2| ≥ ε`, quintic smoothstep in between.
pub fn f_eps_smooth(mesh: &DiscreteManifold, eps: f64, p: f64) -> Result<ConformalFactor> {
    let plateau = plateau_value(eps, p, mesh.dim())?;
    let colat = check_band(mesh, eps)?;
    let smooth = ConformalFactor::new(
        colat
            .iter()
            .map(|&r| smooth_band_profile(r, eps, plateau))
            .collect(),
    )?;
    let singular = f_eps_singular(mesh, eps, p)?;
    debug_assert!(smooth.0.iter().zip(&singular.0).all(|(a, b)| a <= b));
    Ok(smooth)
}

/// Value of the smooth band profile at colatitude `r`.
pub fn smooth_band_profile(r: f64, eps: f64, plateau: f64) -> f64 {
    let d = (r - FRAC_PI_2).abs();
    if d <= 0.5 * eps {
        1.0
    } else if d >= eps {
        plateau
    } else {
        let x = (eps - d) / (0.5 * eps);
        let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        (plateau + (1.0 - plateau) * s).min(1.0)
    }
}

/// `Vol(M, f·g) = ∫ f^{m/2} ν_g`.
pub fn volume(mesh: &DiscreteManifold, f: &ConformalFactor) -> Result<f64> {
    f.check_aligned(mesh)?;
    mesh.integrate(&f.measure_density(mesh.dim()))
}

/// `Vol^{−2/m}·f`, the unit-volume representative of the conformal class
/// direction `f`.
pub fn normalize_unit_volume(mesh: &DiscreteManifold, f: &ConformalFactor) -> Result<ConformalFactor> {
    let vol = volume(mesh, f)?;
    if !(vol > 0.0) {
        return Err(Error::Degenerate(format!("factor volume {vol} is not positive")));
    }
    f.scaled(vol.powf(-2.0 / mesh.dim() as f64))
}
