//! Radial symmetrization about the pole and the band/plateau splitting of
//! a radial profile, with the comparisons that make the symmetrized field
//! a valid competitor.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::conformal::ConformalFactor;
use crate::error::{Error, Result};
use crate::mesh::{dot, norm, DiscreteManifold, MeshKind, ScalarField};

/// Minimum band width in element layers.
pub const MIN_BAND_LAYERS: f64 = 2.0;

/// A piecewise-linear function of the colatitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub value: Vec<f64>,
}

impl RadialProfile {
    pub fn new(r: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if r.len() != value.len() || r.len() < 2 {
            return Err(Error::InvalidArgument("profile needs ≥ 2 nodes with one value each".into()));
        }
        if r.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("profile radii must increase".into()));
        }
        if value.iter().chain(&r).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("profile must be finite".into()));
        }
        Ok(Self { r, value })
    }

    /// Linear interpolation, constant beyond the end nodes.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.value[0];
        }
        if r >= self.r[n - 1] {
            return self.value[n - 1];
        }
        let k = self.r.partition_point(|&x| x <= r) - 1;
        let t = (r - self.r[k]) / (self.r[k + 1] - self.r[k]);
        self.value[k] + t * (self.value[k + 1] - self.value[k])
    }

    /// Slope on each of the `n − 1` segments.
    pub fn slopes(&self) -> Vec<f64> {
        self.r
            .windows(2)
            .zip(self.value.windows(2))
            .map(|(r, v)| (v[1] - v[0]) / (r[1] - r[0]))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialAverage {
    /// `ū_k = (band mean of |u|^p)^{1/p}` at the band midpoints.
    pub profile: RadialProfile,
    /// `∫|u|^p f^{m/2} ν`.
    pub field_norm: f64,
    /// `∫ū^p f^{m/2} ν` with `ū` interpolated back onto the vertices.
    pub profile_norm: f64,
    /// `Σ_segments |Δū/Δr|^p × (f^{(m−p)/2}-weighted measure between the
    /// two band midpoints)`.
    pub profile_energy: f64,
    /// `∫|du|^p f^{(m−p)/2} ν`.
    pub field_energy: f64,
}

impl RadialAverage {
    /// `|profile_norm / field_norm − 1|`.
    pub fn norm_defect(&self) -> f64 {
        (self.profile_norm / self.field_norm - 1.0).abs()
    }

    /// Whether `profile_energy ≤ field_energy (1 + rel_tol)`.
    pub fn energy_bound_holds(&self, rel_tol: f64) -> bool {
        self.profile_energy <= self.field_energy * (1.0 + rel_tol)
    }
}

/// Band-averages `|u|^p` over `bands` equal colatitude bands covering the
/// mesh, with elements assigned by the colatitude of their centroid.
pub fn radial_average(
    mesh: &DiscreteManifold,
    u: &ScalarField,
    f: &ConformalFactor,
    p: f64,
    bands: usize,
) -> Result<RadialAverage> {
    mesh.check_aligned(u)?;
    f.check_aligned(mesh)?;
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    if !matches!(mesh.kind(), MeshKind::Sphere | MeshKind::Hemisphere | MeshKind::Circle { .. }) {
        return Err(Error::InvalidArgument("radial averaging needs a sphere, hemisphere or circle".into()));
    }
    let colat = mesh.colatitudes()?;
    let r_max = colat.iter().fold(0.0, |a: f64, &b| a.max(b));
    if bands < 2 {
        return Err(Error::InvalidArgument("need at least 2 bands".into()));
    }
    let width = r_max / bands as f64;
    let min_width = MIN_BAND_LAYERS * mesh.max_edge_angle();
    if width < min_width {
        return Err(Error::InvalidArgument(format!(
            "band width {width:.4} is below {MIN_BAND_LAYERS} element layers ({min_width:.4})"
        )));
    }

    let m = mesh.dim();
    let density = f.measure_density(m);
    let weight = f.energy_density_weight(m, p);
    let uv = u.values();
    let pole = mesh.vertices()[mesh.pole().expect("colatitudes imply a pole")];
    let band_of = |r: f64| ((r / width) as usize).min(bands - 1);

    let mut area = vec![0.0; bands];
    let mut moment = vec![0.0; bands];
    let mut centroid_r = Vec::with_capacity(mesh.num_elements());
    for (e, nodes) in mesh.elements().enumerate() {
        let r = element_colatitude(mesh, nodes, &colat, pole);
        centroid_r.push(r);
        let k = band_of(r);
        let a = mesh.element_measure()[e];
        let mean_up = nodes.iter().map(|&v| uv[v].abs().powf(p)).sum::<f64>() / nodes.len() as f64;
        area[k] += a;
        moment[k] += a * mean_up;
    }
    if let Some(k) = area.iter().position(|a| *a == 0.0) {
        return Err(Error::InvalidArgument(format!("band {k} contains no element")));
    }
    let radii: Vec<f64> = (0..bands).map(|k| (k as f64 + 0.5) * width).collect();
    let values: Vec<f64> = moment.iter().zip(&area).map(|(m, a)| (m / a).powf(1.0 / p)).collect();
    let profile = RadialProfile::new(radii, values)?;

    let lumped = mesh.lumped_mass();
    let field_norm: f64 = (0..uv.len()).map(|v| lumped[v] * density.values()[v] * uv[v].abs().powf(p)).sum();
    let profile_norm: f64 = (0..uv.len())
        .map(|v| lumped[v] * density.values()[v] * profile.eval(colat[v]).abs().powf(p))
        .sum();

    let slopes = profile.slopes();
    let mut seg_weight = vec![0.0; slopes.len()];
    let mut field_energy = 0.0;
    for (e, nodes) in mesh.elements().enumerate() {
        let a = mesh.element_measure()[e];
        let w = a * nodes.iter().map(|&v| weight.values()[v]).sum::<f64>() / nodes.len() as f64;
        field_energy += w * mesh.gradient_sq(e, uv).powf(0.5 * p);
        let r = centroid_r[e];
        if r >= profile.r[0] && r < profile.r[profile.r.len() - 1] {
            let j = profile.r.partition_point(|&x| x <= r) - 1;
            seg_weight[j] += w;
        }
    }
    let profile_energy = slopes.iter().zip(&seg_weight).map(|(s, w)| s.abs().powf(p) * w).sum();

    Ok(RadialAverage { profile, field_norm, profile_norm, profile_energy, field_energy })
}

fn element_colatitude(mesh: &DiscreteManifold, nodes: &[usize], colat: &[f64], pole: [f64; 3]) -> f64 {
    if mesh.dim() == 1 {
        return nodes.iter().map(|&v| colat[v]).sum::<f64>() / nodes.len() as f64;
    }
    let mut c = [0.0; 3];
    for &v in nodes {
        let x = mesh.vertices()[v];
        for i in 0..3 {
            c[i] += x[i];
        }
    }
    let n = norm(c);
    (dot(c, pole) / n).clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitDiagnostics {
    /// Largest `| |ū′|^p − |v′|^p − |w′|^p |` over segments, relative to
    /// `max |ū′|^p`.
    pub derivative_defect: f64,
    /// Largest `|ū|^p − 2^{p−1}(|v|^p + |w|^p)` over nodes (≤ 0 when the
    /// inequality holds), relative to `max |ū|^p`.
    pub convexity_excess: f64,
}

impl SplitDiagnostics {
    pub fn holds(&self, slack: f64) -> bool {
        self.derivative_defect <= slack && self.convexity_excess <= slack
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandSplit {
    /// The profile on `[r_0, π/2]` with a node inserted at `π/2 − ε`.
    pub profile: RadialProfile,
    /// Zero up to `π/2 − ε`, carries the variation inside the band.
    pub v: RadialProfile,
    /// The profile frozen at its value at `π/2 − ε` inside the band.
    pub w: RadialProfile,
    pub diagnostics: SplitDiagnostics,
}

/// Splits a profile on the upper half `[r_0, π/2]` into a part living in
/// the equatorial band `(π/2 − ε, π/2]` and a part frozen there.
pub fn split_band_plateau(profile: &RadialProfile, eps: f64, p: f64) -> Result<BandSplit> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    let cut = FRAC_PI_2 - eps;
    let first = profile.r[0];
    if !(eps > 0.0) || !(cut > first) || profile.r[profile.r.len() - 1] < cut {
        return Err(Error::InvalidArgument(format!(
            "ε = {eps} puts π/2 − ε outside the profile range [{first}, {}]",
            profile.r[profile.r.len() - 1]
        )));
    }
    let mut r = Vec::new();
    let mut u = Vec::new();
    for (&ri, &ui) in profile.r.iter().zip(&profile.value) {
        if ri > FRAC_PI_2 {
            break;
        }
        if ri > cut && r.last().is_some_and(|&l: &f64| l < cut) {
            r.push(cut);
            u.push(profile.eval(cut));
        }
        r.push(ri);
        u.push(ui);
    }
    if r.last().is_some_and(|&l| l < cut) {
        r.push(cut);
        u.push(profile.eval(cut));
    }
    if r.last().is_some_and(|&l| l < FRAC_PI_2) && profile.r[profile.r.len() - 1] >= FRAC_PI_2 {
        r.push(FRAC_PI_2);
        u.push(profile.eval(FRAC_PI_2));
    }
    let at_cut = profile.eval(cut);
    let w: Vec<f64> = r.iter().zip(&u).map(|(&ri, &ui)| if ri <= cut { ui } else { at_cut }).collect();
    let v: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
    let full = RadialProfile::new(r.clone(), u)?;
    let v = RadialProfile::new(r.clone(), v)?;
    let w = RadialProfile::new(r, w)?;

    let (su, sv, sw) = (full.slopes(), v.slopes(), w.slopes());
    let scale_d = su.iter().map(|s| s.abs().powf(p)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let derivative_defect = su
        .iter()
        .zip(sv.iter().zip(&sw))
        .map(|(a, (b, c))| (a.abs().powf(p) - b.abs().powf(p) - c.abs().powf(p)).abs())
        .fold(0.0, f64::max)
        / scale_d;
    let two = 2f64.powf(p - 1.0);
    let scale_v = full.value.iter().map(|x| x.abs().powf(p)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let convexity_excess = full
        .value
        .iter()
        .zip(v.value.iter().zip(&w.value))
        .map(|(a, (b, c))| a.abs().powf(p) - two * (b.abs().powf(p) + c.abs().powf(p)))
        .fold(f64::NEG_INFINITY, f64::max)
        / scale_v;
    Ok(BandSplit { profile: full, v, w, diagnostics: SplitDiagnostics { derivative_defect, convexity_excess } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Mean of `g` over the colatitude band `[lo, hi]` of the round sphere.
    fn band_mean(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let n = 2000;
        let h = (hi - lo) / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let r = lo + h * i as f64;
            num += w * g(r) * r.sin();
            den += w * r.sin();
        }
        num / den
    }

    #[test]
    fn equatorial_coordinate_profile() {
        let mesh = DiscreteManifold::icosphere(5).unwrap();
        let f = ConformalFactor::identity(&mesh);
        let x = ScalarField::from_fn(&mesh, |v, _| v[0]);
        let avg = radial_average(&mesh, &x, &f, 2.0, 24).unwrap();
        let width = PI / 24.0;
        for (&r, &val) in avg.profile.r.iter().zip(&avg.profile.value) {
            // The latitude-circle mean of x² is sin²r / 2.
            let expect = band_mean(|s| 0.5 * s.sin().powi(2), r - 0.5 * width, r + 0.5 * width).sqrt();
            assert!((val - expect).abs() <= 0.05 * expect, "r={r}: {val} vs {expect}");
        }
        assert!(avg.norm_defect() < 0.01, "{}", avg.norm_defect());
        assert!(avg.energy_bound_holds(0.01));
    }

    #[test]
    fn radial_field_is_reproduced() {
        let mesh = DiscreteManifold::icosphere(5).unwrap();
        let f = ConformalFactor::identity(&mesh);
        let z = ScalarField::from_fn(&mesh, |v, _| v[2]);
        let avg = radial_average(&mesh, &z, &f, 3.0, 16).unwrap();
        let width = PI / 16.0;
        for (&r, &val) in avg.profile.r.iter().zip(&avg.profile.value) {
            let expect = band_mean(|s| s.cos().abs().powi(3), r - 0.5 * width, r + 0.5 * width).cbrt();
            assert!((val - expect).abs() <= 0.02 * expect, "r={r}: {val} vs {expect}");
        }
        assert!(avg.energy_bound_holds(0.01), "{} vs {}", avg.profile_energy, avg.field_energy);
    }

    #[test]
    fn fine_binning_is_rejected() {
        let mesh = DiscreteManifold::icosphere(2).unwrap();
        let f = ConformalFactor::identity(&mesh);
        let z = ScalarField::from_fn(&mesh, |v, _| v[2]);
        assert!(radial_average(&mesh, &z, &f, 2.0, 200).is_err());
    }

    #[test]
    fn constant_profile_splits_into_zero_band_part() {
        let prof = RadialProfile::new(vec![0.1, 0.5, 1.0, 1.5], vec![2.0; 4]).unwrap();
        let s = split_band_plateau(&prof, 0.3, 2.0).unwrap();
        assert!(s.v.value.iter().all(|&x| x == 0.0));
        assert!(s.w.value.iter().all(|&x| x == 2.0));
    }

    #[test]
    fn band_only_profile_freezes_start_value() {
        let cut = FRAC_PI_2 - 0.4;
        let mut r: Vec<f64> = (0..=5).map(|k| cut * k as f64 / 5.0).collect();
        r.extend((1..=4).map(|k| cut + 0.1 * k as f64));
        let val: Vec<f64> = r.iter().map(|&x| if x <= cut { 1.0 } else { 1.0 + (x - cut) }).collect();
        let prof = RadialProfile::new(r, val).unwrap();
        let s = split_band_plateau(&prof, 0.4, 3.0).unwrap();
        for (&ri, &wi) in s.w.r.iter().zip(&s.w.value) {
            assert!((wi - 1.0).abs() < 1e-15, "r={ri}");
        }
        assert!(s.diagnostics.holds(1e-12));
    }

    #[test]
    fn epsilon_outside_range_is_rejected() {
        let prof = RadialProfile::new(vec![0.5, 1.0, 1.5], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(split_band_plateau(&prof, 1.2, 2.0).is_err());
        assert!(split_band_plateau(&prof, 0.0, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn split_identities_hold(
            steps in proptest::collection::vec(0.0f64..1.0, 8..40),
            eps in 0.05f64..1.0,
            p in 1.1f64..5.0,
        ) {
            let n = steps.len();
            let r: Vec<f64> = (0..n).map(|k| FRAC_PI_2 * k as f64 / (n - 1) as f64).collect();
            let mut acc = 0.0;
            let val: Vec<f64> = steps.iter().map(|s| { acc += s; acc }).collect();
            let prof = RadialProfile::new(r, val).unwrap();
            let s = split_band_plateau(&prof, eps, p).unwrap();
            prop_assert!(s.diagnostics.derivative_defect <= 1e-12, "{:?}", s.diagnostics);
            prop_assert!(s.diagnostics.convexity_excess <= 1e-12, "{:?}", s.diagnostics);
        }
    }
}
