//! Dilations `γ = π_a⁻¹ ∘ (e^κ·) ∘ π_a` of the unit sphere S² ⊂ R³, with
//! `κ = (1−t)/t`, the coordinate moment map, balancing, the coordinate
//! energy bound and the sup of pulled-back area over the dilation family.
//!
//! Rotations are left out throughout: they are isometries, so they change
//! neither volumes nor the solvability of the balancing condition.

use rayon::prelude::*;
use serde::Serialize;

use crate::conformal::{volume, ConformalFactor};
use crate::error::{Error, Result};
use crate::mesh::{cross, dot, norm, scale, sub, DiscreteManifold, MeshKind, ScalarField};
use crate::psolve::signed_pow;

/// Ambient dimension of the target sphere.
pub const AMBIENT: usize = 3;
/// Smallest admissible `t`; bounds the dilation factor by `e^{1e6}`.
pub const MIN_T: f64 = 1e-6;
const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusMap {
    pole: [f64; 3],
    t: f64,
}

impl MobiusMap {
    pub fn new(pole: [f64; 3], t: f64) -> Result<Self> {
        if !((norm(pole) - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidArgument(format!("pole must be a unit vector, |a| = {}", norm(pole))));
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!("t must lie in (0, 1], got {t}")));
        }
        Ok(Self { pole, t })
    }

    pub fn identity() -> Self {
        Self { pole: [0.0, 0.0, 1.0], t: 1.0 }
    }

    /// From the rapidity vector `y = κ a`; `y = 0` is the identity.
    pub fn from_rapidity(y: [f64; 3]) -> Self {
        let k = norm(y);
        if k == 0.0 {
            return Self::identity();
        }
        let t = (1.0 / (1.0 + k)).max(MIN_T);
        Self { pole: scale(y, 1.0 / k), t }
    }

    pub fn rapidity(&self) -> [f64; 3] {
        scale(self.pole, self.log_dilation())
    }

    pub fn pole(&self) -> [f64; 3] {
        self.pole
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `κ = (1−t)/t`.
    pub fn log_dilation(&self) -> f64 {
        (1.0 - self.t) / self.t
    }

    /// `e^{(1−t)/t}`.
    pub fn dilation(&self) -> f64 {
        self.log_dilation().exp()
    }

    /// The inverse map: the same dilation about the antipodal pole.
    pub fn inverse(&self) -> Self {
        Self { pole: scale(self.pole, -1.0), t: self.t }
    }

    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        if self.t == 1.0 {
            return x;
        }
        dilate_about(self.pole, self.log_dilation(), x)
    }
}

/// `π_a⁻¹(e^κ π_a(x))`, written without a chart: with `s = ⟨x, a⟩` and
/// `x⊥ = x − s a`,
/// `γ(x) = [2e^{−κ} x⊥ + ((1+s) − e^{−2κ}(1−s)) a] / ((1+s) + e^{−2κ}(1−s))`.
/// Any real `κ` is accepted.
pub fn dilate_about(a: [f64; 3], kappa: f64, x: [f64; 3]) -> [f64; 3] {
    let s = dot(x, a);
    let perp = sub(x, scale(a, s));
    let e1 = (-kappa).exp();
    let e2 = e1 * e1;
    let den = (1.0 + s) + e2 * (1.0 - s);
    if !(den > 0.0) || !den.is_finite() {
        return x;
    }
    let ca = ((1.0 + s) - e2 * (1.0 - s)) / den;
    let cp = 2.0 * e1 / den;
    let y = [cp * perp[0] + ca * a[0], cp * perp[1] + ca * a[1], cp * perp[2] + ca * a[2]];
    // Renormalize away the rounding drift.
    scale(y, 1.0 / norm(y))
}

pub fn apply_gamma(map: &MobiusMap, x: [f64; 3]) -> [f64; 3] {
    map.apply(x)
}

/// Orthonormal completion `(e₁, e₂)` of `a`: Gram–Schmidt against the
/// coordinate axes in order, skipping axes nearly parallel to `a`.
pub fn chart_frame(a: [f64; 3]) -> [[f64; 3]; 2] {
    let mut frame: Vec<[f64; 3]> = Vec::with_capacity(2);
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let mut v = sub(e, scale(a, dot(e, a)));
        for f in &frame {
            v = sub(v, scale(*f, dot(v, *f)));
        }
        let n = norm(v);
        if n > 0.5 {
            frame.push(scale(v, 1.0 / n));
            if frame.len() == 2 {
                break;
            }
        }
    }
    if frame.len() < 2 {
        // Only reachable through rounding; complete with a cross product.
        let e = cross(a, frame[0]);
        frame.push(scale(e, 1.0 / norm(e)));
    }
    [frame[0], frame[1]]
}

/// Stereographic projection from pole `a` onto the plane `a⊥`, in the
/// coordinates of [`chart_frame`].
pub fn stereographic(a: [f64; 3], x: [f64; 3]) -> Result<[f64; 2]> {
    if norm(sub(x, a)) < UNIT_TOL {
        return Err(Error::InvalidArgument("point coincides with the projection pole".into()));
    }
    let [e1, e2] = chart_frame(a);
    let d = 1.0 - dot(x, a);
    Ok([dot(x, e1) / d, dot(x, e2) / d])
}

pub fn inverse_stereographic(a: [f64; 3], y: [f64; 2]) -> [f64; 3] {
    let [e1, e2] = chart_frame(a);
    let r2 = y[0] * y[0] + y[1] * y[1];
    let mut x = [0.0; 3];
    for k in 0..3 {
        x[k] = (2.0 * (y[0] * e1[k] + y[1] * e2[k]) + (r2 - 1.0) * a[k]) / (r2 + 1.0);
    }
    x
}

fn check_image(mesh: &DiscreteManifold, image: &[[f64; 3]]) -> Result<()> {
    mesh.check_len(image.len())?;
    if let Some(i) = image.iter().position(|x| !((norm(*x) - 1.0).abs() <= UNIT_TOL)) {
        return Err(Error::InvalidArgument(format!("image point {i} is not on the unit sphere")));
    }
    Ok(())
}

/// The identity immersion of a sphere mesh.
pub fn identity_image(mesh: &DiscreteManifold) -> Result<Vec<[f64; 3]>> {
    if mesh.kind() != MeshKind::Sphere {
        return Err(Error::InvalidArgument("identity immersion needs a sphere mesh".into()));
    }
    Ok(mesh.vertices().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentVector {
    pub components: [f64; 3],
    pub measure_total: f64,
}

impl MomentVector {
    pub fn norm(&self) -> f64 {
        norm(self.components)
    }
}

/// `(1/Vol) ∫ |(γ∘φ)_i|^{p−2}(γ∘φ)_i · density ν` for `i = 1..3`.
pub fn moment_vector(
    mesh: &DiscreteManifold,
    image: &[[f64; 3]],
    density: &ScalarField,
    p: f64,
    map: &MobiusMap,
) -> Result<MomentVector> {
    check_image(mesh, image)?;
    mesh.check_aligned(density)?;
    check_p(p)?;
    let weights = quadrature_weights(mesh, density)?;
    let total: f64 = weights.iter().sum();
    Ok(MomentVector { components: moments(image, &weights, total, p, map), measure_total: total })
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be a finite value > 1, got {p}")));
    }
    Ok(())
}

fn quadrature_weights(mesh: &DiscreteManifold, density: &ScalarField) -> Result<Vec<f64>> {
    if density.values().iter().any(|d| *d < 0.0) {
        return Err(Error::InvalidArgument("density must be nonnegative".into()));
    }
    let w: Vec<f64> = mesh.lumped_mass().iter().zip(density.values()).map(|(m, d)| m * d).collect();
    if !(w.iter().sum::<f64>() > 0.0) {
        return Err(Error::Degenerate("density has zero total measure".into()));
    }
    Ok(w)
}

fn moments(image: &[[f64; 3]], weights: &[f64], total: f64, p: f64, map: &MobiusMap) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for (x, w) in image.iter().zip(weights) {
        let y = map.apply(*x);
        for k in 0..3 {
            acc[k] += w * signed_pow(y[k], p - 1.0);
        }
    }
    scale(acc, 1.0 / total)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Balancing {
    pub map: MobiusMap,
    pub moment_norm: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const GRID_KAPPAS: usize = 16;
const NELDER_MEAD_ITERS: usize = 400;
const NEWTON_ITERS: usize = 60;

/// Finds a dilation whose moment vector has norm at most `tol`.
///
/// Coarse search over the vertices of a level-1 icosphere times
/// log-spaced `κ`, Nelder–Mead on `‖F‖²` over the rapidity vector, then a
/// damped Newton polish with a central-difference Jacobian. On failure the
/// best map found is returned with `converged = false`.
pub fn balance(
    mesh: &DiscreteManifold,
    image: &[[f64; 3]],
    density: &ScalarField,
    p: f64,
    tol: f64,
) -> Result<Balancing> {
    check_image(mesh, image)?;
    mesh.check_aligned(density)?;
    check_p(p)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let weights = quadrature_weights(mesh, density)?;
    let total: f64 = weights.iter().sum();
    let eval = |y: [f64; 3]| moments(image, &weights, total, p, &MobiusMap::from_rapidity(y));
    let mut evaluations = 1;
    let f0 = eval([0.0; 3]);
    if norm(f0) <= tol {
        return Ok(Balancing { map: MobiusMap::identity(), moment_norm: norm(f0), evaluations, converged: true });
    }

    let dirs = DiscreteManifold::icosphere(1)?.vertices().to_vec();
    let kappas: Vec<f64> = (0..GRID_KAPPAS)
        .map(|i| (1e-2f64.ln() + (20f64.ln() - 1e-2f64.ln()) * i as f64 / (GRID_KAPPAS - 1) as f64).exp())
        .collect();
    let grid: Vec<[f64; 3]> = dirs.iter().flat_map(|d| kappas.iter().map(move |k| scale(*d, *k))).collect();
    let scores: Vec<f64> = grid.par_iter().map(|y| norm(eval(*y))).collect();
    evaluations += grid.len();
    let (mut best_y, mut best_n) = ([0.0; 3], norm(f0));
    for (y, s) in grid.iter().zip(&scores) {
        if *s < best_n {
            best_y = *y;
            best_n = *s;
        }
    }

    let objective = |y: [f64; 3]| {
        let f = eval(y);
        dot(f, f)
    };
    let step0 = 0.25 * norm(best_y).max(0.2);
    let (y_nm, used) = nelder_mead(&objective, best_y, step0, NELDER_MEAD_ITERS, tol * tol);
    evaluations += used;
    let n_nm = norm(eval(y_nm));
    if n_nm < best_n {
        best_y = y_nm;
        best_n = n_nm;
    }

    let (y, n, used) = newton_polish(&eval, best_y, best_n, tol);
    evaluations += used;
    if n < best_n {
        best_y = y;
        best_n = n;
    }
    Ok(Balancing {
        map: MobiusMap::from_rapidity(best_y),
        moment_norm: best_n,
        evaluations,
        converged: best_n <= tol,
    })
}

fn nelder_mead(f: &impl Fn([f64; 3]) -> f64, x0: [f64; 3], step: f64, max_iter: usize, ftol: f64) -> ([f64; 3], usize) {
    let mut simplex: Vec<([f64; 3], f64)> = vec![(x0, f(x0))];
    for k in 0..3 {
        let mut x = x0;
        x[k] += step;
        simplex.push((x, f(x)));
    }
    let mut used = 4;
    let lerp = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * (b[0] - a[0]), a[1] + c * (b[1] - a[1]), a[2] + c * (b[2] - a[2])];
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= ftol {
            break;
        }
        let mut centroid = [0.0; 3];
        for (x, _) in &simplex[..3] {
            for k in 0..3 {
                centroid[k] += x[k] / 3.0;
            }
        }
        let worst = simplex[3];
        let xr = lerp(centroid, worst.0, -1.0);
        let fr = f(xr);
        used += 1;
        if fr < simplex[0].1 {
            let xe = lerp(centroid, worst.0, -2.0);
            let fe = f(xe);
            used += 1;
            simplex[3] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (xr, fr);
        } else {
            let xc = lerp(centroid, worst.0, 0.5);
            let fc = f(xc);
            used += 1;
            if fc < worst.1 {
                simplex[3] = (xc, fc);
            } else {
                let x_best = simplex[0].0;
                for item in simplex.iter_mut().skip(1) {
                    let x = lerp(x_best, item.0, 0.5);
                    *item = (x, f(x));
                    used += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, used)
}

fn newton_polish(eval: &impl Fn([f64; 3]) -> [f64; 3], mut y: [f64; 3], mut n: f64, tol: f64) -> ([f64; 3], f64, usize) {
    let mut used = 0;
    let mut fy = eval(y);
    used += 1;
    for _ in 0..NEWTON_ITERS {
        if n <= tol {
            break;
        }
        let h = 1e-6 * norm(y).max(1.0);
        let mut jac = [[0.0; 3]; 3];
        for k in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[k] += h;
            ym[k] -= h;
            let (fp, fm) = (eval(yp), eval(ym));
            used += 2;
            for i in 0..3 {
                jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let Some(d) = solve3(jac, scale(fy, -1.0)) else { break };
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let yt = [y[0] + step * d[0], y[1] + step * d[1], y[2] + step * d[2]];
            let ft = eval(yt);
            used += 1;
            let nt = norm(ft);
            if nt < n {
                y = yt;
                fy = ft;
                n = nt;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (y, n, used)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = dot(a[0], cross(a[1], a[2]));
    if !(det.abs() > 1e-300) || !det.is_finite() {
        return None;
    }
    // Cramer's rule on columns.
    let col = |k: usize| [a[0][k], a[1][k], a[2][k]];
    let (c0, c1, c2) = (col(0), col(1), col(2));
    let d = dot(c0, cross(c1, c2));
    Some([dot(b, cross(c1, c2)) / d, dot(c0, cross(b, c2)) / d, dot(c0, cross(c1, b)) / d])
}

/// `(n+1)^{|p/2−1|}` with `n = 2`.
pub fn lemma2_prefactor(p: f64, n: usize) -> f64 {
    ((n + 1) as f64).powf((0.5 * p - 1.0).abs())
}

/// `(n+1)^{|p/2−1|} ∫ |dψ|^p_g ν_g` for the metric `g = f·can`, with
/// `|dψ|` the Hilbert–Schmidt norm of the differential of the image map.
///
/// The metric must have unit volume and `ψ` must be balanced for the
/// measure of `g` to within `10·tol`.
pub fn lemma2_bound(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    psi: &[[f64; 3]],
    p: f64,
    tol: f64,
) -> Result<f64> {
    check_image(mesh, psi)?;
    f.check_aligned(mesh)?;
    check_p(p)?;
    let vol = volume(mesh, f)?;
    if !((vol - 1.0).abs() <= 1e-6) {
        return Err(Error::NotNormalized { volume: vol });
    }
    let density = f.measure_density(mesh.dim());
    let defect = moment_vector(mesh, psi, &density, p, &MobiusMap::identity())?.norm();
    if defect > 10.0 * tol {
        return Err(Error::Unbalanced { defect, limit: 10.0 * tol });
    }
    Ok(lemma2_prefactor(p, AMBIENT - 1) * map_energy(mesh, f, psi, p)?)
}

/// `∫ |dψ|^p_g ν_g` for `g = f·can`.
pub fn map_energy(mesh: &DiscreteManifold, f: &ConformalFactor, psi: &[[f64; 3]], p: f64) -> Result<f64> {
    check_image(mesh, psi)?;
    f.check_aligned(mesh)?;
    let weight = f.energy_density_weight(mesh.dim(), p);
    let coords: Vec<Vec<f64>> = (0..3).map(|k| psi.iter().map(|x| x[k]).collect()).collect();
    let measure = mesh.element_measure();
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let hs: f64 = coords.iter().map(|c| mesh.gradient_sq(e, c)).sum();
        let nodes = mesh.element(e);
        let w = nodes.iter().map(|&v| weight.values()[v]).sum::<f64>() / nodes.len() as f64;
        total += measure[e] * w * hs.powf(0.5 * p);
    }
    Ok(total)
}

/// Area of the geodesic triangle spanned by three unit vectors.
pub fn spherical_triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let triple = dot(a, cross(b, c)).abs();
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * triple.atan2(den)
}

/// Total area of the image triangles `γ(φ(T))`, each taken as the
/// geodesic triangle on the image vertices.
pub fn image_area(mesh: &DiscreteManifold, image: &[[f64; 3]], map: &MobiusMap) -> Result<f64> {
    check_image(mesh, image)?;
    if mesh.dim() != 2 {
        return Err(Error::InvalidArgument("image area needs a surface mesh".into()));
    }
    Ok(area_of(mesh, image, map))
}

fn area_of(mesh: &DiscreteManifold, image: &[[f64; 3]], map: &MobiusMap) -> f64 {
    let mapped: Vec<[f64; 3]> = image.iter().map(|x| map.apply(*x)).collect();
    mesh.elements()
        .map(|t| spherical_triangle_area(mapped[t[0]], mapped[t[1]], mapped[t[2]]))
        .sum()
}

/// Image area, or `None` when some image edge exceeds
/// [`MAX_IMAGE_EDGE`] and the image triangles no longer resolve the map.
fn resolved_area(mesh: &DiscreteManifold, image: &[[f64; 3]], map: &MobiusMap) -> Option<f64> {
    let mapped: Vec<[f64; 3]> = image.iter().map(|x| map.apply(*x)).collect();
    let limit = 2.0 * (0.5 * MAX_IMAGE_EDGE).sin();
    let mut total = 0.0;
    for t in mesh.elements() {
        let (a, b, c) = (mapped[t[0]], mapped[t[1]], mapped[t[2]]);
        if norm(sub(a, b)) > limit || norm(sub(b, c)) > limit || norm(sub(c, a)) > limit {
            return None;
        }
        total += spherical_triangle_area(a, b, c);
    }
    Some(total)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupVolume {
    /// Largest image area found; a lower estimate of the sup.
    pub value: f64,
    pub map: MobiusMap,
    pub evaluations: usize,
    /// Whether the search stopped on its budget rather than on step size.
    pub budget_exhausted: bool,
}

const SUP_T_VALUES: usize = 32;
/// Largest image edge, in radians, for which a candidate map counts.
pub const MAX_IMAGE_EDGE: f64 = 0.5;
const SUP_MIN_STEP: f64 = 1e-4;

/// Maximizes the image area over the dilation family: poles from a level-2
/// icosphere times 32 log-spaced `t` in `[1e-3, 1]`, then compass search
/// over the rapidity vector. `budget` caps the compass-search evaluations.
/// Candidates stretching an image edge beyond [`MAX_IMAGE_EDGE`] are
/// skipped; the identity is always a candidate.
pub fn sup_volume_over_gamma(mesh: &DiscreteManifold, image: &[[f64; 3]], budget: usize) -> Result<SupVolume> {
    check_image(mesh, image)?;
    if mesh.dim() != 2 {
        return Err(Error::InvalidArgument("sup volume needs a surface mesh".into()));
    }
    let poles = DiscreteManifold::icosphere(2)?.vertices().to_vec();
    let ts: Vec<f64> = (0..SUP_T_VALUES)
        .map(|i| (1e-3f64.ln() * (1.0 - i as f64 / (SUP_T_VALUES - 1) as f64)).exp())
        .collect();
    let mut grid = vec![MobiusMap::identity()];
    for a in &poles {
        for &t in &ts {
            if t < 1.0 {
                grid.push(MobiusMap { pole: *a, t });
            }
        }
    }
    let areas: Vec<f64> = grid
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            if i == 0 {
                area_of(mesh, image, m)
            } else {
                resolved_area(mesh, image, m).unwrap_or(f64::NEG_INFINITY)
            }
        })
        .collect();
    let mut evaluations = grid.len();
    // Lowest grid index wins ties.
    let mut best = 0;
    for (i, a) in areas.iter().enumerate() {
        if *a > areas[best] {
            best = i;
        }
    }
    let mut y = grid[best].rapidity();
    let mut value = areas[best];
    let mut step = 0.25 * norm(y).max(0.2);
    let mut used = 0;
    while step > SUP_MIN_STEP && used < budget {
        let mut improved = false;
        for k in 0..6 {
            let mut yt = y;
            yt[k / 2] += if k % 2 == 0 { step } else { -step };
            let v = resolved_area(mesh, image, &MobiusMap::from_rapidity(yt)).unwrap_or(f64::NEG_INFINITY);
            used += 1;
            if v > value {
                value = v;
                y = yt;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    evaluations += used;
    Ok(SupVolume {
        value,
        map: MobiusMap::from_rapidity(y),
        evaluations,
        budget_exhausted: step > SUP_MIN_STEP,
    })
}

/// Pointwise inequalities between power sums used by the coordinate
/// energy bound. Each function returns the signed violation
/// `(lhs − rhs) / max(1, |rhs|)`, which is `≤ 0` when the inequality
/// holds.
pub mod inequalities {
    fn rel(lhs: f64, rhs: f64) -> f64 {
        (lhs - rhs) / rhs.abs().max(1.0)
    }

    /// `Σ s_i^{p/2} ≤ (Σ s_i)^{p/2}` for `s_i ≥ 0`, `p ≥ 2`.
    pub fn superadditive_power_excess(s: &[f64], p: f64) -> f64 {
        let lhs: f64 = s.iter().map(|x| x.powf(0.5 * p)).sum();
        rel(lhs, s.iter().sum::<f64>().powf(0.5 * p))
    }

    /// `(k)^{1−p/2} (Σ ψ_i²)^{p/2} ≤ Σ |ψ_i|^p` for `p ≥ 2`, `k` entries.
    pub fn convex_power_mean_deficit(psi: &[f64], p: f64) -> f64 {
        let k = psi.len() as f64;
        let sq: f64 = psi.iter().map(|x| x * x).sum();
        let lhs = k.powf(1.0 - 0.5 * p) * sq.powf(0.5 * p);
        rel(lhs, psi.iter().map(|x| x.abs().powf(p)).sum())
    }

    /// `Σ ψ_i² ≤ Σ |ψ_i|^p` for `|ψ_i| ≤ 1`, `1 < p < 2`.
    pub fn small_entry_power_deficit(psi: &[f64], p: f64) -> f64 {
        let lhs: f64 = psi.iter().map(|x| x * x).sum();
        rel(lhs, psi.iter().map(|x| x.abs().powf(p)).sum())
    }

    /// `Σ s_i^{p/2} ≤ k^{1−p/2} (Σ s_i)^{p/2}` for `s_i ≥ 0`, `1 < p < 2`.
    pub fn concave_power_mean_excess(s: &[f64], p: f64) -> f64 {
        let k = s.len() as f64;
        let lhs: f64 = s.iter().map(|x| x.powf(0.5 * p)).sum();
        rel(lhs, k.powf(1.0 - 0.5 * p) * s.iter().sum::<f64>().powf(0.5 * p))
    }
}

#[cfg(test)]
mod tests {
    use super::inequalities::*;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = norm(v);
            if n > 0.1 && n <= 1.0 {
                return scale(v, 1.0 / n);
            }
        }
    }

    #[test]
    fn chart_basics() {
        let a = [0.0, 0.6, 0.8];
        let o = stereographic(a, scale(a, -1.0)).unwrap();
        assert!(o[0].abs() < 1e-15 && o[1].abs() < 1e-15);
        let [e1, _] = chart_frame(a);
        let y = stereographic(a, e1).unwrap();
        assert!((y[0].hypot(y[1]) - 1.0).abs() < 1e-14);
        assert!(stereographic(a, a).is_err());
    }

    #[test]
    fn chart_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let a = random_unit(&mut rng);
            let x = random_unit(&mut rng);
            if norm(sub(x, a)) < 1e-3 {
                continue;
            }
            let back = inverse_stereographic(a, stereographic(a, x).unwrap());
            worst = worst.max(norm(sub(back, x)));
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn dilation_matches_chart_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_unit(&mut rng);
            let x = random_unit(&mut rng);
            let t: f64 = rng.gen_range(0.05..1.0);
            let map = MobiusMap::new(a, t).unwrap();
            let y = stereographic(a, x).unwrap();
            let k = map.dilation();
            let via_chart = inverse_stereographic(a, [k * y[0], k * y[1]]);
            assert!(norm(sub(via_chart, map.apply(x))) < 1e-10);
        }
    }

    #[test]
    fn group_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_unit(&mut rng);
        let id = MobiusMap::new(a, 1.0).unwrap();
        let map = MobiusMap::new(a, 0.3).unwrap();
        assert!(norm(sub(map.apply(a), a)) < 1e-15);
        assert!(norm(sub(map.apply(scale(a, -1.0)), scale(a, -1.0))) < 1e-15);
        for _ in 0..500 {
            let x = random_unit(&mut rng);
            assert_eq!(id.apply(x), x);
            let y = map.apply(x);
            assert!((norm(y) - 1.0).abs() < 1e-12);
            assert!(norm(sub(map.inverse().apply(y), x)) < 1e-9);
            assert!(norm(sub(dilate_about(a, -map.log_dilation(), y), x)) < 1e-9);
        }
        assert!(MobiusMap::new([1.0, 1.0, 0.0], 0.5).is_err());
        assert!(MobiusMap::new([1.0, 0.0, 0.0], 0.0).is_err());
        assert!(MobiusMap::new([1.0, 0.0, 0.0], 1.5).is_err());
    }

    #[test]
    fn moments_of_symmetric_sphere() {
        let mesh = DiscreteManifold::icosphere(3).unwrap();
        let image = identity_image(&mesh).unwrap();
        let density = ScalarField::constant(mesh.num_vertices(), 1.0);
        // The mesh is odd under y ↦ −y and z ↦ −z; x only cancels for p = 2
        // through the five-fold symmetry about the pole.
        for &p in &[1.5, 2.0, 3.0] {
            let f = moment_vector(&mesh, &image, &density, p, &MobiusMap::identity()).unwrap();
            assert!(f.components[1].abs() < 1e-9 && f.components[2].abs() < 1e-12, "p={p}: {f:?}");
        }
        let f = moment_vector(&mesh, &image, &density, 2.0, &MobiusMap::identity()).unwrap();
        assert!(f.norm() < 1e-10, "{f:?}");
        // p = 2 gives plain coordinate means.
        let dens = ScalarField::from_fn(&mesh, |v, _| 1.0 + 0.5 * v[0]);
        let f = moment_vector(&mesh, &image, &dens, 2.0, &MobiusMap::identity()).unwrap();
        let mean_x = mesh.integrate(&ScalarField::from_fn(&mesh, |v, _| v[0] * (1.0 + 0.5 * v[0]))).unwrap()
            / mesh.integrate(&dens).unwrap();
        assert!((f.components[0] - mean_x).abs() < 1e-14);
    }

    #[test]
    fn moments_concentrate_at_small_t() {
        let mesh = DiscreteManifold::icosphere(3).unwrap();
        let image = identity_image(&mesh).unwrap();
        let density = ScalarField::constant(mesh.num_vertices(), 1.0);
        let a = scale([0.3, -0.5, 0.8], 1.0 / norm([0.3, -0.5, 0.8]));
        for &p in &[1.5, 3.0] {
            let f = moment_vector(&mesh, &image, &density, p, &MobiusMap::new(a, 1e-3).unwrap()).unwrap();
            for k in 0..3 {
                assert!((f.components[k] - signed_pow(a[k], p - 1.0)).abs() < 1e-2, "p={p}: {f:?}");
            }
        }
    }

    #[test]
    fn uniform_measure_is_already_balanced() {
        let mesh = DiscreteManifold::icosphere(3).unwrap();
        let image = identity_image(&mesh).unwrap();
        let b = balance(&mesh, &image, &ScalarField::constant(mesh.num_vertices(), 1.0), 2.0, 1e-8).unwrap();
        assert!(b.converged);
        assert_eq!(b.map.t(), 1.0);
    }

    #[test]
    fn cap_density_is_balanced() {
        let mesh = DiscreteManifold::icosphere(4).unwrap();
        let image = identity_image(&mesh).unwrap();
        let dens = ScalarField::from_fn(&mesh, |v, _| 0.05 + (4.0 * (v[2] - 1.0)).exp() + 0.3 * (v[0] + 1.0).powi(3));
        for &p in &[1.7, 2.0, 3.0] {
            let b = balance(&mesh, &image, &dens, p, 1e-6).unwrap();
            assert!(b.converged, "p={p}: {b:?}");
            let f = moment_vector(&mesh, &image, &dens, p, &b.map).unwrap();
            assert!(f.norm() <= 1e-6);
            assert!(b.map.t() < 1.0);
        }
    }

    /// Ball automorphism `x ↦ [(1−|b|²)(x−b) − |x−b|² b] / (1 − 2⟨x,b⟩ + |x|²|b|²)`,
    /// which sends `b` to the origin.
    fn ball_translation(b: [f64; 3], x: [f64; 3]) -> [f64; 3] {
        let b2 = dot(b, b);
        let d = sub(x, b);
        let d2 = dot(d, d);
        let den = 1.0 - 2.0 * dot(x, b) + dot(x, x) * b2;
        scale(sub(scale(d, 1.0 - b2), scale(b, d2)), 1.0 / den)
    }

    /// Independent center-of-mass normalization: Newton on `b` for the
    /// weighted mean of the translated points.
    fn center_of_mass_normalization(points: &[[f64; 3]], w: &[f64]) -> [f64; 3] {
        let total: f64 = w.iter().sum();
        let mean = |b: [f64; 3]| {
            let mut m = [0.0; 3];
            for (x, wi) in points.iter().zip(w) {
                let y = ball_translation(b, *x);
                for k in 0..3 {
                    m[k] += wi * y[k] / total;
                }
            }
            m
        };
        let mut b = [0.0; 3];
        for _ in 0..50 {
            let m = mean(b);
            if norm(m) < 1e-14 {
                break;
            }
            let h = 1e-7;
            let mut jac = [[0.0; 3]; 3];
            for k in 0..3 {
                let mut bp = b;
                bp[k] += h;
                let mp = mean(bp);
                for i in 0..3 {
                    jac[i][k] = (mp[i] - m[i]) / h;
                }
            }
            let d = solve3(jac, scale(m, -1.0)).unwrap();
            b = [b[0] + d[0], b[1] + d[1], b[2] + d[2]];
        }
        b
    }

    #[test]
    fn p2_balancing_matches_center_of_mass() {
        let mesh = DiscreteManifold::icosphere(4).unwrap();
        let image = identity_image(&mesh).unwrap();
        let dens = ScalarField::from_fn(&mesh, |v, _| 0.2 + (3.0 * (v[2] - 1.0)).exp() + 0.5 * (v[1] + 1.0).powi(2));
        let bal = balance(&mesh, &image, &dens, 2.0, 1e-10).unwrap();
        assert!(bal.converged, "{bal:?}");
        let w: Vec<f64> = mesh.lumped_mass().iter().zip(dens.values()).map(|(m, d)| m * d).collect();
        let b = center_of_mass_normalization(&image, &w);
        let mut worst: f64 = 0.0;
        for x in &image {
            worst = worst.max(norm(sub(bal.map.apply(*x), ball_translation(b, *x))));
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn prefactors() {
        assert_eq!(lemma2_prefactor(2.0, 2), 1.0);
        assert!((lemma2_prefactor(1.5, 2) - 3f64.powf(0.25)).abs() < 1e-15);
        assert!((lemma2_prefactor(3.0, 2) - 3f64.powf(0.5)).abs() < 1e-15);
    }

    #[test]
    fn identity_bound_on_round_sphere() {
        let mesh = DiscreteManifold::icosphere(3).unwrap();
        let image = identity_image(&mesh).unwrap();
        let f = crate::conformal::normalize_unit_volume(&mesh, &ConformalFactor::identity(&mesh)).unwrap();
        let bound = lemma2_bound(&mesh, &f, &image, 2.0, 1e-10).unwrap();
        // ∫|d id|² over the unit-volume round sphere is 2·4π = 8π.
        assert!((bound - 8.0 * PI).abs() < 0.02 * 8.0 * PI, "{bound}");
        let skew: Vec<[f64; 3]> = image.iter().map(|x| MobiusMap::new([0.0, 0.0, 1.0], 0.5).unwrap().apply(*x)).collect();
        assert!(matches!(lemma2_bound(&mesh, &f, &skew, 2.0, 1e-10), Err(Error::Unbalanced { .. })));
        let unnormalized = ConformalFactor::identity(&mesh);
        assert!(matches!(lemma2_bound(&mesh, &unnormalized, &image, 2.0, 1e-10), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn sup_volume_of_round_sphere() {
        let mesh = DiscreteManifold::icosphere(3).unwrap();
        let image = identity_image(&mesh).unwrap();
        let at_identity = image_area(&mesh, &image, &MobiusMap::identity()).unwrap();
        assert!((at_identity - 4.0 * PI).abs() < 1e-9);
        let sup = sup_volume_over_gamma(&mesh, &image, 200).unwrap();
        assert!(sup.value >= 4.0 * PI * 0.995);
        let moved: Vec<[f64; 3]> = image.iter().map(|x| MobiusMap::new([1.0, 0.0, 0.0], 0.4).unwrap().apply(*x)).collect();
        let sup2 = sup_volume_over_gamma(&mesh, &moved, 200).unwrap();
        assert!((sup2.value - sup.value).abs() < 0.01 * sup.value);
        let point = vec![[0.0, 0.0, 1.0]; mesh.num_vertices()];
        assert_eq!(sup_volume_over_gamma(&mesh, &point, 50).unwrap().value, 0.0);
    }

    proptest! {
        #[test]
        fn power_sum_inequalities(v in proptest::collection::vec(-1.0f64..1.0, 3), p in 1.01f64..6.0) {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assume!(n > 1e-6);
            let psi: Vec<f64> = v.iter().map(|x| x / n).collect();
            let s: Vec<f64> = v.iter().map(|x| x * x * 7.0).collect();
            if p >= 2.0 {
                prop_assert!(superadditive_power_excess(&s, p) <= 1e-12);
                prop_assert!(convex_power_mean_deficit(&psi, p) <= 1e-12);
            } else {
                prop_assert!(small_entry_power_deficit(&psi, p) <= 1e-12);
                prop_assert!(concave_power_mean_excess(&s, p) <= 1e-12);
            }
        }
    }
}
