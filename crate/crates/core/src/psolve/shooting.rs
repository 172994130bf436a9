//! Shooting oracle for the one-dimensional p-Laplacian eigenproblem
//! `(|u′|^{p−2}u′)′ + λ|u|^{p−2}u = 0` on a symmetric interval.
//!
//! The equation is integrated as a first-order system in `u` and the flux
//! `φ = |u′|^{p−2}u′` with an adaptive Dormand–Prince 5(4) pair, and λ is
//! bisected on a Sturm-type predicate that is monotone in λ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psolve::shift::signed_pow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// `u = 0` at both ends.
    Dirichlet,
    /// `u′ = 0` at both ends.
    Neumann,
}

/// Requested accuracy of the root in λ, relative.
const LAMBDA_RTOL: f64 = 1e-14;
const ODE_TOL: f64 = 1e-13;
const MAX_DOUBLINGS: usize = 200;
const MAX_STEPS: usize = 2_000_000;

/// `π_p = 2π / (p sin(π/p))`.
pub fn pi_p(p: f64) -> f64 {
    2.0 * std::f64::consts::PI / (p * (std::f64::consts::PI / p).sin())
}

/// Closed-form first eigenvalue of an interval of the given length, valid
/// for both boundary conditions: `(p−1)(π_p/L)^p`.
pub fn interval_eigenvalue_exact(p: f64, length: f64) -> f64 {
    (p - 1.0) * (pi_p(p) / length).powf(p)
}

/// Closed-form first nonzero eigenvalue of a circle of the given length:
/// `(p−1)(2π_p/L)^p`.
pub fn circle_eigenvalue_exact(p: f64, length: f64) -> f64 {
    (p - 1.0) * (2.0 * pi_p(p) / length).powf(p)
}

/// First eigenvalue on `(−halfwidth, halfwidth)`.
///
/// Dirichlet: integrates from the left end with `u = 0, u′ = 1` and finds
/// the smallest λ for which `u` reaches zero by the right end. Neumann:
/// integrates from the centre with `u = 0, u′ = 1` (the first Neumann mode
/// is odd) and finds the smallest λ for which the flux vanishes by the end.
pub fn shooting_oracle_1d(p: f64, mode: BoundaryCondition, halfwidth: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    if !(halfwidth > 0.0) || !halfwidth.is_finite() {
        return Err(Error::InvalidArgument(format!("halfwidth must be > 0, got {halfwidth}")));
    }
    let span = match mode {
        BoundaryCondition::Dirichlet => 2.0 * halfwidth,
        BoundaryCondition::Neumann => halfwidth,
    };
    let crosses = |lambda: f64| integrate(p, lambda, span, mode);
    let mut lo = 0.0;
    // Dimensional guess: λ scales like span^{−p}.
    let mut hi = span.powf(-p);
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        if crosses(hi)? {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Err(Error::Bracket(format!("no sign change below λ = {hi:e}")));
    }
    while hi - lo > LAMBDA_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if crosses(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Whether the monitored quantity (`u` for Dirichlet, `φ` for Neumann)
/// vanishes somewhere in `(0, span]`.
fn integrate(p: f64, lambda: f64, span: f64, mode: BoundaryCondition) -> Result<bool> {
    let q = 1.0 / (p - 1.0);
    let rhs = |y: [f64; 2]| -> [f64; 2] { [signed_pow(y[1], q), -lambda * signed_pow(y[0], p - 1.0)] };
    let watch = match mode {
        BoundaryCondition::Dirichlet => 0,
        BoundaryCondition::Neumann => 1,
    };
    let mut y = [0.0, 1.0];
    let mut t = 0.0;
    let mut h = 1e-3 * span;
    let scale = |y: &[f64; 2]| [y[0].abs().max(span) , y[1].abs().max(1e-3)];
    for _ in 0..MAX_STEPS {
        if t >= span {
            return Ok(false);
        }
        let h_try = h.min(span - t);
        let (y_new, err) = dopri_step(&rhs, y, h_try);
        let s = scale(&y);
        let e = (err[0] / s[0]).abs().max((err[1] / s[1]).abs());
        if e <= ODE_TOL || h_try <= 1e-15 * span {
            t = if h_try == span - t { span } else { t + h_try };
            y = y_new;
            if y[watch] <= 0.0 {
                return Ok(true);
            }
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * (ODE_TOL / e).powf(0.2)).clamp(0.2, 5.0) };
        h = h_try * factor;
    }
    Err(Error::Bracket(format!("ODE integration exceeded {MAX_STEPS} steps at λ = {lambda:e}")))
}

/// Dormand–Prince 5(4) step; returns the fifth-order solution and the
/// embedded error estimate.
fn dopri_step(f: &impl Fn([f64; 2]) -> [f64; 2], y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; 2]; 7];
    k[0] = f(y);
    for s in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            ys[0] += h * C[s][j] * kj[0];
            ys[1] += h * C[s][j] * kj[1];
        }
        k[s + 1] = f(ys);
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for i in 0..7 {
        for c in 0..2 {
            y5[c] += h * B5[i] * k[i][c];
            err[c] += h * (B5[i] - B4[i]) * k[i][c];
        }
    }
    (y5, err)
}
