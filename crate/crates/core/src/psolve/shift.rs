//! Constant and sign-part shifts that make a field satisfy the p-mean
//! constraint `Σ w |u − c|^{p−2}(u − c) = 0`.

use crate::error::{Error, Result};

/// `|x|^{p−2} x`, with the value 0 at 0.
#[inline]
pub fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

fn check_weights(u: &[f64], weights: &[f64], p: f64) -> Result<()> {
    if u.len() != weights.len() {
        return Err(Error::Misaligned { expected: u.len(), got: weights.len() });
    }
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
    }
    if !(weights.iter().sum::<f64>() > 0.0) {
        return Err(Error::InvalidArgument("weights are all zero".into()));
    }
    Ok(())
}

/// The unique `c ∈ [min u, max u]` with `Σ w_i |u_i − c|^{p−2}(u_i − c) = 0`.
///
/// `c` is also the minimizer of `c ↦ Σ w_i |u_i − c|^p`. Solved by
/// Newton's method safeguarded by a shrinking bracket.
pub fn p_shift(u: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    check_weights(u, weights, p)?;
    let (lo, hi) = u
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&x, _)| {
            (lo.min(x), hi.max(x))
        });
    if !(hi > lo) {
        return Err(Error::Degenerate("field is constant on the weighted support".into()));
    }
    Ok(p_shift_unchecked(u, weights, p, lo, hi))
}

pub(crate) fn p_shift_unchecked(u: &[f64], weights: &[f64], p: f64, mut lo: f64, mut hi: f64) -> f64 {
    let e = p - 1.0;
    let balance = |c: f64| -> (f64, f64, f64) {
        let (mut g, mut dg, mut scale) = (0.0, 0.0, 0.0);
        for (&x, &w) in u.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let d = x - c;
            let a = d.abs();
            if a == 0.0 {
                if p < 2.0 {
                    dg = f64::INFINITY;
                }
                continue;
            }
            let ae = a.powf(e);
            g += w * d.signum() * ae;
            scale += w * ae;
            dg += w * ae / a;
        }
        (g, e * dg, scale)
    };
    let total: f64 = weights.iter().sum();
    let mut c = u.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total;
    if p == 2.0 {
        return c.clamp(lo, hi);
    }
    c = c.clamp(lo, hi);
    for _ in 0..200 {
        let (g, dg, scale) = balance(c);
        if g.abs() <= 1e-15 * scale || g == 0.0 {
            return c;
        }
        // g is strictly decreasing in c.
        if g > 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let newton = c + g / dg;
        c = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            return c;
        }
    }
    c
}

/// The `s ≥ 0` with `Σ w |s u⁺ + u⁻|^{p−2}(s u⁺ + u⁻) = 0`, where
/// `u = u⁺ + u⁻` is the split into positive and negative parts.
///
/// The parts have disjoint supports, so the balance reads
/// `s^{p−1} Σ w (u⁺)^{p−1} = Σ w |u⁻|^{p−1}` and is solved in closed form.
pub fn t_split_shift(u: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    check_weights(u, weights, p)?;
    let e = p - 1.0;
    let (mut pos, mut neg) = (0.0, 0.0);
    for (&x, &w) in u.iter().zip(weights) {
        if x > 0.0 {
            pos += w * x.powf(e);
        } else if x < 0.0 {
            neg += w * (-x).powf(e);
        }
    }
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::Degenerate("field does not change sign on the weighted support".into()));
    }
    Ok((neg / pos).powf(1.0 / e))
}

/// `s u⁺ + u⁻`.
pub fn apply_split(u: &[f64], s: f64) -> Vec<f64> {
    u.iter().map(|&x| if x > 0.0 { s * x } else { x }).collect()
}
