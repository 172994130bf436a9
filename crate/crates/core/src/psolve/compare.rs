//! Sign-part quotients and the factor-domination comparison used for the
//! equatorial band family.

use serde::Serialize;

use crate::conformal::ConformalFactor;
use crate::error::{Error, Result};
use crate::mesh::{DiscreteManifold, ScalarField};
use crate::psolve::{apply_split, rayleigh_quotient, t_split_shift};

/// Raw quotients of `u⁺` and `u⁻` (no shift).
pub fn sign_part_quotients(
    mesh: &DiscreteManifold,
    f: &ConformalFactor,
    p: f64,
    u: &ScalarField,
) -> Result<(f64, f64)> {
    let plus = u.map(|x| x.max(0.0));
    let minus = u.map(|x| x.min(0.0));
    if !(plus.spread() > 0.0) || !(minus.spread() > 0.0) {
        return Err(Error::Degenerate("field does not change sign".into()));
    }
    Ok((rayleigh_quotient(mesh, f, p, &plus)?, rayleigh_quotient(mesh, f, p, &minus)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareChain {
    /// Eigenvalue for the dominated factor.
    pub lambda_lower_factor: f64,
    pub q_plus: f64,
    pub q_minus: f64,
    /// Split parameter balancing `t u⁺ + u⁻` against the dominating factor.
    pub t: f64,
    /// Quotient of the balanced split under the dominated factor.
    pub quotient_lower_factor: f64,
    /// Quotient of the balanced split under the dominating factor.
    pub quotient_upper_factor: f64,
    /// Eigenvalue for the dominating factor.
    pub lambda_upper_factor: f64,
}

impl CompareChain {
    /// `|q⁺ − q⁻| / max(q⁺, q⁻)`.
    pub fn sign_part_gap(&self) -> f64 {
        (self.q_plus - self.q_minus).abs() / self.q_plus.max(self.q_minus)
    }

    /// `λ_lower ≈ R_lower(u_t)` within `rel_tol`, then
    /// `R_lower(u_t) ≥ R_upper(u_t) ≥ λ_upper` up to `rel_slack`.
    pub fn holds(&self, rel_tol: f64, rel_slack: f64) -> bool {
        let first = (self.quotient_lower_factor - self.lambda_lower_factor).abs()
            <= rel_tol * self.lambda_lower_factor;
        let second = self.quotient_lower_factor >= self.quotient_upper_factor * (1.0 - rel_slack);
        let third = self.quotient_upper_factor >= self.lambda_upper_factor * (1.0 - rel_slack);
        first && second && third
    }
}

/// Builds the comparison for an eigenfunction `u` of the quotient with
/// factor `lower ≤ upper`, given the solved eigenvalues of both.
///
/// `u_t = t u⁺ + u⁻` is balanced against `upper^{m/2}` so that it is an
/// admissible test field for `upper`; for `p ≥ m` the energy weight
/// `f^{(m−p)/2}` is antitone in `f` while the volume weight is monotone,
/// which orders the two quotients.
pub fn compare_chain(
    mesh: &DiscreteManifold,
    lower: &ConformalFactor,
    upper: &ConformalFactor,
    p: f64,
    u: &ScalarField,
    lambda_lower: f64,
    lambda_upper: f64,
) -> Result<CompareChain> {
    lower.check_aligned(mesh)?;
    upper.check_aligned(mesh)?;
    mesh.check_aligned(u)?;
    if lower.values().iter().zip(upper.values()).any(|(a, b)| a > b) {
        return Err(Error::InvalidArgument("lower factor exceeds upper factor".into()));
    }
    let (q_plus, q_minus) = sign_part_quotients(mesh, lower, p, u)?;
    let weights: Vec<f64> = upper
        .measure_density(mesh.dim())
        .values()
        .iter()
        .zip(mesh.lumped_mass())
        .map(|(d, m)| d * m)
        .collect();
    let t = t_split_shift(u.values(), &weights, p)?;
    let ut = ScalarField::new(apply_split(u.values(), t))?;
    Ok(CompareChain {
        lambda_lower_factor: lambda_lower,
        q_plus,
        q_minus,
        t,
        quotient_lower_factor: rayleigh_quotient(mesh, lower, p, &ut)?,
        quotient_upper_factor: rayleigh_quotient(mesh, upper, p, &ut)?,
        lambda_upper_factor: lambda_upper,
    })
}
