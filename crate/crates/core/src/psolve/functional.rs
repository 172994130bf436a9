//! The discrete p-Rayleigh functional and its gradient.
//!
//! With `W_e = |e| · mean_e f^{(m−p)/2}` and `m_v = lumped_v · f_v^{m/2}`:
//!
//! ```text
//! N(u) = Σ_e W_e (|∇u|_e² + δ²)^{p/2}
//! D(u) = Σ_v m_v |u_v − c(u)|^p
//! ```
//!
//! where `c(u)` is the p-shift of `u` (closed and Neumann problems) or 0
//! (Dirichlet and raw evaluation). Since `c(u)` minimizes `D(u − c)` over
//! constants, `∂D/∂c = 0` there and the gradient of the shifted
//! denominator is simply `p m_v |u_v − c|^{p−2}(u_v − c)`.

use crate::conformal::ConformalFactor;
use crate::error::{Error, Result};
use crate::mesh::DiscreteManifold;
use crate::psolve::shift::{p_shift_unchecked, signed_pow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Constraint {
    /// Evaluate `u` as given.
    None,
    /// Subtract the p-shift before evaluating the denominator.
    PMean,
    /// Boundary vertices are pinned to zero.
    Dirichlet,
}

#[derive(Debug, Clone)]
pub(crate) struct Functional<'a> {
    pub(crate) mesh: &'a DiscreteManifold,
    pub(crate) p: f64,
    pub(crate) elem_weight: Vec<f64>,
    pub(crate) vert_mass: Vec<f64>,
    pub(crate) fixed: Vec<bool>,
    pub(crate) constraint: Constraint,
    pub(crate) delta: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Value {
    pub(crate) q: f64,
    pub(crate) den: f64,
    pub(crate) shift: f64,
}

impl<'a> Functional<'a> {
    pub(crate) fn new(
        mesh: &'a DiscreteManifold,
        f: &ConformalFactor,
        p: f64,
        constraint: Constraint,
    ) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
        }
        f.check_aligned(mesh)?;
        let m = mesh.dim();
        let weight = f.energy_density_weight(m, p);
        let density = f.measure_density(m);
        let elem_weight = mesh
            .elements()
            .zip(mesh.element_measure())
            .map(|(nodes, a)| {
                let mean = nodes.iter().map(|&v| weight.values()[v]).sum::<f64>() / nodes.len() as f64;
                a * mean
            })
            .collect();
        let vert_mass = mesh
            .lumped_mass()
            .iter()
            .zip(density.values())
            .map(|(l, d)| l * d)
            .collect();
        let fixed = match constraint {
            Constraint::Dirichlet => mesh.boundary().to_vec(),
            _ => vec![false; mesh.num_vertices()],
        };
        Ok(Self { mesh, p, elem_weight, vert_mass, fixed, constraint, delta: 0.0 })
    }

    pub(crate) fn numerator(&self, u: &[f64]) -> f64 {
        let half_p = 0.5 * self.p;
        let d2 = self.delta * self.delta;
        (0..self.mesh.num_elements())
            .map(|e| {
                let g2 = self.mesh.gradient_sq(e, u) + d2;
                if g2 == 0.0 {
                    0.0
                } else {
                    self.elem_weight[e] * g2.powf(half_p)
                }
            })
            .sum()
    }

    pub(crate) fn shift_of(&self, u: &[f64]) -> f64 {
        match self.constraint {
            Constraint::PMean => {
                let (lo, hi) = u
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                if hi > lo {
                    p_shift_unchecked(u, &self.vert_mass, self.p, lo, hi)
                } else {
                    lo
                }
            }
            Constraint::None | Constraint::Dirichlet => 0.0,
        }
    }

    pub(crate) fn denominator(&self, u: &[f64], c: f64) -> f64 {
        u.iter()
            .zip(&self.vert_mass)
            .zip(&self.fixed)
            .filter(|(_, &fixed)| !fixed)
            .map(|((x, m), _)| m * (x - c).abs().powf(self.p))
            .sum()
    }

    pub(crate) fn value(&self, u: &[f64]) -> Value {
        let num = self.numerator(u);
        let shift = self.shift_of(u);
        let den = self.denominator(u, shift);
        Value { q: num / den, den, shift }
    }

    /// Gradients of the numerator and of the shifted denominator.
    pub(crate) fn gradients(&self, u: &[f64], shift: f64, g_num: &mut [f64], g_den: &mut [f64]) {
        g_num.iter_mut().for_each(|v| *v = 0.0);
        let p = self.p;
        let d2 = self.delta * self.delta;
        let mesh = self.mesh;
        let k = mesh.dim() + 1;
        for e in 0..mesh.num_elements() {
            let g2 = mesh.gradient_sq(e, u) + d2;
            if g2 == 0.0 {
                continue;
            }
            let coeff = p * self.elem_weight[e] * g2.powf(0.5 * p - 1.0);
            let nodes = mesh.element(e);
            let gram = mesh.element_gram(e);
            for i in 0..k {
                let mut s = 0.0;
                for j in 0..k {
                    s += gram[i * k + j] * u[nodes[j]];
                }
                g_num[nodes[i]] += coeff * s;
            }
        }
        for (v, gd) in g_den.iter_mut().enumerate() {
            *gd = p * self.vert_mass[v] * signed_pow(u[v] - shift, p - 1.0);
        }
        for (v, &fixed) in self.fixed.iter().enumerate() {
            if fixed {
                g_num[v] = 0.0;
                g_den[v] = 0.0;
            }
        }
    }

    /// Gradient of `N/D` at `u`.
    pub(crate) fn quotient_gradient(&self, u: &[f64], val: &Value, grad: &mut [f64]) {
        let n = u.len();
        let mut g_den = vec![0.0; n];
        self.gradients(u, val.shift, grad, &mut g_den);
        for (g, d) in grad.iter_mut().zip(&g_den) {
            *g = (*g - val.q * d) / val.den;
        }
    }

    /// `‖∇N − λ∇D‖ / ‖∇N‖`, the relative residual of the discrete
    /// eigenvalue equation.
    pub(crate) fn residual(&self, u: &[f64], val: &Value) -> f64 {
        let n = u.len();
        let mut g_num = vec![0.0; n];
        let mut g_den = vec![0.0; n];
        self.gradients(u, val.shift, &mut g_num, &mut g_den);
        let r: f64 = g_num.iter().zip(&g_den).map(|(a, b)| (a - val.q * b).powi(2)).sum();
        let s: f64 = g_num.iter().map(|a| a * a).sum();
        if s == 0.0 {
            f64::INFINITY
        } else {
            (r / s).sqrt()
        }
    }

    /// Root mean square of the element gradients, weighted by `W_e`.
    pub(crate) fn gradient_scale(&self, u: &[f64]) -> f64 {
        let (mut acc, mut tot) = (0.0, 0.0);
        for e in 0..self.mesh.num_elements() {
            acc += self.elem_weight[e] * self.mesh.gradient_sq(e, u);
            tot += self.elem_weight[e];
        }
        (acc / tot).sqrt()
    }
}
