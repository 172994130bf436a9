//! Preconditioned descent on the shift-composed quotient with
//! δ-continuation.
//!
//! The preconditioner is the lagged-diffusivity stiffness of the numerator
//! plus a small multiple of the lagged denominator Hessian, solved by
//! IC(0)-PCG. For `p = 2` the direction reduces to a shifted inverse
//! iteration step.

use crate::psolve::functional::{Constraint, Functional, Value};
use crate::sparse::SymMatrix;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;
const STALL_WINDOW: usize = 3;
const FINAL_RESIDUAL: f64 = 1e-9;
// Loose inner solves: the outer line search absorbs the inexactness.
const PCG_RTOL: f64 = 1e-2;
const REFRESH: usize = 20;
const PCG_MAX_ITER: usize = 500;

#[derive(Debug, Clone)]
pub(crate) struct DescentOutcome {
    pub(crate) u: Vec<f64>,
    pub(crate) iterations: usize,
    pub(crate) converged: bool,
    /// Regularized quotient after every accepted step, across all stages.
    pub(crate) trace: Vec<f64>,
}

#[derive(Debug, Default)]
struct CgState {
    dir: Option<Vec<f64>>,
    grad: Option<Vec<f64>>,
    z: Option<Vec<f64>>,
    alpha: f64,
    age: usize,
}

pub(crate) struct Descent<'f, 'm> {
    pub(crate) func: &'f mut Functional<'m>,
    pub(crate) max_iterations: usize,
    pub(crate) tolerance: f64,
    /// Final regularization, relative to the rms element gradient.
    pub(crate) final_delta: f64,
}

impl Descent<'_, '_> {
    fn stages(&self) -> Vec<f64> {
        if self.func.p == 2.0 {
            // δ only adds a constant to the numerator.
            return vec![0.0];
        }
        let mut out = Vec::new();
        let mut d = 1e-2;
        while d > self.final_delta * (1.0 + 1e-12) {
            out.push(d);
            d *= 1e-2;
        }
        out.push(self.final_delta);
        out
    }

    pub(crate) fn run(&mut self, start: Vec<f64>) -> DescentOutcome {
        let mut u = start;
        self.normalize(&mut u);
        let mut pre = SymMatrix::for_mesh(self.func.mesh);
        let mut trace = Vec::new();
        let mut iterations = 0;
        let stages = self.stages();
        let mut converged = false;
        for (si, &rel) in stages.iter().enumerate() {
            let last = si + 1 == stages.len();
            let scale = self.func.gradient_scale(&u);
            self.func.delta = rel * scale;
            let tol = if last { self.tolerance } else { self.tolerance.max(1e-8) };
            let mut val = self.func.value(&u);
            trace.push(val.q);
            let mut small = 0;
            let mut cg = CgState::default();
            converged = false;
            while iterations < self.max_iterations {
                iterations += 1;
                let Some((next, next_val)) = self.step(&mut pre, &mut cg, &u, &val) else {
                    // No decrease possible at working precision.
                    converged = true;
                    break;
                };
                let rel_dec = (val.q - next_val.q) / val.q.abs().max(f64::MIN_POSITIVE);
                u = next;
                val = next_val;
                trace.push(val.q);
                small = if rel_dec < tol { small + 1 } else { 0 };
                if small >= STALL_WINDOW || (last && self.func.residual(&u, &val) < FINAL_RESIDUAL) {
                    converged = true;
                    break;
                }
            }
            if iterations >= self.max_iterations && !converged {
                break;
            }
        }
        DescentOutcome { u, iterations, converged, trace }
    }

    /// Shifts by the constraint constant and scales to unit p-norm.
    /// Returns the scale factor applied.
    pub(crate) fn normalize(&self, u: &mut [f64]) -> f64 {
        let c = self.func.shift_of(u);
        let den = self.func.denominator(u, c);
        let s = den.powf(-1.0 / self.func.p);
        for (x, &fixed) in u.iter_mut().zip(&self.func.fixed) {
            *x = if fixed { 0.0 } else { (*x - c) * s };
        }
        s
    }

    /// One preconditioned Polak-Ribière step with a safeguarded line search.
    fn step(&self, pre: &mut SymMatrix, cg: &mut CgState, u: &[f64], val: &Value) -> Option<(Vec<f64>, Value)> {
        let n = u.len();
        let mut grad = vec![0.0; n];
        self.func.quotient_gradient(u, val, &mut grad);
        let gnorm = dot(&grad, &grad).sqrt();
        if gnorm == 0.0 || !gnorm.is_finite() {
            return None;
        }
        if cg.age % REFRESH == 0 {
            self.assemble_preconditioner(pre, u, val);
        }
        let ic = pre.ic0();
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut z = vec![0.0; n];
        pre.pcg(&ic, &neg, &mut z, PCG_RTOL, PCG_MAX_ITER);
        // z = −P⁻¹g
        let gz = -dot(&grad, &z);
        let mut dir = z.clone();
        if let (Some(prev_d), Some(prev_g), Some(prev_z)) = (&cg.dir, &cg.grad, &cg.z) {
            if cg.age % REFRESH != 0 {
                let prev_gz = -dot(prev_g, prev_z);
                let num: f64 = grad.iter().zip(z.iter().zip(prev_z)).map(|(g, (a, b))| -g * (a - b)).sum();
                let beta = (num / prev_gz).max(0.0);
                if beta.is_finite() {
                    for (d, p) in dir.iter_mut().zip(prev_d) {
                        *d += beta * p;
                    }
                }
            }
        }
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) || !slope.is_finite() {
            dir = z.clone();
            slope = -gz;
            cg.age = 0;
        }
        if !(slope < 0.0) || !slope.is_finite() {
            let s = 0.1 * dot(u, u).sqrt() / gnorm;
            dir = grad.iter().map(|g| -s * g).collect();
            slope = dot(&grad, &dir);
        }
        let trial = |alpha: f64| -> (Vec<f64>, Value, f64) {
            let mut w: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
            let s = self.normalize(&mut w);
            let v = self.func.value(&w);
            (w, v, s)
        };
        let accept = |alpha: f64, v: &Value| {
            v.q.is_finite() && v.q < val.q && v.q <= val.q + ARMIJO * alpha * slope
        };
        let mut alpha = if cg.alpha > 0.0 && cg.age % REFRESH != 0 { cg.alpha } else { 1.0 };
        for _ in 0..MAX_HALVINGS {
            let (w, v, s) = trial(alpha);
            let curv = (v.q - val.q - alpha * slope) / (alpha * alpha);
            let best = if curv > 0.0 { -slope / (2.0 * curv) } else { f64::INFINITY };
            if accept(alpha, &v) {
                let mut chosen = (w, v, s, alpha);
                if best > 1.2 * alpha && best.is_finite() {
                    let b = best.min(8.0 * alpha);
                    let (w2, v2, s2) = trial(b);
                    if v2.q.is_finite() && v2.q < chosen.1.q {
                        chosen = (w2, v2, s2, b);
                    }
                }
                let (w, v, s, a) = chosen;
                cg.alpha = a;
                cg.age += 1;
                // Carry the search state through the rescaling of u.
                cg.dir = Some(dir.iter().map(|d| d * s).collect());
                cg.grad = Some(grad.iter().map(|g| g / s).collect());
                cg.z = Some(z.iter().map(|d| d * s).collect());
                return Some((w, v));
            }
            alpha = if best.is_finite() { best.clamp(0.1 * alpha, 0.5 * alpha) } else { 0.5 * alpha };
        }
        None
    }

    fn assemble_preconditioner(&self, pre: &mut SymMatrix, u: &[f64], val: &Value) {
        let f = &*self.func;
        let p = f.p;
        let mesh = f.mesh;
        pre.clear();
        let g_rms = f.gradient_scale(u);
        let floor = f.delta.max(1e-3 * g_rms);
        let floor2 = floor * floor;
        for e in 0..mesh.num_elements() {
            let g2 = mesh.gradient_sq(e, u) + floor2;
            let coeff = if g2 > 0.0 { p * f.elem_weight[e] * g2.powf(0.5 * p - 1.0) } else { 0.0 };
            pre.add_element(e, coeff, mesh.element_gram(e));
        }
        let u_rms = (u.iter().map(|x| x * x).sum::<f64>() / u.len() as f64).sqrt();
        let eta2 = (1e-3 * u_rms).powi(2);
        let sigma = 0.1 * val.q.max(0.0) + 1e-12;
        let mut scale_sum = 0.0;
        for v in 0..u.len() {
            let r = u[v] - val.shift;
            let w = sigma * p * f.vert_mass[v] * (r * r + eta2).powf(0.5 * p - 1.0);
            scale_sum += w;
            pre.add_diagonal(v, w);
        }
        if !(scale_sum > 0.0) {
            for v in 0..u.len() {
                pre.add_diagonal(v, 1e-12 * f.vert_mass[v]);
            }
        }
        if f.constraint == Constraint::Dirichlet {
            for (v, &fixed) in f.fixed.iter().enumerate() {
                if fixed {
                    pre.pin(v);
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
