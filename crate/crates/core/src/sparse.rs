//! Symmetric sparse matrices on the vertex graph of a mesh, with an
//! incomplete Cholesky factorization and preconditioned conjugate
//! gradients. Used to build the descent preconditioner.

use crate::mesh::DiscreteManifold;

/// Lower triangle (diagonal included and last in each row) in CSR form.
#[derive(Debug, Clone)]
pub(crate) struct SymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    pub(crate) vals: Vec<f64>,
    /// Per element, the storage slot of each `(i, j)` node pair with
    /// `nodes[i] ≥ nodes[j]`, `usize::MAX` otherwise.
    elem_slots: Vec<usize>,
    k: usize,
}

impl SymMatrix {
    pub(crate) fn for_mesh(mesh: &DiscreteManifold) -> Self {
        let n = mesh.num_vertices();
        let adj = mesh.adjacency();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (i, row) in adj.iter().enumerate() {
            cols.extend(row.iter().copied().filter(|&j| j < i));
            cols.push(i);
            row_ptr.push(cols.len());
        }
        let k = mesh.dim() + 1;
        let mut elem_slots = Vec::with_capacity(mesh.num_elements() * k * k);
        for nodes in mesh.elements() {
            for &a in nodes {
                for &b in nodes {
                    if a >= b {
                        let row = &cols[row_ptr[a]..row_ptr[a + 1]];
                        let off = row.binary_search(&b).expect("pattern covers element");
                        elem_slots.push(row_ptr[a] + off);
                    } else {
                        elem_slots.push(usize::MAX);
                    }
                }
            }
        }
        let nnz = cols.len();
        Self { n, row_ptr, cols, vals: vec![0.0; nnz], elem_slots, k }
    }

    pub(crate) fn clear(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds `coeff · gram` of element `e`.
    pub(crate) fn add_element(&mut self, e: usize, coeff: f64, gram: &[f64]) {
        let kk = self.k * self.k;
        let slots = &self.elem_slots[e * kk..(e + 1) * kk];
        for (s, g) in slots.iter().zip(gram) {
            if *s != usize::MAX {
                self.vals[*s] += coeff * g;
            }
        }
    }

    pub(crate) fn add_diagonal(&mut self, i: usize, v: f64) {
        self.vals[self.row_ptr[i + 1] - 1] += v;
    }

    /// Replaces row and column `i` by the identity.
    pub(crate) fn pin(&mut self, i: usize) {
        for idx in self.row_ptr[i]..self.row_ptr[i + 1] - 1 {
            self.vals[idx] = 0.0;
        }
        self.vals[self.row_ptr[i + 1] - 1] = 1.0;
        for r in i + 1..self.n {
            let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
            if let Ok(off) = row.binary_search(&i) {
                self.vals[self.row_ptr[r] + off] = 0.0;
            }
        }
    }

    pub(crate) fn mul(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for idx in start..end - 1 {
                let j = self.cols[idx];
                let a = self.vals[idx];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc + self.vals[end - 1] * x[i];
        }
    }

    /// Zero-fill incomplete Cholesky factor, shifting the diagonal until the
    /// factorization succeeds.
    pub(crate) fn ic0(&self) -> Ic0<'_> {
        let mut shift = 0.0;
        loop {
            if let Some(l) = self.try_ic0(shift) {
                return Ic0 { n: self.n, row_ptr: &self.row_ptr, cols: &self.cols, l };
            }
            shift = if shift == 0.0 { 1e-3 } else { 2.0 * shift };
        }
    }

    fn try_ic0(&self, shift: f64) -> Option<Vec<f64>> {
        let mut l = self.vals.clone();
        for i in 0..self.n {
            let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for idx in start..end - 1 {
                let j = self.cols[idx];
                let (js, je) = (self.row_ptr[j], self.row_ptr[j + 1]);
                // Sparse dot of row i (entries before idx) with row j (before its diagonal).
                let (mut a, mut b, mut s) = (start, js, 0.0);
                while a < idx && b < je - 1 {
                    match self.cols[a].cmp(&self.cols[b]) {
                        std::cmp::Ordering::Less => a += 1,
                        std::cmp::Ordering::Greater => b += 1,
                        std::cmp::Ordering::Equal => {
                            s += l[a] * l[b];
                            a += 1;
                            b += 1;
                        }
                    }
                }
                l[idx] = (l[idx] - s) / l[je - 1];
            }
            let diag = self.vals[end - 1] * (1.0 + shift);
            let d = diag - l[start..end - 1].iter().map(|v| v * v).sum::<f64>();
            if !(d > 1e-14 * diag.abs()) || !d.is_finite() {
                return None;
            }
            l[end - 1] = d.sqrt();
        }
        Some(l)
    }

    /// Preconditioned conjugate gradients from a zero initial guess.
    /// Returns the number of iterations used.
    pub(crate) fn pcg(&self, pre: &Ic0, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> usize {
        let n = self.n;
        x.iter_mut().for_each(|v| *v = 0.0);
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if bnorm == 0.0 {
            return 0;
        }
        let mut r = b.to_vec();
        let mut z = vec![0.0; n];
        pre.solve(&r, &mut z);
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for it in 1..=max_iter {
            self.mul(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return it;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if dot(&r, &r).sqrt() <= rtol * bnorm {
                return it;
            }
            pre.solve(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        max_iter
    }
}

pub(crate) struct Ic0<'a> {
    n: usize,
    row_ptr: &'a [usize],
    cols: &'a [usize],
    l: Vec<f64>,
}

impl Ic0<'_> {
    pub(crate) fn solve(&self, b: &[f64], x: &mut [f64]) {
        // L y = b
        for i in 0..self.n {
            let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = b[i];
            for idx in start..end - 1 {
                s -= self.l[idx] * x[self.cols[idx]];
            }
            x[i] = s / self.l[end - 1];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
            x[i] /= self.l[end - 1];
            let xi = x[i];
            for idx in start..end - 1 {
                x[self.cols[idx]] -= self.l[idx] * xi;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
