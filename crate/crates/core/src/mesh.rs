//! Simplicial models of the interval, the circle, the round sphere and its
//! upper hemisphere, with vertex-lumped quadrature and P1 gradients.
//!
//! Every mesh stores, per element, its base-metric measure and the Gram
//! matrix `∇φ_i·∇φ_j` of its barycentric basis functions, so that the
//! squared gradient of a piecewise-linear field on an element is the
//! quadratic form `uᵀ G u`. Integrals use the vertex-mean rule, which is the
//! same as a lumped mass matrix.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance used to decide that a vertex sits on the equator.
pub const EQUATOR_TOL: f64 = 1e-9;

/// Largest icosphere subdivision level accepted by [`DiscreteManifold::icosphere`].
pub const MAX_ICOSPHERE_LEVEL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshKind {
    Interval,
    Circle { length: f64 },
    Sphere,
    Hemisphere,
    /// Triangulated surface of unknown shape (imported or hand built).
    Surface,
}

/// A simplicial mesh of dimension 1 or 2 together with its base metric.
///
/// 1-D meshes store their scalar coordinate in `vertices[i][0]` (arc length
/// for circles). Sphere meshes store unit vectors.
#[derive(Debug, Clone)]
pub struct DiscreteManifold {
    kind: MeshKind,
    dim: usize,
    vertices: Vec<[f64; 3]>,
    elements: Vec<usize>,
    measure: Vec<f64>,
    gram: Vec<f64>,
    lumped: Vec<f64>,
    boundary: Vec<bool>,
    pole: Option<usize>,
    mirror: Option<Vec<usize>>,
    equator_ring: bool,
}

/// A mesh cut out of a larger one, with the parent index of every vertex.
#[derive(Debug, Clone)]
pub struct Submesh {
    pub mesh: DiscreteManifold,
    pub parent: Vec<usize>,
}

/// One real value per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite field value at vertex {i}"
            )));
        }
        Ok(Self(values))
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    /// Evaluates `f(position, index)` at every vertex of `mesh`.
    pub fn from_fn(mesh: &DiscreteManifold, f: impl Fn(&[f64; 3], usize) -> f64) -> Self {
        Self(
            mesh.vertices
                .iter()
                .enumerate()
                .map(|(i, v)| f(v, i))
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    /// `max − min` of the values.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .0
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }
}

impl DiscreteManifold {
    /// Uniform partition of `[a, b]` into `n` segments; both ends are boundary.
    pub fn interval(n: usize, a: f64, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("interval needs n ≥ 2, got {n}")));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("interval needs a < b, got [{a}, {b}]")));
        }
        let coords: Vec<f64> = (0..=n)
            .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
            .collect();
        Self::interval_from_points(&coords)
    }

    /// Interval mesh with the given strictly increasing vertex coordinates.
    pub fn interval_from_points(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::InvalidArgument("interval needs at least 3 vertices".into()));
        }
        if coords.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMesh("interval coordinates must increase".into()));
        }
        let n = coords.len() - 1;
        let vertices = coords.iter().map(|&x| [x, 0.0, 0.0]).collect();
        let elements = (0..n).flat_map(|i| [i, i + 1]).collect();
        let lengths = coords.windows(2).map(|w| w[1] - w[0]).collect();
        let mut boundary = vec![false; n + 1];
        boundary[0] = true;
        boundary[n] = true;
        Self::assemble_1d(MeshKind::Interval, vertices, elements, lengths, boundary, None)
    }

    /// Closed 1-D mesh of total length `length` with `n` equal segments.
    /// The pole is vertex 0.
    pub fn circle(n: usize, length: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("circle needs n ≥ 3, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("circle length must be > 0, got {length}")));
        }
        let h = length / n as f64;
        let vertices = (0..n).map(|i| [h * i as f64, 0.0, 0.0]).collect();
        let elements = (0..n).flat_map(|i| [i, (i + 1) % n]).collect();
        Self::assemble_1d(
            MeshKind::Circle { length },
            vertices,
            elements,
            vec![h; n],
            vec![false; n],
            Some(0),
        )
    }

    fn assemble_1d(
        kind: MeshKind,
        vertices: Vec<[f64; 3]>,
        elements: Vec<usize>,
        lengths: Vec<f64>,
        boundary: Vec<bool>,
        pole: Option<usize>,
    ) -> Result<Self> {
        let gram = lengths
            .iter()
            .flat_map(|&h| {
                let k = 1.0 / (h * h);
                [k, -k, -k, k]
            })
            .collect();
        let mut mesh = Self {
            kind,
            dim: 1,
            vertices,
            elements,
            measure: lengths,
            gram,
            lumped: Vec::new(),
            boundary,
            pole,
            mirror: None,
            equator_ring: false,
        };
        mesh.finish()?;
        Ok(mesh)
    }

    /// Generic triangulated surface; boundary vertices are those on edges
    /// with a single incident triangle.
    pub fn from_triangles(vertices: Vec<[f64; 3]>, triangles: &[[usize; 3]]) -> Result<Self> {
        let mut mesh = Self::assemble_2d(MeshKind::Surface, vertices, triangles, None)?;
        mesh.boundary = boundary_from_edges(mesh.vertices.len(), triangles);
        Ok(mesh)
    }

    fn assemble_2d(
        kind: MeshKind,
        vertices: Vec<[f64; 3]>,
        triangles: &[[usize; 3]],
        pole: Option<usize>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut measure = Vec::with_capacity(triangles.len());
        let mut gram = Vec::with_capacity(9 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let [p0, p1, p2] = tri.map(|i| vertices[i]);
            // Edge opposite vertex i, oriented cyclically.
            let e = [sub(p2, p1), sub(p0, p2), sub(p1, p0)];
            let area = 0.5 * norm(cross(e[2], sub(p2, p0)));
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!("triangle {t} has zero area")));
            }
            let scale = 1.0 / (4.0 * area * area);
            for ei in &e {
                for ej in &e {
                    gram.push(dot(*ei, *ej) * scale);
                }
            }
            measure.push(area);
        }
        let mut mesh = Self {
            kind,
            dim: 2,
            vertices,
            elements: triangles.iter().flatten().copied().collect(),
            measure,
            gram,
            lumped: Vec::new(),
            boundary: vec![false; nv],
            pole,
            mirror: None,
            equator_ring: false,
        };
        mesh.finish()?;
        Ok(mesh)
    }

    fn finish(&mut self) -> Result<()> {
        let k = self.dim + 1;
        if let Some(e) = self.measure.iter().position(|&m| !(m > 0.0)) {
            return Err(Error::InvalidMesh(format!("element {e} has non-positive measure")));
        }
        let mut lumped = vec![0.0; self.vertices.len()];
        for (e, nodes) in self.elements.chunks_exact(k).enumerate() {
            let share = self.measure[e] / k as f64;
            for &v in nodes {
                lumped[v] += share;
            }
        }
        self.lumped = lumped;
        if !self.is_connected() {
            return Err(Error::InvalidMesh("mesh is not connected".into()));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for nodes in self.elements.chunks_exact(self.dim + 1) {
            let r0 = find(&mut parent, nodes[0]);
            for &v in &nodes[1..] {
                let r = find(&mut parent, v);
                parent[r] = r0;
            }
        }
        let root = find(&mut parent, 0);
        (0..n).all(|v| find(&mut parent, v) == root)
    }

    /// Icosahedron with a vertex at the north pole, subdivided `level`
    /// times and projected to the unit sphere.
    ///
    /// For `level ≥ 1` the vertices closest to the equator are snapped onto
    /// it and the southern half is replaced by the mirror image of the
    /// northern half, so the mesh is exactly symmetric under `z ↦ −z` and
    /// the equator is a ring of mesh edges. Vertex and triangle counts are
    /// those of the plain icosphere.
    pub fn icosphere(level: usize) -> Result<Self> {
        if level > MAX_ICOSPHERE_LEVEL {
            return Err(Error::InvalidArgument(format!(
                "icosphere level {level} exceeds {MAX_ICOSPHERE_LEVEL}"
            )));
        }
        let (mut vertices, mut triangles) = polar_icosahedron();
        for _ in 0..level {
            (vertices, triangles) = subdivide(&vertices, &triangles);
        }
        if level == 0 {
            orient_outward(&vertices, &mut triangles);
            return Self::assemble_2d(MeshKind::Sphere, vertices, &triangles, Some(0));
        }

        let min_edge = triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| norm(sub(vertices[a], vertices[b])))
            .fold(f64::INFINITY, f64::min);
        let snap = 0.25 * min_edge;
        for v in vertices.iter_mut() {
            if v[2].asin().abs() < snap {
                let r = v[0].hypot(v[1]);
                *v = [v[0] / r, v[1] / r, 0.0];
            }
        }

        // Keep the closed northern half and mirror it.
        let north: Vec<[usize; 3]> = triangles
            .iter()
            .copied()
            .filter(|t| t.iter().all(|&i| vertices[i][2] >= 0.0))
            .collect();
        if 2 * north.len() != triangles.len() {
            return Err(Error::InvalidMesh("subdivision lacks an equator ring".into()));
        }
        let mut index = vec![usize::MAX; vertices.len()];
        let mut out: Vec<[f64; 3]> = Vec::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if v[2] >= 0.0 {
                index[i] = out.len();
                out.push(*v);
            }
        }
        let n_north = out.len();
        let mut mirror: Vec<usize> = (0..n_north).collect();
        let mut south_index = vec![usize::MAX; n_north];
        for i in 0..n_north {
            let v = out[i];
            if v[2] > 0.0 {
                south_index[i] = out.len();
                mirror[i] = out.len();
                mirror.push(i);
                out.push([v[0], v[1], -v[2]]);
            } else {
                south_index[i] = i;
            }
        }
        let mut tris: Vec<[usize; 3]> = north.iter().map(|t| t.map(|i| index[i])).collect();
        let mirrored: Vec<[usize; 3]> = tris
            .iter()
            .map(|t| [south_index[t[0]], south_index[t[2]], south_index[t[1]]])
            .collect();
        tris.extend(mirrored);
        orient_outward(&out, &mut tris);

        let mut mesh = Self::assemble_2d(MeshKind::Sphere, out, &tris, Some(0))?;
        mesh.mirror = Some(mirror);
        mesh.equator_ring = true;
        Ok(mesh)
    }

    /// The closed hemisphere centered at `pole`, with its equator ring
    /// flagged as boundary.
    pub fn extract_hemisphere(&self, pole: usize) -> Result<Submesh> {
        if self.kind != MeshKind::Sphere {
            return Err(Error::InvalidArgument("hemisphere extraction needs a sphere mesh".into()));
        }
        if pole >= self.vertices.len() {
            return Err(Error::InvalidArgument(format!("pole {pole} out of range")));
        }
        let x0 = self.vertices[pole];
        let colat: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| dot(*v, x0).clamp(-1.0, 1.0).acos())
            .collect();
        let upper = |i: usize| colat[i] <= PI / 2.0 + EQUATOR_TOL;
        let lower = |i: usize| colat[i] >= PI / 2.0 - EQUATOR_TOL;

        let mut keep = Vec::new();
        for tri in self.elements.chunks_exact(3) {
            let all_up = tri.iter().all(|&i| upper(i));
            let all_down = tri.iter().all(|&i| lower(i));
            if !all_up && !all_down {
                return Err(Error::NoEquatorRing);
            }
            if all_up {
                keep.push([tri[0], tri[1], tri[2]]);
            }
        }
        let on_ring = (0..self.vertices.len()).filter(|&i| upper(i) && lower(i)).count();
        if on_ring == 0 || keep.is_empty() {
            return Err(Error::NoEquatorRing);
        }

        let mut index = vec![usize::MAX; self.vertices.len()];
        let mut parent = Vec::new();
        for tri in &keep {
            for &i in tri {
                if index[i] == usize::MAX {
                    index[i] = parent.len();
                    parent.push(i);
                }
            }
        }
        // Restore parent order so the submesh numbering is monotone.
        parent.sort_unstable();
        for (new, &old) in parent.iter().enumerate() {
            index[old] = new;
        }
        let vertices = parent.iter().map(|&i| self.vertices[i]).collect();
        let tris: Vec<[usize; 3]> = keep.iter().map(|t| t.map(|i| index[i])).collect();
        let mut mesh = Self::assemble_2d(MeshKind::Hemisphere, vertices, &tris, Some(index[pole]))?;
        mesh.boundary = parent.iter().map(|&i| lower(i)).collect();
        Ok(Submesh { mesh, parent })
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.measure.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// Vertex indices of element `e`.
    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.elements[e * k..(e + 1) * k]
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &[usize]> {
        self.elements.chunks_exact(self.dim + 1)
    }

    pub fn element_measure(&self) -> &[f64] {
        &self.measure
    }

    /// Gram matrix `∇φ_i·∇φ_j` of element `e`, row major.
    pub fn element_gram(&self, e: usize) -> &[f64] {
        let k = (self.dim + 1) * (self.dim + 1);
        &self.gram[e * k..(e + 1) * k]
    }

    /// Vertex quadrature weights (lumped mass): `∫ u ν ≈ Σ lumped_v u_v`.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.iter().any(|&b| b)
    }

    pub fn pole(&self) -> Option<usize> {
        self.pole
    }

    /// Mirror partner of each vertex under `z ↦ −z`, when the mesh is
    /// exactly mirror symmetric.
    pub fn mirror(&self) -> Option<&[usize]> {
        self.mirror.as_deref()
    }

    pub fn has_equator_ring(&self) -> bool {
        self.equator_ring
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// Geodesic distance of `v` from the pole, in `[0, π]`.
    ///
    /// On circles the arc distance is rescaled so that the antipode of the
    /// pole sits at `π` whatever the length.
    pub fn colatitude(&self, v: usize) -> Result<f64> {
        let pole = self
            .pole
            .ok_or_else(|| Error::InvalidArgument("mesh has no pole".into()))?;
        match self.kind {
            MeshKind::Circle { length } => {
                let d = (self.vertices[v][0] - self.vertices[pole][0]).abs() % length;
                let d = d.min(length - d);
                Ok(d / (0.5 * length) * PI)
            }
            MeshKind::Sphere | MeshKind::Hemisphere => {
                Ok(dot(self.vertices[v], self.vertices[pole]).clamp(-1.0, 1.0).acos())
            }
            MeshKind::Interval | MeshKind::Surface => Err(Error::InvalidArgument(
                "colatitude is defined on circle and sphere meshes only".into(),
            )),
        }
    }

    pub fn colatitudes(&self) -> Result<Vec<f64>> {
        (0..self.num_vertices()).map(|v| self.colatitude(v)).collect()
    }

    /// Longest element measured in colatitude units (radians on spheres).
    pub fn max_edge_angle(&self) -> f64 {
        match self.kind {
            MeshKind::Circle { length } => {
                self.measure.iter().fold(0.0, |a: f64, &h| a.max(h)) * 2.0 * PI / length
            }
            MeshKind::Interval | MeshKind::Surface if self.dim == 1 => {
                self.measure.iter().fold(0.0, |a: f64, &h| a.max(h))
            }
            _ => self
                .elements()
                .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
                .map(|(a, b)| {
                    let (pa, pb) = (self.vertices[a], self.vertices[b]);
                    if self.kind == MeshKind::Surface {
                        norm(sub(pa, pb))
                    } else {
                        dot(pa, pb).clamp(-1.0, 1.0).acos()
                    }
                })
                .fold(0.0, f64::max),
        }
    }

    pub fn check_aligned(&self, field: &ScalarField) -> Result<()> {
        self.check_len(field.len())
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got == self.num_vertices() {
            Ok(())
        } else {
            Err(Error::Misaligned { expected: self.num_vertices(), got })
        }
    }

    /// `∫ density ν` with the vertex-mean rule.
    pub fn integrate(&self, density: &ScalarField) -> Result<f64> {
        self.check_aligned(density)?;
        Ok(self.integrate_slice(density.values()))
    }

    pub(crate) fn integrate_slice(&self, values: &[f64]) -> f64 {
        self.lumped.iter().zip(values).map(|(m, v)| m * v).sum()
    }

    /// Squared norm of the P1 gradient of `u` on every element.
    pub fn pl_gradient_sq(&self, u: &ScalarField) -> Result<Vec<f64>> {
        self.check_aligned(u)?;
        Ok((0..self.num_elements())
            .map(|e| self.gradient_sq(e, u.values()))
            .collect())
    }

    #[inline]
    pub(crate) fn gradient_sq(&self, e: usize, u: &[f64]) -> f64 {
        let nodes = self.element(e);
        let g = self.element_gram(e);
        let k = nodes.len();
        let mut acc = 0.0;
        for i in 0..k {
            let ui = u[nodes[i]];
            for j in 0..k {
                acc += g[i * k + j] * ui * u[nodes[j]];
            }
        }
        acc.max(0.0)
    }

    /// Vertex adjacency (sorted, without self loops).
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for nodes in self.elements() {
            for &a in nodes {
                for &b in nodes {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        adj
    }
}

fn boundary_from_edges(nv: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut count: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut boundary = vec![false; nv];
    for ((a, b), c) in count {
        if c == 1 {
            boundary[a] = true;
            boundary[b] = true;
        }
    }
    boundary
}

fn polar_icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let z = 1.0 / 5f64.sqrt();
    let r = 2.0 * z;
    let mut v = vec![[0.0, 0.0, 1.0]];
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0;
        v.push([r * a.cos(), r * a.sin(), z]);
    }
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0 + PI / 5.0;
        v.push([r * a.cos(), r * a.sin(), -z]);
    }
    v.push([0.0, 0.0, -1.0]);
    let mut t = Vec::with_capacity(20);
    for k in 0..5 {
        let (u0, u1) = (1 + k, 1 + (k + 1) % 5);
        let (l0, l1) = (6 + k, 6 + (k + 1) % 5);
        t.push([0, u0, u1]);
        t.push([u0, l0, u1]);
        t.push([u1, l0, l1]);
        t.push([11, l1, l0]);
    }
    (v, t)
}

fn subdivide(v: &[[f64; 3]], t: &[[usize; 3]]) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut verts = v.to_vec();
    let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let m = scale(add(verts[a], verts[b]), 0.5);
            verts.push(scale(m, 1.0 / norm(m)));
            verts.len() - 1
        })
    };
    let mut tris = Vec::with_capacity(4 * t.len());
    for &[a, b, c] in t {
        let ab = midpoint(a, b, &mut verts);
        let bc = midpoint(b, c, &mut verts);
        let ca = midpoint(c, a, &mut verts);
        tris.push([a, ab, ca]);
        tris.push([ab, b, bc]);
        tris.push([ca, bc, c]);
        tris.push([ab, bc, ca]);
    }
    (verts, tris)
}

fn orient_outward(v: &[[f64; 3]], t: &mut [[usize; 3]]) {
    for tri in t.iter_mut() {
        let [a, b, c] = tri.map(|i| v[i]);
        let n = cross(sub(b, a), sub(c, a));
        if dot(n, add(add(a, b), c)) < 0.0 {
            tri.swap(1, 2);
        }
    }
}

#[inline]
pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
