//! Text formats: OFF for triangle meshes, CSV for 1-D meshes and for
//! per-vertex fields.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::{DiscreteManifold, MeshKind, ScalarField};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_off(mesh: &DiscreteManifold) -> Result<String> {
    if mesh.dim() != 2 {
        return Err(Error::InvalidArgument("OFF export needs a triangle mesh".into()));
    }
    let mut s = String::new();
    writeln!(s, "OFF").unwrap();
    writeln!(s, "{} {} 0", mesh.num_vertices(), mesh.num_elements()).unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{} {} {}", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2])).unwrap();
    }
    for t in mesh.elements() {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    Ok(s)
}

/// Parses an OFF file into a [`MeshKind::Surface`] mesh.
pub fn read_off(text: &str) -> Result<DiscreteManifold> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let parse_err = |what: &str| Error::Parse(format!("OFF: {what}"));
    if lines.next() != Some("OFF") {
        return Err(parse_err("missing OFF header"));
    }
    let counts: Vec<usize> = lines
        .next()
        .ok_or_else(|| parse_err("missing counts line"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err("bad count")))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err("counts line needs vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let xs: Vec<f64> = lines
            .next()
            .ok_or_else(|| parse_err("truncated vertex list"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err("bad coordinate")))
            .collect::<Result<_>>()?;
        if xs.len() != 3 {
            return Err(parse_err("vertex line needs 3 coordinates"));
        }
        vertices.push([xs[0], xs[1], xs[2]]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let ids: Vec<usize> = lines
            .next()
            .ok_or_else(|| parse_err("truncated face list"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err("bad index")))
            .collect::<Result<_>>()?;
        if ids.len() != 4 || ids[0] != 3 {
            return Err(parse_err("only triangular faces are supported"));
        }
        faces.push([ids[1], ids[2], ids[3]]);
    }
    DiscreteManifold::from_triangles(vertices, &faces)
}

/// `vertex,coordinate,boundary` rows for a 1-D mesh.
pub fn write_1d_csv(mesh: &DiscreteManifold) -> Result<String> {
    if mesh.dim() != 1 {
        return Err(Error::InvalidArgument("1-D CSV export needs a 1-D mesh".into()));
    }
    let mut s = String::from("vertex,coordinate,boundary\n");
    for (i, v) in mesh.vertices().iter().enumerate() {
        writeln!(s, "{i},{},{}", fmt_f64(v[0]), u8::from(mesh.boundary()[i])).unwrap();
    }
    Ok(s)
}

/// Reads a 1-D CSV back. Meshes with boundary flags become intervals;
/// otherwise a uniform circle is assumed with the given length.
pub fn read_1d_csv(text: &str, circle_length: Option<f64>) -> Result<DiscreteManifold> {
    let mut coords = Vec::new();
    let mut any_boundary = false;
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected 3 columns", lineno + 1)));
        }
        let x: f64 = cols[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad coordinate", lineno + 1)))?;
        any_boundary |= cols[2].trim() == "1";
        coords.push(x);
    }
    match (any_boundary, circle_length) {
        (true, _) => DiscreteManifold::interval_from_points(&coords),
        (false, Some(length)) => DiscreteManifold::circle(coords.len(), length),
        (false, None) => Err(Error::Parse("closed 1-D mesh needs a circle length".into())),
    }
}

/// `vertex,value` rows.
pub fn write_field_csv(field: &ScalarField) -> String {
    let mut s = String::from("vertex,value\n");
    for (i, v) in field.values().iter().enumerate() {
        writeln!(s, "{i},{}", fmt_f64(*v)).unwrap();
    }
    s
}

pub fn read_field_csv(text: &str) -> Result<ScalarField> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (idx, val) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected 2 columns", lineno + 1)))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad index", lineno + 1)))?;
        if idx != values.len() {
            return Err(Error::Parse(format!("line {}: vertices out of order", lineno + 1)));
        }
        values.push(
            val.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad value", lineno + 1)))?,
        );
    }
    ScalarField::new(values)
}

/// Whether a mesh kind round-trips through [`write_off`].
pub fn is_surface(kind: MeshKind) -> bool {
    matches!(kind, MeshKind::Sphere | MeshKind::Hemisphere | MeshKind::Surface)
}
