//! Legacy VTK structured-grid export of deflection and bending moments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sbiga_core::plate::{Field, Material};

use crate::error::HarnessError;

pub const FIELDS: [&str; 4] = ["u", "m11", "m22", "m12"];

/// Samples on a `(zeta, xi)` lattice of every patch, stacked along the third
/// grid direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    /// Samples along `zeta`, along `xi` and number of patches.
    pub dims: [usize; 3],
    pub points: Vec<[f64; 2]>,
    pub fields: BTreeMap<String, Vec<f64>>,
}

/// Lattice parameters: `zeta` in `[0, 1]`, `xi` in `(0, 1]` so that moments
/// are never evaluated on a collapsed edge.
pub fn lattice(nz: usize, nx: usize) -> (Vec<f64>, Vec<f64>) {
    let z = (0..nz).map(|k| k as f64 / (nz - 1) as f64).collect();
    let x = (1..=nx).map(|k| k as f64 / nx as f64).collect();
    (z, x)
}

pub fn sample_field(field: &Field<'_>, material: &Material, grid: [usize; 2]) -> Result<GridData, HarnessError> {
    let (zs, xs) = lattice(grid[0], grid[1]);
    let np = field.space.domain.patches.len();
    let mut data = GridData { dims: [grid[0], grid[1], np], points: Vec::new(), fields: BTreeMap::new() };
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (k, patch) in field.space.domain.patches.iter().enumerate() {
        for &x in &xs {
            for &z in &zs {
                let pos = patch.map(z, x);
                let v = field.eval(k, z, x, 2)?;
                let m = material.bending_moments(v.hess);
                data.points.push([pos.x, pos.y]);
                cols[0].push(v.value);
                cols[1].push(m[0]);
                cols[2].push(m[1]);
                cols[3].push(m[2]);
            }
        }
    }
    for (name, c) in FIELDS.iter().zip(cols) {
        data.fields.insert(name.to_string(), c);
    }
    Ok(data)
}

pub fn to_vtk(data: &GridData, title: &str) -> String {
    let n = data.points.len();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {} {} {}", data.dims[0], data.dims[1], data.dims[2]);
    let _ = writeln!(s, "POINTS {n} double");
    for p in &data.points {
        let _ = writeln!(s, "{:e} {:e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    for (name, vals) in &data.fields {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in vals {
            let _ = writeln!(s, "{v:e}");
        }
    }
    s
}

pub fn write_vtk(data: &GridData, title: &str, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, to_vtk(data, title))
        .map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", path.display())))
}

fn bad(msg: &str) -> HarnessError {
    HarnessError::Io(format!("malformed VTK file: {msg}"))
}

pub fn parse_vtk(text: &str) -> Result<GridData, HarnessError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty"))?;
    if !header.starts_with("# vtk DataFile") {
        return Err(bad("missing header"));
    }
    lines.next();
    if lines.next().map(str::trim) != Some("ASCII") {
        return Err(bad("only ASCII files are supported"));
    }
    if lines.next().map(str::trim) != Some("DATASET STRUCTURED_GRID") {
        return Err(bad("not a structured grid"));
    }
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut next = || tokens.next().ok_or_else(|| bad("unexpected end of file"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("bad number '{t}'")));
    let int = |t: &str| t.parse::<usize>().map_err(|_| bad(&format!("bad count '{t}'")));
    if next()? != "DIMENSIONS" {
        return Err(bad("expected DIMENSIONS"));
    }
    let dims = [int(next()?)?, int(next()?)?, int(next()?)?];
    if next()? != "POINTS" {
        return Err(bad("expected POINTS"));
    }
    let n = int(next()?)?;
    if n != dims.iter().product::<usize>() {
        return Err(bad("point count does not match dimensions"));
    }
    next()?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = num(next()?)?;
        let y = num(next()?)?;
        num(next()?)?;
        points.push([x, y]);
    }
    let mut fields = BTreeMap::new();
    if let Ok(tok) = next() {
        if tok != "POINT_DATA" || int(next()?)? != n {
            return Err(bad("expected POINT_DATA"));
        }
        while let Ok(tok) = next() {
            if tok != "SCALARS" {
                return Err(bad("expected SCALARS"));
            }
            let name = next()?.to_string();
            next()?;
            next()?;
            if next()? != "LOOKUP_TABLE" {
                return Err(bad("expected LOOKUP_TABLE"));
            }
            next()?;
            let vals = (0..n).map(|_| num(next()?)).collect::<Result<Vec<_>, _>>()?;
            fields.insert(name, vals);
        }
    }
    Ok(GridData { dims, points, fields })
}

pub fn read_vtk(path: &Path) -> Result<GridData, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_vtk(&text)
}
