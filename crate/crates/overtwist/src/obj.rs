//! Wavefront OBJ: triangle meshes in, meshes and polylines out.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use overtwist_core::mesh::TriangleMesh;
use overtwist_core::nodal::NodalCurve;

/// Parse `v` and `f` records. Faces may use `a/b/c` syntax and negative
/// indices; polygons are fan-triangulated.
pub fn parse_obj(text: &str) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .with_context(|| format!("line {}: bad vertex", lineno + 1))?;
                if c.len() != 3 {
                    bail!("line {}: vertex needs three coordinates", lineno + 1);
                }
                verts.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in it {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().with_context(|| format!("line {}: bad face index {tok}", lineno + 1))?;
                    let k = if i > 0 {
                        i as usize - 1
                    } else if i < 0 && (-i) as usize <= verts.len() {
                        verts.len() - (-i) as usize
                    } else {
                        bail!("line {}: face index {i} out of range", lineno + 1);
                    };
                    idx.push(k);
                }
                if idx.len() < 3 {
                    bail!("line {}: face with fewer than three vertices", lineno + 1);
                }
                for j in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[j], idx[j + 1]]);
                }
            }
            _ => {}
        }
    }
    if let Some(bad) = faces.iter().flatten().find(|&&i| i >= verts.len()) {
        bail!("face refers to vertex {} but only {} vertices exist", bad + 1, verts.len());
    }
    Ok((verts, faces))
}

pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read mesh {}", path.display()))?;
    let (v, f) = parse_obj(&text)?;
    Ok(TriangleMesh::from_embedding(v, f)?)
}

/// Mesh with an optional per-vertex scalar stored as `vt s 0`.
pub fn mesh_to_obj(mesh: &TriangleMesh, scalar: Option<&[f64]>, header: &str) -> String {
    let mut s = String::new();
    for line in header.lines() {
        let _ = writeln!(s, "# {line}");
    }
    for p in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    if let Some(f) = scalar {
        for x in f {
            let _ = writeln!(s, "vt {x} 0");
        }
    }
    for t in &mesh.triangles {
        if scalar.is_some() {
            let _ = writeln!(s, "f {0}/{0} {1}/{1} {2}/{2}", t[0] + 1, t[1] + 1, t[2] + 1);
        } else {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
    }
    s
}

/// Nodal curves as closed `l` polylines, one object per component.
pub fn curves_to_obj(mesh: &TriangleMesh, curves: &[NodalCurve], header: &str) -> String {
    let mut s = String::new();
    for line in header.lines() {
        let _ = writeln!(s, "# {line}");
    }
    let mut base = 1;
    for c in curves {
        let pts = c.points(mesh);
        let _ = writeln!(s, "o curve_{}", c.component_id);
        for p in &pts {
            let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
        }
        let mut l = String::from("l");
        for i in 0..pts.len() {
            let _ = write!(l, " {}", base + i);
        }
        if c.is_closed && !pts.is_empty() {
            let _ = write!(l, " {base}");
        }
        let _ = writeln!(s, "{l}");
        base += pts.len();
    }
    s
}
