//! Closed oriented triangle meshes with intrinsic edge lengths.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unwrapped planar coordinates of a periodic surface. Only the flat torus
/// generator attaches one; Hamiltonian flows need it for point location.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicChart {
    pub period: f64,
    /// Chart position of each vertex, in [0, period)².
    pub coords: Vec<[f64; 2]>,
    /// Per face, the corner positions unwrapped so the triangle is contiguous.
    pub corners: Vec<[[f64; 2]; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// Edge (a, b) with a < b; the orientation is the lexicographic one.
    pub edges: Vec<[usize; 2]>,
    pub base_edge_lengths: Vec<f64>,
    /// face_edges[f][k] is the edge opposite corner k.
    pub face_edges: Vec<[usize; 3]>,
    /// +1 when edge face_edges[f][k] runs from corner k+1 to corner k+2.
    pub face_edge_signs: Vec<[f64; 3]>,
    /// The two faces of each edge: the first traverses it a→b.
    pub edge_faces: Vec<[usize; 2]>,
    pub chart: Option<PeriodicChart>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceTopology {
    pub genus: usize,
    pub euler_characteristic: i64,
    pub is_sphere: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct MeshSummary {
    pub V: usize,
    pub E: usize,
    pub F: usize,
    pub chi: i64,
    pub genus: usize,
}

/// Log conformal scale per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalFactor {
    pub u: Vec<f64>,
}

impl ConformalFactor {
    pub fn zero(n: usize) -> Self {
        ConformalFactor { u: vec![0.0; n] }
    }

    /// Validated construction: the scaled lengths must be non-degenerate.
    pub fn new(mesh: &TriangleMesh, u: Vec<f64>) -> Result<Self> {
        let cf = ConformalFactor { u };
        effective_edge_lengths(mesh, &cf)?;
        Ok(cf)
    }
}

/// Area from side lengths, Kahan's stable Heron formula. Returns None for a
/// degenerate or impossible triangle.
pub fn triangle_area(a: f64, b: f64, c: f64) -> Option<f64> {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    if !(c > 0.0) || !(a < b + c) {
        return None;
    }
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if !(p > 0.0) {
        return None;
    }
    Some(0.25 * libm::sqrt(p))
}

impl TriangleMesh {
    /// Validate connectivity and take edge lengths from the embedding.
    pub fn from_embedding(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut mesh = Self::build(vertices, triangles)?;
        mesh.base_edge_lengths = mesh.edges.iter().map(|&[a, b]| dist3(&mesh.vertices[a], &mesh.vertices[b])).collect();
        mesh.check_lengths(&mesh.base_edge_lengths)?;
        Ok(mesh)
    }

    /// Validate connectivity; `lengths(a, b)` supplies the metric.
    pub fn with_lengths(
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
        lengths: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut mesh = Self::build(vertices, triangles)?;
        mesh.base_edge_lengths = mesh.edges.iter().map(|&[a, b]| lengths(a, b)).collect();
        mesh.check_lengths(&mesh.base_edge_lengths)?;
        Ok(mesh)
    }

    fn build(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::CorruptedMesh("no faces".into()));
        }
        for (f, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::CorruptedMesh(format!("face {f} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::CorruptedMesh(format!("face {f} repeats a vertex")));
            }
        }
        // Half-edges keyed by (min, max), sorted for determinism.
        let mut half: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (f, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                half.push((a.min(b), a.max(b), f, k));
            }
        }
        half.sort_unstable();
        let mut edges = Vec::new();
        let mut edge_faces = Vec::new();
        let mut face_edges = vec![[0usize; 3]; triangles.len()];
        let mut face_edge_signs = vec![[0.0f64; 3]; triangles.len()];
        let mut i = 0;
        while i < half.len() {
            let (a, b) = (half[i].0, half[i].1);
            let mut j = i;
            while j < half.len() && half[j].0 == a && half[j].1 == b {
                j += 1;
            }
            match j - i {
                1 => return Err(Error::OpenBoundary(a, b)),
                2 => {}
                n => return Err(Error::NonManifoldEdge(a, b, n)),
            }
            let e = edges.len();
            edges.push([a, b]);
            let mut faces = [usize::MAX; 2];
            let mut forward = 0;
            for &(_, _, f, k) in &half[i..j] {
                let t = triangles[f];
                let s = if t[(k + 1) % 3] == a { 1.0 } else { -1.0 };
                face_edges[f][k] = e;
                face_edge_signs[f][k] = s;
                if s > 0.0 {
                    faces[0] = f;
                    forward += 1;
                } else {
                    faces[1] = f;
                }
            }
            if forward != 1 {
                let (f0, f1) = (half[i].2, half[i + 1].2);
                return Err(Error::NonOrientable(orientation_culprit(&triangles, f0.max(f1))));
            }
            edge_faces.push(faces);
            i = j;
        }
        let mesh = TriangleMesh {
            vertices,
            triangles,
            edges,
            base_edge_lengths: Vec::new(),
            face_edges,
            face_edge_signs,
            edge_faces,
            chart: None,
        };
        mesh.check_vertex_links()?;
        let comps = mesh.face_components();
        if comps > 1 {
            return Err(Error::Disconnected(comps));
        }
        Ok(mesh)
    }

    fn check_vertex_links(&self) -> Result<()> {
        let nv = self.vertices.len();
        let mut vf: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (f, t) in self.triangles.iter().enumerate() {
            for &v in t {
                vf[v].push(f);
            }
        }
        for (v, faces) in vf.iter().enumerate() {
            if faces.is_empty() {
                return Err(Error::CorruptedMesh(format!("vertex {v} is not used by any face")));
            }
            // walk the fan across edges incident to v
            let mut seen = 1;
            let mut cur = faces[0];
            let mut prev_edge = usize::MAX;
            loop {
                let t = self.triangles[cur];
                let k = t.iter().position(|&x| x == v).unwrap();
                let e = [self.face_edges[cur][(k + 1) % 3], self.face_edges[cur][(k + 2) % 3]]
                    .into_iter()
                    .find(|&e| e != prev_edge)
                    .unwrap();
                let [f0, f1] = self.edge_faces[e];
                let next = if f0 == cur { f1 } else { f0 };
                prev_edge = e;
                if next == faces[0] {
                    break;
                }
                cur = next;
                seen += 1;
                if seen > faces.len() {
                    return Err(Error::NonManifoldVertex(v));
                }
            }
            if seen != faces.len() {
                return Err(Error::NonManifoldVertex(v));
            }
        }
        Ok(())
    }

    fn face_components(&self) -> usize {
        let nf = self.triangles.len();
        let mut comp = vec![usize::MAX; nf];
        let mut count = 0;
        for s in 0..nf {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut q = VecDeque::from([s]);
            while let Some(f) = q.pop_front() {
                for &e in &self.face_edges[f] {
                    for g in self.edge_faces[e] {
                        if comp[g] == usize::MAX {
                            comp[g] = count;
                            q.push_back(g);
                        }
                    }
                }
            }
            count += 1;
        }
        count
    }

    fn check_lengths(&self, lengths: &[f64]) -> Result<()> {
        let bad = self.degenerate_faces(lengths);
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::DegenerateMetric { faces: bad })
        }
    }

    pub fn degenerate_faces(&self, lengths: &[f64]) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&f| {
                let [a, b, c] = self.face_lengths(f, lengths);
                !(a.is_finite() && b.is_finite() && c.is_finite()) || triangle_area(a, b, c).is_none()
            })
            .collect()
    }

    /// Side lengths of face f ordered as face_edges (opposite each corner).
    pub fn face_lengths(&self, f: usize, lengths: &[f64]) -> [f64; 3] {
        let e = self.face_edges[f];
        [lengths[e[0]], lengths[e[1]], lengths[e[2]]]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn summary(&self) -> Result<MeshSummary> {
        let t = topology(self)?;
        Ok(MeshSummary {
            V: self.num_vertices(),
            E: self.num_edges(),
            F: self.num_faces(),
            chi: t.euler_characteristic,
            genus: t.genus,
        })
    }

    /// Faces incident to each vertex, ascending.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf: Vec<Vec<usize>> = vec![Vec::new(); self.num_vertices()];
        for (f, t) in self.triangles.iter().enumerate() {
            for &v in t {
                vf[v].push(f);
            }
        }
        vf
    }

    /// Neighbouring vertices with the connecting edge, per vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut nb: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.num_vertices()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            nb[a].push((b, e));
            nb[b].push((a, e));
        }
        nb
    }

    /// Areas of all faces under the given edge lengths.
    pub fn face_areas(&self, lengths: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.num_faces());
        let mut bad = Vec::new();
        for f in 0..self.num_faces() {
            let [a, b, c] = self.face_lengths(f, lengths);
            match triangle_area(a, b, c) {
                Some(x) => out.push(x),
                None => {
                    bad.push(f);
                    out.push(0.0)
                }
            }
        }
        if bad.is_empty() {
            Ok(out)
        } else {
            Err(Error::DegenerateMetric { faces: bad })
        }
    }

    /// Length of the longest edge under the given lengths.
    pub fn max_edge_length(&self, lengths: &[f64]) -> f64 {
        lengths.iter().fold(0.0, |m, &x| if x > m { x } else { m })
    }
}

/// BFS from face 0 propagating orientation; the first face that would need
/// flipping is named. Falls back to `hint` if propagation finds nothing.
fn orientation_culprit(triangles: &[[usize; 3]], hint: usize) -> usize {
    let mut adj: Vec<(usize, usize, usize)> = Vec::new();
    for (f, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            adj.push((a.min(b), a.max(b), f));
        }
    }
    adj.sort_unstable();
    let directed = |f: usize, a: usize, b: usize| -> bool {
        let t = triangles[f];
        (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b)
    };
    let mut flip = vec![None::<bool>; triangles.len()];
    flip[0] = Some(false);
    let mut q = VecDeque::from([0usize]);
    while let Some(f) = q.pop_front() {
        let t = triangles[f];
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let lo = adj.partition_point(|x| (x.0, x.1) < key);
            for &(_, _, g) in adj[lo..].iter().take_while(|x| (x.0, x.1) == key) {
                if g == f {
                    continue;
                }
                // g must traverse (b, a) when both faces keep their orientation
                let same = directed(g, a, b);
                let want = flip[f].unwrap() ^ same;
                if flip[g].is_none() {
                    flip[g] = Some(want);
                    q.push_back(g);
                }
            }
        }
    }
    let flipped: Vec<usize> = (0..triangles.len()).filter(|&f| flip[f] == Some(true)).collect();
    let unflipped = triangles.len() - flipped.len();
    if !flipped.is_empty() && flipped.len() <= unflipped {
        flipped[0]
    } else {
        hint
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    libm::sqrt(sq(a[0] - b[0]) + sq(a[1] - b[1]) + sq(a[2] - b[2]))
}

pub fn topology(mesh: &TriangleMesh) -> Result<SurfaceTopology> {
    let chi = mesh.euler_characteristic();
    if chi % 2 != 0 || chi > 2 {
        return Err(Error::CorruptedMesh(format!(
            "Euler characteristic {chi} is not that of a closed orientable surface"
        )));
    }
    let genus = ((2 - chi) / 2) as usize;
    Ok(SurfaceTopology { genus, euler_characteristic: chi, is_sphere: genus == 0 })
}

/// l_ij = exp((u_i + u_j)/2) · l⁰_ij, validated face by face.
pub fn effective_edge_lengths(mesh: &TriangleMesh, u: &ConformalFactor) -> Result<Vec<f64>> {
    if u.u.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!(
            "conformal factor has {} entries for {} vertices",
            u.u.len(),
            mesh.num_vertices()
        )));
    }
    let lengths: Vec<f64> = mesh
        .edges
        .iter()
        .zip(&mesh.base_edge_lengths)
        .map(|(&[a, b], &l0)| {
            let s = 0.5 * (u.u[a] + u.u[b]);
            if s == 0.0 {
                l0
            } else {
                libm::exp(s) * l0
            }
        })
        .collect();
    mesh.check_lengths(&lengths)?;
    Ok(lengths)
}

/// Regular n×n triangulation of the square flat torus of side `side`.
/// The embedding is a round torus in R³ (for export only); lengths and the
/// periodic chart come from the flat metric.
pub fn generate_flat_torus(side: f64, resolution: usize) -> Result<TriangleMesh> {
    let n = resolution;
    if n < 3 {
        return Err(Error::InvalidParameter(format!("torus resolution {n} < 3")));
    }
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::InvalidParameter(format!("torus side length {side}")));
    }
    let h = side / n as f64;
    let idx = |i: usize, j: usize| (j % n) * n + (i % n);
    let mut vertices = Vec::with_capacity(n * n);
    let mut coords = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b) = (2.0 * PI * i as f64 / n as f64, 2.0 * PI * j as f64 / n as f64);
            let r = 2.0 + libm::cos(b);
            vertices.push([r * libm::cos(a), r * libm::sin(a), libm::sin(b)]);
            coords.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut corners = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (x0, y0, x1, y1) = (i as f64 * h, j as f64 * h, (i + 1) as f64 * h, (j + 1) as f64 * h);
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            corners.push([[x0, y0], [x1, y0], [x1, y1]]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            corners.push([[x0, y0], [x1, y1], [x0, y1]]);
        }
    }
    // Flat length from the unwrapped corner positions.
    let mut lookup: Vec<(usize, usize, f64)> = Vec::with_capacity(3 * triangles.len());
    for (t, c) in triangles.iter().zip(&corners) {
        for k in 0..3 {
            let (p, q) = (c[k], c[(k + 1) % 3]);
            let l = libm::sqrt(sq(p[0] - q[0]) + sq(p[1] - q[1]));
            let (a, b) = (t[k], t[(k + 1) % 3]);
            lookup.push((a.min(b), a.max(b), l));
        }
    }
    lookup.sort_by_key(|x| (x.0, x.1));
    let mut mesh = TriangleMesh::with_lengths(vertices, triangles, |a, b| {
        let k = lookup.partition_point(|x| (x.0, x.1) < (a, b));
        lookup[k].2
    })?;
    mesh.chart = Some(PeriodicChart { period: side, coords, corners });
    Ok(mesh)
}

/// Subdivided icosahedron projected to the sphere, with great-circle lengths.
pub fn generate_icosphere(radius: f64, subdivisions: usize) -> Result<TriangleMesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("sphere radius {radius}")));
    }
    let t = (1.0 + libm::sqrt(5.0)) / 2.0;
    let mut verts: Vec<[f64; 3]> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(unit)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut cache = MidCache::default();
        for &[a, b, c] in &faces {
            let ab = cache.get(a, b, &mut verts);
            let bc = cache.get(b, c, &mut verts);
            let ca = cache.get(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let positions: Vec<[f64; 3]> = verts.iter().map(|p| [p[0] * radius, p[1] * radius, p[2] * radius]).collect();
    let unit_verts = verts;
    TriangleMesh::with_lengths(positions, faces, |a, b| {
        let (p, q) = (unit_verts[a], unit_verts[b]);
        // atan2 form is accurate for short arcs
        let cross = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
        let s = libm::sqrt(sq(cross[0]) + sq(cross[1]) + sq(cross[2]));
        let c = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
        radius * libm::atan2(s, c)
    })
}

#[derive(Default)]
struct MidCache {
    keys: Vec<(usize, usize, usize)>,
}

impl MidCache {
    fn get(&mut self, a: usize, b: usize, verts: &mut Vec<[f64; 3]>) -> usize {
        let key = (a.min(b), a.max(b));
        match self.keys.binary_search_by(|x| (x.0, x.1).cmp(&key)) {
            Ok(k) => self.keys[k].2,
            Err(k) => {
                let (p, q) = (verts[a], verts[b]);
                verts.push(unit(&[p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                let m = verts.len() - 1;
                self.keys.insert(k, (key.0, key.1, m));
                m
            }
        }
    }
}

fn unit(p: &[f64; 3]) -> [f64; 3] {
    let r = libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    [p[0] / r, p[1] / r, p[2] / r]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_counts() {
        let m = generate_flat_torus(2.0 * PI, 32).unwrap();
        assert_eq!((m.num_vertices(), m.num_faces(), m.num_edges()), (1024, 2048, 3072));
        assert_eq!(m.euler_characteristic(), 0);
        let m3 = generate_flat_torus(1.0, 3).unwrap();
        assert_eq!(topology(&m3).unwrap().genus, 1);
        assert!(matches!(generate_flat_torus(1.0, 2), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn torus_lengths_are_flat() {
        let m = generate_flat_torus(4.0, 8).unwrap();
        let h = 0.5;
        for &l in &m.base_edge_lengths {
            assert!((l - h).abs() < 1e-14 || (l - h * libm::sqrt(2.0)).abs() < 1e-14);
        }
        let area: f64 = m.face_areas(&m.base_edge_lengths).unwrap().iter().sum();
        assert!((area - 16.0).abs() < 1e-12);
    }

    #[test]
    fn icosphere_counts() {
        let m0 = generate_icosphere(1.0, 0).unwrap();
        assert_eq!((m0.num_vertices(), m0.euler_characteristic()), (12, 2));
        let m3 = generate_icosphere(1.0, 3).unwrap();
        assert_eq!(m3.num_vertices(), 642);
        assert_eq!(m3.euler_characteristic(), 2);
        assert!(topology(&m3).unwrap().is_sphere);
        for p in &m3.vertices {
            assert!((libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn icosphere_geodesic_lengths_exceed_chords() {
        let m = generate_icosphere(2.0, 1).unwrap();
        for (e, &[a, b]) in m.edges.iter().enumerate() {
            assert!(m.base_edge_lengths[e] > dist3(&m.vertices[a], &m.vertices[b]));
        }
    }

    #[test]
    fn zero_factor_is_identity_and_constant_scales() {
        let m = generate_icosphere(1.0, 1).unwrap();
        let l = effective_edge_lengths(&m, &ConformalFactor::zero(m.num_vertices())).unwrap();
        assert_eq!(l, m.base_edge_lengths);
        // a constant factor c scales every length by e^c
        let c: f64 = 0.3;
        let l2 = effective_edge_lengths(&m, &ConformalFactor { u: vec![c; m.num_vertices()] }).unwrap();
        for (a, b) in l2.iter().zip(&m.base_edge_lengths) {
            assert!((a / b - libm::exp(c)).abs() < 1e-14);
        }
    }

    #[test]
    fn steep_factor_is_degenerate() {
        let m = generate_flat_torus(1.0, 8).unwrap();
        let mut u = vec![0.0; m.num_vertices()];
        u[0] = 50.0;
        match ConformalFactor::new(&m, u) {
            Err(Error::DegenerateMetric { faces }) => assert!(!faces.is_empty()),
            other => panic!("expected degenerate metric, got {other:?}"),
        }
    }

    #[test]
    fn rejects_boundary_and_flipped_faces() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let r = TriangleMesh::from_embedding(v, vec![[0, 1, 2], [0, 2, 3]]);
        assert!(matches!(r, Err(Error::OpenBoundary(_, _))));

        let oct = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let mut f = vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
        let good = TriangleMesh::from_embedding(oct.clone(), f.clone()).unwrap();
        assert_eq!(topology(&good).unwrap().genus, 0);
        f[7] = [3, 0, 5];
        assert_eq!(TriangleMesh::from_embedding(oct, f), Err(Error::NonOrientable(7)));
    }

    #[test]
    fn edge_bookkeeping_is_consistent() {
        let m = generate_icosphere(1.0, 1).unwrap();
        for (f, t) in m.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = m.face_edges[f][k];
                let [a, b] = m.edges[e];
                let (p, q) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                let s = m.face_edge_signs[f][k];
                assert!((s > 0.0 && (p, q) == (a, b)) || (s < 0.0 && (p, q) == (b, a)));
                assert!(m.edge_faces[e].contains(&f));
            }
        }
    }
}
