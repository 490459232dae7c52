//! Nodal sets of vertex functions and the topology of their complement.
//!
//! Zero vertex values count as positive (an infinitesimal +ε), which makes
//! the sign pattern total. Regions are sign-connected vertex components;
//! each region's Euler characteristic is V − E + F of the subcomplex of
//! simplices whose vertices all lie in it, which is homotopy equivalent to
//! the open nodal domain for piecewise-linear f.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

/// A point where the nodal curve crosses an edge: (1−t)·a + t·b for
/// edge (a, b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingPoint {
    pub edge: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalCurve {
    /// Consecutive crossings; the curve closes back to the first point.
    pub segments: Vec<CrossingPoint>,
    pub component_id: usize,
    pub is_closed: bool,
}

impl NodalCurve {
    /// Positions in the embedding.
    pub fn points(&self, mesh: &TriangleMesh) -> Vec<[f64; 3]> {
        self.segments
            .iter()
            .map(|c| {
                let [a, b] = mesh.edges[c.edge];
                let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
                [0, 1, 2].map(|k| (1.0 - c.t) * p[k] + c.t * q[k])
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionTopology {
    pub region_id: usize,
    pub sign: i8,
    pub euler_characteristic: i64,
    pub boundary_loop_count: usize,
    pub is_disc: bool,
    pub vertex_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodalDomainSet {
    pub regions: Vec<RegionTopology>,
    pub curve_components: usize,
    /// Region of each vertex.
    pub vertex_region: Vec<usize>,
}

impl NodalDomainSet {
    pub fn disc_regions(&self) -> impl Iterator<Item = &RegionTopology> {
        self.regions.iter().filter(|r| r.is_disc)
    }
}

/// Fraction of vertices allowed on a zero plateau.
pub const PLATEAU_FRACTION: f64 = 0.01;

fn is_positive(x: f64) -> bool {
    x >= 0.0
}

fn check_plateau(f: &[f64]) -> Result<()> {
    let top = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tau = 1e-12 * top;
    let near = f.iter().filter(|x| x.abs() <= tau).count();
    if top == 0.0 || near as f64 > PLATEAU_FRACTION * f.len() as f64 {
        return Err(Error::DegenerateNodalSet { near_zero: near, total: f.len() });
    }
    Ok(())
}

pub fn extract_nodal_set(mesh: &TriangleMesh, f: &[f64]) -> Result<Vec<NodalCurve>> {
    if f.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!("{} values for {} vertices", f.len(), mesh.num_vertices())));
    }
    check_plateau(f)?;
    let crossing: Vec<bool> = mesh.edges.iter().map(|&[a, b]| is_positive(f[a]) != is_positive(f[b])).collect();
    let mut visited = vec![false; mesh.num_edges()];
    let mut curves = Vec::new();
    for start in 0..mesh.num_edges() {
        if !crossing[start] || visited[start] {
            continue;
        }
        let mut segs = Vec::new();
        let mut e = start;
        let mut face = mesh.edge_faces[start][0];
        loop {
            visited[e] = true;
            let [a, b] = mesh.edges[e];
            let t = f[a] / (f[a] - f[b]);
            segs.push(CrossingPoint { edge: e, t: t.clamp(0.0, 1.0) });
            let next = mesh.face_edges[face]
                .iter()
                .copied()
                .find(|&x| x != e && crossing[x])
                .ok_or_else(|| Error::InternalConsistency(format!("face {face} has one sign change")))?;
            let [f0, f1] = mesh.edge_faces[next];
            face = if f0 == face { f1 } else { f0 };
            e = next;
            if e == start {
                break;
            }
            if visited[e] {
                return Err(Error::InternalConsistency(format!("nodal curve through edge {e} does not close")));
            }
        }
        curves.push(NodalCurve { segments: segs, component_id: curves.len(), is_closed: true });
    }
    Ok(curves)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins, so labels follow vertex order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

pub fn nodal_domains(mesh: &TriangleMesh, f: &[f64], curves: &[NodalCurve]) -> Result<NodalDomainSet> {
    if f.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!("{} values for {} vertices", f.len(), mesh.num_vertices())));
    }
    let pos: Vec<bool> = f.iter().map(|&x| is_positive(x)).collect();
    let mut uf = UnionFind::new(f.len());
    for &[a, b] in &mesh.edges {
        if pos[a] == pos[b] {
            uf.union(a, b);
        }
    }
    let mut label = vec![usize::MAX; f.len()];
    let mut roots: Vec<usize> = Vec::new();
    let mut vertex_region = vec![0usize; f.len()];
    for v in 0..f.len() {
        let r = uf.find(v);
        if label[r] == usize::MAX {
            label[r] = roots.len();
            roots.push(r);
        }
        vertex_region[v] = label[r];
    }
    let nr = roots.len();
    let mut chi = vec![0i64; nr];
    let mut count = vec![0usize; nr];
    for v in 0..f.len() {
        chi[vertex_region[v]] += 1;
        count[vertex_region[v]] += 1;
    }
    for &[a, b] in &mesh.edges {
        if vertex_region[a] == vertex_region[b] {
            chi[vertex_region[a]] -= 1;
        }
    }
    for t in &mesh.triangles {
        let r = vertex_region[t[0]];
        if vertex_region[t[1]] == r && vertex_region[t[2]] == r {
            chi[r] += 1;
        }
    }
    let mut loops = vec![0usize; nr];
    for c in curves {
        let mut touched: Vec<usize> = Vec::new();
        for p in &c.segments {
            for v in mesh.edges[p.edge] {
                let r = vertex_region[v];
                if !touched.contains(&r) {
                    touched.push(r);
                }
            }
        }
        if touched.len() != 2 || pos[roots[touched[0]]] == pos[roots[touched[1]]] {
            return Err(Error::InternalConsistency(format!(
                "nodal curve {} borders {} regions",
                c.component_id,
                touched.len()
            )));
        }
        for r in touched {
            loops[r] += 1;
        }
    }
    let total: i64 = chi.iter().sum();
    if total != mesh.euler_characteristic() {
        return Err(Error::InternalConsistency(format!(
            "region Euler characteristics sum to {total}, surface has {}",
            mesh.euler_characteristic()
        )));
    }
    let regions = (0..nr)
        .map(|r| RegionTopology {
            region_id: r,
            sign: if pos[roots[r]] { 1 } else { -1 },
            euler_characteristic: chi[r],
            boundary_loop_count: loops[r],
            is_disc: chi[r] == 1 && loops[r] == 1,
            vertex_count: count[r],
        })
        .collect();
    Ok(NodalDomainSet { regions, curve_components: curves.len(), vertex_region })
}

/// Courant: the first nontrivial eigenfunction has exactly two nodal domains.
pub fn courant_check(domains: &NodalDomainSet) -> bool {
    domains.regions.len() == 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_flat_torus, generate_icosphere};
    use core::f64::consts::PI;

    fn on_torus(n: usize, g: impl Fn(f64, f64) -> f64) -> (TriangleMesh, Vec<f64>) {
        let m = generate_flat_torus(2.0 * PI, n).unwrap();
        // offset by half a cell so no sample lands on the zero set
        let h = PI / n as f64;
        let f = m.chart.as_ref().unwrap().coords.iter().map(|p| g(p[0] + h * 0.5, p[1] + h * 0.3)).collect();
        (m, f)
    }

    #[test]
    fn cosine_on_torus_gives_two_annuli() {
        let (m, f) = on_torus(24, |x, _| libm::cos(x));
        let curves = extract_nodal_set(&m, &f).unwrap();
        assert_eq!(curves.len(), 2);
        let d = nodal_domains(&m, &f, &curves).unwrap();
        assert_eq!(d.regions.len(), 2);
        for r in &d.regions {
            assert_eq!((r.euler_characteristic, r.boundary_loop_count, r.is_disc), (0, 2, false));
        }
        assert!(courant_check(&d));
    }

    #[test]
    fn cos_2x_has_four_strips() {
        let (m, f) = on_torus(24, |x, _| libm::cos(2.0 * x));
        let c = extract_nodal_set(&m, &f).unwrap();
        let d = nodal_domains(&m, &f, &c).unwrap();
        assert_eq!(d.regions.len(), 4);
        assert!(!courant_check(&d));
    }

    #[test]
    fn bump_on_torus_gives_disc_and_punctured_torus() {
        let (m, f) = on_torus(24, |x, y| libm::exp(-((x - PI).powi(2) + (y - PI).powi(2))) - 0.3);
        let c = extract_nodal_set(&m, &f).unwrap();
        assert_eq!(c.len(), 1);
        let d = nodal_domains(&m, &f, &c).unwrap();
        let mut chis: Vec<i64> = d.regions.iter().map(|r| r.euler_characteristic).collect();
        chis.sort();
        assert_eq!(chis, vec![-1, 1]);
        assert_eq!(d.disc_regions().count(), 1);
    }

    #[test]
    fn linear_function_on_sphere_gives_hemispheres() {
        let m = generate_icosphere(1.0, 3).unwrap();
        let f: Vec<f64> = m.vertices.iter().map(|p| p[2] + 1e-3).collect();
        let c = extract_nodal_set(&m, &f).unwrap();
        assert_eq!(c.len(), 1);
        let d = nodal_domains(&m, &f, &c).unwrap();
        assert!(d.regions.iter().all(|r| r.is_disc));
        // zero set sits on the unit sphere's equator up to chord sag
        for p in c[0].points(&m) {
            assert!(p[2].abs() < 0.05);
        }
    }

    #[test]
    fn positive_function_has_empty_nodal_set() {
        let m = generate_icosphere(1.0, 1).unwrap();
        let f = vec![1.0; m.num_vertices()];
        let c = extract_nodal_set(&m, &f).unwrap();
        assert!(c.is_empty());
        let d = nodal_domains(&m, &f, &c).unwrap();
        assert_eq!(d.regions.len(), 1);
        assert_eq!(d.regions[0].euler_characteristic, 2);
    }

    #[test]
    fn plateau_is_rejected() {
        let m = generate_icosphere(1.0, 2).unwrap();
        let f: Vec<f64> = m.vertices.iter().map(|p| if p[2].abs() < 0.3 { 0.0 } else { p[2] }).collect();
        assert!(matches!(extract_nodal_set(&m, &f), Err(Error::DegenerateNodalSet { .. })));
    }

    #[test]
    fn exact_zero_counts_as_positive() {
        let m = generate_icosphere(1.0, 2).unwrap();
        let mut f: Vec<f64> = m.vertices.iter().map(|p| p[2] + 0.01).collect();
        let v = (0..f.len()).min_by(|&a, &b| f[a].abs().total_cmp(&f[b].abs())).unwrap();
        f[v] = 0.0;
        let c = extract_nodal_set(&m, &f).unwrap();
        let d = nodal_domains(&m, &f, &c).unwrap();
        let r = d.vertex_region[v];
        assert_eq!(d.regions[r].sign, 1);
    }
}
