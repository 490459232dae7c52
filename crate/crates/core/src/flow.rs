//! Area-preserving surface flows on meshes that carry a periodic chart.
//!
//! The flow of X_H = J∇H / ρ, with ρ the conformal-to-chart area ratio,
//! preserves the conformal area form ρ·dA₀. Gradients are recovered at
//! vertices and interpolated linearly, so X_H is continuous and vertex
//! trajectories are smooth enough for a midpoint integrator.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::dec::OperatorSet;
use crate::energy::StreamForm;
use crate::error::{Error, Result};
use crate::mesh::{PeriodicChart, TriangleMesh};
use crate::rng;

type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn signed_area(c: &[P2; 3]) -> f64 {
    0.5 * cross(sub(c[1], c[0]), sub(c[2], c[0]))
}

fn barycentric(c: &[P2; 3], p: P2) -> [f64; 3] {
    let two_a = cross(sub(c[1], c[0]), sub(c[2], c[0]));
    let mut l = [0.0; 3];
    for k in 0..3 {
        let (a, b) = (c[(k + 1) % 3], c[(k + 2) % 3]);
        l[k] = cross(sub(b, a), sub(p, a)) / two_a;
    }
    l
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub form: StreamForm,
    /// max over triangles of |ρ-area(φ(T)) − ρ-area(T)| / ρ-area(T).
    pub area_distortion: f64,
    /// Longest vertex trajectory, in chart units.
    pub max_displacement: f64,
}

/// Velocity field and point location on the chart.
pub struct ChartFlow<'a> {
    mesh: &'a TriangleMesh,
    chart: &'a PeriodicChart,
    /// Across the edge opposite corner k: neighbour face and the translation
    /// taking this face's frame to the neighbour's.
    nbr: Vec<[(usize, P2); 3]>,
    grad: Vec<P2>,
    rho: Vec<f64>,
    min_edge: f64,
}

impl<'a> ChartFlow<'a> {
    pub fn new(ops: &'a OperatorSet, h: &[f64]) -> Result<Self> {
        let mesh = &ops.mesh;
        let chart = mesh
            .chart
            .as_ref()
            .ok_or_else(|| Error::Unsupported("Hamiltonian flows need a mesh with a periodic chart".into()))?;
        if h.len() != mesh.num_vertices() {
            return Err(Error::InvalidArgument(format!(
                "H has {} entries for {} vertices",
                h.len(),
                mesh.num_vertices()
            )));
        }
        let nf = mesh.num_faces();
        let mut nbr = vec![[(0usize, [0.0; 2]); 3]; nf];
        for f in 0..nf {
            for k in 0..3 {
                let e = mesh.face_edges[f][k];
                let [f0, f1] = mesh.edge_faces[e];
                let g = if f0 == f { f1 } else { f0 };
                let v = mesh.triangles[f][(k + 1) % 3];
                let cg = mesh.triangles[g].iter().position(|&w| w == v).ok_or_else(|| {
                    Error::CorruptedMesh(format!("faces {f} and {g} share edge {e} but not vertex {v}"))
                })?;
                nbr[f][k] = (g, sub(chart.corners[g][cg], chart.corners[f][(k + 1) % 3]));
            }
        }
        let nv = mesh.num_vertices();
        let mut grad = vec![[0.0; 2]; nv];
        let mut weight = vec![0.0; nv];
        let mut min_edge = f64::INFINITY;
        for (f, tri) in mesh.triangles.iter().enumerate() {
            let c = &chart.corners[f];
            let a = signed_area(c);
            let mut gf = [0.0; 2];
            for k in 0..3 {
                let e = sub(c[(k + 2) % 3], c[(k + 1) % 3]);
                min_edge = min_edge.min(libm::hypot(e[0], e[1]));
                gf[0] += h[tri[k]] * -e[1] / (2.0 * a);
                gf[1] += h[tri[k]] * e[0] / (2.0 * a);
            }
            for &v in tri {
                grad[v][0] += a * gf[0];
                grad[v][1] += a * gf[1];
                weight[v] += a;
            }
        }
        let mut rho = vec![0.0; nv];
        for v in 0..nv {
            grad[v][0] /= weight[v];
            grad[v][1] /= weight[v];
            rho[v] = ops.star0[v] / (weight[v] / 3.0);
        }
        Ok(ChartFlow { mesh, chart, nbr, grad, rho, min_edge })
    }

    pub fn min_edge(&self) -> f64 {
        self.min_edge
    }

    /// Walk from face `f` to the face containing `p` (given in f's frame).
    pub fn locate(&self, mut f: usize, mut p: P2) -> Result<(usize, P2, [f64; 3])> {
        for _ in 0..(4 * self.mesh.num_faces() + 16) {
            let l = barycentric(&self.chart.corners[f], p);
            let mut k = 0;
            for j in 1..3 {
                if l[j] < l[k] {
                    k = j;
                }
            }
            if l[k] >= -1e-12 {
                return Ok((f, p, l));
            }
            let (g, s) = self.nbr[f][k];
            p = [p[0] + s[0], p[1] + s[1]];
            f = g;
        }
        Err(Error::InternalConsistency("point location did not terminate".into()))
    }

    fn interp(&self, f: usize, l: &[f64; 3], vals: &[f64]) -> f64 {
        let t = &self.mesh.triangles[f];
        l[0] * vals[t[0]] + l[1] * vals[t[1]] + l[2] * vals[t[2]]
    }

    pub fn rho_at(&self, f: usize, l: &[f64; 3]) -> f64 {
        self.interp(f, l, &self.rho)
    }

    pub fn velocity(&self, f: usize, l: &[f64; 3]) -> P2 {
        let t = &self.mesh.triangles[f];
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += l[k] * self.grad[t[k]][0];
            g[1] += l[k] * self.grad[t[k]][1];
        }
        let r = self.rho_at(f, l);
        [-g[1] / r, g[0] / r]
    }

    pub fn max_speed(&self) -> f64 {
        (0..self.grad.len()).map(|v| libm::hypot(self.grad[v][0], self.grad[v][1]) / self.rho[v]).fold(0.0, f64::max)
    }

    /// Midpoint-rule trajectory of a vertex; returns its final location and
    /// the total displacement vector.
    fn trace(&self, start: (usize, P2), dt: f64, steps: usize) -> Result<((usize, P2, [f64; 3]), P2, f64)> {
        let mut cur = self.locate(start.0, start.1)?;
        let mut disp = [0.0; 2];
        let mut path = 0.0;
        for _ in 0..steps {
            let v1 = self.velocity(cur.0, &cur.2);
            let half = self.locate(cur.0, [cur.1[0] + 0.5 * dt * v1[0], cur.1[1] + 0.5 * dt * v1[1]])?;
            let v2 = self.velocity(half.0, &half.2);
            let step = [dt * v2[0], dt * v2[1]];
            let len = libm::hypot(step[0], step[1]);
            if len > self.min_edge {
                return Err(Error::StepSize(format!(
                    "one step moves a vertex {len:.3e}, more than the shortest chart edge {:.3e}",
                    self.min_edge
                )));
            }
            path += len;
            disp = [disp[0] + step[0], disp[1] + step[1]];
            cur = self.locate(cur.0, [cur.1[0] + step[0], cur.1[1] + step[1]])?;
        }
        Ok((cur, disp, path))
    }

    /// ∫ ρ over a convex ccw polygon given in the frame of face `seed_face`
    /// offset by `offset` (polygon = seed-frame point + offset).
    fn rho_integral(&self, poly: &[P2], seed: (usize, P2)) -> Result<f64> {
        let mut total = 0.0;
        let mut covered = 0.0;
        let mut seen = BTreeSet::new();
        let mut queue = vec![seed];
        seen.insert(seed.0);
        while let Some((g, off)) = queue.pop() {
            let c = self.chart.corners[g];
            let tri = [
                [c[0][0] + off[0], c[0][1] + off[1]],
                [c[1][0] + off[0], c[1][1] + off[1]],
                [c[2][0] + off[0], c[2][1] + off[1]],
            ];
            let clipped = clip(poly, &tri);
            if clipped.is_empty() && g != seed.0 {
                continue;
            }
            let (a, cen) = area_centroid(&clipped);
            if a > 0.0 {
                let l = barycentric(&tri, cen);
                total += a * self.rho_at(g, &l);
                covered += a;
            }
            for k in 0..3 {
                let (h, s) = self.nbr[g][k];
                if seen.insert(h) {
                    queue.push((h, sub(off, s)));
                }
            }
        }
        let (pa, _) = area_centroid(poly);
        if (covered - pa).abs() > 1e-8 * pa {
            return Err(Error::InternalConsistency(format!(
                "clipping covered {covered:e} of a polygon of area {pa:e}"
            )));
        }
        Ok(total)
    }
}

fn area_centroid(poly: &[P2]) -> (f64, P2) {
    if poly.len() < 3 {
        return (0.0, [0.0; 2]);
    }
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    let o = poly[0];
    for i in 1..poly.len() - 1 {
        let (p, q) = (sub(poly[i], o), sub(poly[i + 1], o));
        let w = 0.5 * cross(p, q);
        a += w;
        cx += w * (p[0] + q[0]) / 3.0;
        cy += w * (p[1] + q[1]) / 3.0;
    }
    if a <= 0.0 {
        return (0.0, [0.0; 2]);
    }
    (a, [o[0] + cx / a, o[1] + cy / a])
}

/// Sutherland–Hodgman clip of a convex polygon by a ccw triangle.
fn clip(poly: &[P2], tri: &[P2; 3]) -> Vec<P2> {
    let mut out: Vec<P2> = poly.to_vec();
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let side = |p: P2| cross(sub(b, a), sub(p, a));
        let input = core::mem::take(&mut out);
        for i in 0..input.len() {
            let (p, q) = (input[i], input[(i + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Push a stream form forward by the time-t flow of H.
///
/// f and g are transported as functions, f ↦ f∘φ⁻¹, with φ⁻¹ obtained by
/// flowing for time −t and interpolating linearly at the landing point.
pub fn hamiltonian_pushforward(
    ops: &OperatorSet,
    a: &StreamForm,
    h: &[f64],
    t: f64,
    steps: usize,
) -> Result<FlowResult> {
    if steps == 0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("flow needs steps ≥ 1 and finite t (got {steps}, {t})")));
    }
    let flow = ChartFlow::new(ops, h)?;
    if t == 0.0 {
        return Ok(FlowResult { form: a.clone(), area_distortion: 0.0, max_displacement: 0.0 });
    }
    let mesh = &ops.mesh;
    let chart = flow.chart;
    let nv = mesh.num_vertices();
    let mut home = vec![(usize::MAX, [0.0; 2]); nv];
    for (fi, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            if home[tri[k]].0 == usize::MAX {
                home[tri[k]] = (fi, chart.corners[fi][k]);
            }
        }
    }
    let dt = t / steps as f64;
    let mut f = vec![0.0; nv];
    let mut g = vec![0.0; nv];
    let mut fwd_disp = vec![[0.0; 2]; nv];
    let mut fwd_end = vec![(0usize, [0.0; 2]); nv];
    let mut max_disp: f64 = 0.0;
    for v in 0..nv {
        let ((bf, _, bl), _, path_b) = flow.trace(home[v], -dt, steps)?;
        f[v] = flow.interp(bf, &bl, &a.f.values);
        g[v] = flow.interp(bf, &bl, &a.g.values);
        let ((ff, fp, _), d, path_f) = flow.trace(home[v], dt, steps)?;
        fwd_disp[v] = d;
        fwd_end[v] = (ff, fp);
        max_disp = max_disp.max(path_b).max(path_f);
    }
    let mut distortion: f64 = 0.0;
    for (fi, tri) in mesh.triangles.iter().enumerate() {
        let c = chart.corners[fi];
        let img = [
            [c[0][0] + fwd_disp[tri[0]][0], c[0][1] + fwd_disp[tri[0]][1]],
            [c[1][0] + fwd_disp[tri[1]][0], c[1][1] + fwd_disp[tri[1]][1]],
            [c[2][0] + fwd_disp[tri[2]][0], c[2][1] + fwd_disp[tri[2]][1]],
        ];
        if signed_area(&img) <= 0.0 {
            return Err(Error::StepSize(format!("flow inverts triangle {fi}")));
        }
        let before = signed_area(&c) * (flow.rho[tri[0]] + flow.rho[tri[1]] + flow.rho[tri[2]]) / 3.0;
        let (sf, sp) = fwd_end[tri[0]];
        let seed = (sf, sub(img[0], sp));
        let after = flow.rho_integral(&img, seed)?;
        distortion = distortion.max((after - before).abs() / before);
    }
    Ok(FlowResult { form: StreamForm::new(f, g), area_distortion: distortion, max_displacement: max_disp })
}

/// Random smooth Hamiltonian (low Fourier modes on the chart) and a flow
/// time that moves the fastest vertex about one shortest edge length.
/// That time is usually too long for the area tolerance; see
/// `calibrate_flow_time`.
pub fn random_hamiltonian(ops: &OperatorSet, r: &mut impl RngCore) -> Result<(Vec<f64>, f64)> {
    let chart = ops
        .mesh
        .chart
        .as_ref()
        .ok_or_else(|| Error::Unsupported("Hamiltonian flows need a mesh with a periodic chart".into()))?;
    let w = 2.0 * core::f64::consts::PI / chart.period;
    let mut h = vec![0.0; chart.coords.len()];
    for kx in -2i32..=2 {
        for ky in 0..=2i32 {
            if ky == 0 && kx <= 0 {
                continue;
            }
            let damp = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
            let (ca, sa) = (damp * rng::normal(r), damp * rng::normal(r));
            for (v, p) in chart.coords.iter().enumerate() {
                let ph = w * (kx as f64 * p[0] + ky as f64 * p[1]);
                h[v] += ca * libm::cos(ph) + sa * libm::sin(ph);
            }
        }
    }
    let flow = ChartFlow::new(ops, &h)?;
    let speed = flow.max_speed();
    let t = if speed > 0.0 { flow.min_edge() / speed } else { 0.0 };
    Ok((h, t))
}

/// Shrink t so the measured distortion lands near `target`.
///
/// Per-triangle distortion is dominated by chords standing in for curved
/// image edges and grows linearly in t, so one probe run fixes the scale.
pub fn calibrate_flow_time(ops: &OperatorSet, h: &[f64], t: f64, steps: usize, target: f64) -> Result<f64> {
    let zero = StreamForm::new(vec![0.0; ops.nv()], vec![0.0; ops.nv()]);
    let probe = hamiltonian_pushforward(ops, &zero, h, t, steps)?;
    if probe.area_distortion <= target {
        return Ok(t);
    }
    Ok(t * target / probe.area_distortion)
}
