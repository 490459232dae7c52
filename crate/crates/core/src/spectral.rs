//! Smallest nonzero eigenpairs of S v = ν M v with diagonal M, plus the
//! harmonic 1-forms.
//!
//! The eigensolver is a block Rayleigh-Ritz iteration on the span of the
//! current block, the preconditioned residuals and the previous search
//! direction. For the scalar Laplacian the preconditioner is the exact
//! pinned inverse of S (shift 0 on the deflated problem), which makes the
//! iteration a Krylov-accelerated shift-invert method.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dec::{Cochain1, OneFormLaplacian, OperatorSet, PinnedSolver};
use crate::error::{Error, Result};
use crate::linalg::{self, Csr, Skyline};
use crate::rng::{self, Purpose};

pub const TAU_EIG: f64 = 1e-9;
/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const CLUSTER_GAP: f64 = 1e-6;
const MAX_ITER: usize = 1000;
const DENSE_LIMIT: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRequest {
    pub count: usize,
    pub tolerance: f64,
    /// Spectral shift; only shift ≤ 0 is supported.
    pub shift: f64,
    pub seed: u64,
}

impl SpectrumRequest {
    pub fn new(count: usize) -> Self {
        SpectrumRequest { count, tolerance: TAU_EIG, shift: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub eigenvalue: f64,
    /// M-normalized, M-orthogonal to constants.
    pub eigenvector: Vec<f64>,
    pub residual: f64,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub start: usize,
    pub len: usize,
}

impl Cluster {
    pub fn flagged(&self) -> bool {
        self.len > 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending. May hold more than `count` pairs when the last requested
    /// eigenvalue belongs to a cluster; the cluster is always completed.
    pub pairs: Vec<EigenPair>,
    pub clusters: Vec<Cluster>,
    pub iterations: usize,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.eigenvalue).collect()
    }

    pub fn first_cluster(&self) -> &Cluster {
        &self.clusters[0]
    }

    pub fn cluster_members(&self, id: usize) -> &[EigenPair] {
        let c = &self.clusters[id];
        &self.pairs[c.start..c.start + c.len]
    }
}

/// A symmetric pencil (A, M) with M diagonal, kernel of A = constants.
pub trait Pencil {
    fn mass(&self) -> &[f64];
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Approximate inverse of A on mass-mean-zero vectors.
    fn precondition(&self, r: &[f64]) -> Result<Vec<f64>>;
}

pub struct ScalarPencil<'a> {
    s: &'a Csr,
    m: &'a [f64],
    inverse: Inverse<'a>,
}

enum Inverse<'a> {
    Pinned(&'a PinnedSolver),
    Owned(PinnedSolver),
    Shifted(Skyline),
}

impl<'a> ScalarPencil<'a> {
    /// `shift` < 0 factors S − shift·M; shift = 0 pins one vertex.
    pub fn new(s: &'a Csr, m: &'a [f64], shift: f64, pinned: Option<&'a PinnedSolver>) -> Result<Self> {
        if shift > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "shift {shift} > 0 would make the pencil indefinite; use shift ≤ 0"
            )));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidArgument("shift is not finite".into()));
        }
        let inverse = if shift < 0.0 {
            let sm = s.add(1.0, &Csr::diagonal(m), -shift);
            Inverse::Shifted(Skyline::factor(&sm)?)
        } else if let Some(p) = pinned {
            Inverse::Pinned(p)
        } else {
            Inverse::Owned(PinnedSolver::new(s, m)?)
        };
        Ok(ScalarPencil { s, m, inverse })
    }
}

impl Pencil for ScalarPencil<'_> {
    fn mass(&self) -> &[f64] {
        self.m
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.s.matvec(x))
    }
    fn precondition(&self, r: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.inverse {
            Inverse::Pinned(p) => p.solve(r),
            Inverse::Owned(p) => p.solve(r),
            Inverse::Shifted(f) => f.solve(r),
        })
    }
}

pub fn solve_scalar_spectrum(s: &Csr, m: &[f64], req: &SpectrumRequest) -> Result<Spectrum> {
    let pencil = ScalarPencil::new(s, m, req.shift, None)?;
    solve_pencil(&pencil, req, None)
}

/// Scalar spectrum of assembled operators, reusing their factorization.
pub fn scalar_spectrum(ops: &OperatorSet, req: &SpectrumRequest) -> Result<Spectrum> {
    let pinned = if req.shift == 0.0 { Some(&ops.pinned) } else { None };
    let pencil = ScalarPencil::new(&ops.stiffness, &ops.star0, req.shift, pinned)?;
    solve_pencil(&pencil, req, None)
}

struct MassSpace<'a> {
    m: &'a [f64],
    total: f64,
}

impl MassSpace<'_> {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(self.m).map(|((x, y), w)| x * y * w).sum()
    }
    fn deflate(&self, x: &mut [f64]) {
        let c = x.iter().zip(self.m).map(|(a, w)| a * w).sum::<f64>() / self.total;
        for v in x.iter_mut() {
            *v -= c;
        }
    }
    /// Orthonormalize `cand` against `basis` (assumed orthonormal) and
    /// itself, twice; near-dependent candidates are dropped.
    fn extend(&self, basis: &mut Vec<Vec<f64>>, cand: Vec<Vec<f64>>) {
        for mut v in cand {
            self.deflate(&mut v);
            let n0 = libm::sqrt(self.dot(&v, &v));
            if !(n0 > 0.0) || !n0.is_finite() {
                continue;
            }
            for _ in 0..2 {
                for b in basis.iter() {
                    let c = self.dot(b, &v);
                    linalg::axpy(-c, b, &mut v);
                }
                self.deflate(&mut v);
            }
            let n = libm::sqrt(self.dot(&v, &v));
            if n > 1e-10 * n0 {
                linalg::scale(1.0 / n, &mut v);
                basis.push(v);
            }
        }
    }
}

fn residual(pencil: &dyn Pencil, ax: &[f64], x: &[f64], theta: f64) -> (Vec<f64>, f64) {
    let m = pencil.mass();
    let r: Vec<f64> = ax.iter().zip(x).zip(m).map(|((a, v), w)| a - theta * w * v).collect();
    let rn = libm::sqrt(r.iter().zip(m).map(|(x, w)| x * x / w).sum::<f64>());
    let xn = libm::sqrt(x.iter().zip(m).map(|(v, w)| v * v * w).sum::<f64>());
    let rel = if theta.abs() > 0.0 { rn / (theta.abs() * xn) } else { f64::INFINITY };
    (r, rel)
}

/// Rayleigh-Ritz on an M-orthonormal basis: returns ascending Ritz values and
/// coefficient columns (row-major k×k).
fn ritz(pencil: &dyn Pencil, q: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let k = q.len();
    let aq: Vec<Vec<f64>> = q.iter().map(|v| pencil.apply(v)).collect::<Result<_>>()?;
    let mut h = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let a = 0.5 * (linalg::dot(&q[i], &aq[j]) + linalg::dot(&q[j], &aq[i]));
            h[i * k + j] = a;
            h[j * k + i] = a;
        }
    }
    let (vals, vecs) = linalg::sym_eigen(&h, k);
    Ok((vals, vecs, aq))
}

fn combine(q: &[Vec<f64>], coef: &[f64], k: usize, col: usize, rows: core::ops::Range<usize>) -> Vec<f64> {
    let n = q[0].len();
    let mut out = vec![0.0; n];
    for r in rows {
        let c = coef[r * k + col];
        if c != 0.0 {
            linalg::axpy(c, &q[r], &mut out);
        }
    }
    out
}

/// Clusters of an ascending list by relative gap.
pub fn clusters_of(values: &[f64]) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c)
                if {
                    let prev = values[i - 1];
                    (v - prev).abs() <= CLUSTER_GAP * v.abs().max(prev.abs())
                } =>
            {
                c.len += 1
            }
            _ => out.push(Cluster { id: out.len(), start: i, len: 1 }),
        }
    }
    out
}

/// Smallest nonzero eigenpairs of a pencil whose kernel is the constants.
pub fn solve_pencil(pencil: &dyn Pencil, req: &SpectrumRequest, warm: Option<&[Vec<f64>]>) -> Result<Spectrum> {
    let m = pencil.mass();
    let n = m.len();
    if req.count == 0 || req.count + 1 > n {
        return Err(Error::InvalidArgument(format!("requested {} eigenpairs of a {n}-dimensional pencil", req.count)));
    }
    if !(req.tolerance > 0.0) {
        return Err(Error::InvalidArgument("eigen tolerance must be positive".into()));
    }
    if m.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidArgument("mass matrix must be positive".into()));
    }
    if n <= DENSE_LIMIT || 2 * (req.count + 5) >= n {
        return dense_pencil(pencil, req);
    }
    let space = MassSpace { m, total: m.iter().sum() };
    let mut need = req.count + 1;
    let mut p = need + 4;
    let mut x: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        space.extend(&mut x, w.iter().take(p).cloned().collect());
    }
    let mut fill = 0u32;
    let mut top_up = |x: &mut Vec<Vec<f64>>, p: usize| {
        while x.len() < p {
            let mut r = rng::stream(req.seed, Purpose::EigenStart, fill);
            fill += 1;
            let v: Vec<f64> = (0..n).map(|_| rng::normal(&mut r)).collect();
            // one smoothing step makes the start vectors informative
            let v = pencil.precondition(&v.iter().zip(m).map(|(a, w)| a * w).collect::<Vec<_>>());
            match v {
                Ok(v) => space.extend(x, vec![v]),
                Err(_) => break,
            }
        }
    };
    top_up(&mut x, p);
    let mut prev: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::INFINITY;
    for iter in 1..=MAX_ITER {
        let (vals, coef, aq) = ritz(pencil, &x)?;
        let k = x.len();
        let take = p.min(k);
        let xs: Vec<Vec<f64>> = (0..take).map(|c| combine(&x, &coef, k, c, 0..k)).collect();
        let axs: Vec<Vec<f64>> = (0..take).map(|c| combine(&aq, &coef, k, c, 0..k)).collect();
        let mut res = Vec::with_capacity(take);
        let mut w = Vec::new();
        for i in 0..take {
            let (r, rel) = residual(pencil, &axs[i], &xs[i], vals[i]);
            res.push(rel);
            if rel > req.tolerance {
                w.push(pencil.precondition(&r)?);
            }
        }
        let worst = res[..need.min(take)].iter().fold(0.0f64, |a, &b| a.max(b));
        best = best.min(worst);
        if need <= take && worst <= req.tolerance {
            let cl = clusters_of(&vals[..need]);
            let last = cl.iter().find(|c| c.start < req.count && req.count - 1 < c.start + c.len).unwrap();
            if last.start + last.len < need {
                let end = last.start + last.len;
                let pairs = (0..end)
                    .map(|i| EigenPair {
                        eigenvalue: vals[i],
                        eigenvector: xs[i].clone(),
                        residual: res[i],
                        cluster: 0,
                    })
                    .collect::<Vec<_>>();
                return Ok(finish(pairs, iter));
            }
            // the guard sits in the requested cluster: widen and keep going
            need = last.start + last.len + 1;
            if need + 3 > p {
                p = need + 4;
            }
            if p + 1 > n {
                return dense_pencil(pencil, req);
            }
        }
        // next basis: block, preconditioned residuals, previous direction
        let mut q: Vec<Vec<f64>> = Vec::new();
        space.extend(&mut q, xs.clone());
        let p_dir: Vec<Vec<f64>> = if prev.is_empty() {
            Vec::new()
        } else {
            // component of the new block outside the old one
            xs.iter()
                .map(|v| {
                    let mut d = v.clone();
                    for o in &prev {
                        let c = space.dot(o, &d);
                        linalg::axpy(-c, o, &mut d);
                    }
                    d
                })
                .collect()
        };
        prev = xs;
        space.extend(&mut q, w);
        space.extend(&mut q, p_dir);
        top_up(&mut q, p);
        x = q;
    }
    Err(Error::SolverFailure { what: format!("eigensolver did not converge in {MAX_ITER} iterations"), residual: best })
}

fn finish(mut pairs: Vec<EigenPair>, iterations: usize) -> Spectrum {
    let values: Vec<f64> = pairs.iter().map(|p| p.eigenvalue).collect();
    let clusters = clusters_of(&values);
    for c in &clusters {
        for p in &mut pairs[c.start..c.start + c.len] {
            p.cluster = c.id;
        }
    }
    Spectrum { pairs, clusters, iterations }
}

/// Dense fallback for small problems: full generalized eigendecomposition.
fn dense_pencil(pencil: &dyn Pencil, req: &SpectrumRequest) -> Result<Spectrum> {
    let m = pencil.mass();
    let n = m.len();
    let mut a = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = pencil.apply(&e)?;
        e[j] = 0.0;
        for i in 0..n {
            a[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        b[i * n + i] = m[i];
    }
    let (vals, vecs) = linalg::gen_sym_eigen(&a, &b, n)?;
    // drop the constant mode (smallest eigenvalue)
    let space = MassSpace { m, total: m.iter().sum() };
    let mut pairs = Vec::new();
    let mut end = (req.count + 1).min(n);
    let cl = clusters_of(&vals[1..]);
    if let Some(c) = cl.iter().find(|c| c.start < req.count && req.count - 1 < c.start + c.len) {
        end = end.max(c.start + c.len + 1).min(n);
    }
    for i in 1..end {
        let mut v: Vec<f64> = (0..n).map(|r| vecs[r * n + i]).collect();
        space.deflate(&mut v);
        let nv = libm::sqrt(space.dot(&v, &v));
        linalg::scale(1.0 / nv, &mut v);
        let av = pencil.apply(&v)?;
        let theta = linalg::dot(&v, &av);
        let (_, rel) = residual(pencil, &av, &v, theta);
        pairs.push(EigenPair { eigenvalue: theta, eigenvector: v, residual: rel, cluster: 0 });
    }
    Ok(finish(pairs, 0))
}

/// vᵀSv / vᵀMv.
pub fn rayleigh_quotient(s: &Csr, m: &[f64], v: &[f64]) -> Result<f64> {
    let den: f64 = v.iter().zip(m).map(|(x, w)| x * x * w).sum();
    if !(den > 0.0) {
        return Err(Error::InvalidArgument("Rayleigh quotient of a zero vector".into()));
    }
    Ok(linalg::dot(v, &s.matvec(v)) / den)
}

/// Dimension of the numerical kernel of a small dense pencil: eigenvalues
/// below `rel_tol` times the largest.
pub fn kernel_dimension(s: &Csr, m: &[f64], rel_tol: f64) -> Result<usize> {
    let n = s.rows;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        b[i * n + i] = m[i];
    }
    let (vals, _) = linalg::gen_sym_eigen(&s.to_dense(), &b, n)?;
    let top = vals.last().copied().unwrap_or(0.0).abs();
    Ok(vals.iter().filter(|v| v.abs() <= rel_tol * top).count())
}

/// star1-orthonormal basis of harmonic 1-cochains by tree-cotree.
///
/// Each non-tree, non-cotree edge seeds a closed cochain; its exact part is
/// then removed with one Laplace solve.
pub fn harmonic_basis(lap: &OneFormLaplacian<'_>, genus: usize) -> Result<Vec<Cochain1>> {
    let ops = lap.ops;
    let mesh = &ops.mesh;
    let (nv, ne, nf) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_faces());
    // primal BFS tree
    let mut in_tree = vec![false; ne];
    let mut seen = vec![false; nv];
    let nbrs = mesh.vertex_neighbors();
    seen[0] = true;
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        for &(w, e) in &nbrs[v] {
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                q.push_back(w);
            }
        }
    }
    // dual BFS tree avoiding primal tree edges
    let mut in_cotree = vec![false; ne];
    let mut parent_edge = vec![usize::MAX; nf];
    let mut order = Vec::with_capacity(nf);
    let mut fseen = vec![false; nf];
    fseen[0] = true;
    let mut q = VecDeque::from([0usize]);
    while let Some(f) = q.pop_front() {
        order.push(f);
        for &e in &mesh.face_edges[f] {
            if in_tree[e] {
                continue;
            }
            for g in mesh.edge_faces[e] {
                if !fseen[g] {
                    fseen[g] = true;
                    in_cotree[e] = true;
                    parent_edge[g] = e;
                    q.push_back(g);
                }
            }
        }
    }
    let generators: Vec<usize> = (0..ne).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &g in &generators {
        let mut z = vec![0.0; ne];
        let mut known = vec![false; ne];
        for e in 0..ne {
            if !in_cotree[e] {
                known[e] = true;
            }
        }
        z[g] = 1.0;
        // leaves first: each face's only unknown edge is its parent edge
        for &f in order.iter().rev() {
            let pe = parent_edge[f];
            if pe == usize::MAX {
                continue;
            }
            let mut sum = 0.0;
            let mut sp = 0.0;
            for k in 0..3 {
                let e = mesh.face_edges[f][k];
                let s = mesh.face_edge_signs[f][k];
                if e == pe {
                    sp = s;
                } else {
                    debug_assert!(known[e]);
                    sum += s * z[e];
                }
            }
            z[pe] = -sum / sp;
            known[pe] = true;
        }
        let rhs = ops.d0.matvec_t(&ops.star1.matvec(&z));
        let f = ops.pinned.solve(&rhs);
        let df = ops.d0.matvec(&f);
        linalg::axpy(-1.0, &df, &mut z);
        basis.push(z);
    }
    // Gram-Schmidt in star1, twice
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for mut v in basis {
        for _ in 0..2 {
            for o in &ortho {
                let c = ops.inner1(o, &v);
                linalg::axpy(-c, o, &mut v);
            }
        }
        let n = ops.norm1(&v);
        if n > 1e-12 {
            linalg::scale(1.0 / n, &mut v);
            ortho.push(v);
        }
    }
    // numerical-kernel check relative to the first nonzero eigenvalue
    let nu1 =
        scalar_spectrum(ops, &SpectrumRequest { count: 1, tolerance: 1e-6, shift: 0.0, seed: 0 })?.pairs[0].eigenvalue;
    let tau_kernel = 1e-6 * nu1;
    let passing: Vec<Vec<f64>> = ortho.into_iter().filter(|v| lap.energy(v) <= tau_kernel).collect();
    if passing.len() != 2 * genus {
        return Err(Error::TopologyMismatch { expected: 2 * genus, found: passing.len() });
    }
    Ok(passing.into_iter().map(Cochain1::new).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::one_form_laplacian;
    use crate::mesh::{generate_flat_torus, generate_icosphere, ConformalFactor};
    use core::f64::consts::PI;

    fn ops_of(m: &crate::mesh::TriangleMesh) -> OperatorSet {
        OperatorSet::assemble(m, &ConformalFactor::zero(m.num_vertices())).unwrap()
    }

    #[test]
    fn torus_first_cluster_is_fourfold() {
        let ops = ops_of(&generate_flat_torus(2.0 * PI, 24).unwrap());
        let sp = scalar_spectrum(&ops, &SpectrumRequest::new(1)).unwrap();
        assert_eq!(sp.pairs.len(), 4);
        assert!(sp.first_cluster().flagged());
        for p in &sp.pairs {
            assert!(p.residual <= TAU_EIG);
            assert!((p.eigenvalue - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn dense_and_iterative_agree() {
        let ops = ops_of(&generate_icosphere(1.0, 2).unwrap()); // 162 vertices: dense path
        let dense = scalar_spectrum(&ops, &SpectrumRequest::new(4)).unwrap();
        let ops3 = ops_of(&generate_icosphere(1.0, 3).unwrap());
        let it = scalar_spectrum(&ops3, &SpectrumRequest::new(4)).unwrap();
        assert_eq!(dense.pairs.len(), 8); // ℓ = 2 cluster completed
        assert_eq!(it.pairs.len(), 8);
        assert!((dense.pairs[0].eigenvalue - 2.0).abs() < 0.05);
        assert!((it.pairs[0].eigenvalue - 2.0).abs() < 0.02);
        assert_eq!(it.clusters.len(), 2);
    }

    #[test]
    fn negative_shift_matches_zero_shift_and_positive_is_rejected() {
        let ops = ops_of(&generate_icosphere(1.0, 3).unwrap());
        let a = scalar_spectrum(&ops, &SpectrumRequest::new(3)).unwrap();
        let b = scalar_spectrum(&ops, &SpectrumRequest { shift: -0.5, ..SpectrumRequest::new(3) }).unwrap();
        for (x, y) in a.pairs.iter().zip(&b.pairs) {
            assert!((x.eigenvalue - y.eigenvalue).abs() < 1e-8);
        }
        let r = scalar_spectrum(&ops, &SpectrumRequest { shift: 0.5, ..SpectrumRequest::new(3) });
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rayleigh_of_constants_is_zero() {
        let ops = ops_of(&generate_icosphere(1.0, 1).unwrap());
        let ones = vec![1.0; ops.nv()];
        assert!(rayleigh_quotient(&ops.stiffness, &ops.star0, &ones).unwrap().abs() < 1e-12);
        assert!(rayleigh_quotient(&ops.stiffness, &ops.star0, &vec![0.0; ops.nv()]).is_err());
    }

    #[test]
    fn two_components_have_two_dimensional_kernel() {
        let ops = ops_of(&generate_icosphere(1.0, 0).unwrap());
        let s = &ops.stiffness;
        let n = s.rows;
        let mut t = s.triplets();
        for (r, c, v) in s.triplets() {
            t.push((r + n, c + n, v));
        }
        let block = Csr::from_triplets(2 * n, 2 * n, &t);
        let mut m = ops.star0.clone();
        m.extend_from_slice(&ops.star0);
        assert_eq!(kernel_dimension(&block, &m, 1e-10).unwrap(), 2);
        assert_eq!(kernel_dimension(s, &ops.star0, 1e-10).unwrap(), 1);
    }

    #[test]
    fn harmonic_basis_dimensions() {
        let torus = ops_of(&generate_flat_torus(1.0, 8).unwrap());
        let h = harmonic_basis(&one_form_laplacian(&torus), 1).unwrap();
        assert_eq!(h.len(), 2);
        for a in &h {
            for b in &h {
                let ip = torus.inner1(&a.values, &b.values);
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        assert!(matches!(
            harmonic_basis(&one_form_laplacian(&torus), 2),
            Err(Error::TopologyMismatch { expected: 4, found: 2 })
        ));
        let sphere = ops_of(&generate_icosphere(1.0, 1).unwrap());
        assert!(harmonic_basis(&one_form_laplacian(&sphere), 0).unwrap().is_empty());
    }
}
