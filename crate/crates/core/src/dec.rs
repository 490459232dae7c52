//! Discrete exterior calculus on a conformally scaled mesh.
//!
//! 1-forms use lowest-order Whitney elements. `star1` is their Galerkin mass
//! matrix and `wedge` the metric-free antisymmetric pairing
//! K_ij = ⟨W_i, ∗W_j⟩ = −∫ W_i ∧ W_j, so the surface Hodge star acts on
//! primal 1-cochains as rot1 = star1⁻¹·K.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Csr, Skyline};
use crate::mesh::{effective_edge_lengths, ConformalFactor, TriangleMesh};

/// Relative residual for iterative solves through star1 and friends.
pub const SOLVE_TOL: f64 = 1e-12;
const MAX_CG: usize = 5000;

/// τ_op: exact linear identities through solvers.
pub const TAU_OP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cochain0 {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cochain1 {
    pub values: Vec<f64>,
}

impl Cochain0 {
    pub fn new(values: Vec<f64>) -> Self {
        Cochain0 { values }
    }
    pub fn zeros(n: usize) -> Self {
        Cochain0 { values: vec![0.0; n] }
    }
}

impl Cochain1 {
    pub fn new(values: Vec<f64>) -> Self {
        Cochain1 { values }
    }
    pub fn zeros(n: usize) -> Self {
        Cochain1 { values: vec![0.0; n] }
    }
}

/// Solver for S x = r on the complement of constants: one vertex is pinned,
/// the rest factored once, and the answer is shifted to mass-mean zero.
#[derive(Debug, Clone)]
pub struct PinnedSolver {
    factor: Skyline,
    mass: Vec<f64>,
    total_mass: f64,
}

impl PinnedSolver {
    pub fn new(s: &Csr, mass: &[f64]) -> Result<Self> {
        let n = s.rows;
        let keep: Vec<usize> = (1..n).collect();
        let factor = Skyline::factor(&s.principal_submatrix(&keep))?;
        Ok(PinnedSolver { factor, mass: mass.to_vec(), total_mass: mass.iter().sum() })
    }

    /// Solve with r first projected onto the range of S (zero sum).
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let mean = r.iter().sum::<f64>() / n as f64;
        let rr: Vec<f64> = r[1..].iter().map(|x| x - mean).collect();
        let y = self.factor.solve(&rr);
        let mut x = Vec::with_capacity(n);
        x.push(0.0);
        x.extend_from_slice(&y);
        self.remove_mean(&mut x);
        x
    }

    /// Subtract the mass-weighted mean.
    pub fn remove_mean(&self, x: &mut [f64]) {
        let c = x.iter().zip(&self.mass).map(|(a, m)| a * m).sum::<f64>() / self.total_mass;
        for v in x.iter_mut() {
            *v -= c;
        }
    }
}

/// Assembled operators for one metric.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub mesh: TriangleMesh,
    pub factor: ConformalFactor,
    pub lengths: Vec<f64>,
    pub areas: Vec<f64>,
    /// E×V signed incidence.
    pub d0: Csr,
    /// F×E signed incidence.
    pub d1: Csr,
    /// Lumped vertex areas.
    pub star0: Vec<f64>,
    /// Whitney mass matrix.
    pub star1: Csr,
    /// Inverse face areas.
    pub star2: Vec<f64>,
    /// Antisymmetric pairing K.
    pub wedge: Csr,
    /// Cotangent stiffness d0ᵀ·star1·d0, exactly symmetric.
    pub stiffness: Csr,
    pub pinned: PinnedSolver,
    star1_diag: Vec<f64>,
}

impl OperatorSet {
    pub fn assemble(mesh: &TriangleMesh, u: &ConformalFactor) -> Result<Self> {
        let lengths = effective_edge_lengths(mesh, u)?;
        let areas = mesh.face_areas(&lengths)?;
        let (nv, ne, nf) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_faces());

        let mut t0 = Vec::with_capacity(2 * ne);
        for (e, &[a, b]) in mesh.edges.iter().enumerate() {
            t0.push((e, a, -1.0));
            t0.push((e, b, 1.0));
        }
        let d0 = Csr::from_triplets(ne, nv, &t0);

        let mut t1 = Vec::with_capacity(3 * nf);
        for f in 0..nf {
            // boundary of face f: corner k+1 → k+2 is the edge opposite k
            for k in 0..3 {
                t1.push((f, mesh.face_edges[f][k], mesh.face_edge_signs[f][k]));
            }
        }
        let d1 = Csr::from_triplets(nf, ne, &t1);

        let mut star0 = vec![0.0; nv];
        let mut tm = Vec::with_capacity(9 * nf);
        let mut tk = Vec::with_capacity(9 * nf);
        for f in 0..nf {
            let a = areas[f];
            for &v in &mesh.triangles[f] {
                star0[v] += a / 3.0;
            }
            let (m, k) = local_whitney(mesh.face_lengths(f, &lengths), a);
            let (e, s) = (mesh.face_edges[f], mesh.face_edge_signs[f]);
            for i in 0..3 {
                for j in 0..3 {
                    tm.push((e[i], e[j], s[i] * s[j] * m[i][j]));
                    if i != j {
                        tk.push((e[i], e[j], s[i] * s[j] * k[i][j]));
                    }
                }
            }
        }
        let star1 = Csr::from_triplets(ne, ne, &tm).symmetrized();
        let wedge = Csr::from_triplets(ne, ne, &tk);
        let star2: Vec<f64> = areas.iter().map(|a| 1.0 / a).collect();
        let stiffness = d0.transpose().matmul(&star1.matmul(&d0)).symmetrized();
        let pinned = PinnedSolver::new(&stiffness, &star0)?;
        let star1_diag = star1.diag();
        Ok(OperatorSet {
            mesh: mesh.clone(),
            factor: u.clone(),
            lengths,
            areas,
            d0,
            d1,
            star0,
            star1,
            star2,
            wedge,
            stiffness,
            pinned,
            star1_diag,
        })
    }

    pub fn nv(&self) -> usize {
        self.star0.len()
    }
    pub fn ne(&self) -> usize {
        self.star1.rows
    }

    pub fn total_area(&self) -> f64 {
        self.star0.iter().sum()
    }

    /// star1⁻¹ r by Jacobi-preconditioned CG.
    pub fn solve_star1(&self, r: &[f64]) -> Result<Vec<f64>> {
        let d = &self.star1_diag;
        linalg::pcg(
            |x| self.star1.matvec(x),
            |r| r.iter().zip(d).map(|(a, b)| a / b).collect(),
            r,
            None,
            SOLVE_TOL,
            MAX_CG,
        )
        .map(|c| c.x)
    }

    /// rot1·w = star1⁻¹ K w.
    pub fn rot1(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.solve_star1(&self.wedge.matvec(w))
    }

    /// B f = rot1·d0·f.
    pub fn rot_grad(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.rot1(&self.d0.matvec(f))
    }

    /// Bᵀ·star1·b = d0ᵀ Kᵀ b, no solve needed.
    pub fn rot_grad_adjoint(&self, b: &[f64]) -> Vec<f64> {
        self.d0.matvec_t(&self.wedge.matvec_t(b))
    }

    pub fn inner0(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.star0).map(|((x, y), m)| x * y * m).sum()
    }

    pub fn inner1(&self, a: &[f64], b: &[f64]) -> f64 {
        linalg::dot(a, &self.star1.matvec(b))
    }

    pub fn norm0(&self, a: &[f64]) -> f64 {
        libm::sqrt(self.inner0(a, a))
    }

    pub fn norm1(&self, a: &[f64]) -> f64 {
        libm::sqrt(self.inner1(a, a))
    }

    /// Named sparse operators, for Matrix Market export.
    pub fn named_matrices(&self) -> Vec<(&'static str, Csr)> {
        vec![
            ("d0", self.d0.clone()),
            ("d1", self.d1.clone()),
            ("star0", Csr::diagonal(&self.star0)),
            ("star1", self.star1.clone()),
            ("star2", Csr::diagonal(&self.star2)),
            ("wedge", self.wedge.clone()),
            ("stiffness", self.stiffness.clone()),
        ]
    }
}

/// Whitney mass matrix and wedge pairing of one face, local edges indexed by
/// opposite corner and oriented corner k+1 → k+2.
fn local_whitney(l: [f64; 3], area: f64) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    // Edge vectors e_k = P_{k+2} − P_{k+1} satisfy e_0 + e_1 + e_2 = 0, so
    // e_k·e_m = (l_n² − l_k² − l_m²)/2, and ∇λ_k·∇λ_m = e_k·e_m/(4A²).
    let mut g = [[0.0; 3]; 3];
    for k in 0..3 {
        for m in 0..3 {
            let em = if k == m {
                l[k] * l[k]
            } else {
                let n = 3 - k - m;
                0.5 * (l[n] * l[n] - l[k] * l[k] - l[m] * l[m])
            };
            g[k][m] = em / (4.0 * area * area);
        }
    }
    // dλ_a ∧ dλ_b = c(a,b)/(2A) dA with c = +1 on cyclic pairs.
    let c = |a: usize, b: usize| -> f64 {
        if a == b {
            0.0
        } else if (a + 1) % 3 == b {
            1.0
        } else {
            -1.0
        }
    };
    // ∫λ_aλ_b = A(1+δ_ab)/12; the wedge uses it divided by A, so K is
    // exactly metric-independent.
    let lw = |a: usize, b: usize| -> f64 { (if a == b { 2.0 } else { 1.0 }) / 12.0 };
    let ll = |a: usize, b: usize| -> f64 { area * lw(a, b) };
    let mut mass = [[0.0; 3]; 3];
    let mut wedge = [[0.0; 3]; 3];
    for k in 0..3 {
        let (k1, k2) = ((k + 1) % 3, (k + 2) % 3);
        for m in 0..3 {
            let (m1, m2) = ((m + 1) % 3, (m + 2) % 3);
            // W_k = λ_{k1}∇λ_{k2} − λ_{k2}∇λ_{k1}
            mass[k][m] =
                ll(k1, m1) * g[k2][m2] - ll(k1, m2) * g[k2][m1] - ll(k2, m1) * g[k1][m2] + ll(k2, m2) * g[k1][m1];
            let w = lw(k1, m1) * c(k2, m2) - lw(k1, m2) * c(k2, m1) - lw(k2, m1) * c(k1, m2) + lw(k2, m2) * c(k1, m1);
            wedge[k][m] = -0.5 * w;
        }
    }
    (mass, wedge)
}

/// Generalized pencil (S, M) of the scalar Laplacian.
pub fn scalar_laplacian(ops: &OperatorSet) -> (Csr, Vec<f64>) {
    (ops.stiffness.clone(), ops.star0.clone())
}

/// Δ¹ = d0 star0⁻¹ d0ᵀ star1 + star1⁻¹ d1ᵀ star2 d1.
#[derive(Debug, Clone, Copy)]
pub struct OneFormLaplacian<'a> {
    pub ops: &'a OperatorSet,
}

pub fn one_form_laplacian(ops: &OperatorSet) -> OneFormLaplacian<'_> {
    OneFormLaplacian { ops }
}

impl OneFormLaplacian<'_> {
    /// The star1-weighted quadratic form wᵀ·star1·Δ¹·w, no solve needed.
    pub fn energy(&self, w: &[f64]) -> f64 {
        let o = self.ops;
        let div = o.d0.matvec_t(&o.star1.matvec(w));
        let curl = o.d1.matvec(w);
        div.iter().zip(&o.star0).map(|(x, m)| x * x / m).sum::<f64>()
            + curl.iter().zip(&o.star2).map(|(x, s)| x * x * s).sum::<f64>()
    }

    pub fn rayleigh(&self, w: &[f64]) -> Result<f64> {
        let n = self.ops.inner1(w, w);
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("Rayleigh quotient of a zero 1-cochain".into()));
        }
        Ok(self.energy(w) / n)
    }

    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        let o = self.ops;
        let div: Vec<f64> = o.d0.matvec_t(&o.star1.matvec(w)).iter().zip(&o.star0).map(|(x, m)| x / m).collect();
        let mut out = o.d0.matvec(&div);
        let c: Vec<f64> = o.d1.matvec(w).iter().zip(&o.star2).map(|(x, s)| x * s).collect();
        let rc = o.solve_star1(&o.d1.matvec_t(&c))?;
        linalg::axpy(1.0, &rc, &mut out);
        Ok(out)
    }
}

/// rot1·d0·f, the discrete ∗_Σ d f. Exactly co-closed: d0ᵀ·star1·(rot1 d0 f)
/// = d0ᵀ K d0 f, and K is antisymmetric.
pub fn rotated_differential(ops: &OperatorSet, f: &Cochain0) -> Result<Cochain1> {
    Ok(Cochain1::new(ops.rot_grad(&f.values)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeParts {
    pub exact: Cochain1,
    pub coexact: Cochain1,
    pub harmonic: Cochain1,
    /// Potential f with exact = d0 f.
    pub potential: Cochain0,
}

/// Split b into exact, co-exact and harmonic parts against a given
/// star1-orthonormal harmonic basis.
pub fn hodge_decompose_with(ops: &OperatorSet, b: &Cochain1, harmonic: &[Cochain1]) -> Result<HodgeParts> {
    if b.values.len() != ops.ne() {
        return Err(Error::InvalidArgument(format!("1-cochain has {} entries for {} edges", b.values.len(), ops.ne())));
    }
    let mb = ops.star1.matvec(&b.values);
    let rhs = ops.d0.matvec_t(&mb);
    let f = ops.pinned.solve(&rhs);
    let check = ops.stiffness.matvec(&f);
    let res = linalg::norm(&check.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
    // measured against the size of the summed terms, not of their sum
    let mut mag = vec![0.0; ops.nv()];
    for (e, &[p, q]) in ops.mesh.edges.iter().enumerate() {
        mag[p] += mb[e].abs();
        mag[q] += mb[e].abs();
    }
    let scale = linalg::norm(&mag);
    if scale > 0.0 && res > 1e-9 * scale {
        return Err(Error::SolverFailure { what: "exact part".into(), residual: res / scale });
    }
    let exact = ops.d0.matvec(&f);
    let mut rest: Vec<f64> = b.values.iter().zip(&exact).map(|(x, y)| x - y).collect();
    let mut h = vec![0.0; ops.ne()];
    for basis in harmonic {
        let c = ops.inner1(&basis.values, &rest);
        linalg::axpy(c, &basis.values, &mut h);
    }
    linalg::axpy(-1.0, &h, &mut rest);
    Ok(HodgeParts {
        exact: Cochain1::new(exact),
        coexact: Cochain1::new(rest),
        harmonic: Cochain1::new(h),
        potential: Cochain0::new(f),
    })
}

/// Hodge decomposition using the harmonic basis computed from the operators.
pub fn hodge_decompose(ops: &OperatorSet, b: &Cochain1) -> Result<HodgeParts> {
    let genus = crate::mesh::topology(&ops.mesh)?.genus;
    let basis = crate::spectral::harmonic_basis(&one_form_laplacian(ops), genus)?;
    hodge_decompose_with(ops, b, &basis)
}

pub fn inner_product0(ops: &OperatorSet, a: &Cochain0, b: &Cochain0) -> f64 {
    ops.inner0(&a.values, &b.values)
}

pub fn inner_product1(ops: &OperatorSet, a: &Cochain1, b: &Cochain1) -> f64 {
    ops.inner1(&a.values, &b.values)
}
