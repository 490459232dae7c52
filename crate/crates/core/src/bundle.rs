//! S¹-invariant 1-forms on P = S¹×Σ.
//!
//! An invariant form f·η + β is stored as the pair (f, b) of surface
//! cochains. The circle is never meshed: Fourier modes only enter the
//! product spectrum arithmetically.
//!
//! The discrete curl on pairs is C(f, b) = (star0⁻¹ Bᵀ star1 b, B f) with
//! B = rot1·d0. It is self-adjoint for l·(star0 ⊕ star1). Since
//! K·d0 = d1ᵀ·(face average), C² on the f-block is not the cotangent
//! Laplacian: it agrees with it on smooth functions up to O(h²) but has
//! spurious small eigenvalues on oscillating ones. Energy and helicity are
//! therefore computed in stream-function coordinates (see `energy`).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dec::{Cochain0, Cochain1, OperatorSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::SurfaceTopology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub fiber_length: f64,
    pub euler_number: i64,
    pub topology: SurfaceTopology,
}

impl BundleSpec {
    /// The trivial bundle S¹×Σ.
    pub fn product(fiber_length: f64, topology: SurfaceTopology) -> Result<Self> {
        Self::new(fiber_length, 0, topology)
    }

    /// A bundle with given Euler number; only the classifier uses e ≠ 0.
    pub fn new(fiber_length: f64, euler_number: i64, topology: SurfaceTopology) -> Result<Self> {
        if !(fiber_length > 0.0) || !fiber_length.is_finite() {
            return Err(Error::InvalidParameter(format!("fiber length {fiber_length}")));
        }
        Ok(BundleSpec { fiber_length, euler_number, topology })
    }

    /// (2πn/l)².
    pub fn fourier(&self, n: usize) -> f64 {
        let w = 2.0 * PI * n as f64 / self.fiber_length;
        w * w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantOneForm {
    pub f: Cochain0,
    pub b: Cochain1,
}

impl InvariantOneForm {
    pub fn new(f: Vec<f64>, b: Vec<f64>) -> Self {
        InvariantOneForm { f: Cochain0::new(f), b: Cochain1::new(b) }
    }

    pub fn zeros(nv: usize, ne: usize) -> Self {
        InvariantOneForm { f: Cochain0::zeros(nv), b: Cochain1::zeros(ne) }
    }

    /// l·(‖f‖² + ‖b‖²).
    pub fn norm_sq(&self, spec: &BundleSpec, ops: &OperatorSet) -> f64 {
        spec.fiber_length * (ops.inner0(&self.f.values, &self.f.values) + ops.inner1(&self.b.values, &self.b.values))
    }

    pub fn inner(&self, other: &Self, spec: &BundleSpec, ops: &OperatorSet) -> f64 {
        spec.fiber_length * (ops.inner0(&self.f.values, &other.f.values) + ops.inner1(&self.b.values, &other.b.values))
    }

    /// self + alpha·other
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        let mut out = self.clone();
        linalg::axpy(alpha, &other.f.values, &mut out.f.values);
        linalg::axpy(alpha, &other.b.values, &mut out.b.values);
        out
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        linalg::scale(alpha, &mut out.f.values);
        linalg::scale(alpha, &mut out.b.values);
        out
    }

    fn check(&self, ops: &OperatorSet) -> Result<()> {
        if self.f.values.len() != ops.nv() || self.b.values.len() != ops.ne() {
            return Err(Error::InvalidArgument(format!(
                "form has {}/{} entries for {}/{} vertices/edges",
                self.f.values.len(),
                self.b.values.len(),
                ops.nv(),
                ops.ne()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    /// f·η with f a Δ⁰ eigenfunction.
    Normal { m: usize },
    /// Fourier mode n times a co-exact Δ¹ eigenform.
    Tangential { n: usize, m: usize },
    /// Fourier mode n ≥ 1 times a harmonic form.
    Harmonic { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductEigenvalue {
    pub value_sq: f64,
    pub origin: Origin,
    pub n: usize,
    pub m: usize,
    pub multiplicity: usize,
}

/// Candidate squared curl eigenvalues on S¹×Σ, ascending.
///
/// `scalar_eigs[m-1]` is ν_m. Tangential candidates use ν̃_m = ν_m (∗d maps
/// Δ⁰ eigenfunctions onto co-exact Δ¹ eigenforms); harmonic candidates
/// exist only in positive genus.
pub fn assemble_product_spectrum(
    spec: &BundleSpec,
    scalar_eigs: &[f64],
    n_max: usize,
) -> Result<Vec<ProductEigenvalue>> {
    if scalar_eigs.is_empty() {
        return Err(Error::InvalidArgument("empty scalar spectrum".into()));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if let Some(bad) = scalar_eigs.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("scalar eigenvalue {bad} is not positive")));
    }
    let mut out = Vec::new();
    for (i, &nu) in scalar_eigs.iter().enumerate() {
        let m = i + 1;
        out.push(ProductEigenvalue { value_sq: nu, origin: Origin::Normal { m }, n: 0, m, multiplicity: 1 });
        for n in 0..=n_max {
            out.push(ProductEigenvalue {
                value_sq: spec.fourier(n) + nu,
                origin: Origin::Tangential { n, m },
                n,
                m,
                multiplicity: if n == 0 { 1 } else { 2 },
            });
        }
    }
    let genus = spec.topology.genus;
    if genus >= 1 {
        for n in 1..=n_max {
            out.push(ProductEigenvalue {
                value_sq: spec.fourier(n),
                origin: Origin::Harmonic { n },
                n,
                m: 0,
                multiplicity: 4 * genus,
            });
        }
    }
    out.sort_by(|a, b| a.value_sq.total_cmp(&b.value_sq).then(a.origin.cmp(&b.origin)));
    Ok(out)
}

/// min{ν₁, (2π/l)²}, with the branch that attains it (ties go to ν₁).
pub fn lemma_min(spec: &BundleSpec, nu1: f64) -> (f64, Branch) {
    let fib = spec.fourier(1);
    if nu1 <= fib {
        (nu1, Branch::Nu1)
    } else {
        (fib, Branch::Fiber)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// μ₁² = ν₁.
    Nu1,
    /// μ₁² = (2π/l)².
    Fiber,
}

/// α± = f·η ± ∗_Σ df/√ν. With this weighting the two parts have equal
/// norms when f is an eigenfunction.
pub fn chandrasekhar_lift(ops: &OperatorSet, f: &Cochain0, nu: f64, sign: i8) -> Result<InvariantOneForm> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("lift needs ν > 0, got {nu}")));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidArgument(format!("sign must be ±1, got {sign}")));
    }
    let mut b = ops.rot_grad(&f.values)?;
    linalg::scale(sign as f64 / libm::sqrt(nu), &mut b);
    Ok(InvariantOneForm { f: f.clone(), b: Cochain1::new(b) })
}

pub fn invariant_curl(ops: &OperatorSet, a: &InvariantOneForm) -> Result<InvariantOneForm> {
    a.check(ops)?;
    let f: Vec<f64> = ops.rot_grad_adjoint(&a.b.values).iter().zip(&ops.star0).map(|(x, m)| x / m).collect();
    let b = ops.rot_grad(&a.f.values)?;
    Ok(InvariantOneForm::new(f, b))
}

/// ‖curl a − μ a‖ / ‖a‖ in the product norm.
pub fn curl_residual(spec: &BundleSpec, ops: &OperatorSet, a: &InvariantOneForm, mu: f64) -> Result<f64> {
    let na = a.norm_sq(spec, ops);
    if !(na > 0.0) {
        return Err(Error::InvalidArgument("curl residual of the zero form".into()));
    }
    let c = invariant_curl(ops, a)?;
    let d = c.add_scaled(-mu, a);
    Ok(libm::sqrt(d.norm_sq(spec, ops) / na))
}

/// min over vertices of f² + |∗df|²/ν, relative to its max over vertices.
///
/// |df|² at a vertex is the area-weighted mean over its faces. A margin near
/// zero means α± = f·η ± ∗df/√ν nearly vanishes somewhere.
pub fn nonvanishing_margin(ops: &OperatorSet, f: &[f64], nu: f64) -> Result<f64> {
    if f.len() != ops.nv() || !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("margin needs {} values and ν > 0", ops.nv())));
    }
    let mesh = &ops.mesh;
    let mut grad = alloc::vec![0.0; ops.nv()];
    let mut weight = alloc::vec![0.0; ops.nv()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let l = mesh.face_lengths(t, &ops.lengths);
        let a = ops.areas[t];
        let mut g2 = 0.0;
        for k in 0..3 {
            for m in 0..3 {
                let ekm = if k == m {
                    l[k] * l[k]
                } else {
                    let n = 3 - k - m;
                    0.5 * (l[n] * l[n] - l[k] * l[k] - l[m] * l[m])
                };
                g2 += f[tri[k]] * f[tri[m]] * ekm;
            }
        }
        g2 /= 4.0 * a * a;
        for &v in tri {
            grad[v] += a * g2;
            weight[v] += a;
        }
    }
    let vals: Vec<f64> = (0..ops.nv()).map(|v| f[v] * f[v] + grad[v] / weight[v] / nu).collect();
    let top = vals.iter().fold(0.0f64, |m, &x| m.max(x));
    if top == 0.0 {
        return Ok(0.0);
    }
    Ok(vals.iter().fold(f64::INFINITY, |m, &x| m.min(x)) / top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_flat_torus, ConformalFactor};

    fn torus_ops(n: usize) -> OperatorSet {
        let m = generate_flat_torus(2.0 * PI, n).unwrap();
        OperatorSet::assemble(&m, &ConformalFactor::zero(m.num_vertices())).unwrap()
    }

    fn genus(g: usize) -> SurfaceTopology {
        SurfaceTopology { genus: g, euler_characteristic: 2 - 2 * g as i64, is_sphere: g == 0 }
    }

    #[test]
    fn lemma_examples() {
        let s = BundleSpec::product(PI, genus(1)).unwrap();
        let sp = assemble_product_spectrum(&s, &[1.0], 2).unwrap();
        assert_eq!(sp[0].value_sq, 1.0);
        assert_eq!(lemma_min(&s, 1.0), (1.0, Branch::Nu1));
        let s4 = BundleSpec::product(4.0 * PI, genus(1)).unwrap();
        let sp4 = assemble_product_spectrum(&s4, &[1.0], 2).unwrap();
        assert!((sp4[0].value_sq - 0.25).abs() < 1e-15);
        assert_eq!(sp4[0].origin, Origin::Harmonic { n: 1 });
        assert!(assemble_product_spectrum(&s4, &[], 2).is_err());
    }

    #[test]
    fn sphere_has_no_harmonic_candidates() {
        let s = BundleSpec::product(100.0, genus(0)).unwrap();
        let sp = assemble_product_spectrum(&s, &[2.0, 2.0, 2.0], 3).unwrap();
        assert!(sp.iter().all(|p| !matches!(p.origin, Origin::Harmonic { .. })));
        assert_eq!(sp[0].value_sq, 2.0);
        assert_eq!(lemma_min(&s, 2.0).1, Branch::Fiber);
    }

    #[test]
    fn lift_has_equal_parts_and_opposite_signs() {
        let ops = torus_ops(24);
        let f: Vec<f64> = ops.mesh.chart.as_ref().unwrap().coords.iter().map(|p| libm::cos(p[0])).collect();
        let nrm = ops.norm0(&f);
        let f = Cochain0::new(f.iter().map(|x| x / nrm).collect());
        let nu = 1.0;
        let p = chandrasekhar_lift(&ops, &f, nu, 1).unwrap();
        let m = chandrasekhar_lift(&ops, &f, nu, -1).unwrap();
        assert_eq!(p.f, m.f);
        for (a, b) in p.b.values.iter().zip(&m.b.values) {
            assert_eq!(*a, -*b);
        }
        let (nf, nb) = (ops.norm0(&p.f.values), ops.norm1(&p.b.values));
        assert!((nf - nb).abs() < 0.02, "{nf} {nb}");
        assert!(chandrasekhar_lift(&ops, &f, 0.0, 1).is_err());
    }

    #[test]
    fn curl_is_self_adjoint_and_kills_harmonic_forms() {
        let ops = torus_ops(10);
        let spec = BundleSpec::product(1.0, genus(1)).unwrap();
        let a = InvariantOneForm::new(
            (0..ops.nv()).map(|i| libm::sin(i as f64)).collect(),
            (0..ops.ne()).map(|i| libm::cos(0.7 * i as f64)).collect(),
        );
        let b = InvariantOneForm::new(
            (0..ops.nv()).map(|i| libm::cos(1.3 * i as f64)).collect(),
            (0..ops.ne()).map(|i| libm::sin(0.2 * i as f64)).collect(),
        );
        let lhs = invariant_curl(&ops, &a).unwrap().inner(&b, &spec, &ops);
        let rhs = a.inner(&invariant_curl(&ops, &b).unwrap(), &spec, &ops);
        assert!((lhs - rhs).abs() < 1e-9 * (lhs.abs() + 1.0));
        let h = crate::spectral::harmonic_basis(&crate::dec::one_form_laplacian(&ops), 1).unwrap();
        let c = invariant_curl(&ops, &InvariantOneForm { f: Cochain0::zeros(ops.nv()), b: h[0].clone() }).unwrap();
        assert!(linalg::max_abs(&c.f.values) < 1e-12);
        assert!(linalg::max_abs(&c.b.values) == 0.0);
    }

    #[test]
    fn nonvanishing_margin_of_cos() {
        use crate::mesh::{generate_flat_torus, ConformalFactor};
        let m = generate_flat_torus(2.0 * PI, 32).unwrap();
        let ops = OperatorSet::assemble(&m, &ConformalFactor::zero(m.num_vertices())).unwrap();
        let ch = m.chart.as_ref().unwrap();
        // cos²x + sin²x = 1 everywhere
        let f: Vec<f64> = ch.coords.iter().map(|p| libm::cos(p[0])).collect();
        let r = nonvanishing_margin(&ops, &f, 1.0).unwrap();
        assert!(r > 0.9 && r <= 1.0, "{r}");
        // cos x + cos y has saddle zeros at (π/2, π/2)-type points
        let g: Vec<f64> = ch.coords.iter().map(|p| libm::cos(p[0]) + libm::cos(p[1])).collect();
        assert!(nonvanishing_margin(&ops, &g, 1.0).unwrap() < 0.05);
    }
}
