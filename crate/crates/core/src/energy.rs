//! Energy, helicity and the coadjoint-orbit tests.
//!
//! Co-exact invariant forms are handled in stream-function coordinates:
//! α = f·η + ∗_Σ dg is stored as (f, g). In these coordinates the surface
//! star is an exact isometry, so
//!
//! * E(α) = l·(fᵀ star0 f + gᵀ S g),
//! * curl(f, g) = (star0⁻¹ S g, f), hence curl² = star0⁻¹ S on both parts,
//! * H(α) = (curl⁻¹α, α) = 2l·fᵀ star0 g,
//!
//! and the principal eigenform is (f₁, ±f₁/√ν₁) with μ₁ = √ν₁ exactly.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bundle::{BundleSpec, InvariantOneForm};
use crate::dec::{hodge_decompose_with, Cochain0, Cochain1, OperatorSet};
use crate::error::{Error, Result};
use crate::flow;
use crate::linalg;
use crate::rng::{self, Purpose};

/// Relative slack allowed in E ≥ μ₁|H|.
pub const TAU_BOUND: f64 = 1e-6;
/// Kernel share of ‖a‖ above which a helicity value carries a warning.
pub const KERNEL_WARNING: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamForm {
    /// η-component.
    pub f: Cochain0,
    /// Stream function of the tangential part.
    pub g: Cochain0,
}

impl StreamForm {
    pub fn new(f: Vec<f64>, g: Vec<f64>) -> Self {
        StreamForm { f: Cochain0::new(f), g: Cochain0::new(g) }
    }

    /// (f, ±f/√ν): the ±√ν curl eigenform built on an eigenfunction f.
    pub fn eigenform(f: &[f64], nu: f64, sign: i8) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidArgument(format!("eigenform needs ν > 0, got {nu}")));
        }
        let s = sign as f64 / libm::sqrt(nu);
        Ok(StreamForm::new(f.to_vec(), f.iter().map(|x| s * x).collect()))
    }

    /// Edge-cochain form (f, rot1·d0·g).
    pub fn to_cochains(&self, ops: &OperatorSet) -> Result<InvariantOneForm> {
        Ok(InvariantOneForm { f: self.f.clone(), b: Cochain1::new(ops.rot_grad(&self.g.values)?) })
    }

    pub fn energy(&self, spec: &BundleSpec, ops: &OperatorSet) -> f64 {
        let g = &self.g.values;
        spec.fiber_length * (ops.inner0(&self.f.values, &self.f.values) + linalg::dot(g, &ops.stiffness.matvec(g)))
    }

    pub fn helicity(&self, spec: &BundleSpec, ops: &OperatorSet) -> f64 {
        let mut f = self.f.values.clone();
        let mut g = self.g.values.clone();
        ops.pinned.remove_mean(&mut f);
        ops.pinned.remove_mean(&mut g);
        2.0 * spec.fiber_length * ops.inner0(&f, &g)
    }

    pub fn curl(&self, ops: &OperatorSet) -> StreamForm {
        let sg = ops.stiffness.matvec(&self.g.values);
        StreamForm::new(sg.iter().zip(&ops.star0).map(|(x, m)| x / m).collect(), self.f.values.clone())
    }

    pub fn add_scaled(&self, alpha: f64, other: &StreamForm) -> StreamForm {
        let mut out = self.clone();
        linalg::axpy(alpha, &other.f.values, &mut out.f.values);
        linalg::axpy(alpha, &other.g.values, &mut out.g.values);
        out
    }

    pub fn scaled(&self, alpha: f64) -> StreamForm {
        StreamForm::new(
            self.f.values.iter().map(|x| alpha * x).collect(),
            self.g.values.iter().map(|x| alpha * x).collect(),
        )
    }
}

/// l·(‖f‖² + ‖b‖²) for an edge-cochain form.
pub fn energy(spec: &BundleSpec, ops: &OperatorSet, a: &InvariantOneForm) -> f64 {
    a.norm_sq(spec, ops)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Helicity {
    pub value: f64,
    /// ‖kernel part‖ / ‖a‖ that was projected away.
    pub kernel_fraction: f64,
    pub warning: Option<String>,
}

/// Helicity of an edge-cochain form.
///
/// Closed tangential parts and the fibre mean of f span the curl kernel and
/// are discarded. The co-exact remainder c gets the stream function
/// g = S⁺·Bᵀ·star1·c, which inverts c = B g up to the O(h²) defect of rot1.
pub fn helicity(spec: &BundleSpec, ops: &OperatorSet, a: &InvariantOneForm, harmonic: &[Cochain1]) -> Result<Helicity> {
    let total = a.norm_sq(spec, ops);
    if !(total > 0.0) {
        return Ok(Helicity { value: 0.0, kernel_fraction: 0.0, warning: None });
    }
    let parts = hodge_decompose_with(ops, &a.b, harmonic)?;
    let mut f0 = a.f.values.clone();
    ops.pinned.remove_mean(&mut f0);
    let mean_part: Vec<f64> = a.f.values.iter().zip(&f0).map(|(x, y)| x - y).collect();
    let closed: Vec<f64> = parts.exact.values.iter().zip(&parts.harmonic.values).map(|(x, y)| x + y).collect();
    let kernel_sq = spec.fiber_length * (ops.inner0(&mean_part, &mean_part) + ops.inner1(&closed, &closed));
    let kernel_fraction = libm::sqrt(kernel_sq / total);
    let g = ops.pinned.solve(&ops.rot_grad_adjoint(&parts.coexact.values));
    let value = 2.0 * spec.fiber_length * ops.inner0(&f0, &g);
    let warning = (kernel_fraction > KERNEL_WARNING)
        .then(|| format!("discarded curl-kernel component is {:.2}% of the form", 100.0 * kernel_fraction));
    Ok(Helicity { value, kernel_fraction, warning })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub samples: usize,
    pub seed: u64,
    pub mu1: f64,
    pub violations: usize,
    /// min over samples of (E − μ₁|H|)/E.
    pub min_slack: f64,
    pub max_slack: f64,
    /// (E − μ₁|H|)/E at the principal eigenform.
    pub equality_slack: f64,
    pub energies: Vec<f64>,
    pub helicities: Vec<f64>,
}

/// Draw random kernel-orthogonal forms, each a random mix of the principal
/// eigenform α₁ and independent noise, and test E ≥ μ₁|H|.
pub fn helicity_bound_report(
    spec: &BundleSpec,
    ops: &OperatorSet,
    f1: &[f64],
    nu1: f64,
    samples: usize,
    seed: u64,
) -> Result<BoundReport> {
    let mu1 = libm::sqrt(nu1);
    let alpha = StreamForm::eigenform(f1, nu1, 1)?;
    let e1 = alpha.energy(spec, ops);
    let equality_slack = (e1 - mu1 * alpha.helicity(spec, ops).abs()) / e1;
    let alpha = alpha.scaled(1.0 / libm::sqrt(e1));
    let n = ops.nv();
    let mut out = BoundReport {
        samples,
        seed,
        mu1,
        violations: 0,
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
        equality_slack,
        energies: Vec::with_capacity(samples),
        helicities: Vec::with_capacity(samples),
    };
    for i in 0..samples {
        let mut r = rng::stream(seed, Purpose::HelicitySample, i as u32);
        let t = rng::uniform(&mut r);
        let sign = if rng::uniform(&mut r) < 0.5 { -1.0 } else { 1.0 };
        // noise smoothed once by S⁺ so both scales are represented
        let raw_f: Vec<f64> = (0..n).map(|_| rng::normal(&mut r)).collect();
        let raw_g: Vec<f64> = (0..n).map(|_| rng::normal(&mut r)).collect();
        let smooth = rng::uniform(&mut r) < 0.5;
        let (mut nf, mut ng) =
            if smooth { (ops.pinned.solve(&raw_f), ops.pinned.solve(&raw_g)) } else { (raw_f, raw_g) };
        ops.pinned.remove_mean(&mut nf);
        ops.pinned.remove_mean(&mut ng);
        let noise = StreamForm::new(nf, ng);
        let noise = noise.scaled(1.0 / libm::sqrt(noise.energy(spec, ops)));
        let beta = alpha.scaled(sign * t).add_scaled(1.0 - t, &noise);
        let e = beta.energy(spec, ops);
        let h = beta.helicity(spec, ops);
        let slack = (e - mu1 * h.abs()) / e;
        if slack < -TAU_BOUND {
            out.violations += 1;
        }
        out.min_slack = out.min_slack.min(slack);
        out.max_slack = out.max_slack.max(slack);
        out.energies.push(e);
        out.helicities.push(h);
    }
    Ok(out)
}

/// As `helicity_bound_report`, but a violation is an error.
pub fn helicity_bound_check(
    spec: &BundleSpec,
    ops: &OperatorSet,
    f1: &[f64],
    nu1: f64,
    samples: usize,
    seed: u64,
) -> Result<BoundReport> {
    let r = helicity_bound_report(spec, ops, f1, nu1, samples, seed)?;
    if r.violations > 0 {
        return Err(Error::PropertyViolation(format!(
            "{} of {} samples violate E ≥ μ₁|H| (min slack {:e})",
            r.violations, r.samples, r.min_slack
        )));
    }
    Ok(r)
}

/// Discrete Jacobian J(ψ, g) with J_a ≈ −∫ φ_a dψ∧dg.
///
/// Built from the per-face trilinear form det[a; ψ; g]/6, which is
/// antisymmetric, so gᵀJ(ψ, g) = 0 and 1ᵀJ(ψ, g) = 0 hold identically.
/// Uses vertex values and orientation only.
pub fn jacobian(ops: &OperatorSet, psi: &[f64], g: &[f64]) -> Vec<f64> {
    let mut j = vec![0.0; ops.nv()];
    for t in &ops.mesh.triangles {
        for c in 0..3 {
            let (a, p, q) = (t[c], t[(c + 1) % 3], t[(c + 2) % 3]);
            j[a] -= (psi[p] * g[q] - psi[q] * g[p]) / 6.0;
        }
    }
    j
}

/// Push the form forward along the fibre shear (θ, x) ↦ (θ + ψ(x), x).
///
/// The field f∂θ + X_g becomes (f + dψ(X_g))∂θ + X_g, so g is untouched
/// and f gains star0⁻¹·J(ψ, g).
pub fn fiber_shear(ops: &OperatorSet, a: &StreamForm, psi: &[f64]) -> Result<StreamForm> {
    if psi.len() != ops.nv() {
        return Err(Error::InvalidArgument(format!("ψ has {} entries for {} vertices", psi.len(), ops.nv())));
    }
    let j = jacobian(ops, psi, &a.g.values);
    let mut f = a.f.values.clone();
    for (v, fv) in f.iter_mut().enumerate() {
        *fv += j[v] / ops.star0[v];
    }
    Ok(StreamForm::new(f, a.g.values.clone()))
}

/// Literal 1-form pullback under the fibre shear: (f, b + f·dψ) with f
/// averaged to edge midpoints. Exact in the continuum; on the mesh it keeps
/// helicity and the eigenform's energy stationarity only to O(h²).
pub fn fiber_shear_pullback(ops: &OperatorSet, a: &InvariantOneForm, psi: &[f64]) -> Result<InvariantOneForm> {
    if psi.len() != ops.nv() {
        return Err(Error::InvalidArgument(format!("ψ has {} entries for {} vertices", psi.len(), ops.nv())));
    }
    let mut b = a.b.values.clone();
    for (e, &[p, q]) in ops.mesh.edges.iter().enumerate() {
        b[e] += 0.5 * (a.f.values[p] + a.f.values[q]) * (psi[q] - psi[p]);
    }
    Ok(InvariantOneForm { f: a.f.clone(), b: Cochain1::new(b) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitPerturbation {
    FiberShear { psi: Vec<f64> },
    HamiltonianFlow { h: Vec<f64>, t: f64, steps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOutcome {
    pub kind: String,
    pub energy: f64,
    pub ratio: f64,
    pub helicity_drift: f64,
    /// Relative area distortion; 0 for fibre shears.
    pub area_distortion: f64,
    pub usable: bool,
    pub tolerance: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub base_energy: f64,
    pub base_helicity: f64,
    pub outcomes: Vec<PerturbationOutcome>,
    pub min_ratio_shear: Option<f64>,
    pub min_ratio_flow: Option<f64>,
    pub unusable_flows: usize,
    pub violations: usize,
    pub note: String,
}

/// Tolerance on E'/E for fibre shears, which are exact.
pub const TAU_ORBIT_SHEAR: f64 = 1e-9;
/// Area-distortion level above which a flow is flagged unusable.
pub const TAU_VOL: f64 = 1e-3;

/// E(φ·α₁) ≥ E(α₁) over a family of orbit elements.
///
/// Flows are compared with tolerance 10·TAU_VOL: the PL resampling of the
/// transported functions loses O(h²) energy that the area measure does not
/// see.
pub fn orbit_minimization_test(
    alpha: &StreamForm,
    family: &[OrbitPerturbation],
    ops: &OperatorSet,
    spec: &BundleSpec,
) -> Result<OrbitReport> {
    let e0 = alpha.energy(spec, ops);
    let h0 = alpha.helicity(spec, ops);
    if !(e0 > 0.0) {
        return Err(Error::InvalidArgument("orbit test of the zero form".into()));
    }
    let mut outcomes = Vec::with_capacity(family.len());
    for p in family {
        let (form, kind, distortion, usable, tol) = match p {
            OrbitPerturbation::FiberShear { psi } => {
                (fiber_shear(ops, alpha, psi)?, "fiber_shear", 0.0, true, TAU_ORBIT_SHEAR)
            }
            OrbitPerturbation::HamiltonianFlow { h, t, steps } => {
                let r = flow::hamiltonian_pushforward(ops, alpha, h, *t, *steps)?;
                let usable = r.area_distortion <= TAU_VOL;
                (r.form, "hamiltonian_flow", r.area_distortion, usable, 10.0 * TAU_VOL)
            }
        };
        let e = form.energy(spec, ops);
        let ratio = e / e0;
        let drift = (form.helicity(spec, ops) - h0).abs() / e0;
        outcomes.push(PerturbationOutcome {
            kind: kind.into(),
            energy: e,
            ratio,
            helicity_drift: drift,
            area_distortion: distortion,
            usable,
            tolerance: tol,
            violation: usable && ratio < 1.0 - tol,
        });
    }
    let min_of = |k: &str| {
        outcomes
            .iter()
            .filter(|o| o.kind == k && o.usable)
            .map(|o| o.ratio)
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))))
    };
    Ok(OrbitReport {
        base_energy: e0,
        base_helicity: h0,
        min_ratio_shear: min_of("fiber_shear"),
        min_ratio_flow: min_of("hamiltonian_flow"),
        unusable_flows: outcomes.iter().filter(|o| !o.usable).count(),
        violations: outcomes.iter().filter(|o| o.violation).count(),
        outcomes,
        note: "S¹-invariant forms only, two perturbation families; no violation found is not a proof of minimality"
            .into(),
    })
}

/// Seeded perturbation family: `shears` random fibre shears and `flows`
/// random Hamiltonian flows (flows need a periodic chart).
pub fn random_family(ops: &OperatorSet, shears: usize, flows: usize, seed: u64) -> Result<Vec<OrbitPerturbation>> {
    let mut out = Vec::with_capacity(shears + flows);
    for i in 0..shears {
        let mut r = rng::stream(seed, Purpose::FiberShear, i as u32);
        let psi: Vec<f64> = (0..ops.nv()).map(|_| rng::normal(&mut r)).collect();
        // mix rough and smooth shears
        let psi = if i % 2 == 1 {
            let mut s = ops.pinned.solve(&psi.iter().zip(&ops.star0).map(|(a, m)| a * m).collect::<Vec<_>>());
            let top = linalg::max_abs(&s).max(f64::MIN_POSITIVE);
            linalg::scale(1.0 / top, &mut s);
            s
        } else {
            psi
        };
        out.push(OrbitPerturbation::FiberShear { psi });
    }
    for i in 0..flows {
        let mut r = rng::stream(seed, Purpose::HamiltonianFlow, i as u32);
        let (h, t0) = flow::random_hamiltonian(ops, &mut r)?;
        let t = flow::calibrate_flow_time(ops, &h, t0, 16, 0.4 * TAU_VOL)?;
        out.push(OrbitPerturbation::HamiltonianFlow { h, t, steps: 16 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_flat_torus, generate_icosphere, topology, ConformalFactor};
    use crate::spectral::{harmonic_basis, scalar_spectrum, SpectrumRequest};
    use core::f64::consts::PI;

    fn setup(n: usize) -> (OperatorSet, BundleSpec, Vec<f64>, f64) {
        let m = generate_flat_torus(2.0 * PI, n).unwrap();
        let ops = OperatorSet::assemble(&m, &ConformalFactor::zero(m.num_vertices())).unwrap();
        let spec = BundleSpec::product(1.0, topology(&m).unwrap()).unwrap();
        let sp = scalar_spectrum(&ops, &SpectrumRequest::new(1)).unwrap();
        (ops, spec, sp.pairs[0].eigenvector.clone(), sp.pairs[0].eigenvalue)
    }

    #[test]
    fn energy_of_simple_forms() {
        let (ops, _, _, _) = setup(8);
        let spec = BundleSpec::product(2.0 * PI, topology(&ops.mesh).unwrap()).unwrap();
        assert_eq!(energy(&spec, &ops, &InvariantOneForm::zeros(ops.nv(), ops.ne())), 0.0);
        // constant section over an area-A surface: E = l·A
        let a = InvariantOneForm::new(vec![1.0; ops.nv()], vec![0.0; ops.ne()]);
        let area = ops.total_area();
        assert!((energy(&spec, &ops, &a) - 2.0 * PI * area).abs() < 1e-9);
    }

    #[test]
    fn eigenform_helicity_identity_is_exact() {
        let (ops, spec, f1, nu1) = setup(16);
        for sign in [1, -1] {
            let a = StreamForm::eigenform(&f1, nu1, sign).unwrap();
            let (e, h) = (a.energy(&spec, &ops), a.helicity(&spec, &ops));
            assert!((h - sign as f64 * e / libm::sqrt(nu1)).abs() <= 1e-8 * e);
            // and it is a curl eigenform
            let c = a.curl(&ops);
            let d = c.add_scaled(-(sign as f64) * libm::sqrt(nu1), &a);
            assert!(d.energy(&spec, &ops) <= 1e-16 * e);
        }
    }

    #[test]
    fn cochain_helicity_matches_stream_helicity_to_discretization() {
        let (ops, spec, f1, nu1) = setup(32);
        let h = harmonic_basis(&crate::dec::one_form_laplacian(&ops), 1).unwrap();
        let s = StreamForm::eigenform(&f1, nu1, 1).unwrap();
        let c = s.to_cochains(&ops).unwrap();
        let hc = helicity(&spec, &ops, &c, &h).unwrap();
        let hs = s.helicity(&spec, &ops);
        assert!((hc.value - hs).abs() < 0.01 * hs.abs(), "{} {}", hc.value, hs);
        assert!(hc.kernel_fraction < 1e-8 && hc.warning.is_none());
        // adding a harmonic component is reported, not counted
        let mut k = c.clone();
        linalg::axpy(1.0, &h[0].values, &mut k.b.values);
        let hk = helicity(&spec, &ops, &k, &h).unwrap();
        assert!((hk.value - hc.value).abs() < 1e-9 * hc.value.abs());
        assert!(hk.warning.is_some());
    }

    #[test]
    fn bound_holds_and_second_eigenform_has_predicted_slack() {
        let m = generate_icosphere(1.0, 3).unwrap();
        let ops = OperatorSet::assemble(&m, &ConformalFactor::zero(m.num_vertices())).unwrap();
        let spec = BundleSpec::product(1.0, topology(&m).unwrap()).unwrap();
        let sp = scalar_spectrum(&ops, &SpectrumRequest::new(4)).unwrap();
        let (f1, nu1) = (&sp.pairs[0].eigenvector, sp.pairs[0].eigenvalue);
        let r = helicity_bound_check(&spec, &ops, f1, nu1, 30, 5).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.equality_slack.abs() <= 1e-9);
        let p2 = &sp.pairs[3]; // first member of the ℓ = 2 cluster
        let a2 = StreamForm::eigenform(&p2.eigenvector, p2.eigenvalue, 1).unwrap();
        let e = a2.energy(&spec, &ops);
        let slack = e - libm::sqrt(nu1) * a2.helicity(&spec, &ops).abs();
        let predicted = e * (1.0 - libm::sqrt(nu1) / libm::sqrt(p2.eigenvalue));
        assert!((slack - predicted).abs() < 1e-8 * e);
    }

    #[test]
    fn fiber_shear_is_exact_on_the_eigenform() {
        let (ops, spec, f1, nu1) = setup(16);
        let a = StreamForm::eigenform(&f1, nu1, 1).unwrap();
        let e = a.energy(&spec, &ops);
        let h = a.helicity(&spec, &ops);
        let same = fiber_shear(&ops, &a, &vec![2.5; ops.nv()]).unwrap();
        let d = same.add_scaled(-1.0, &a);
        assert!(d.energy(&spec, &ops) <= 1e-24 * e);
        let mut r = rng::stream(1, Purpose::FiberShear, 0);
        let psi: Vec<f64> = (0..ops.nv()).map(|_| 1e-4 * rng::normal(&mut r)).collect();
        let s = fiber_shear(&ops, &a, &psi).unwrap();
        // cross term vanishes exactly, so even a tiny shear cannot lower E
        assert!(s.energy(&spec, &ops) >= e * (1.0 - 1e-14));
        assert!((s.helicity(&spec, &ops) - h).abs() <= 1e-12 * e);
    }

    #[test]
    fn jacobian_is_consistent_with_the_continuum() {
        // ψ = sin x, g = sin y on the flat torus: dψ∧dg = cos x cos y dA
        let m = generate_flat_torus(2.0 * PI, 64).unwrap();
        let ops = OperatorSet::assemble(&m, &ConformalFactor::zero(m.num_vertices())).unwrap();
        let ch = m.chart.as_ref().unwrap();
        let psi: Vec<f64> = ch.coords.iter().map(|p| libm::sin(p[0])).collect();
        let g: Vec<f64> = ch.coords.iter().map(|p| libm::sin(p[1])).collect();
        let j = jacobian(&ops, &psi, &g);
        let mut err: f64 = 0.0;
        for (v, p) in ch.coords.iter().enumerate() {
            let exact = -libm::cos(p[0]) * libm::cos(p[1]);
            err = err.max((j[v] / ops.star0[v] - exact).abs());
        }
        assert!(err < 0.01, "{err}");
        assert!(linalg::dot(&g, &j).abs() < 1e-12);
        assert!(j.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn literal_pullback_fixes_f_and_zero_f() {
        let (ops, _, _, _) = setup(8);
        let a = InvariantOneForm::new(vec![0.0; ops.nv()], (0..ops.ne()).map(|i| i as f64).collect());
        let psi: Vec<f64> = (0..ops.nv()).map(|i| libm::sin(i as f64)).collect();
        assert_eq!(fiber_shear_pullback(&ops, &a, &psi).unwrap(), a);
        let b = InvariantOneForm::new(vec![1.0; ops.nv()], vec![0.0; ops.ne()]);
        assert_eq!(fiber_shear_pullback(&ops, &b, &vec![3.0; ops.nv()]).unwrap(), b);
    }

    #[test]
    fn orbit_test_on_bump_torus() {
        let m = generate_flat_torus(2.0 * PI, 32).unwrap();
        let u: Vec<f64> = m
            .chart
            .as_ref()
            .unwrap()
            .coords
            .iter()
            .map(|p| 2.0 * libm::exp(-(sq(p[0] - PI) + sq(p[1] - PI)) / 0.64))
            .collect();
        let ops = OperatorSet::assemble(&m, &ConformalFactor::new(&m, u).unwrap()).unwrap();
        let spec = BundleSpec::product(1.0, topology(&m).unwrap()).unwrap();
        let sp = scalar_spectrum(&ops, &SpectrumRequest::new(1)).unwrap();
        let a = StreamForm::eigenform(&sp.pairs[0].eigenvector, sp.pairs[0].eigenvalue, 1).unwrap();
        let fam = random_family(&ops, 10, 4, 3).unwrap();
        let mut zero = fam.clone();
        zero.push(OrbitPerturbation::FiberShear { psi: vec![0.0; ops.nv()] });
        let r = orbit_minimization_test(&a, &zero, &ops, &spec).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.unusable_flows, 0);
        assert_eq!(r.outcomes.last().unwrap().ratio, 1.0);
        assert!(r.min_ratio_shear.unwrap() >= 1.0 - 1e-9);
        assert!(r.min_ratio_flow.unwrap() >= 1.0 - 1e-2);
    }

    fn sq(x: f64) -> f64 {
        x * x
    }
}
