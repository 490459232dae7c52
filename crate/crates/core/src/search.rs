//! Conformal bump metrics and the overtwisted-minimizer certificate sweep.
//!
//! u(x) = A·exp(−d(x, c)²/σ²) with d the graph distance over base edge
//! lengths. Each grid point runs the whole pipeline: ν₁ and its cluster,
//! nodal topology and verdict per cluster member, the α± curl residuals,
//! and for overtwisted members the helicity bound and orbit tests.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::bundle::{chandrasekhar_lift, curl_residual, lemma_min, nonvanishing_margin, Branch, BundleSpec};
use crate::contact::{classify_eigenfunction, Classification, Verdict};
use crate::dec::{Cochain0, OperatorSet};
use crate::energy::{helicity_bound_report, orbit_minimization_test, random_family, StreamForm, TAU_BOUND};
use crate::error::{Error, Result};
use crate::mesh::{topology, ConformalFactor, TriangleMesh};
use crate::nodal::{extract_nodal_set, nodal_domains};
use crate::rng::{self, Purpose};
use crate::spectral::{scalar_spectrum, SpectrumRequest, TAU_EIG};

#[derive(PartialEq)]
struct Item(f64, usize);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Dijkstra distances from `source` over the base edge lengths.
pub fn graph_distance(mesh: &TriangleMesh, source: usize) -> Result<Vec<f64>> {
    if source >= mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!("center {source} out of range")));
    }
    let nbrs = mesh.vertex_neighbors();
    let mut dist = vec![f64::INFINITY; mesh.num_vertices()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Item(0.0, source));
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, e) in &nbrs[v] {
            let nd = d + mesh.base_edge_lengths[e];
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Item(nd, w));
            }
        }
    }
    Ok(dist)
}

/// u = A·exp(−d²/σ²); fails with DegenerateMetric when the scaled lengths
/// break a triangle inequality.
pub fn bump_factor(mesh: &TriangleMesh, amplitude: f64, sigma: f64, center: usize) -> Result<ConformalFactor> {
    if !(sigma > 0.0) || !sigma.is_finite() || !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bump needs σ > 0 and finite A (got A = {amplitude}, σ = {sigma})"
        )));
    }
    let d = graph_distance(mesh, center)?;
    let u = d.iter().map(|&x| amplitude * libm::exp(-(x * x) / (sigma * sigma))).collect();
    ConformalFactor::new(mesh, u)
}

/// Sum of three random Gaussian bumps in the embedding (chordal distance),
/// amplitudes in [−1, 1] and widths in [0.3, 1.0] times the bounding radius.
pub fn random_conformal_factor(mesh: &TriangleMesh, seed: u64, trial: u32) -> Result<ConformalFactor> {
    let mut r = rng::stream(seed, Purpose::ConformalMetric, trial);
    let n = mesh.num_vertices();
    let radius = mesh.vertices.iter().map(|p| libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])).fold(0.0, f64::max);
    let mut u = vec![0.0; n];
    for _ in 0..3 {
        let c = mesh.vertices[(r.next_u64() % n as u64) as usize];
        let a = rng::symmetric(&mut r);
        let s = radius * (0.3 + 0.7 * rng::uniform(&mut r));
        for (v, p) in mesh.vertices.iter().enumerate() {
            let d2 = (p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]) + (p[2] - c[2]) * (p[2] - c[2]);
            u[v] += a * libm::exp(-d2 / (s * s));
        }
    }
    ConformalFactor::new(mesh, u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFamily {
    pub center: usize,
    pub amplitudes: Vec<f64>,
    pub widths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub fiber_length: f64,
    pub seed: u64,
    pub eig_tolerance: f64,
    /// Bound on curl_residual(α±, ±√ν₁) for a complete certificate.
    pub tau_curl: f64,
    pub bound_samples: usize,
    pub shear_samples: usize,
    pub flow_samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            fiber_length: 1.0,
            seed: 0,
            eig_tolerance: TAU_EIG,
            tau_curl: 0.05,
            bound_samples: 100,
            shear_samples: 100,
            flow_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub samples: usize,
    pub seed: u64,
    pub violations: usize,
    pub min_slack: f64,
    pub equality_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub shears: usize,
    pub flows: usize,
    pub min_ratio_shear: Option<f64>,
    pub min_ratio_flow: Option<f64>,
    pub max_area_distortion: f64,
    pub unusable_flows: usize,
    pub violations: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub amplitude: f64,
    pub sigma: f64,
    pub center: usize,
    /// Reason the point was not evaluated.
    pub skipped: Option<String>,
    pub nu1: Option<f64>,
    pub cluster_size: usize,
    pub branch: Option<Branch>,
    pub fiber_value: f64,
    /// Cluster member the remaining fields describe.
    pub member: usize,
    pub member_verdicts: Vec<Classification>,
    pub nodal_components: usize,
    pub disc_witness: Option<usize>,
    pub witness_revalidated: bool,
    pub verdict: Option<Verdict>,
    pub curl_residual_plus: Option<f64>,
    pub curl_residual_minus: Option<f64>,
    pub tau_curl: f64,
    pub nonvanishing_margin: Option<f64>,
    pub helicity_bound: Option<BoundSummary>,
    pub orbit_test: Option<OrbitSummary>,
    pub complete: bool,
    pub notes: Vec<String>,
}

impl CertificateReport {
    fn empty(amplitude: f64, sigma: f64, center: usize, config: &SweepConfig, spec: &BundleSpec) -> Self {
        CertificateReport {
            amplitude,
            sigma,
            center,
            skipped: None,
            nu1: None,
            cluster_size: 0,
            branch: None,
            fiber_value: spec.fourier(1),
            member: 0,
            member_verdicts: Vec::new(),
            nodal_components: 0,
            disc_witness: None,
            witness_revalidated: false,
            verdict: None,
            curl_residual_plus: None,
            curl_residual_minus: None,
            tau_curl: config.tau_curl,
            nonvanishing_margin: None,
            helicity_bound: None,
            orbit_test: None,
            complete: false,
            notes: Vec::new(),
        }
    }
}

/// Re-derive the witness region from raw data: χ = 1, one boundary loop,
/// and that loop is a single nodal component.
pub fn revalidate_witness(mesh: &TriangleMesh, f: &[f64], witness: usize) -> Result<bool> {
    let curves = extract_nodal_set(mesh, f)?;
    let d = nodal_domains(mesh, f, &curves)?;
    Ok(d.regions.get(witness).is_some_and(|r| {
        r.region_id == witness && r.euler_characteristic == 1 && r.boundary_loop_count == 1 && d.curve_components >= 1
    }))
}

/// Conjunction of all proof obligations for one grid point.
pub fn certify(report: &CertificateReport) -> bool {
    let overtwisted = report.verdict.as_ref().is_some_and(|v| v.classification == Classification::Overtwisted);
    let curl_ok =
        [report.curl_residual_plus, report.curl_residual_minus].iter().all(|r| r.is_some_and(|x| x <= report.tau_curl));
    let bound_ok =
        report.helicity_bound.as_ref().is_some_and(|b| b.violations == 0 && b.equality_slack.abs() <= TAU_BOUND);
    let orbit_ok = report.orbit_test.as_ref().is_some_and(|o| o.passed);
    report.skipped.is_none()
        && overtwisted
        && report.branch == Some(Branch::Nu1)
        && report.nodal_components == 1
        && report.disc_witness.is_some()
        && report.witness_revalidated
        && curl_ok
        && bound_ok
        && orbit_ok
}

/// Run the pipeline at one (A, σ).
pub fn evaluate_point(
    mesh: &TriangleMesh,
    center: usize,
    amplitude: f64,
    sigma: f64,
    config: &SweepConfig,
) -> Result<CertificateReport> {
    let spec = BundleSpec::product(config.fiber_length, topology(mesh)?)?;
    let mut rep = CertificateReport::empty(amplitude, sigma, center, config, &spec);
    let ops = match bump_factor(mesh, amplitude, sigma, center).and_then(|u| OperatorSet::assemble(mesh, &u)) {
        Ok(ops) => ops,
        Err(e) => {
            rep.skipped = Some(format!("{e}"));
            return Ok(rep);
        }
    };
    let req = SpectrumRequest { count: 1, tolerance: config.eig_tolerance, shift: 0.0, seed: config.seed };
    let sp = scalar_spectrum(&ops, &req)?;
    let members = sp.cluster_members(0);
    let nu1 = members[0].eigenvalue;
    rep.nu1 = Some(nu1);
    rep.cluster_size = members.len();
    let (_, branch) = lemma_min(&spec, nu1);
    rep.branch = Some(branch);
    if branch == Branch::Fiber {
        rep.notes.push(format!("(2π/l)² = {:.4} ≤ ν₁: fibre branch, choose a smaller fiber_length", rep.fiber_value));
    }
    if members.len() > 1 {
        rep.notes.push(format!("ν₁ is a {}-fold cluster; every member was classified", members.len()));
    }

    let mut verdicts = Vec::with_capacity(members.len());
    for m in members {
        match classify_eigenfunction(mesh, &spec, &m.eigenvector) {
            Ok((_, v)) => verdicts.push(Some(v)),
            Err(e) => {
                rep.notes.push(format!("member classification failed: {e}"));
                verdicts.push(None);
            }
        }
    }
    rep.member_verdicts = verdicts.iter().flatten().map(|v| v.classification).collect();
    let chosen = verdicts
        .iter()
        .position(|v| v.as_ref().is_some_and(|v| v.classification == Classification::Overtwisted))
        .or_else(|| verdicts.iter().position(Option::is_some));
    let Some(k) = chosen else {
        return Ok(rep);
    };
    let verdict = verdicts[k].take().expect("chosen member has a verdict");
    let f1 = &members[k].eigenvector;
    rep.member = k;
    rep.nodal_components = verdict.curve_components;
    rep.disc_witness = verdict.witness;
    if let Some(w) = verdict.witness {
        rep.witness_revalidated = revalidate_witness(mesh, f1, w)?;
    }
    let overtwisted = verdict.classification == Classification::Overtwisted;
    rep.verdict = Some(verdict);

    let fc = Cochain0::new(f1.clone());
    let mu = libm::sqrt(nu1);
    for sign in [1i8, -1] {
        let a = chandrasekhar_lift(&ops, &fc, nu1, sign)?;
        let r = curl_residual(&spec, &ops, &a, sign as f64 * mu)?;
        if sign > 0 {
            rep.curl_residual_plus = Some(r);
        } else {
            rep.curl_residual_minus = Some(r);
        }
    }
    rep.nonvanishing_margin = Some(nonvanishing_margin(&ops, f1, nu1)?);

    if overtwisted {
        let b = helicity_bound_report(&spec, &ops, f1, nu1, config.bound_samples, config.seed)?;
        rep.helicity_bound = Some(BoundSummary {
            samples: b.samples,
            seed: b.seed,
            violations: b.violations,
            min_slack: b.min_slack,
            equality_slack: b.equality_slack,
        });
        let alpha = StreamForm::eigenform(f1, nu1, 1)?;
        let orbit = random_family(&ops, config.shear_samples, config.flow_samples, config.seed)
            .and_then(|fam| orbit_minimization_test(&alpha, &fam, &ops, &spec));
        match orbit {
            Ok(o) => {
                let usable_flows = config.flow_samples - o.unusable_flows;
                rep.orbit_test = Some(OrbitSummary {
                    shears: config.shear_samples,
                    flows: config.flow_samples,
                    min_ratio_shear: o.min_ratio_shear,
                    min_ratio_flow: o.min_ratio_flow,
                    max_area_distortion: o.outcomes.iter().map(|x| x.area_distortion).fold(0.0, f64::max),
                    unusable_flows: o.unusable_flows,
                    violations: o.violations,
                    passed: o.violations == 0 && (config.flow_samples == 0 || usable_flows > 0),
                });
            }
            Err(e) => rep.notes.push(format!("orbit test failed: {e}")),
        }
    } else {
        rep.notes.push("tight: orbit and helicity tests skipped".into());
    }
    rep.complete = certify(&rep);
    Ok(rep)
}

/// Complete certificates first, then grid order (A, then σ).
pub fn sort_reports(reports: &mut [CertificateReport]) {
    reports.sort_by(|a, b| {
        b.complete.cmp(&a.complete).then(a.amplitude.total_cmp(&b.amplitude)).then(a.sigma.total_cmp(&b.sigma))
    });
}

pub fn check_sweep(mesh: &TriangleMesh, family: &BumpFamily) -> Result<()> {
    let topo = topology(mesh)?;
    if topo.genus == 0 {
        return Err(Error::InvalidArgument(
            "sweeps need genus ≥ 1; on S² no principal eigenform is overtwisted".into(),
        ));
    }
    if family.center >= mesh.num_vertices() {
        return Err(Error::InvalidArgument(format!("center {} out of range", family.center)));
    }
    if family.widths.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParameter("bump widths must be positive".into()));
    }
    Ok(())
}

/// Sequential sweep over the (A, σ) grid.
pub fn sweep(mesh: &TriangleMesh, family: &BumpFamily, config: &SweepConfig) -> Result<Vec<CertificateReport>> {
    check_sweep(mesh, family)?;
    let mut out = Vec::with_capacity(family.amplitudes.len() * family.widths.len());
    for &a in &family.amplitudes {
        for &s in &family.widths {
            out.push(evaluate_point(mesh, family.center, a, s, config)?);
        }
    }
    sort_reports(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_flat_torus, generate_icosphere};
    use core::f64::consts::PI;

    #[test]
    fn dijkstra_on_grid() {
        let m = generate_flat_torus(4.0, 4).unwrap();
        let d = graph_distance(&m, 0).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 1.0);
        // (1,1) is one diagonal step away
        assert!((d[5] - libm::sqrt(2.0)).abs() < 1e-12);
        // (2,2): two diagonals
        assert!((d[10] - 2.0 * libm::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn bump_limits() {
        let m = generate_flat_torus(2.0 * PI, 12).unwrap();
        assert!(bump_factor(&m, 0.0, 0.5, 0).unwrap().u.iter().all(|&x| x == 0.0));
        let wide = bump_factor(&m, 0.7, 1e6, 3).unwrap();
        assert!(wide.u.iter().all(|&x| (x - 0.7).abs() < 1e-9));
        assert!(bump_factor(&m, 1.0, 0.0, 0).is_err());
        assert!(matches!(bump_factor(&m, 40.0, 0.6, 0), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn sweep_refuses_spheres() {
        let m = generate_icosphere(1.0, 1).unwrap();
        let fam = BumpFamily { center: 0, amplitudes: vec![0.0], widths: vec![0.5] };
        assert!(sweep(&m, &fam, &SweepConfig::default()).is_err());
    }

    #[test]
    fn branch_requirement_blocks_certificate() {
        let m = generate_flat_torus(2.0 * PI, 12).unwrap();
        let cfg = SweepConfig {
            fiber_length: 100.0,
            bound_samples: 2,
            shear_samples: 2,
            flow_samples: 0,
            ..Default::default()
        };
        let r = evaluate_point(&m, 0, 0.0, 0.5, &cfg).unwrap();
        assert_eq!(r.branch, Some(Branch::Fiber));
        assert!(!certify(&r));
    }

    #[test]
    fn random_sphere_metrics_are_valid_and_reproducible() {
        let m = generate_icosphere(1.0, 2).unwrap();
        let a = random_conformal_factor(&m, 4, 0).unwrap();
        assert_eq!(a, random_conformal_factor(&m, 4, 0).unwrap());
        assert_ne!(a, random_conformal_factor(&m, 4, 1).unwrap());
    }
}
