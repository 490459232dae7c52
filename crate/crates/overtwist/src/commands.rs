//! One function per subcommand. Each writes its artifacts under the output
//! directory and returns an error carrying a core violation when a checked
//! property fails, after the artifacts are written.

use std::path::Path;

use anyhow::{bail, Context, Result};
use overtwist_core::bundle::{
    assemble_product_spectrum, chandrasekhar_lift, curl_residual, lemma_min, nonvanishing_margin, Branch, BundleSpec,
    Origin,
};
use overtwist_core::contact::{classify_eigenfunction, s2_cross_s1_audit, AuditReport, Verdict};
use overtwist_core::dec::{one_form_laplacian, Cochain0, OperatorSet};
use overtwist_core::energy::{
    helicity_bound_report, orbit_minimization_test, random_family, BoundReport, OrbitReport, StreamForm,
};
use overtwist_core::mesh::{topology, MeshSummary, TriangleMesh};
use overtwist_core::nodal::{extract_nodal_set, nodal_domains, NodalCurve, NodalDomainSet};
use overtwist_core::search::{
    check_sweep, evaluate_point, random_conformal_factor, sort_reports, BumpFamily, CertificateReport,
};
use overtwist_core::spectral::{harmonic_basis, scalar_spectrum, Cluster, Spectrum, SpectrumRequest};
use overtwist_core::Error as CoreError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{default_center, Command, MeshSource, MetricSpec, RunConfig, Samples};
use crate::formats::{to_matrix_market, write_csv, write_json, write_text, ArtifactMeta};
use crate::obj::{curves_to_obj, mesh_to_obj};

/// Dispatch a validated config.
pub fn run(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let meta = ArtifactMeta::new(cfg.command.name(), &cfg.hash(), cfg.seed);
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    match &cfg.command {
        Command::Spectrum { k, fiber_length, export_matrices } => {
            spectrum(cfg, &meta, *k, *fiber_length, *export_matrices)
        }
        Command::Nodal { eig_index } => nodal(cfg, &meta, *eig_index),
        Command::Classify { fiber_length } => classify(cfg, &meta, *fiber_length),
        Command::CertifySweep { grid, fiber_length, samples } => {
            let family = BumpFamily { center: 0, amplitudes: grid.amplitudes.clone(), widths: grid.widths.clone() };
            certify_sweep(cfg, &meta, family, grid.center, *fiber_length, samples)
        }
        Command::OrbitTest { certificate, samples } => orbit_test(cfg, &meta, certificate, samples),
        Command::AuditS2 { subdivisions, trials, fiber_length } => {
            audit_s2(cfg, &meta, *subdivisions, *trials, *fiber_length)
        }
    }
}

fn load_mesh(cfg: &RunConfig) -> Result<(MeshSource, TriangleMesh)> {
    let src = cfg.mesh.clone().context("this command needs --mesh")?;
    let mesh = src.load()?;
    Ok((src, mesh))
}

fn request(cfg: &RunConfig, count: usize) -> SpectrumRequest {
    SpectrumRequest { count, tolerance: cfg.tolerances.eig, shift: 0.0, seed: cfg.seed }
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    eigenvalue: f64,
    residual: f64,
    cluster_id: usize,
    cluster_size: usize,
}

#[derive(Serialize)]
struct ProductRow {
    value_sq: f64,
    origin: &'static str,
    n: usize,
    m: usize,
    multiplicity: usize,
}

#[derive(Serialize)]
struct SpectrumBody<'a> {
    mesh: MeshSummary,
    metric: &'a MetricSpec,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    clusters: &'a [Cluster],
    flagged_clusters: Vec<usize>,
    iterations: usize,
    harmonic_forms: usize,
}

fn spectrum_rows(sp: &Spectrum) -> Vec<SpectrumRow> {
    sp.pairs
        .iter()
        .enumerate()
        .map(|(i, p)| SpectrumRow {
            index: i + 1,
            eigenvalue: p.eigenvalue,
            residual: p.residual,
            cluster_id: p.cluster,
            cluster_size: sp.clusters[p.cluster].len,
        })
        .collect()
}

fn product_rows(spec: &BundleSpec, eigs: &[f64]) -> Result<Vec<ProductRow>> {
    Ok(assemble_product_spectrum(spec, eigs, 3)?
        .into_iter()
        .map(|p| ProductRow {
            value_sq: p.value_sq,
            origin: match p.origin {
                Origin::Normal { .. } => "normal",
                Origin::Tangential { .. } => "tangential",
                Origin::Harmonic { .. } => "harmonic",
            },
            n: p.n,
            m: p.m,
            multiplicity: p.multiplicity,
        })
        .collect())
}

fn spectrum(cfg: &RunConfig, meta: &ArtifactMeta, k: usize, fiber_length: Option<f64>, export: bool) -> Result<()> {
    if k == 0 {
        bail!("--k must be at least 1");
    }
    let (_, mesh) = load_mesh(cfg)?;
    let ops = OperatorSet::assemble(&mesh, &cfg.metric.factor(&mesh)?)?;
    let sp = scalar_spectrum(&ops, &request(cfg, k))?;
    let topo = topology(&mesh)?;
    let harmonic = harmonic_basis(&one_form_laplacian(&ops), topo.genus)?;
    let out = &cfg.out;
    write_csv(&out.join("spectrum.csv"), meta, &spectrum_rows(&sp))?;
    write_json(
        &out.join("spectrum.json"),
        meta,
        &SpectrumBody {
            mesh: mesh.summary()?,
            metric: &cfg.metric,
            eigenvalues: sp.eigenvalues(),
            residuals: sp.pairs.iter().map(|p| p.residual).collect(),
            clusters: &sp.clusters,
            flagged_clusters: sp.clusters.iter().filter(|c| c.flagged()).map(|c| c.id).collect(),
            iterations: sp.iterations,
            harmonic_forms: harmonic.len(),
        },
    )?;
    if let Some(l) = fiber_length {
        let spec = BundleSpec::product(l, topo)?;
        write_csv(&out.join("product_spectrum.csv"), meta, &product_rows(&spec, &sp.eigenvalues())?)?;
    }
    if export {
        for (name, a) in ops.named_matrices() {
            write_text(&out.join("matrices").join(format!("{name}.mtx")), &to_matrix_market(meta, name, &a))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CurveSummary {
    component_id: usize,
    is_closed: bool,
    crossings: usize,
}

#[derive(Serialize)]
struct NodalBody {
    eig_index: usize,
    eigenvalue: f64,
    cluster_size: usize,
    curves: Vec<CurveSummary>,
    domains: NodalDomainSummary,
}

#[derive(Serialize)]
struct NodalDomainSummary {
    curve_components: usize,
    regions: Vec<overtwist_core::nodal::RegionTopology>,
}

fn summarize(curves: &[NodalCurve], d: &NodalDomainSet) -> (Vec<CurveSummary>, NodalDomainSummary) {
    (
        curves
            .iter()
            .map(|c| CurveSummary { component_id: c.component_id, is_closed: c.is_closed, crossings: c.segments.len() })
            .collect(),
        NodalDomainSummary { curve_components: d.curve_components, regions: d.regions.clone() },
    )
}

fn nodal(cfg: &RunConfig, meta: &ArtifactMeta, eig_index: usize) -> Result<()> {
    if eig_index == 0 {
        bail!("--eig-index counts from 1 (the constant mode is excluded)");
    }
    let (_, mesh) = load_mesh(cfg)?;
    let ops = OperatorSet::assemble(&mesh, &cfg.metric.factor(&mesh)?)?;
    let sp = scalar_spectrum(&ops, &request(cfg, eig_index))?;
    let pair = &sp.pairs[eig_index - 1];
    let curves = extract_nodal_set(&mesh, &pair.eigenvector)?;
    let d = nodal_domains(&mesh, &pair.eigenvector, &curves)?;
    let (cs, ds) = summarize(&curves, &d);
    let out = &cfg.out;
    write_json(
        &out.join("nodal.json"),
        meta,
        &NodalBody {
            eig_index,
            eigenvalue: pair.eigenvalue,
            cluster_size: sp.clusters[pair.cluster].len,
            curves: cs,
            domains: ds,
        },
    )?;
    let header = meta.header_line();
    write_text(&out.join("nodal_curves.obj"), &curves_to_obj(&mesh, &curves, &header))?;
    write_text(&out.join("eigenfunction.obj"), &mesh_to_obj(&mesh, Some(&pair.eigenvector), &header))?;
    Ok(())
}

#[derive(Serialize)]
struct ClassifyBody {
    nu1: f64,
    cluster_size: usize,
    fiber_value: f64,
    mu1_sq: f64,
    branch: Branch,
    curl_residual_plus: f64,
    curl_residual_minus: f64,
    nonvanishing_margin: f64,
    lift_convention: &'static str,
    verdict: Verdict,
}

fn classify(cfg: &RunConfig, meta: &ArtifactMeta, fiber_length: f64) -> Result<()> {
    let (_, mesh) = load_mesh(cfg)?;
    let ops = OperatorSet::assemble(&mesh, &cfg.metric.factor(&mesh)?)?;
    let spec = BundleSpec::product(fiber_length, topology(&mesh)?)?;
    let sp = scalar_spectrum(&ops, &request(cfg, 6))?;
    let first = &sp.pairs[0];
    let (mu1_sq, branch) = lemma_min(&spec, first.eigenvalue);
    let (curves, verdict) = classify_eigenfunction(&mesh, &spec, &first.eigenvector)?;
    let fc = Cochain0::new(first.eigenvector.clone());
    let mu = first.eigenvalue.sqrt();
    let rp = curl_residual(&spec, &ops, &chandrasekhar_lift(&ops, &fc, first.eigenvalue, 1)?, mu)?;
    let rm = curl_residual(&spec, &ops, &chandrasekhar_lift(&ops, &fc, first.eigenvalue, -1)?, -mu)?;
    let out = &cfg.out;
    write_json(
        &out.join("verdict.json"),
        meta,
        &ClassifyBody {
            nu1: first.eigenvalue,
            cluster_size: sp.clusters[0].len,
            fiber_value: spec.fourier(1),
            mu1_sq,
            branch,
            curl_residual_plus: rp,
            curl_residual_minus: rm,
            nonvanishing_margin: nonvanishing_margin(&ops, &first.eigenvector, first.eigenvalue)?,
            lift_convention: "alpha = f eta +/- *df / sqrt(nu) (equal-norm parts)",
            verdict,
        },
    )?;
    write_csv(&out.join("product_spectrum.csv"), meta, &product_rows(&spec, &sp.eigenvalues())?)?;
    write_text(&out.join("gamma.obj"), &curves_to_obj(&mesh, &curves, &meta.header_line()))?;
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    amplitude: f64,
    sigma: f64,
    center: usize,
    skipped: String,
    nu1: Option<f64>,
    cluster_size: usize,
    branch: String,
    nodal_components: usize,
    verdict: String,
    disc_witness: Option<usize>,
    curl_residual_plus: Option<f64>,
    curl_residual_minus: Option<f64>,
    complete: bool,
}

fn sweep_row(r: &CertificateReport) -> SweepRow {
    SweepRow {
        amplitude: r.amplitude,
        sigma: r.sigma,
        center: r.center,
        skipped: r.skipped.clone().unwrap_or_default(),
        nu1: r.nu1,
        cluster_size: r.cluster_size,
        branch: match r.branch {
            Some(Branch::Nu1) => "nu1".into(),
            Some(Branch::Fiber) => "fiber".into(),
            None => String::new(),
        },
        nodal_components: r.nodal_components,
        verdict: match &r.verdict {
            Some(v) if v.is_tight() => "universally_tight".into(),
            Some(_) => "overtwisted".into(),
            None => String::new(),
        },
        disc_witness: r.disc_witness,
        curl_residual_plus: r.curl_residual_plus,
        curl_residual_minus: r.curl_residual_minus,
        complete: r.complete,
    }
}

/// Everything `orbit-test` needs to rebuild α₁.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub mesh: MeshSource,
    pub fiber_length: f64,
    pub eig_tolerance: f64,
    pub sweep_seed: u64,
    pub report: CertificateReport,
}

#[derive(Serialize)]
struct SweepBody<'a> {
    mesh: &'a MeshSource,
    fiber_length: f64,
    center: usize,
    amplitudes: &'a [f64],
    widths: &'a [f64],
    complete_certificates: usize,
    question_answer: &'static str,
    reports: &'a [CertificateReport],
}

fn certify_sweep(
    cfg: &RunConfig,
    meta: &ArtifactMeta,
    mut family: BumpFamily,
    center: Option<usize>,
    fiber_length: f64,
    samples: &Samples,
) -> Result<()> {
    let (src, mesh) = load_mesh(cfg)?;
    family.center = center.unwrap_or_else(|| default_center(&mesh));
    check_sweep(&mesh, &family)?;
    let sc = cfg.sweep_config(fiber_length, samples);
    let grid: Vec<(f64, f64)> =
        family.amplitudes.iter().flat_map(|&a| family.widths.iter().map(move |&s| (a, s))).collect();
    let mut reports: Vec<CertificateReport> = grid
        .par_iter()
        .map(|&(a, s)| evaluate_point(&mesh, family.center, a, s, &sc))
        .collect::<std::result::Result<_, _>>()?;
    sort_reports(&mut reports);
    let out = &cfg.out;
    let complete = reports.iter().filter(|r| r.complete).count();
    write_json(
        &out.join("sweep.json"),
        meta,
        &SweepBody {
            mesh: &src,
            fiber_length,
            center: family.center,
            amplitudes: &family.amplitudes,
            widths: &family.widths,
            complete_certificates: complete,
            question_answer: if complete > 0 {
                "no: a complete certificate exhibits an overtwisted energy-minimizing principal eigenfield"
            } else {
                "undecided on this grid"
            },
            reports: &reports,
        },
    )?;
    write_csv(&out.join("sweep.csv"), meta, &reports.iter().map(sweep_row).collect::<Vec<_>>())?;
    for (i, r) in reports.iter().enumerate() {
        write_json(&out.join("points").join(format!("point_{i:03}.json")), meta, r)?;
    }
    if let Some(best) = reports.first().filter(|r| r.complete) {
        let cert = CertificateFile {
            mesh: src.clone(),
            fiber_length,
            eig_tolerance: cfg.tolerances.eig,
            sweep_seed: cfg.seed,
            report: best.clone(),
        };
        write_json(&out.join("certificate.json"), meta, &cert)?;
        let (ops, f1, _) = rebuild(&cert, &mesh)?;
        let curves = extract_nodal_set(&ops.mesh, &f1)?;
        let header = meta.header_line();
        write_text(&out.join("best_f1.obj"), &mesh_to_obj(&mesh, Some(&f1), &header))?;
        write_text(&out.join("best_nodal.obj"), &curves_to_obj(&mesh, &curves, &header))?;
    }
    Ok(())
}

/// Operators, f₁ and ν₁ of a certificate's chosen cluster member.
fn rebuild(cert: &CertificateFile, mesh: &TriangleMesh) -> Result<(OperatorSet, Vec<f64>, f64)> {
    let r = &cert.report;
    let u = overtwist_core::search::bump_factor(mesh, r.amplitude, r.sigma, r.center)?;
    let ops = OperatorSet::assemble(mesh, &u)?;
    let req = SpectrumRequest { count: 1, tolerance: cert.eig_tolerance, shift: 0.0, seed: cert.sweep_seed };
    let sp = scalar_spectrum(&ops, &req)?;
    let p = sp.cluster_members(0).get(r.member).context("certificate member is not in the ν₁ cluster")?;
    let (f, nu) = (p.eigenvector.clone(), p.eigenvalue);
    Ok((ops, f, nu))
}

#[derive(Serialize)]
struct OrbitBody<'a> {
    amplitude: f64,
    sigma: f64,
    member: usize,
    nu1: f64,
    orbit: &'a OrbitReport,
    helicity_bound: &'a BoundReport,
}

#[derive(Serialize)]
struct OrbitRow<'a> {
    index: usize,
    kind: &'a str,
    energy: f64,
    ratio: f64,
    area_distortion: f64,
    helicity_drift: f64,
    usable: bool,
    violation: bool,
}

#[derive(Serialize)]
struct BoundRow {
    index: usize,
    energy: f64,
    helicity: f64,
    slack: f64,
}

fn orbit_test(cfg: &RunConfig, meta: &ArtifactMeta, certificate: &Path, samples: &Samples) -> Result<()> {
    let text = std::fs::read_to_string(certificate)
        .with_context(|| format!("cannot read certificate {}", certificate.display()))?;
    let cert: CertificateFile = serde_json::from_str(&text).context("invalid certificate file")?;
    let mesh = cert.mesh.load()?;
    let (ops, f1, nu1) = rebuild(&cert, &mesh)?;
    let spec = BundleSpec::product(cert.fiber_length, topology(&mesh)?)?;
    let alpha = StreamForm::eigenform(&f1, nu1, 1)?;
    let family = random_family(&ops, samples.shear, samples.flow, cfg.seed)?;
    let orbit = orbit_minimization_test(&alpha, &family, &ops, &spec)?;
    let bound = helicity_bound_report(&spec, &ops, &f1, nu1, samples.bound, cfg.seed)?;
    let out = &cfg.out;
    write_json(
        &out.join("orbit.json"),
        meta,
        &OrbitBody {
            amplitude: cert.report.amplitude,
            sigma: cert.report.sigma,
            member: cert.report.member,
            nu1,
            orbit: &orbit,
            helicity_bound: &bound,
        },
    )?;
    let rows: Vec<OrbitRow> = orbit
        .outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| OrbitRow {
            index: i,
            kind: &o.kind,
            energy: o.energy,
            ratio: o.ratio,
            area_distortion: o.area_distortion,
            helicity_drift: o.helicity_drift,
            usable: o.usable,
            violation: o.violation,
        })
        .collect();
    write_csv(&out.join("orbit_energies.csv"), meta, &rows)?;
    let mu1 = nu1.sqrt();
    let brows: Vec<BoundRow> = bound
        .energies
        .iter()
        .zip(&bound.helicities)
        .enumerate()
        .map(|(i, (&e, &h))| BoundRow { index: i, energy: e, helicity: h, slack: (e - mu1 * h.abs()) / e })
        .collect();
    write_csv(&out.join("bound_samples.csv"), meta, &brows)?;
    let shear_violations = orbit.outcomes.iter().filter(|o| o.violation && o.kind == "fiber_shear").count();
    if shear_violations > 0 || bound.violations > 0 || orbit.violations > 0 {
        return Err(CoreError::PropertyViolation(format!(
            "orbit test: {} violations ({} on exact fibre shears); helicity bound: {} violations",
            orbit.violations, shear_violations, bound.violations
        ))
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct AuditRow {
    trial: u32,
    nu1: f64,
    cluster_size: usize,
    branch: String,
    nodal_domains: Option<usize>,
    curve_components: Option<usize>,
    classification: String,
}

#[derive(Serialize)]
struct AuditBody {
    subdivisions: usize,
    fiber_length: f64,
    trials: Vec<AuditReport>,
    overtwisted: usize,
    courant_failures: usize,
    violation: Option<String>,
}

fn audit_s2(cfg: &RunConfig, meta: &ArtifactMeta, subdivisions: usize, trials: u32, fiber_length: f64) -> Result<()> {
    let mesh = overtwist_core::mesh::generate_icosphere(1.0, subdivisions)?;
    let spec = BundleSpec::product(fiber_length, topology(&mesh)?)?;
    let run_trial = |t: u32| -> std::result::Result<(usize, AuditReport), CoreError> {
        let u = random_conformal_factor(&mesh, cfg.seed, t)?;
        let ops = OperatorSet::assemble(&mesh, &u)?;
        let sp = scalar_spectrum(&ops, &request(cfg, 1))?;
        let r = s2_cross_s1_audit(&mesh, &spec, &sp.eigenvalues(), &sp.pairs[0].eigenvector)?;
        Ok((sp.clusters[0].len, r))
    };
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut violation = None;
    for t in 0..trials {
        match run_trial(t) {
            Ok((cl, r)) => {
                rows.push(AuditRow {
                    trial: t,
                    nu1: r.nu1,
                    cluster_size: cl,
                    branch: if r.branch == Branch::Nu1 { "nu1".into() } else { "fiber".into() },
                    nodal_domains: r.nodal_domains,
                    curve_components: r.verdict.as_ref().map(|v| v.curve_components),
                    classification: match &r.verdict {
                        Some(v) if v.is_tight() => "universally_tight".into(),
                        Some(_) => "overtwisted".into(),
                        None => "has_zeros".into(),
                    },
                });
                reports.push(r);
            }
            Err(e) if e.is_violation() => {
                violation = Some(format!("trial {t}: {e}"));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let out = &cfg.out;
    write_json(
        &out.join("audit.json"),
        meta,
        &AuditBody {
            subdivisions,
            fiber_length,
            overtwisted: rows.iter().filter(|r| r.classification == "overtwisted").count(),
            courant_failures: reports.iter().filter(|r| r.courant_ok == Some(false)).count(),
            trials: reports,
            violation: violation.clone(),
        },
    )?;
    write_csv(&out.join("audit.csv"), meta, &rows)?;
    if let Some(v) = violation {
        return Err(CoreError::PropositionViolation(v).into());
    }
    Ok(())
}

/// Exit status: 2 for a detected property or proposition violation, 1 for
/// any other failure.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(e) if e.is_violation() => 2,
        _ => 1,
    }
}
