//! Tight/overtwisted classification of S¹-invariant contact structures from
//! the projected characteristic set Γ, by Giroux's criterion for circle
//! bundles.
//!
//! For α = f·η ± ∗df the projection of the characteristic surface is the
//! nodal set f⁻¹(0), so the classifier only needs the nodal topology.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bundle::{lemma_min, Branch, BundleSpec};
use crate::error::{Error, Result};
use crate::mesh::{SurfaceTopology, TriangleMesh};
use crate::nodal::{courant_check, extract_nodal_set, nodal_domains, NodalCurve, NodalDomainSet, RegionTopology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationInput {
    pub topology: SurfaceTopology,
    pub euler_number: i64,
    pub regions: NodalDomainSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    UniversallyTight,
    Overtwisted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Σ ≠ S²: no component of Σ∖Γ is a disc.
    I,
    /// Σ = S², e < 0: Γ = ∅.
    Ii,
    /// Σ = S², e ≥ 0: Γ connected (and nonempty).
    Iii,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub classification: Classification,
    #[serde(rename = "rule")]
    pub rule_fired: Rule,
    /// A disc component of Σ∖Γ, when the verdict is overtwisted and one exists.
    #[serde(rename = "witness_region")]
    pub witness: Option<usize>,
    pub curve_components: usize,
    pub region_table: Vec<RegionTopology>,
    /// Set when Γ = ∅ on S² with e ≥ 0, which rule (iii) is taken to reject.
    pub empty_gamma_flag: bool,
}

impl Verdict {
    pub fn is_tight(&self) -> bool {
        self.classification == Classification::UniversallyTight
    }
}

/// Γ = f₁⁻¹(0).
pub fn characteristic_projection(mesh: &TriangleMesh, f1: &[f64]) -> Result<Vec<NodalCurve>> {
    extract_nodal_set(mesh, f1)
}

pub fn giroux_classify(input: &ClassificationInput) -> Verdict {
    let regions = &input.regions;
    let components = regions.curve_components;
    let disc = regions.disc_regions().map(|r| r.region_id).next();
    let (rule, tight) = if !input.topology.is_sphere {
        (Rule::I, disc.is_none())
    } else if input.euler_number < 0 {
        (Rule::Ii, components == 0)
    } else {
        (Rule::Iii, components == 1)
    };
    Verdict {
        classification: if tight { Classification::UniversallyTight } else { Classification::Overtwisted },
        rule_fired: rule,
        witness: if tight { None } else { disc },
        curve_components: components,
        region_table: regions.regions.clone(),
        empty_gamma_flag: input.topology.is_sphere && input.euler_number >= 0 && components == 0,
    }
}

/// Nodal set, domains and verdict for the forms built on f₁.
pub fn classify_eigenfunction(
    mesh: &TriangleMesh,
    spec: &BundleSpec,
    f1: &[f64],
) -> Result<(Vec<NodalCurve>, Verdict)> {
    let curves = characteristic_projection(mesh, f1)?;
    let regions = nodal_domains(mesh, f1, &curves)?;
    let verdict =
        giroux_classify(&ClassificationInput { topology: spec.topology, euler_number: spec.euler_number, regions });
    Ok((curves, verdict))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub nu1: f64,
    pub fiber_value: f64,
    pub branch: Branch,
    /// On the fibre branch the principal eigenforms are tangent to S² and
    /// vanish somewhere, so they define no contact structure.
    pub has_zeros: bool,
    pub nodal_domains: Option<usize>,
    pub courant_ok: Option<bool>,
    pub verdict: Option<Verdict>,
    pub note: String,
}

/// The principal eigenform on S²×S¹ is never overtwisted: check one metric.
pub fn s2_cross_s1_audit(
    mesh: &TriangleMesh,
    spec: &BundleSpec,
    scalar_eigs: &[f64],
    f1: &[f64],
) -> Result<AuditReport> {
    if !spec.topology.is_sphere || spec.euler_number != 0 {
        return Err(Error::InvalidArgument(format!(
            "audit needs the trivial bundle over S² (genus {}, e = {})",
            spec.topology.genus, spec.euler_number
        )));
    }
    let nu1 = *scalar_eigs
        .iter()
        .find(|&&x| x > 0.0)
        .ok_or_else(|| Error::InvalidArgument("no positive scalar eigenvalue".into()))?;
    let (_, branch) = lemma_min(spec, nu1);
    let fiber_value = spec.fourier(1);
    if branch == Branch::Fiber {
        return Ok(AuditReport {
            nu1,
            fiber_value,
            branch,
            has_zeros: true,
            nodal_domains: None,
            courant_ok: None,
            verdict: None,
            note: "μ₁² = (2π/l)²: principal eigenforms have zeros, no contact structure to classify".into(),
        });
    }
    let (_, verdict) = classify_eigenfunction(mesh, spec, f1)?;
    let domains = NodalDomainSet {
        regions: verdict.region_table.clone(),
        curve_components: verdict.curve_components,
        vertex_region: Vec::new(),
    };
    let courant_ok = courant_check(&domains);
    if !verdict.is_tight() {
        return Err(Error::PropositionViolation(format!(
            "overtwisted principal eigenform on S²×S¹ ({} nodal domains, {} curve components)",
            domains.regions.len(),
            verdict.curve_components
        )));
    }
    Ok(AuditReport {
        nu1,
        fiber_value,
        branch,
        has_zeros: false,
        nodal_domains: Some(domains.regions.len()),
        courant_ok: Some(courant_ok),
        verdict: Some(verdict),
        note: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::OperatorSet;
    use crate::mesh::{generate_flat_torus, generate_icosphere, topology, ConformalFactor};
    use crate::spectral::{scalar_spectrum, SpectrumRequest};
    use alloc::vec;
    use core::f64::consts::PI;

    fn region(id: usize, sign: i8, chi: i64, loops: usize) -> RegionTopology {
        RegionTopology {
            region_id: id,
            sign,
            euler_characteristic: chi,
            boundary_loop_count: loops,
            is_disc: chi == 1 && loops == 1,
            vertex_count: 1,
        }
    }

    fn input(genus: usize, e: i64, regions: Vec<RegionTopology>, comps: usize) -> ClassificationInput {
        let chi = 2 - 2 * genus as i64;
        ClassificationInput {
            topology: SurfaceTopology { genus, euler_characteristic: chi, is_sphere: genus == 0 },
            euler_number: e,
            regions: NodalDomainSet { regions, curve_components: comps, vertex_region: Vec::new() },
        }
    }

    #[test]
    fn worked_examples() {
        let two_annuli = input(1, 0, vec![region(0, 1, 0, 2), region(1, -1, 0, 2)], 2);
        let v = giroux_classify(&two_annuli);
        assert!(v.is_tight() && v.rule_fired == Rule::I && v.witness.is_none());

        let disc_in_torus = input(1, 0, vec![region(0, 1, 1, 1), region(1, -1, -1, 1)], 1);
        let v = giroux_classify(&disc_in_torus);
        assert_eq!((v.classification, v.rule_fired, v.witness), (Classification::Overtwisted, Rule::I, Some(0)));

        let sphere_circle = input(0, 0, vec![region(0, 1, 1, 1), region(1, -1, 1, 1)], 1);
        let v = giroux_classify(&sphere_circle);
        assert!(v.is_tight() && v.rule_fired == Rule::Iii);

        let sphere_empty = input(0, 0, vec![region(0, 1, 2, 0)], 0);
        let v = giroux_classify(&sphere_empty);
        assert!(!v.is_tight() && v.empty_gamma_flag && v.witness.is_none());

        let negative_empty = input(0, -1, vec![region(0, 1, 2, 0)], 0);
        let v = giroux_classify(&negative_empty);
        assert!(v.is_tight() && v.rule_fired == Rule::Ii && !v.empty_gamma_flag);
    }

    #[test]
    fn flat_torus_cos_is_tight() {
        let m = generate_flat_torus(2.0 * PI, 24).unwrap();
        let spec = BundleSpec::product(1.0, topology(&m).unwrap()).unwrap();
        let f: Vec<f64> = m.chart.as_ref().unwrap().coords.iter().map(|p| libm::cos(p[0] + 0.1)).collect();
        let (curves, v) = classify_eigenfunction(&m, &spec, &f).unwrap();
        assert_eq!(curves.len(), 2);
        assert!(v.is_tight());
        let pos: Vec<f64> = f.iter().map(|x| x + 2.0).collect();
        assert!(characteristic_projection(&m, &pos).unwrap().is_empty());
    }

    #[test]
    fn round_sphere_audit() {
        let m = generate_icosphere(1.0, 3).unwrap();
        let ops = OperatorSet::assemble(&m, &ConformalFactor::zero(m.num_vertices())).unwrap();
        let sp = scalar_spectrum(&ops, &SpectrumRequest::new(1)).unwrap();
        let eigs = sp.eigenvalues();
        let f1 = &sp.pairs[0].eigenvector;
        let topo = topology(&m).unwrap();
        let r = s2_cross_s1_audit(&m, &BundleSpec::product(1.0, topo).unwrap(), &eigs, f1).unwrap();
        assert_eq!(r.branch, Branch::Nu1);
        assert_eq!(r.nodal_domains, Some(2));
        assert!(r.verdict.unwrap().is_tight());
        let r = s2_cross_s1_audit(&m, &BundleSpec::product(100.0, topo).unwrap(), &eigs, f1).unwrap();
        assert_eq!(r.branch, Branch::Fiber);
        assert!(r.has_zeros && r.verdict.is_none());
        let torus = generate_flat_torus(1.0, 4).unwrap();
        let spec_t = BundleSpec::product(1.0, topology(&torus).unwrap()).unwrap();
        assert!(s2_cross_s1_audit(&torus, &spec_t, &eigs, f1).is_err());
    }
}
