//! Run configuration, mesh and metric sources, and the config hash.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use overtwist_core::mesh::{generate_flat_torus, generate_icosphere, ConformalFactor, TriangleMesh};
use overtwist_core::search::{bump_factor, SweepConfig};
use overtwist_core::spectral::TAU_EIG;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// `torus:N[:SIDE]`, `icosphere:S[:RADIUS]`, or a path to an OBJ file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSource {
    Torus { resolution: usize, side: f64 },
    Icosphere { subdivisions: usize, radius: f64 },
    Obj { path: PathBuf },
}

impl MeshSource {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts[i].parse::<f64>().with_context(|| format!("bad number {:?} in mesh source {s:?}", parts[i]))
        };
        match parts[0] {
            "torus" if parts.len() == 2 || parts.len() == 3 => Ok(MeshSource::Torus {
                resolution: parts[1].parse().with_context(|| format!("bad resolution in {s:?}"))?,
                side: if parts.len() == 3 { num(2)? } else { 2.0 * PI },
            }),
            "icosphere" if parts.len() == 2 || parts.len() == 3 => Ok(MeshSource::Icosphere {
                subdivisions: parts[1].parse().with_context(|| format!("bad subdivision in {s:?}"))?,
                radius: if parts.len() == 3 { num(2)? } else { 1.0 },
            }),
            _ => Ok(MeshSource::Obj { path: PathBuf::from(s) }),
        }
    }

    pub fn load(&self) -> Result<TriangleMesh> {
        Ok(match self {
            MeshSource::Torus { resolution, side } => generate_flat_torus(*side, *resolution)?,
            MeshSource::Icosphere { subdivisions, radius } => generate_icosphere(*radius, *subdivisions)?,
            MeshSource::Obj { path } => crate::obj::read_obj(path)?,
        })
    }
}

/// `flat` or `bump:A:SIGMA[:CENTER]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Flat,
    Bump { amplitude: f64, sigma: f64, center: Option<usize> },
}

impl MetricSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["flat"] => Ok(MetricSpec::Flat),
            ["bump", a, sg, rest @ ..] if rest.len() <= 1 => Ok(MetricSpec::Bump {
                amplitude: a.parse().with_context(|| format!("bad amplitude in {s:?}"))?,
                sigma: sg.parse().with_context(|| format!("bad width in {s:?}"))?,
                center: rest.first().map(|c| c.parse()).transpose().with_context(|| format!("bad center in {s:?}"))?,
            }),
            _ => bail!("metric must be `flat` or `bump:A:SIGMA[:CENTER]`, got {s:?}"),
        }
    }

    pub fn factor(&self, mesh: &TriangleMesh) -> Result<ConformalFactor> {
        Ok(match self {
            MetricSpec::Flat => ConformalFactor::zero(mesh.num_vertices()),
            MetricSpec::Bump { amplitude, sigma, center } => {
                bump_factor(mesh, *amplitude, *sigma, center.unwrap_or_else(|| default_center(mesh)))?
            }
        })
    }
}

/// Vertex nearest the chart centre when there is a chart, else vertex 0.
pub fn default_center(mesh: &TriangleMesh) -> usize {
    let Some(ch) = &mesh.chart else { return 0 };
    let c = 0.5 * ch.period;
    let d = |p: &[f64; 2]| (p[0] - c).powi(2) + (p[1] - c).powi(2);
    (0..ch.coords.len()).min_by(|&a, &b| d(&ch.coords[a]).total_cmp(&d(&ch.coords[b])).then(a.cmp(&b))).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_eig")]
    pub eig: f64,
    #[serde(default = "default_curl")]
    pub curl: f64,
}

fn default_eig() -> f64 {
    TAU_EIG
}
fn default_curl() -> f64 {
    0.05
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eig: default_eig(), curl: default_curl() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    #[serde(default = "hundred")]
    pub bound: usize,
    #[serde(default = "hundred")]
    pub shear: usize,
    #[serde(default = "twenty")]
    pub flow: usize,
}

fn hundred() -> usize {
    100
}
fn twenty() -> usize {
    20
}

impl Default for Samples {
    fn default() -> Self {
        Samples { bound: 100, shear: 100, flow: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub amplitudes: Vec<f64>,
    pub widths: Vec<f64>,
    #[serde(default)]
    pub center: Option<usize>,
}

/// The TOML sweep file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub mesh: String,
    #[serde(default = "one")]
    pub fiber_length: f64,
    #[serde(default)]
    pub seed: u64,
    pub sweep: SweepGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub samples: Samples,
}

fn one() -> f64 {
    1.0
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid sweep config")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }
}

/// Per-command parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Spectrum { k: usize, fiber_length: Option<f64>, export_matrices: bool },
    Nodal { eig_index: usize },
    Classify { fiber_length: f64 },
    CertifySweep { grid: SweepGrid, fiber_length: f64, samples: Samples },
    OrbitTest { certificate: PathBuf, samples: Samples },
    AuditS2 { subdivisions: usize, trials: u32, fiber_length: f64 },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Nodal { .. } => "nodal",
            Command::Classify { .. } => "classify",
            Command::CertifySweep { .. } => "certify-sweep",
            Command::OrbitTest { .. } => "orbit-test",
            Command::AuditS2 { .. } => "audit-s2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub mesh: Option<MeshSource>,
    pub metric: MetricSpec,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Not part of the hash: outputs do not depend on where they go.
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        if !(t.eig > 0.0) || !(t.curl > 0.0) {
            bail!("tolerances must be positive (eig = {}, curl = {})", t.eig, t.curl);
        }
        let l = match &self.command {
            Command::Spectrum { fiber_length, .. } => *fiber_length,
            Command::Classify { fiber_length } | Command::AuditS2 { fiber_length, .. } => Some(*fiber_length),
            Command::CertifySweep { fiber_length, grid, .. } => {
                if grid.amplitudes.is_empty() || grid.widths.is_empty() {
                    bail!("sweep grid is empty");
                }
                if grid.widths.iter().any(|s| !(*s > 0.0)) {
                    bail!("bump widths must be positive");
                }
                Some(*fiber_length)
            }
            _ => None,
        };
        if let Some(l) = l {
            if !(l > 0.0) || !l.is_finite() {
                bail!("fiber length must be positive, got {l}");
            }
        }
        if let MetricSpec::Bump { sigma, .. } = self.metric {
            if !(sigma > 0.0) {
                bail!("bump width must be positive, got {sigma}");
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn sweep_config(&self, fiber_length: f64, samples: &Samples) -> SweepConfig {
        SweepConfig {
            fiber_length,
            seed: self.seed,
            eig_tolerance: self.tolerances.eig,
            tau_curl: self.tolerances.curl,
            bound_samples: samples.bound,
            shear_samples: samples.shear,
            flow_samples: samples.flow,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources() {
        assert_eq!(MeshSource::parse("torus:48").unwrap(), MeshSource::Torus { resolution: 48, side: 2.0 * PI });
        assert_eq!(MeshSource::parse("icosphere:3:2").unwrap(), MeshSource::Icosphere { subdivisions: 3, radius: 2.0 });
        assert!(matches!(MeshSource::parse("a/b.obj").unwrap(), MeshSource::Obj { .. }));
        assert!(MeshSource::parse("torus:x").is_err());
        assert_eq!(MetricSpec::parse("flat").unwrap(), MetricSpec::Flat);
        assert_eq!(
            MetricSpec::parse("bump:2:0.8").unwrap(),
            MetricSpec::Bump { amplitude: 2.0, sigma: 0.8, center: None }
        );
        assert!(MetricSpec::parse("bump:2").is_err());
    }

    #[test]
    fn sweep_file_keys() {
        let f = SweepFile::parse(
            "mesh = \"torus:48\"\nseed = 7\n[sweep]\namplitudes = [0.0, 1.0]\nwidths = [0.8]\n[samples]\nflow = 5\n",
        )
        .unwrap();
        assert_eq!(f.fiber_length, 1.0);
        assert_eq!(f.samples.flow, 5);
        assert_eq!(f.samples.shear, 100);
        assert!(SweepFile::parse("mesh = \"x\"\ncolour = 1\n[sweep]\namplitudes=[]\nwidths=[]\n").is_err());
    }

    #[test]
    fn default_center_is_chart_middle() {
        let m = generate_flat_torus(2.0 * PI, 48).unwrap();
        assert_eq!(default_center(&m), 24 * 48 + 24);
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut a = RunConfig {
            command: Command::Nodal { eig_index: 1 },
            mesh: Some(MeshSource::parse("torus:8").unwrap()),
            metric: MetricSpec::Flat,
            tolerances: Tolerances::default(),
            seed: 1,
            out: "x".into(),
        };
        let h = a.hash();
        a.out = "y".into();
        assert_eq!(h, a.hash());
        a.seed = 2;
        assert_ne!(h, a.hash());
    }
}
