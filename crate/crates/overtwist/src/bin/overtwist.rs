use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use overtwist::commands::{exit_code, run};
use overtwist::config::{Command, MeshSource, MetricSpec, RunConfig, Samples, SweepFile, SweepGrid, Tolerances};
use overtwist_core::spectral::TAU_EIG;

/// Principal curl eigenfields on circle bundles: spectra, nodal sets,
/// contact classification and metric sweeps.
#[derive(Parser)]
#[command(name = "overtwist", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Relative eigen-residual tolerance.
    #[arg(long, default_value_t = TAU_EIG)]
    tol: f64,
    /// Curl residual tolerance.
    #[arg(long, default_value_t = 0.05)]
    curl_tol: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lowest scalar eigenvalues and, with --fiber-length, curl candidates.
    Spectrum {
        #[arg(long)]
        mesh: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value = "flat")]
        metric: String,
        #[arg(long)]
        fiber_length: Option<f64>,
        /// Also write the DEC matrices in Matrix Market format.
        #[arg(long)]
        export_matrices: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Nodal set and nodal domains of one eigenfunction.
    Nodal {
        #[arg(long)]
        mesh: String,
        #[arg(long, default_value = "flat")]
        metric: String,
        /// 1 is the first non-constant eigenfunction.
        #[arg(long, default_value_t = 1)]
        eig_index: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Branch, lift and contact verdict of the principal eigenfield.
    Classify {
        #[arg(long)]
        mesh: String,
        #[arg(long, default_value = "flat")]
        metric: String,
        #[arg(long, default_value_t = 1.0)]
        fiber_length: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep a bump-metric grid and certify overtwisted minimizers.
    CertifySweep {
        /// TOML sweep file; command-line values override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        mesh: Option<String>,
        #[arg(long, value_delimiter = ',')]
        a_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        sigma_grid: Option<Vec<f64>>,
        #[arg(long)]
        center: Option<usize>,
        #[arg(long)]
        fiber_length: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Rerun the helicity bound and orbit test on a sweep certificate.
    OrbitTest {
        #[arg(long)]
        certificate: PathBuf,
        /// Fibre shears and helicity-bound samples.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Hamiltonian flows.
        #[arg(long, default_value_t = 20)]
        flows: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Random conformal metrics on the sphere: the principal field is tight.
    AuditS2 {
        #[arg(long, default_value_t = 3)]
        subdiv: usize,
        #[arg(long, default_value_t = 20)]
        trials: u32,
        #[arg(long, default_value_t = 1.0)]
        fiber_length: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn config(cmd: Cmd) -> Result<RunConfig> {
    let make = |command, mesh: Option<&str>, metric: &str, seed, c: Common| -> Result<RunConfig> {
        Ok(RunConfig {
            command,
            mesh: mesh.map(MeshSource::parse).transpose()?,
            metric: MetricSpec::parse(metric)?,
            tolerances: Tolerances { eig: c.tol, curl: c.curl_tol },
            seed,
            out: c.out,
        })
    };
    match cmd {
        Cmd::Spectrum { mesh, k, metric, fiber_length, export_matrices, seed, common } => {
            make(Command::Spectrum { k, fiber_length, export_matrices }, Some(&mesh), &metric, seed, common)
        }
        Cmd::Nodal { mesh, metric, eig_index, seed, common } => {
            make(Command::Nodal { eig_index }, Some(&mesh), &metric, seed, common)
        }
        Cmd::Classify { mesh, metric, fiber_length, seed, common } => {
            make(Command::Classify { fiber_length }, Some(&mesh), &metric, seed, common)
        }
        Cmd::CertifySweep { config, mesh, a_grid, sigma_grid, center, fiber_length, seed, common } => {
            let file = config.as_deref().map(SweepFile::read).transpose()?;
            let Some(mesh) = mesh.or(file.as_ref().map(|f| f.mesh.clone())) else {
                bail!("certify-sweep needs --mesh or a config file");
            };
            let Some(seed) = seed.or(file.as_ref().map(|f| f.seed)) else {
                bail!("certify-sweep needs --seed or a config file");
            };
            let fgrid = file.as_ref().map(|f| f.sweep.clone());
            let grid = SweepGrid {
                amplitudes: a_grid.or(fgrid.as_ref().map(|g| g.amplitudes.clone())).unwrap_or_default(),
                widths: sigma_grid.or(fgrid.as_ref().map(|g| g.widths.clone())).unwrap_or_default(),
                center: center.or(fgrid.and_then(|g| g.center)),
            };
            let l = fiber_length.or(file.as_ref().map(|f| f.fiber_length)).unwrap_or(1.0);
            let samples = file.as_ref().map(|f| f.samples.clone()).unwrap_or_default();
            let mut cfg =
                make(Command::CertifySweep { grid, fiber_length: l, samples }, Some(&mesh), "flat", seed, common)?;
            if let Some(f) = &file {
                // Tolerance flags left at their defaults defer to the file.
                if cfg.tolerances == Tolerances::default() {
                    cfg.tolerances = f.tolerances.clone();
                }
            }
            Ok(cfg)
        }
        Cmd::OrbitTest { certificate, samples, flows, seed, common } => make(
            Command::OrbitTest { certificate, samples: Samples { bound: samples, shear: samples, flow: flows } },
            None,
            "flat",
            seed,
            common,
        ),
        Cmd::AuditS2 { subdiv, trials, fiber_length, seed, common } => {
            make(Command::AuditS2 { subdivisions: subdiv, trials, fiber_length }, None, "flat", seed, common)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(cli.command).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
