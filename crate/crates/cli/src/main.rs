//! `efie`: desk-scale experiments with the projector-stabilized EFIE.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use efie_core::analysis::Cut;
use efie_core::precond::{SolverKind, SolverSettings};
use efie_core::projectors::DEFAULT_CG_TOL;
use efie_core::QuadratureConfig;

use config::{parse_frequencies, parse_pair, ExperimentConfig, MeshSource, Precond};

#[derive(Parser)]
#[command(
    name = "efie",
    version,
    about = "High-order EFIE experiments with quasi-Helmholtz projectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condition numbers and GMRES iterations against frequency.
    SweepFrequency(Common),
    /// Condition numbers against mesh refinement at one frequency.
    SweepH {
        #[command(flatten)]
        common: Common,
        /// Number of refinement levels, starting from the given mesh.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Bistatic RCS cut, compared with the Mie series on spheres.
    Rcs {
        #[command(flatten)]
        common: Common,
        /// Angular step of the cut in degrees.
        #[arg(long, default_value_t = 1.0)]
        theta_step: f64,
        /// E-plane (phi = 0) or H-plane (phi = 90) cut.
        #[arg(long, value_enum, default_value_t = CutArg::E)]
        cut: CutArg,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Current coefficients and cell-sampled current density.
    SurfaceCurrent {
        #[command(flatten)]
        common: Common,
        /// Incident amplitude in V/m; zero gives the zero solution.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Mesh statistics, dof counts and Star-matrix ranks.
    MeshInfo(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum CutArg {
    E,
    H,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Lu,
    Gmres,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["mesh", "sphere", "torus"])))]
struct Common {
    /// Gmsh mesh file (v2.2 or v4.1 ASCII).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Icosphere with this many subdivisions and quadratic cells.
    #[arg(long)]
    sphere: Option<usize>,
    /// Torus with nM major and nm minor segments, as `nM,nm`.
    #[arg(long, value_name = "nM,nm")]
    torus: Option<String>,
    /// Sphere radius in meters.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Torus radii `R,r` in meters.
    #[arg(long, value_name = "R,r", default_value = "2,0.5")]
    torus_radii: String,
    /// Basis orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    /// Frequencies in Hz: `f1,f2,...` or log-spaced `start:stop:count`.
    #[arg(long)]
    freq: Option<String>,
    #[arg(long, value_enum, default_value_t = Precond::Both)]
    precond: Precond,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Gauss points per dimension of the singular rules.
    #[arg(long, default_value_t = QuadratureConfig::default().singular_order)]
    quad_order: usize,
    /// Relative tolerance of the projector CG solves.
    #[arg(long, default_value_t = DEFAULT_CG_TOL)]
    cg_tol: f64,
    #[arg(long, value_enum, default_value_t = SolverArg::Gmres)]
    solver: SolverArg,
    #[arg(long, default_value_t = 1e-8)]
    gmres_tol: f64,
    #[arg(long, default_value_t = 50)]
    gmres_restart: usize,
    #[arg(long, default_value_t = 2000)]
    gmres_max_iter: usize,
}

impl Common {
    fn config(&self, default_orders: &[usize], default_freq: &str) -> Result<ExperimentConfig> {
        let mesh = if let Some(path) = &self.mesh {
            MeshSource::File { path: path.clone() }
        } else if let Some(subdivisions) = self.sphere {
            MeshSource::Sphere {
                radius: self.radius,
                subdivisions,
            }
        } else if let Some(t) = &self.torus {
            let (n_major, n_minor) = parse_pair(t)?;
            let (major, minor) = self
                .torus_radii
                .split_once(',')
                .map(|(a, b)| (a.trim().parse::<f64>(), b.trim().parse::<f64>()))
                .ok_or_else(|| anyhow::anyhow!("--torus-radii expects R,r"))?;
            MeshSource::Torus {
                major_radius: major?,
                minor_radius: minor?,
                n_major,
                n_minor,
            }
        } else {
            bail!("one of --mesh, --sphere, --torus is required");
        };
        if !(self.cg_tol > 0.0 && self.gmres_tol > 0.0) {
            bail!("tolerances must be positive");
        }
        if self.quad_order == 0 {
            bail!("--quad-order must be at least 1");
        }
        let orders = if self.order.is_empty() {
            default_orders.to_vec()
        } else {
            self.order.clone()
        };
        if let Some(p) = orders.iter().find(|p| **p > 3) {
            bail!("unsupported order {p} (supported: 0..=3)");
        }
        Ok(ExperimentConfig {
            mesh,
            orders,
            frequencies_hz: parse_frequencies(self.freq.as_deref().unwrap_or(default_freq))?,
            precond: self.precond,
            quadrature: QuadratureConfig {
                singular_order: self.quad_order,
                ..Default::default()
            },
            cg_tol: self.cg_tol,
            solver: SolverSettings {
                kind: match self.solver {
                    SolverArg::Lu => SolverKind::Lu,
                    SolverArg::Gmres => SolverKind::Gmres,
                },
                gmres_restart: self.gmres_restart,
                gmres_tol: self.gmres_tol,
                gmres_max_iter: self.gmres_max_iter,
            },
            out_dir: self.out.clone(),
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SweepFrequency(c) => {
            commands::sweep_frequency(&c.config(&[0, 1, 2], "1e-2:1e6:9")?)
        }
        Command::SweepH { common, levels } => {
            if levels == 0 {
                bail!("--levels must be at least 1");
            }
            commands::sweep_h(&common.config(&[1], "1")?, levels)
        }
        Command::Rcs {
            common,
            theta_step,
            cut,
            amplitude,
        } => {
            let opts = commands::RcsOptions {
                theta_step_deg: theta_step,
                cut: match cut {
                    CutArg::E => Cut::EPlane,
                    CutArg::H => Cut::HPlane,
                },
                amplitude,
            };
            commands::rcs(&common.config(&[1], "3e8")?, &opts)
        }
        Command::SurfaceCurrent { common, amplitude } => {
            commands::surface_current(&common.config(&[1], "10")?, amplitude)
        }
        Command::MeshInfo(c) => commands::mesh_info(&c.config(&[0, 1, 2], "1")?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
