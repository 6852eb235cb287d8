//! Experiment configuration: mesh source, orders, frequencies, variants
//! and solver settings. Serialized into every run manifest.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use efie_core::mesh::{generate_sphere, generate_torus, parse_gmsh, GeometricOrder};
use efie_core::precond::SolverSettings;
use efie_core::{QuadratureConfig, SurfaceMesh};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeshSource {
    File {
        path: PathBuf,
    },
    Sphere {
        radius: f64,
        subdivisions: usize,
    },
    Torus {
        major_radius: f64,
        minor_radius: f64,
        n_major: usize,
        n_minor: usize,
    },
}

impl MeshSource {
    pub fn load(&self) -> Result<SurfaceMesh> {
        let mesh = match self {
            MeshSource::File { path } => parse_gmsh(path)
                .with_context(|| format!("reading {}", path.display()))?
                .build_connectivity()?,
            MeshSource::Sphere {
                radius,
                subdivisions,
            } => generate_sphere(*radius, *subdivisions, GeometricOrder::Quadratic)?,
            MeshSource::Torus {
                major_radius,
                minor_radius,
                n_major,
                n_minor,
            } => generate_torus(*major_radius, *minor_radius, *n_major, *n_minor)?,
        };
        Ok(mesh)
    }

    /// The source refined `level` times: one more subdivision for the
    /// sphere, doubled segment counts for the torus.
    pub fn refined(&self, level: usize) -> Result<MeshSource> {
        Ok(match self {
            MeshSource::File { .. } => {
                bail!("mesh files cannot be refined; use --sphere or --torus")
            }
            MeshSource::Sphere {
                radius,
                subdivisions,
            } => MeshSource::Sphere {
                radius: *radius,
                subdivisions: subdivisions + level,
            },
            MeshSource::Torus {
                major_radius,
                minor_radius,
                n_major,
                n_minor,
            } => MeshSource::Torus {
                major_radius: *major_radius,
                minor_radius: *minor_radius,
                n_major: n_major << level,
                n_minor: n_minor << level,
            },
        })
    }

    /// Sphere radius when a Mie reference exists.
    pub fn sphere_radius(&self) -> Option<f64> {
        match self {
            MeshSource::Sphere { radius, .. } => Some(*radius),
            _ => None,
        }
    }
}

/// Which systems to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precond {
    On,
    Off,
    Both,
}

impl Precond {
    pub fn plain(self) -> bool {
        matches!(self, Precond::Off | Precond::Both)
    }

    pub fn stabilized(self) -> bool {
        matches!(self, Precond::On | Precond::Both)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mesh: MeshSource,
    pub orders: Vec<usize>,
    pub frequencies_hz: Vec<f64>,
    pub precond: Precond,
    pub quadrature: QuadratureConfig,
    pub cg_tol: f64,
    pub solver: SolverSettings,
    pub out_dir: PathBuf,
}

/// Parses `--freq`: a comma-separated list (`1e2,1e3`) or a log-spaced
/// range `start:stop:count`.
pub fn parse_frequencies(s: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("frequency range must be start:stop:count, got '{s}'");
        }
        let a: f64 = parts[0]
            .trim()
            .parse()
            .with_context(|| format!("bad start in '{s}'"))?;
        let b: f64 = parts[1]
            .trim()
            .parse()
            .with_context(|| format!("bad stop in '{s}'"))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .with_context(|| format!("bad count in '{s}'"))?;
        if n == 0 {
            bail!("frequency range needs at least one point");
        }
        if !(a > 0.0 && b > 0.0) {
            bail!("frequencies must be positive, got '{s}'");
        }
        if n == 1 {
            vec![a]
        } else {
            let (la, lb) = (a.log10(), b.log10());
            (0..n)
                .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64))
                .collect()
        }
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad frequency '{t}'"))
            })
            .collect::<Result<_>>()?
    };
    if let Some(f) = out.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        bail!("frequencies must be positive and finite, got {f}");
    }
    Ok(out)
}

/// Parses `--torus nM,nm`.
pub fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(',')
        .context("expected two comma-separated integers")?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_and_range() {
        assert_eq!(
            parse_frequencies("1, 2.5,1e3").unwrap(),
            vec![1.0, 2.5, 1e3]
        );
        let r = parse_frequencies("1e-2:1e6:9").unwrap();
        assert_eq!(r.len(), 9);
        assert!((r[0] - 1e-2).abs() < 1e-16 && (r[8] / 1e6 - 1.0).abs() < 1e-12);
        assert!((r[1] / 1e-1 - 1.0).abs() < 1e-12);
        assert_eq!(parse_frequencies("100:1:1").unwrap(), vec![100.0]);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(parse_frequencies("0,1").is_err());
        assert!(parse_frequencies("-1:10:3").is_err());
        assert!(parse_frequencies("1:2").is_err());
        assert!(parse_frequencies("abc").is_err());
    }

    #[test]
    fn torus_refinement_doubles_segments() {
        let t = MeshSource::Torus {
            major_radius: 2.0,
            minor_radius: 0.5,
            n_major: 8,
            n_minor: 4,
        };
        assert_eq!(
            t.refined(1).unwrap(),
            MeshSource::Torus {
                major_radius: 2.0,
                minor_radius: 0.5,
                n_major: 16,
                n_minor: 8
            }
        );
        assert!(MeshSource::File {
            path: "x.msh".into()
        }
        .refined(1)
        .is_err());
    }
}
