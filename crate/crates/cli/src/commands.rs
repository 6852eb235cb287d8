//! The five verbs. Each writes CSV tables and a manifest into the output
//! directory; per-row solver failures are recorded and the run continues.

use anyhow::{anyhow, bail, Result};
use efie_core::analysis::{self, Cut};
use efie_core::basis::{charge_dimension, gwp_dimension};
use efie_core::consts::wavenumber;
use efie_core::operators::{sample_current, PlaneWave};
use efie_core::pipeline::{Problem, Solved};
use efie_core::projectors::{star_rank, SVD_ORACLE_LIMIT};
use efie_core::{c64, BasisSpace, EfieBlocks, ProjectorPair, StarVariant, SurfaceMesh};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::output::{freq_tag, Run};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub f_hz: f64,
    pub cond_plain: Option<f64>,
    pub cond_precond: Option<f64>,
    pub gmres_iters_plain: Option<usize>,
    pub gmres_iters_precond: Option<usize>,
    pub residual_plain: Option<f64>,
    pub residual_precond: Option<f64>,
    pub scaling_c: Option<f64>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub level: usize,
    pub h_avg: f64,
    pub n_dofs: usize,
    pub cond_plain: Option<f64>,
    pub cond_precond: Option<f64>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcsRow {
    pub angle_deg: f64,
    pub sigma_dbsm_computed: f64,
    pub sigma_dbsm_mie: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcsSummary {
    pub order: usize,
    pub f_hz: f64,
    pub variant: String,
    pub rms_db: Option<f64>,
    pub rms_normalized_db: Option<f64>,
    pub max_deviation_db: Option<f64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub converged: Option<bool>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DofRow {
    pub dof: usize,
    pub magnitude_plain: Option<f64>,
    pub magnitude_precond: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub cell: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub j_db_plain: Option<f64>,
    pub j_db_precond: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshInfoRow {
    pub order: usize,
    pub n_vertices: usize,
    pub n_cells: usize,
    pub n_internal_edges: usize,
    pub n_bodies: usize,
    pub euler_characteristic: i64,
    pub genus: i64,
    pub h_avg: f64,
    pub n_dofs: usize,
    pub n_charge: usize,
    pub star_rank: Option<usize>,
    /// `dim null(Sigma^T)` minus the local loops; only at order 0.
    pub global_cycles: Option<usize>,
}

/// Per-command knobs that are not part of the shared configuration.
pub struct RcsOptions {
    pub theta_step_deg: f64,
    pub cut: Cut,
    pub amplitude: f64,
}

fn problem(cfg: &ExperimentConfig, mesh: SurfaceMesh, order: usize) -> Result<Problem> {
    Ok(Problem::new(
        mesh,
        order,
        cfg.quadrature.clone(),
        cfg.cg_tol,
    )?)
}

fn err_text(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn sweep_frequency(cfg: &ExperimentConfig) -> Result<()> {
    let mut run = Run::new(&cfg.out_dir, "sweep-frequency")?;
    let mesh = cfg.mesh.load()?;
    for &p in &cfg.orders {
        let pr = problem(cfg, mesh.clone(), p)?;
        let rows: Vec<FrequencyRow> = cfg
            .frequencies_hz
            .iter()
            .map(|&f| frequency_row(cfg, &pr, f))
            .collect();
        for r in &rows {
            println!(
                "p={p} f={:.3e} Hz cond plain {} precond {} iterations plain {} precond {}{}",
                r.f_hz,
                show(r.cond_plain),
                show(r.cond_precond),
                show_n(r.gmres_iters_plain),
                show_n(r.gmres_iters_precond),
                if r.error.is_empty() {
                    String::new()
                } else {
                    format!(" error: {}", r.error)
                }
            );
        }
        run.write_csv(&format!("sweep_frequency_p{p}.csv"), &rows)?;
    }
    run.finish(cfg)?;
    Ok(())
}

fn frequency_row(cfg: &ExperimentConfig, pr: &Problem, f: f64) -> FrequencyRow {
    let mut row = FrequencyRow {
        f_hz: f,
        cond_plain: None,
        cond_precond: None,
        gmres_iters_plain: None,
        gmres_iters_precond: None,
        residual_plain: None,
        residual_precond: None,
        scaling_c: None,
        error: String::new(),
    };
    let mut errors = Vec::new();
    let (blocks, c) = match pr.blocks(f).and_then(|b| {
        let c = pr.scaling_constant(&b)?;
        Ok((b, c))
    }) {
        Ok(v) => v,
        Err(e) => {
            row.error = err_text(e);
            return row;
        }
    };
    row.scaling_c = Some(c);
    let wave = PlaneWave::z_incident(f);
    if cfg.precond.plain() {
        match pr.plain_condition(&blocks, c) {
            Ok(v) => row.cond_plain = Some(v),
            Err(e) => errors.push(format!("plain cond: {e}")),
        }
        match pr.solve_plain(&blocks, &wave, &cfg.solver) {
            Ok(s) => {
                row.gmres_iters_plain = Some(s.iterations);
                row.residual_plain = Some(s.residual);
            }
            Err(e) => errors.push(format!("plain solve: {e}")),
        }
    }
    if cfg.precond.stabilized() {
        match pr.stabilized_condition(&blocks, c) {
            Ok(v) => row.cond_precond = Some(v),
            Err(e) => errors.push(format!("precond cond: {e}")),
        }
        match pr.solve_stabilized(&blocks, c, &wave, &cfg.solver) {
            Ok(s) => {
                row.gmres_iters_precond = Some(s.iterations);
                row.residual_precond = Some(s.residual);
            }
            Err(e) => errors.push(format!("precond solve: {e}")),
        }
    }
    row.error = errors.join("; ");
    row
}

pub fn sweep_h(cfg: &ExperimentConfig, levels: usize) -> Result<()> {
    let mut run = Run::new(&cfg.out_dir, "sweep-h")?;
    let &[f] = cfg.frequencies_hz.as_slice() else {
        bail!(
            "sweep-h runs at a single frequency, got {}",
            cfg.frequencies_hz.len()
        );
    };
    for &p in &cfg.orders {
        let mut rows = Vec::new();
        for level in 0..levels {
            let mesh = cfg.mesh.refined(level)?.load()?;
            let h_avg = mesh.mean_diameter();
            let pr = problem(cfg, mesh, p)?;
            let mut row = RefinementRow {
                level,
                h_avg,
                n_dofs: pr.len(),
                cond_plain: None,
                cond_precond: None,
                error: String::new(),
            };
            let result = pr.blocks(f).and_then(|b| {
                let c = pr.scaling_constant(&b)?;
                let plain = if cfg.precond.plain() {
                    Some(pr.plain_condition(&b, c)?)
                } else {
                    None
                };
                let stab = if cfg.precond.stabilized() {
                    Some(pr.stabilized_condition(&b, c)?)
                } else {
                    None
                };
                Ok((plain, stab))
            });
            match result {
                Ok((a, b)) => {
                    row.cond_plain = a;
                    row.cond_precond = b;
                }
                Err(e) => row.error = err_text(e),
            }
            println!(
                "p={p} level {level} h={h_avg:.4} N={} cond plain {} precond {}",
                row.n_dofs,
                show(row.cond_plain),
                show(row.cond_precond)
            );
            rows.push(row);
        }
        let slope = |get: fn(&RefinementRow) -> Option<f64>| -> Option<f64> {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| get(r).map(|v| (1.0 / r.h_avg, v)))
                .collect();
            (pts.len() >= 2).then(|| {
                let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                analysis::loglog_slope(&x, &y)
            })
        };
        println!(
            "p={p} log-log slope against 1/h: plain {} precond {}",
            show(slope(|r| r.cond_plain)),
            show(slope(|r| r.cond_precond))
        );
        run.write_csv(&format!("sweep_h_p{p}.csv"), &rows)?;
    }
    run.finish(cfg)?;
    Ok(())
}

fn variants(cfg: &ExperimentConfig) -> Vec<&'static str> {
    let mut v = Vec::new();
    if cfg.precond.plain() {
        v.push("plain");
    }
    if cfg.precond.stabilized() {
        v.push("precond");
    }
    v
}

type Blocks = std::result::Result<EfieBlocks, String>;

fn solve_variant(
    cfg: &ExperimentConfig,
    pr: &Problem,
    blocks: &Blocks,
    f: f64,
    amplitude: f64,
    variant: &str,
) -> Result<Solved> {
    let blocks = blocks
        .as_ref()
        .map_err(|e| anyhow!("assembly failed: {e}"))?;
    let mut wave = PlaneWave::z_incident(f);
    wave.amplitude = amplitude;
    Ok(if variant == "plain" {
        pr.solve_plain(blocks, &wave, &cfg.solver)?
    } else {
        let c = pr.scaling_constant(blocks)?;
        pr.solve_stabilized(blocks, c, &wave, &cfg.solver)?
    })
}

pub fn rcs(cfg: &ExperimentConfig, opts: &RcsOptions) -> Result<()> {
    if !(opts.theta_step_deg > 0.0 && opts.theta_step_deg <= 180.0) {
        bail!("angle step must lie in (0, 180] degrees");
    }
    if !(opts.amplitude > 0.0) {
        bail!("RCS needs a positive incident amplitude");
    }
    let mut run = Run::new(&cfg.out_dir, "rcs")?;
    let n = (180.0 / opts.theta_step_deg).round() as usize;
    let theta: Vec<f64> = (0..=n)
        .map(|i| (i as f64 * opts.theta_step_deg).min(180.0))
        .collect();
    let mesh = cfg.mesh.load()?;
    let mut summary = Vec::new();
    for &p in &cfg.orders {
        let pr = problem(cfg, mesh.clone(), p)?;
        for &f in &cfg.frequencies_hz {
            let mie = match cfg.mesh.sphere_radius() {
                Some(a) => Some(analysis::mie_rcs(a, f, &theta, opts.cut)?.1),
                None => None,
            };
            let blocks: Blocks = pr.blocks(f).map_err(err_text);
            let k = wavenumber(f);
            for variant in variants(cfg) {
                let mut s = RcsSummary {
                    order: p,
                    f_hz: f,
                    variant: variant.into(),
                    rms_db: None,
                    rms_normalized_db: None,
                    max_deviation_db: None,
                    iterations: None,
                    residual: None,
                    converged: None,
                    error: String::new(),
                };
                match solve_variant(cfg, &pr, &blocks, f, opts.amplitude, variant) {
                    Ok(sol) => {
                        let db = pr.rcs_dbsm(&sol, k, opts.amplitude, &theta, opts.cut.phi_deg());
                        s.iterations = Some(sol.iterations);
                        s.residual = Some(sol.residual);
                        s.converged = Some(sol.converged);
                        if let Some(m) = &mie {
                            s.rms_db = analysis::rcs_error(&db, m).ok();
                            s.rms_normalized_db = analysis::rcs_error_normalized(&db, m).ok();
                            s.max_deviation_db = analysis::rcs_max_deviation(&db, m).ok();
                        }
                        let rows: Vec<RcsRow> = theta
                            .iter()
                            .enumerate()
                            .map(|(i, &t)| RcsRow {
                                angle_deg: t,
                                sigma_dbsm_computed: db[i],
                                sigma_dbsm_mie: mie.as_ref().map(|m| m[i]),
                            })
                            .collect();
                        run.write_csv(&format!("rcs_p{p}_f{}_{variant}.csv", freq_tag(f)), &rows)?;
                    }
                    Err(e) => s.error = err_text(e),
                }
                println!(
                    "p={p} f={f:.3e} Hz {variant}: RMS {} dB, peak-normalized RMS {} dB, max deviation {} dB, iterations {}{}",
                    show(s.rms_db),
                    show(s.rms_normalized_db),
                    show(s.max_deviation_db),
                    show_n(s.iterations),
                    if s.error.is_empty() { String::new() } else { format!(" error: {}", s.error) }
                );
                summary.push(s);
            }
        }
    }
    run.write_csv("rcs_summary.csv", &summary)?;
    run.finish(cfg)?;
    Ok(())
}

/// `20 log10 |J|` at the reference centroid of every cell.
fn cell_current_db(pr: &Problem, current: &[c64]) -> Result<Vec<f64>> {
    (0..pr.mesh.n_cells())
        .map(|c| {
            let j = sample_current(&pr.mesh, &pr.basis, current, c, [1.0 / 3.0, 1.0 / 3.0])?;
            let m = j.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            Ok(20.0 * m.log10())
        })
        .collect()
}

pub fn surface_current(cfg: &ExperimentConfig, amplitude: f64) -> Result<()> {
    let mut run = Run::new(&cfg.out_dir, "surface-current")?;
    let mesh = cfg.mesh.load()?;
    for &p in &cfg.orders {
        let pr = problem(cfg, mesh.clone(), p)?;
        for &f in &cfg.frequencies_hz {
            let mut dofs: Vec<DofRow> = (0..pr.len())
                .map(|dof| DofRow {
                    dof,
                    magnitude_plain: None,
                    magnitude_precond: None,
                })
                .collect();
            let mut cells: Vec<CellRow> = (0..pr.mesh.n_cells())
                .map(|c| {
                    let x = pr.mesh.map(c, 1.0 / 3.0, 1.0 / 3.0).position;
                    CellRow {
                        cell: c,
                        x: x[0],
                        y: x[1],
                        z: x[2],
                        j_db_plain: None,
                        j_db_precond: None,
                    }
                })
                .collect();
            let blocks: Blocks = pr.blocks(f).map_err(err_text);
            for variant in variants(cfg) {
                let sol = match solve_variant(cfg, &pr, &blocks, f, amplitude, variant) {
                    Ok(v) => v,
                    Err(e) => {
                        println!("p={p} f={f:.3e} Hz {variant}: error: {e}");
                        continue;
                    }
                };
                let db = cell_current_db(&pr, &sol.current)?;
                let plain = variant == "plain";
                for (row, z) in dofs.iter_mut().zip(&sol.current) {
                    let slot = if plain {
                        &mut row.magnitude_plain
                    } else {
                        &mut row.magnitude_precond
                    };
                    *slot = Some(z.norm());
                }
                for (row, v) in cells.iter_mut().zip(&db) {
                    let slot = if plain {
                        &mut row.j_db_plain
                    } else {
                        &mut row.j_db_precond
                    };
                    *slot = Some(*v);
                }
                let finite: Vec<f64> = db.iter().copied().filter(|v| v.is_finite()).collect();
                let range = if finite.is_empty() {
                    "|J| = 0 on every cell".to_string()
                } else {
                    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    format!("|J| from {lo:.2} to {hi:.2} dB(A/m^2)")
                };
                println!(
                    "p={p} f={f:.3e} Hz {variant}: {range}, residual {:.2e} after {} iterations",
                    sol.residual, sol.iterations
                );
            }
            let tag = freq_tag(f);
            run.write_csv(&format!("current_dofs_p{p}_f{tag}.csv"), &dofs)?;
            run.write_csv(&format!("current_cells_p{p}_f{tag}.csv"), &cells)?;
        }
    }
    run.finish(cfg)?;
    Ok(())
}

pub fn mesh_info(cfg: &ExperimentConfig) -> Result<()> {
    let mut run = Run::new(&cfg.out_dir, "mesh-info")?;
    let mesh = cfg.mesh.load()?;
    let e = mesh.n_internal_edges()?;
    let c = mesh.n_cells();
    let bodies = mesh.n_bodies()?;
    let chi = mesh.euler_characteristic()?;
    let v = mesh.n_corner_vertices();
    let genus = (2 * bodies as i64 - chi) / 2;
    println!(
        "{v} vertices, {c} cells, {e} internal edges, {bodies} bodies, Euler characteristic {chi}, genus {genus}, mean cell diameter {:.4}",
        mesh.mean_diameter()
    );
    let mut rows = Vec::new();
    for &p in &cfg.orders {
        let n = gwp_dimension(p, e, c);
        let basis = BasisSpace::new(&mesh, p)?;
        let rank = if n <= SVD_ORACLE_LIMIT {
            let pp = ProjectorPair::build(&mesh, &basis, StarVariant::LagrangeTested)?;
            Some(star_rank(pp.sigma())?)
        } else {
            None
        };
        let global_cycles = match (p, rank) {
            (0, Some(r)) => Some(n - r - (v - bodies)),
            _ => None,
        };
        let row = MeshInfoRow {
            order: p,
            n_vertices: v,
            n_cells: c,
            n_internal_edges: e,
            n_bodies: bodies,
            euler_characteristic: chi,
            genus,
            h_avg: mesh.mean_diameter(),
            n_dofs: basis.len(),
            n_charge: charge_dimension(p, c),
            star_rank: rank,
            global_cycles,
        };
        println!(
            "p={p}: N = {}, M = {}, rank(Sigma) {}{}",
            row.n_dofs,
            row.n_charge,
            show_n(row.star_rank),
            global_cycles
                .map(|g| format!(", global cycles {g}"))
                .unwrap_or_default()
        );
        rows.push(row);
    }
    run.write_csv("mesh_info.csv", &rows)?;
    run.finish(cfg)?;
    Ok(())
}

fn show(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into())
}

fn show_n(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}
