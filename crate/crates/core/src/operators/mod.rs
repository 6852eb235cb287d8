//! Dense EFIE blocks `T_s` (vector potential) and `T_h` (scalar potential),
//! plane-wave excitation and far-field post-processing.
//!
//! With the contravariant Piola map the surface Jacobians cancel in both
//! integrands: `psi_m . psi_n dS dS'` becomes `(DF w_m) . (DF' w_n) dxi dxi'`
//! and `div psi_m div psi_n dS dS'` becomes `div w_m div w_n dxi dxi'`.

mod excitation;
mod export;
mod farfield;

pub use excitation::{assemble_excitation, Excitation, PlaneWave};
pub use export::{read_matrix_binary, write_matrix_binary, write_matrix_csv};
pub use farfield::{
    cut_directions, far_field, far_field_split, rcs, sample_current, to_dbsm, FarField,
};

use faer::{c64, Mat};
use rayon::prelude::*;

use crate::basis::{BasisSpace, LocalBasis};
use crate::error::Result;
use crate::geom::{self, Vec3};
use crate::mesh::SurfaceMesh;
use crate::quadrature::{
    classify_pair, Kernel, PairClass, PanelPair, QuadratureConfig, RuleSet, TriangleRule,
};

/// The two EFIE blocks at wavenumber `k`.
#[derive(Clone, Debug)]
pub struct EfieBlocks {
    pub ts: Mat<c64>,
    pub th: Mat<c64>,
    pub k: f64,
}

impl EfieBlocks {
    pub fn len(&self) -> usize {
        self.ts.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.nrows() == 0
    }

    /// `T = jk T_s + T_h / (jk)`
    pub fn system(&self) -> Mat<c64> {
        let a = c64::new(0.0, self.k);
        let b = c64::new(0.0, -1.0 / self.k);
        Mat::from_fn(self.len(), self.len(), |i, j| {
            a * self.ts[(i, j)] + b * self.th[(i, j)]
        })
    }
}

/// Rule points of one cell with the pushed-forward (unsigned) reference
/// functions `DF w_i` and reference divergences.
pub(crate) struct CellPoints {
    pub n_loc: usize,
    pub pos: Vec<Vec3>,
    pub w: Vec<f64>,
    pub vals: Vec<Vec3>,
    pub divs: Vec<f64>,
}

impl CellPoints {
    pub fn new(mesh: &SurfaceMesh, local: &LocalBasis, cell: usize, rule: &TriangleRule) -> Self {
        let n_loc = local.len();
        let mut out = CellPoints {
            n_loc,
            pos: Vec::with_capacity(rule.len()),
            w: Vec::with_capacity(rule.len()),
            vals: Vec::with_capacity(rule.len() * n_loc),
            divs: Vec::with_capacity(rule.len() * n_loc),
        };
        let mut vals = Vec::new();
        let mut divs = Vec::new();
        for (xi, w) in rule.iter() {
            let mp = mesh.map(cell, xi[0], xi[1]);
            local.eval_all(xi[0], xi[1], &mut vals, &mut divs);
            out.pos.push(mp.position);
            out.w.push(w);
            out.vals.extend(vals.iter().map(|v| mp.push(*v)));
            out.divs.extend_from_slice(&divs);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }
}

type CVec3 = [c64; 3];

fn add_scaled(acc: &mut CVec3, g: c64, v: Vec3) {
    acc[0] += g * v[0];
    acc[1] += g * v[1];
    acc[2] += g * v[2];
}

fn dot_rc(a: Vec3, b: &CVec3) -> c64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

/// Local `(T_s, T_h)` blocks of a regular pair via tensor rules; the source
/// sums are factored out per test point.
fn regular_block(a: &CellPoints, b: &CellPoints, kernel: Kernel, ts: &mut [c64], th: &mut [c64]) {
    let n = a.n_loc;
    let zero = c64::new(0.0, 0.0);
    let mut wv = vec![[zero; 3]; n];
    let mut wd = vec![zero; n];
    for ia in 0..a.len() {
        wv.iter_mut().for_each(|v| *v = [zero; 3]);
        wd.iter_mut().for_each(|v| *v = zero);
        for ib in 0..b.len() {
            let g = kernel.eval(geom::dist(a.pos[ia], b.pos[ib])) * b.w[ib];
            let vb = &b.vals[ib * n..(ib + 1) * n];
            let db = &b.divs[ib * n..(ib + 1) * n];
            for j in 0..n {
                add_scaled(&mut wv[j], g, vb[j]);
                wd[j] += g * db[j];
            }
        }
        let wa = a.w[ia];
        let va = &a.vals[ia * n..(ia + 1) * n];
        let da = &a.divs[ia * n..(ia + 1) * n];
        for i in 0..n {
            let vi = geom::scale(va[i], wa);
            let di = da[i] * wa;
            let row_s = &mut ts[i * n..(i + 1) * n];
            let row_h = &mut th[i * n..(i + 1) * n];
            for j in 0..n {
                row_s[j] += dot_rc(vi, &wv[j]);
                row_h[j] += wd[j] * di;
            }
        }
    }
}

/// Local blocks of a singular pair from the Sauter-Schwab point pairs.
fn singular_block(
    mesh: &SurfaceMesh,
    local: &LocalBasis,
    pair: &PanelPair,
    rules: &RuleSet,
    kernel: Kernel,
    ts: &mut [c64],
    th: &mut [c64],
) -> Result<()> {
    let n = local.len();
    let (mut va, mut da, mut vb, mut db) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut pa = vec![[0.0; 3]; n];
    let mut pb = vec![[0.0; 3]; n];
    for (xa, xb, w) in rules.point_pairs(pair) {
        let ma = mesh.map(pair.cell_a, xa[0], xa[1]);
        let mb = mesh.map(pair.cell_b, xb[0], xb[1]);
        let g = kernel.eval(geom::dist(ma.position, mb.position)) * w;
        if !(g.re.is_finite() && g.im.is_finite()) {
            return Err(crate::Error::NonFiniteKernel {
                cell_a: pair.cell_a,
                cell_b: pair.cell_b,
                class: pair.class.name(),
            });
        }
        local.eval_all(xa[0], xa[1], &mut va, &mut da);
        local.eval_all(xb[0], xb[1], &mut vb, &mut db);
        for i in 0..n {
            pa[i] = ma.push(va[i]);
            pb[i] = mb.push(vb[i]);
        }
        for i in 0..n {
            let gd = g * da[i];
            let row_s = &mut ts[i * n..(i + 1) * n];
            let row_h = &mut th[i * n..(i + 1) * n];
            for j in 0..n {
                row_s[j] += g * geom::dot(pa[i], pb[j]);
                row_h[j] += gd * db[j];
            }
        }
    }
    Ok(())
}

fn symmetrize(block: &mut [c64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            let v = (block[i * n + j] + block[j * n + i]) * 0.5;
            block[i * n + j] = v;
            block[j * n + i] = v;
        }
    }
}

/// Cells processed per parallel batch; blocks of a batch are merged
/// sequentially in `(cell_a, cell_b)` order so results do not depend on
/// scheduling.
const BATCH: usize = 16;

/// Assembles `T_s` and `T_h` together (they share every kernel value).
///
/// Each unordered cell pair is integrated once, with the lower cell id as
/// test cell, and scattered into both triangles of the matrices, so both
/// blocks are exactly symmetric.
pub fn assemble_blocks(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    k: f64,
    cfg: &QuadratureConfig,
) -> Result<EfieBlocks> {
    let n_dofs = basis.len();
    let local = basis.local();
    let n = local.len();
    let p = basis.order();
    let rules = RuleSet::new(cfg, p);
    let kernel = Kernel::Helmholtz(k);
    let n_cells = mesh.n_cells();

    let far: Vec<CellPoints> = (0..n_cells)
        .into_par_iter()
        .map(|c| CellPoints::new(mesh, local, c, &rules.far))
        .collect();
    let near: Vec<CellPoints> = (0..n_cells)
        .into_par_iter()
        .map(|c| CellPoints::new(mesh, local, c, &rules.near))
        .collect();

    let zero = c64::new(0.0, 0.0);
    let mut ts = Mat::<c64>::zeros(n_dofs, n_dofs);
    let mut th = Mat::<c64>::zeros(n_dofs, n_dofs);

    let cells: Vec<usize> = (0..n_cells).collect();
    for batch in cells.chunks(BATCH) {
        let blocks: Vec<Result<Vec<(usize, Vec<c64>, Vec<c64>)>>> = batch
            .par_iter()
            .map(|&a| {
                let mut out = Vec::with_capacity(n_cells - a);
                for b in a..n_cells {
                    let pair = classify_pair(mesh, a, b, cfg.near_threshold);
                    let mut bs = vec![zero; n * n];
                    let mut bh = vec![zero; n * n];
                    match pair.class {
                        PairClass::Far => regular_block(&far[a], &far[b], kernel, &mut bs, &mut bh),
                        PairClass::Near => {
                            regular_block(&near[a], &near[b], kernel, &mut bs, &mut bh)
                        }
                        _ => singular_block(mesh, local, &pair, &rules, kernel, &mut bs, &mut bh)?,
                    }
                    if a == b {
                        symmetrize(&mut bs, n);
                        symmetrize(&mut bh, n);
                    }
                    out.push((b, bs, bh));
                }
                Ok(out)
            })
            .collect();
        for (&a, res) in batch.iter().zip(blocks) {
            let da = basis.cell_dofs(a);
            for (b, bs, bh) in res? {
                let db = basis.cell_dofs(b);
                for (i, ci) in da.iter().enumerate() {
                    for (j, cj) in db.iter().enumerate() {
                        let s = ci.sign * cj.sign;
                        let vs = bs[i * n + j] * s;
                        let vh = bh[i * n + j] * s;
                        ts[(ci.dof, cj.dof)] += vs;
                        th[(ci.dof, cj.dof)] += vh;
                        if a != b {
                            ts[(cj.dof, ci.dof)] += vs;
                            th[(cj.dof, ci.dof)] += vh;
                        }
                    }
                }
            }
        }
    }
    Ok(EfieBlocks { ts, th, k })
}

pub fn assemble_ts(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    k: f64,
    cfg: &QuadratureConfig,
) -> Result<Mat<c64>> {
    Ok(assemble_blocks(mesh, basis, k, cfg)?.ts)
}

pub fn assemble_th(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    k: f64,
    cfg: &QuadratureConfig,
) -> Result<Mat<c64>> {
    Ok(assemble_blocks(mesh, basis, k, cfg)?.th)
}
