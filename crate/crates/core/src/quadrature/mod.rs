//! Quadrature for Galerkin double surface integrals.
//!
//! Regular pairs use tensor products of triangle rules. Pairs of cells that
//! share a vertex, an edge, or coincide use the Sauter-Schwab relative
//! coordinate transformations, which cancel the `1/R` singularity and
//! leave a smooth integrand on `[0, 1]^4`.

mod rules;
mod singular;

pub use rules::{gauss_legendre01, TriangleRule};
pub use singular::{sauter_schwab_rule, SingularRule};

use std::sync::Arc;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::mesh::{MapPoint, SurfaceMesh};

/// Relation between two cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairClass {
    Identical,
    SharedEdge,
    SharedVertex,
    Near,
    Far,
}

impl PairClass {
    pub fn name(self) -> &'static str {
        match self {
            PairClass::Identical => "identical",
            PairClass::SharedEdge => "shared-edge",
            PairClass::SharedVertex => "shared-vertex",
            PairClass::Near => "near",
            PairClass::Far => "far",
        }
    }

    pub fn is_singular(self) -> bool {
        matches!(
            self,
            PairClass::Identical | PairClass::SharedEdge | PairClass::SharedVertex
        )
    }
}

/// A classified cell pair. For singular classes, `perm_a`/`perm_b` list
/// local vertices so that shared vertices come first, in matching order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PanelPair {
    pub cell_a: usize,
    pub cell_b: usize,
    pub class: PairClass,
    pub perm_a: [usize; 3],
    pub perm_b: [usize; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Triangle-rule degree for far pairs; `None` picks 3 for `p <= 1`
    /// (4 points) and 5 for `p >= 2` (7 points).
    pub far_degree: Option<usize>,
    /// Degree added to the far rule for near pairs.
    pub near_boost: usize,
    /// Centroid distance over the larger cell diameter below which a
    /// regular pair counts as near.
    pub near_threshold: f64,
    /// Gauss points per dimension of the Sauter-Schwab rules.
    pub singular_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            far_degree: None,
            near_boost: 4,
            near_threshold: 2.5,
            singular_order: 5,
        }
    }
}

impl QuadratureConfig {
    pub fn far_degree_for(&self, p: usize) -> usize {
        self.far_degree.unwrap_or(if p <= 1 { 3 } else { 5 })
    }

    pub fn near_degree_for(&self, p: usize) -> usize {
        self.far_degree_for(p) + self.near_boost
    }
}

pub fn classify_pair(mesh: &SurfaceMesh, a: usize, b: usize, near_threshold: f64) -> PanelPair {
    let ca = mesh.cell(a).corners;
    let cb = mesh.cell(b).corners;
    let mut shared: Vec<(usize, usize)> = Vec::with_capacity(3);
    for (i, va) in ca.iter().enumerate() {
        if let Some(j) = cb.iter().position(|vb| vb == va) {
            shared.push((i, j));
        }
    }
    // Canonical order of the shared vertices makes (a, b) and (b, a) use
    // the same point pairs.
    shared.sort_by_key(|&(i, _)| ca[i]);
    let complete = |first: &[usize]| -> [usize; 3] {
        let mut p = [0; 3];
        p[..first.len()].copy_from_slice(first);
        let mut k = first.len();
        for v in 0..3 {
            if !first.contains(&v) {
                p[k] = v;
                k += 1;
            }
        }
        p
    };
    let (class, perm_a, perm_b) = if a == b {
        (PairClass::Identical, [0, 1, 2], [0, 1, 2])
    } else {
        match shared.len() {
            3 => (
                PairClass::Identical,
                [0, 1, 2],
                complete(&[shared[0].1, shared[1].1, shared[2].1]),
            ),
            2 => (
                PairClass::SharedEdge,
                complete(&[shared[0].0, shared[1].0]),
                complete(&[shared[0].1, shared[1].1]),
            ),
            1 => (
                PairClass::SharedVertex,
                complete(&[shared[0].0]),
                complete(&[shared[0].1]),
            ),
            _ => {
                let d = geom::dist(mesh.centroid(a), mesh.centroid(b));
                let diam = mesh.diameter(a).max(mesh.diameter(b));
                let class = if d / diam < near_threshold {
                    PairClass::Near
                } else {
                    PairClass::Far
                };
                (class, [0, 1, 2], [0, 1, 2])
            }
        }
    };
    PanelPair {
        cell_a: a,
        cell_b: b,
        class,
        perm_a,
        perm_b,
    }
}

/// Maps a point of the Sauter-Schwab reference simplex
/// `{0 <= x2 <= x1 <= 1}` to `(u, v)` on a cell whose local vertices are
/// visited in the order `perm`.
#[inline]
pub fn simplex_to_cell(x: [f64; 2], perm: [usize; 3]) -> [f64; 2] {
    let mut l = [0.0; 3];
    l[perm[0]] = 1.0 - x[0];
    l[perm[1]] = x[0] - x[1];
    l[perm[2]] = x[1];
    [l[1], l[2]]
}

/// Cache of quadrature rules keyed by the configuration.
#[derive(Clone, Debug)]
pub struct RuleSet {
    pub far: TriangleRule,
    pub near: TriangleRule,
    pub identical: Arc<SingularRule>,
    pub edge: Arc<SingularRule>,
    pub vertex: Arc<SingularRule>,
}

impl RuleSet {
    pub fn new(cfg: &QuadratureConfig, p: usize) -> Self {
        let n = cfg.singular_order;
        Self {
            far: TriangleRule::with_degree(cfg.far_degree_for(p)),
            near: TriangleRule::with_degree(cfg.near_degree_for(p)),
            identical: Arc::new(sauter_schwab_rule(PairClass::Identical, n)),
            edge: Arc::new(sauter_schwab_rule(PairClass::SharedEdge, n)),
            vertex: Arc::new(sauter_schwab_rule(PairClass::SharedVertex, n)),
        }
    }

    /// Reference-point pairs `(xi_a, xi_b, weight)` for a classified pair.
    pub fn point_pairs(&self, pair: &PanelPair) -> Vec<([f64; 2], [f64; 2], f64)> {
        let singular = match pair.class {
            PairClass::Identical => Some(&self.identical),
            PairClass::SharedEdge => Some(&self.edge),
            PairClass::SharedVertex => Some(&self.vertex),
            _ => None,
        };
        // Singular rules are not symmetric in their two points; the lower
        // cell always takes the first one, so swapping a pair is exact.
        let swap = pair.cell_a > pair.cell_b;
        match singular {
            Some(rule) => rule
                .iter()
                .map(|(x, y, w)| {
                    let (x, y) = if swap { (y, x) } else { (x, y) };
                    (
                        simplex_to_cell(x, pair.perm_a),
                        simplex_to_cell(y, pair.perm_b),
                        w,
                    )
                })
                .collect(),
            None => {
                let r = if pair.class == PairClass::Near {
                    &self.near
                } else {
                    &self.far
                };
                let mut out = Vec::with_capacity(r.len() * r.len());
                for (pa, wa) in r.iter() {
                    for (pb, wb) in r.iter() {
                        out.push((pa, pb, wa * wb));
                    }
                }
                out
            }
        }
    }
}

/// `int_a int_b f(x, y) dS(y) dS(x)` for a classified pair.
///
/// `f` receives the map data at both points and the reference
/// coordinates; Jacobians are applied here. A non-finite value aborts the
/// integration: it means a singular pair was misclassified.
pub fn double_integral<F>(
    mesh: &SurfaceMesh,
    pair: &PanelPair,
    cfg: &QuadratureConfig,
    f: F,
) -> Result<c64>
where
    F: Fn(&MapPoint, [f64; 2], &MapPoint, [f64; 2]) -> c64,
{
    let rules = RuleSet::new(cfg, 0);
    double_integral_with(mesh, pair, &rules, f)
}

pub fn double_integral_with<F>(
    mesh: &SurfaceMesh,
    pair: &PanelPair,
    rules: &RuleSet,
    f: F,
) -> Result<c64>
where
    F: Fn(&MapPoint, [f64; 2], &MapPoint, [f64; 2]) -> c64,
{
    let mut acc = c64::new(0.0, 0.0);
    for (xa, xb, w) in rules.point_pairs(pair) {
        let ma = mesh.map(pair.cell_a, xa[0], xa[1]);
        let mb = mesh.map(pair.cell_b, xb[0], xb[1]);
        let val = f(&ma, xa, &mb, xb);
        if !(val.re.is_finite() && val.im.is_finite()) {
            return Err(Error::NonFiniteKernel {
                cell_a: pair.cell_a,
                cell_b: pair.cell_b,
                class: pair.class.name(),
            });
        }
        acc += val * (w * ma.jacobian * mb.jacobian);
    }
    Ok(acc)
}

/// Scalar kernels of the EFIE and its static decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// `exp(-jkR) / (4 pi R)`
    Helmholtz(f64),
    /// `1 / (4 pi R)`
    Static,
    /// `(exp(-jkR) - 1) / (4 pi R)`, finite at `R = 0`.
    HelmholtzMinusStatic(f64),
}

impl Kernel {
    #[inline]
    pub fn eval(self, r: f64) -> c64 {
        use std::f64::consts::PI;
        let inv = 1.0 / (4.0 * PI);
        match self {
            Kernel::Static => c64::new(inv / r, 0.0),
            Kernel::Helmholtz(k) => {
                let (s, c) = (k * r).sin_cos();
                c64::new(c, -s) * (inv / r)
            }
            Kernel::HelmholtzMinusStatic(k) => {
                if r == 0.0 {
                    return c64::new(0.0, -k * inv);
                }
                let x = k * r;
                // exp(-jx) - 1 = -2 sin^2(x/2) - j sin x
                let h = (0.5 * x).sin();
                c64::new(-2.0 * h * h, -x.sin()) * (inv / r)
            }
        }
    }
}
