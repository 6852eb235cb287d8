//! Source/test space (GWP) and charge space (cell-wise Lagrange).

mod charge;
mod local;

pub use charge::ChargeSpace;
pub use local::{reference_edge_flux, LocalBasis, LocalFunction, LocalKind};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::SurfaceMesh;
use crate::poly::in_reference;

pub const MAX_ORDER: usize = 3;

/// A global degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dof {
    /// `index` in `0..=p` runs along the edge from its lower to its higher
    /// vertex id.
    Edge {
        edge: usize,
        index: usize,
    },
    Cell {
        cell: usize,
        index: usize,
    },
}

/// Contribution of a local reference function to a global dof.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellDof {
    pub dof: usize,
    pub local: usize,
    pub sign: f64,
}

/// Physical value of one dof at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisValue {
    pub dof: usize,
    pub value: Vec3,
    pub divergence: f64,
}

/// Order-`p` GWP space on a closed mesh.
///
/// Edge dofs are numbered first (`edge * (p + 1) + index`), then interior
/// dofs (`E (p + 1) + cell * p (p + 1) + index`). On the plus cell of an
/// edge the edge functions carry positive divergence.
#[derive(Clone, Debug)]
pub struct BasisSpace {
    order: usize,
    local: Arc<LocalBasis>,
    dofs: Vec<Dof>,
    cell_dofs: Vec<Vec<CellDof>>,
}

pub(crate) fn check_order(p: usize) -> Result<()> {
    if p > MAX_ORDER {
        Err(Error::UnsupportedOrder(p))
    } else {
        Ok(())
    }
}

/// `N_p = (p + 1) E + p (p + 1) C`
pub fn gwp_dimension(p: usize, n_edges: usize, n_cells: usize) -> usize {
    (p + 1) * n_edges + p * (p + 1) * n_cells
}

/// `M_p = (p + 1)(p + 2) C / 2`
pub fn charge_dimension(p: usize, n_cells: usize) -> usize {
    (p + 1) * (p + 2) / 2 * n_cells
}

impl BasisSpace {
    pub fn new(mesh: &SurfaceMesh, p: usize) -> Result<Self> {
        check_order(p)?;
        let topo = mesh.topology()?;
        let local = Arc::new(LocalBasis::new(p));
        let n_edges = topo.edges.len();
        let n_cells = mesh.n_cells();
        let per_cell = p * (p + 1);

        let mut dofs = Vec::with_capacity(gwp_dimension(p, n_edges, n_cells));
        for edge in 0..n_edges {
            for index in 0..=p {
                dofs.push(Dof::Edge { edge, index });
            }
        }
        for cell in 0..n_cells {
            for index in 0..per_cell {
                dofs.push(Dof::Cell { cell, index });
            }
        }

        let mut cell_dofs = vec![Vec::with_capacity(local.len()); n_cells];
        for (c, out) in cell_dofs.iter_mut().enumerate() {
            let cell = mesh.cell(c);
            for (li, f) in local.functions.iter().enumerate() {
                match f.kind {
                    LocalKind::Edge { edge: le, slot } => {
                        let eid = topo.cell_edges[c][le];
                        let e = &topo.edges[eid];
                        let forward = cell.corners[(le + 1) % 3] == e.vertices[0];
                        let index = if forward { slot } else { p - slot };
                        let sign = if e.cell_plus == c { 1.0 } else { -1.0 };
                        out.push(CellDof {
                            dof: eid * (p + 1) + index,
                            local: li,
                            sign,
                        });
                    }
                    LocalKind::Interior { index } => out.push(CellDof {
                        dof: n_edges * (p + 1) + c * per_cell + index,
                        local: li,
                        sign: 1.0,
                    }),
                }
            }
        }

        Ok(Self {
            order: p,
            local,
            dofs,
            cell_dofs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn dofs(&self) -> &[Dof] {
        &self.dofs
    }

    pub fn local(&self) -> &LocalBasis {
        &self.local
    }

    /// Dofs supported on `cell`, aligned with the local function order.
    pub fn cell_dofs(&self, cell: usize) -> &[CellDof] {
        &self.cell_dofs[cell]
    }

    /// Physical values via the contravariant Piola map: value
    /// `DF w / J`, divergence `div(w) / J`.
    pub fn evaluate(
        &self,
        mesh: &SurfaceMesh,
        cell: usize,
        xi: [f64; 2],
    ) -> Result<Vec<BasisValue>> {
        if !in_reference(xi[0], xi[1], 1e-12) {
            return Err(Error::OutsideReference(xi[0], xi[1]));
        }
        let mp = mesh.map(cell, xi[0], xi[1]);
        let inv_j = 1.0 / mp.jacobian;
        Ok(self.cell_dofs[cell]
            .iter()
            .map(|cd| {
                let f = &self.local.functions[cd.local];
                let w = [f.value[0].eval(xi[0], xi[1]), f.value[1].eval(xi[0], xi[1])];
                BasisValue {
                    dof: cd.dof,
                    value: geom::scale(mp.push(w), cd.sign * inv_j),
                    divergence: cd.sign * f.divergence.eval(xi[0], xi[1]) * inv_j,
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tests::tetrahedron;
    use crate::mesh::{generate_sphere, GeometricOrder};
    use crate::quadrature::TriangleRule;

    #[test]
    fn dimensions_on_tetrahedron() {
        let m = tetrahedron();
        assert_eq!(BasisSpace::new(&m, 0).unwrap().len(), 6);
        assert_eq!(BasisSpace::new(&m, 1).unwrap().len(), 20);
        assert!(matches!(
            BasisSpace::new(&m, 4),
            Err(Error::UnsupportedOrder(4))
        ));
    }

    #[test]
    fn mobius_arithmetic() {
        assert_eq!(gwp_dimension(2, 5670, 3780), 39690);
    }

    #[test]
    fn rwg_divergence_is_constant_and_unit_flux() {
        let m = tetrahedron();
        let b = BasisSpace::new(&m, 0).unwrap();
        for c in 0..m.n_cells() {
            let v1 = b.evaluate(&m, c, [0.1, 0.1]).unwrap();
            let v2 = b.evaluate(&m, c, [0.6, 0.3]).unwrap();
            for (a, bb) in v1.iter().zip(&v2) {
                assert!((a.divergence - bb.divergence).abs() < 1e-13);
                let area = 0.5 * m.map(c, 0.0, 0.0).jacobian;
                assert!((a.divergence.abs() * area - 1.0).abs() < 1e-13);
            }
        }
        assert!(b.evaluate(&m, 0, [0.8, 0.8]).is_err());
    }

    /// Physical normal flux density of every edge dof, summed over its two
    /// cells at matching points, vanishes.
    fn check_normal_continuity(mesh: &SurfaceMesh, p: usize) {
        let b = BasisSpace::new(mesh, p).unwrap();
        let topo = mesh.topology().unwrap();
        let ref_vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for e in &topo.edges {
            for k in 0..p + 2 {
                // sample point along the global edge direction
                let s = (k as f64 + 0.5) / (p + 2) as f64;
                let mut total = std::collections::HashMap::<usize, f64>::new();
                for (cell, le) in [(e.cell_plus, e.local_plus), (e.cell_minus, e.local_minus)] {
                    let corners = mesh.cell(cell).corners;
                    let forward = corners[(le + 1) % 3] == e.vertices[0];
                    let t = if forward { s } else { 1.0 - s };
                    let a: [f64; 2] = ref_vertices[(le + 1) % 3];
                    let bb: [f64; 2] = ref_vertices[(le + 2) % 3];
                    let xi = [a[0] + t * (bb[0] - a[0]), a[1] + t * (bb[1] - a[1])];
                    let mp = mesh.map(cell, xi[0], xi[1]);
                    // Edge tangent per unit t and outward conormal in the tangent plane.
                    let dt = geom::add(
                        geom::scale(mp.tangents[0], bb[0] - a[0]),
                        geom::scale(mp.tangents[1], bb[1] - a[1]),
                    );
                    let conormal = geom::normalize(geom::cross(dt, mp.normal));
                    for v in b.evaluate(mesh, cell, xi).unwrap() {
                        *total.entry(v.dof).or_default() +=
                            geom::dot(v.value, conormal) * geom::norm(dt);
                    }
                }
                for (dof, flux) in total {
                    if let Dof::Edge { .. } = b.dofs()[dof] {
                        assert!(flux.abs() < 1e-11, "p={p} dof={dof} flux={flux}");
                    }
                }
            }
        }
    }

    #[test]
    fn normal_continuity_flat_and_curved() {
        let flat = tetrahedron();
        let curved = generate_sphere(1.0, 0, GeometricOrder::Quadratic).unwrap();
        for p in 0..=3 {
            check_normal_continuity(&flat, p);
            check_normal_continuity(&curved, p);
        }
    }

    #[test]
    fn cell_gram_matrices_are_nonsingular() {
        let m = generate_sphere(1.0, 0, GeometricOrder::Quadratic).unwrap();
        let rule = TriangleRule::with_degree(10);
        for p in 0..=3 {
            let b = BasisSpace::new(&m, p).unwrap();
            let n = b.local().len();
            let mut gram = faer::Mat::<f64>::zeros(n, n);
            for (xi, w) in rule.iter() {
                let vals = b.evaluate(&m, 3, xi).unwrap();
                let jac = m.map(3, xi[0], xi[1]).jacobian;
                for i in 0..n {
                    for j in 0..n {
                        gram[(i, j)] += w * jac * geom::dot(vals[i].value, vals[j].value);
                    }
                }
            }
            let s = gram.singular_values().unwrap();
            assert!(s[n - 1] / s[0] > 1e-8, "p={p}: {:?}", s);
        }
    }

    #[test]
    fn divergence_integral_is_jacobian_free() {
        let m = generate_sphere(1.0, 0, GeometricOrder::Quadratic).unwrap();
        let rule = TriangleRule::with_degree(8);
        let b = BasisSpace::new(&m, 2).unwrap();
        let c = 5;
        let physical: Vec<f64> = (0..b.local().len())
            .map(|i| {
                rule.iter()
                    .map(|(xi, w)| {
                        let v = b.evaluate(&m, c, xi).unwrap()[i];
                        w * v.divergence * m.map(c, xi[0], xi[1]).jacobian
                    })
                    .sum()
            })
            .collect();
        for (i, cd) in b.cell_dofs(c).iter().enumerate() {
            let reference = cd.sign * b.local().functions[cd.local].divergence.integrate();
            assert!((physical[i] - reference).abs() < 1e-13);
        }
    }
}
