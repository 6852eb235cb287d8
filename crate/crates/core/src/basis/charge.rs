use crate::basis::check_order;
use crate::error::Result;
use crate::geom::Vec3;
use crate::mesh::SurfaceMesh;
use crate::poly::{self, Poly2};

/// Cell-wise Lagrange interpolatory charge space of order `p`.
///
/// Nodes sit on the equispaced lattice `(i / p, j / p)` of each reference
/// cell (the centroid for `p = 0`). Dof `m` of cell `c` is
/// `c * n_local + m`.
#[derive(Clone, Debug)]
pub struct ChargeSpace {
    order: usize,
    n_cells: usize,
    functions: Vec<Poly2>,
    nodes: Vec<[f64; 2]>,
}

impl ChargeSpace {
    pub fn new(mesh: &SurfaceMesh, p: usize) -> Result<Self> {
        check_order(p)?;
        mesh.topology()?;
        let lam = [
            Poly2::barycentric(0),
            Poly2::barycentric(1),
            Poly2::barycentric(2),
        ];
        let mut functions = Vec::new();
        let mut nodes = Vec::new();
        if p == 0 {
            functions.push(Poly2::constant(1.0));
            nodes.push([1.0 / 3.0, 1.0 / 3.0]);
        } else {
            for j in 0..=p {
                for i in 0..=p - j {
                    let idx = [p - i - j, i, j];
                    let f = &(&poly::silvester(idx[0], p, &lam[0])
                        * &poly::silvester(idx[1], p, &lam[1]))
                        * &poly::silvester(idx[2], p, &lam[2]);
                    functions.push(f);
                    nodes.push([i as f64 / p as f64, j as f64 / p as f64]);
                }
            }
        }
        Ok(Self {
            order: p,
            n_cells: mesh.n_cells(),
            functions,
            nodes,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.n_cells * self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_local(&self) -> usize {
        self.functions.len()
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Reference Lagrange functions, shared by all cells.
    pub fn local_functions(&self) -> &[Poly2] {
        &self.functions
    }

    pub fn local_nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn dof(&self, cell: usize, local: usize) -> usize {
        cell * self.functions.len() + local
    }

    /// Physical position of the node of dof `m`.
    pub fn node_position(&self, mesh: &SurfaceMesh, m: usize) -> Vec3 {
        let (c, l) = (m / self.n_local(), m % self.n_local());
        let xi = self.nodes[l];
        mesh.map(c, xi[0], xi[1]).position
    }
}
