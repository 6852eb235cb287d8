//! Surface meshes: storage, connectivity, and the reference-to-physical map.

mod generate;
mod gmsh;

pub use generate::{generate_sphere, generate_tetrahedra, generate_tetrahedron, generate_torus};
pub use gmsh::{parse_gmsh, parse_gmsh_str, write_gmsh_v22};

use std::collections::HashMap;

use thiserror::Error;

use crate::geom::{self, Vec3};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported element type {0} (only 3-node triangles (2) and 6-node triangles (9) are accepted)")]
    UnsupportedElement(u32),

    #[error("mixed 3-node and 6-node triangles in one mesh")]
    MixedOrder,

    #[error("unsupported MSH format version {0}")]
    UnsupportedVersion(String),

    #[error("unsupported MSH feature: {0}")]
    UnsupportedFeature(String),

    #[error(
        "edge ({0}, {1}) is shared by {2} cells; only closed 2-manifold surfaces are supported"
    )]
    NonManifoldEdge(usize, usize, usize),

    #[error("surface component containing cell {0} is not orientable")]
    NonOrientable(usize),

    #[error("mesh has no cells")]
    Empty,

    #[error("cell {cell} references missing vertex {vertex}")]
    BadVertex { cell: usize, vertex: usize },

    #[error("degenerate cell {0} (non-positive Jacobian)")]
    DegenerateCell(usize),

    #[error("invalid generator parameters: {0}")]
    BadParameters(String),

    #[error("connectivity has not been built")]
    NoConnectivity,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Geometric order of the cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GeometricOrder {
    Flat = 1,
    Quadratic = 2,
}

/// A triangle. `mids[i]` is the mid-edge node between corners `i` and
/// `(i + 1) % 3` (Gmsh node order 3, 4, 5).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub corners: [usize; 3],
    pub mids: Option<[usize; 3]>,
}

impl Cell {
    /// Local edge `e` is opposite local vertex `e`, running from local
    /// vertex `(e + 1) % 3` to `(e + 2) % 3`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.corners[(e + 1) % 3], self.corners[(e + 2) % 3])
    }

    fn flipped(&self) -> Cell {
        let [a, b, c] = self.corners;
        Cell {
            corners: [a, c, b],
            mids: self.mids.map(|[m01, m12, m20]| [m20, m12, m01]),
        }
    }
}

/// An edge shared by two cells. `vertices` is sorted ascending and gives
/// the reference direction; `cell_plus < cell_minus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InternalEdge {
    pub vertices: [usize; 2],
    pub cell_plus: usize,
    pub cell_minus: usize,
    pub local_plus: usize,
    pub local_minus: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub edges: Vec<InternalEdge>,
    /// Global edge id for each local edge of each cell.
    pub cell_edges: Vec<[usize; 3]>,
    pub body_of_cell: Vec<usize>,
    pub n_bodies: usize,
}

#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    cells: Vec<Cell>,
    order: GeometricOrder,
    topology: Option<Topology>,
}

/// Point data of the reference map at one reference point.
#[derive(Clone, Copy, Debug)]
pub struct MapPoint {
    pub position: Vec3,
    /// `dr/du`, `dr/dv`
    pub tangents: [Vec3; 2],
    /// Area scale `|dr/du x dr/dv|`.
    pub jacobian: f64,
    pub normal: Vec3,
}

impl MapPoint {
    /// Contravariant Piola image of a reference vector, multiplied by the
    /// Jacobian: `DF * w`. Dividing by `jacobian` gives the physical value.
    #[inline]
    pub fn push(&self, w: [f64; 2]) -> Vec3 {
        geom::add(
            geom::scale(self.tangents[0], w[0]),
            geom::scale(self.tangents[1], w[1]),
        )
    }
}

impl SurfaceMesh {
    /// Cells are validated for vertex references; connectivity is not built.
    pub fn new(vertices: Vec<Vec3>, cells: Vec<Cell>) -> Result<Self, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let quadratic = cells[0].mids.is_some();
        for (i, c) in cells.iter().enumerate() {
            if c.mids.is_some() != quadratic {
                return Err(MeshError::MixedOrder);
            }
            let ids = c.corners.iter().chain(c.mids.iter().flatten());
            for &v in ids {
                if v >= vertices.len() {
                    return Err(MeshError::BadVertex { cell: i, vertex: v });
                }
            }
        }
        Ok(Self {
            vertices,
            cells,
            order: if quadratic {
                GeometricOrder::Quadratic
            } else {
                GeometricOrder::Flat
            },
            topology: None,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn geometric_order(&self) -> GeometricOrder {
        self.order
    }

    /// Number of distinct corner vertices referenced by cells.
    pub fn n_corner_vertices(&self) -> usize {
        let mut seen = vec![false; self.vertices.len()];
        for c in &self.cells {
            for &v in &c.corners {
                seen[v] = true;
            }
        }
        seen.iter().filter(|&&s| s).count()
    }

    pub fn topology(&self) -> Result<&Topology, MeshError> {
        self.topology.as_ref().ok_or(MeshError::NoConnectivity)
    }

    pub fn has_connectivity(&self) -> bool {
        self.topology.is_some()
    }

    pub fn n_internal_edges(&self) -> Result<usize, MeshError> {
        Ok(self.topology()?.edges.len())
    }

    pub fn n_bodies(&self) -> Result<usize, MeshError> {
        Ok(self.topology()?.n_bodies)
    }

    /// Euler characteristic `V - E + F` over corner vertices.
    pub fn euler_characteristic(&self) -> Result<i64, MeshError> {
        let e = self.n_internal_edges()? as i64;
        Ok(self.n_corner_vertices() as i64 - e + self.n_cells() as i64)
    }

    /// Reference map of `cell` at `(u, v)`.
    pub fn map(&self, cell: usize, u: f64, v: f64) -> MapPoint {
        let c = &self.cells[cell];
        let x = |i: usize| self.vertices[i];
        let (pos, du, dv) = match c.mids {
            None => {
                let (p0, p1, p2) = (x(c.corners[0]), x(c.corners[1]), x(c.corners[2]));
                let du = geom::sub(p1, p0);
                let dv = geom::sub(p2, p0);
                let pos = geom::add(p0, geom::add(geom::scale(du, u), geom::scale(dv, v)));
                (pos, du, dv)
            }
            Some(m) => {
                let l0 = 1.0 - u - v;
                let (l1, l2) = (u, v);
                let nodes = [
                    x(c.corners[0]),
                    x(c.corners[1]),
                    x(c.corners[2]),
                    x(m[0]),
                    x(m[1]),
                    x(m[2]),
                ];
                let shape = [
                    l0 * (2.0 * l0 - 1.0),
                    l1 * (2.0 * l1 - 1.0),
                    l2 * (2.0 * l2 - 1.0),
                    4.0 * l0 * l1,
                    4.0 * l1 * l2,
                    4.0 * l2 * l0,
                ];
                // d/du with dl0/du = -1, dl1/du = 1, dl2/du = 0
                let shape_u = [
                    -(4.0 * l0 - 1.0),
                    4.0 * l1 - 1.0,
                    0.0,
                    4.0 * (l0 - l1),
                    4.0 * l2,
                    -4.0 * l2,
                ];
                let shape_v = [
                    -(4.0 * l0 - 1.0),
                    0.0,
                    4.0 * l2 - 1.0,
                    -4.0 * l1,
                    4.0 * l1,
                    4.0 * (l0 - l2),
                ];
                let mut pos = [0.0; 3];
                let mut du = [0.0; 3];
                let mut dv = [0.0; 3];
                for k in 0..6 {
                    pos = geom::add(pos, geom::scale(nodes[k], shape[k]));
                    du = geom::add(du, geom::scale(nodes[k], shape_u[k]));
                    dv = geom::add(dv, geom::scale(nodes[k], shape_v[k]));
                }
                (pos, du, dv)
            }
        };
        let n = geom::cross(du, dv);
        let jac = geom::norm(n);
        MapPoint {
            position: pos,
            tangents: [du, dv],
            jacobian: jac,
            normal: geom::scale(n, 1.0 / jac),
        }
    }

    pub fn centroid(&self, cell: usize) -> Vec3 {
        self.map(cell, 1.0 / 3.0, 1.0 / 3.0).position
    }

    /// Largest corner-to-corner distance of a cell.
    pub fn diameter(&self, cell: usize) -> f64 {
        let c = &self.cells[cell].corners;
        let p = |i: usize| self.vertices[c[i]];
        geom::dist(p(0), p(1))
            .max(geom::dist(p(1), p(2)))
            .max(geom::dist(p(2), p(0)))
    }

    /// Mean cell diameter, the `h` of refinement studies.
    pub fn mean_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.diameter(c)).sum::<f64>() / self.n_cells() as f64
    }

    pub fn scaled(&self, s: f64) -> SurfaceMesh {
        let mut m = self.clone();
        for v in &mut m.vertices {
            *v = geom::scale(*v, s);
        }
        m
    }

    /// Signed enclosed volume `(1/3) int r . n dS` of the cells in `body`.
    pub fn signed_volume(&self, body: Option<usize>) -> f64 {
        let rule = crate::quadrature::TriangleRule::with_degree(4);
        let topo = self.topology.as_ref();
        let mut vol = 0.0;
        for c in 0..self.n_cells() {
            if let (Some(b), Some(t)) = (body, topo) {
                if t.body_of_cell[c] != b {
                    continue;
                }
            }
            for (pt, w) in rule.iter() {
                let mp = self.map(c, pt[0], pt[1]);
                vol += w * geom::dot(mp.position, mp.normal) * mp.jacobian;
            }
        }
        vol / 3.0
    }

    /// Builds edges, orientation, and connected components.
    ///
    /// Each connected component is reoriented so that adjacent cells induce
    /// opposite directions on their shared edge and the enclosed volume is
    /// positive (outward normals).
    pub fn build_connectivity(mut self) -> Result<Self, MeshError> {
        let n_cells = self.cells.len();
        let mut edge_map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (ci, c) in self.cells.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = c.edge(e);
                edge_map
                    .entry((a.min(b), a.max(b)))
                    .or_default()
                    .push((ci, e));
            }
        }
        for (&(a, b), users) in &edge_map {
            if users.len() != 2 {
                return Err(MeshError::NonManifoldEdge(a, b, users.len()));
            }
        }

        // Cell adjacency through shared edges.
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
        for users in edge_map.values() {
            let (c0, c1) = (users[0].0, users[1].0);
            neighbors[c0].push(c1);
            neighbors[c1].push(c0);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }

        // Components and orientation propagation by breadth-first search.
        let mut body_of_cell = vec![usize::MAX; n_cells];
        let mut n_bodies = 0;
        for seed in 0..n_cells {
            if body_of_cell[seed] != usize::MAX {
                continue;
            }
            let body = n_bodies;
            n_bodies += 1;
            body_of_cell[seed] = body;
            let mut queue = std::collections::VecDeque::from([seed]);
            while let Some(c) = queue.pop_front() {
                for &nb in &neighbors[c] {
                    let agree = induced_orientation_opposite(&self.cells[c], &self.cells[nb]);
                    if body_of_cell[nb] == usize::MAX {
                        body_of_cell[nb] = body;
                        if !agree {
                            self.cells[nb] = self.cells[nb].flipped();
                        }
                        queue.push_back(nb);
                    } else if !agree {
                        return Err(MeshError::NonOrientable(seed));
                    }
                }
            }
        }

        self.topology = Some(Topology {
            edges: Vec::new(),
            cell_edges: Vec::new(),
            body_of_cell: body_of_cell.clone(),
            n_bodies,
        });
        for body in 0..n_bodies {
            if self.signed_volume(Some(body)) < 0.0 {
                for c in 0..n_cells {
                    if body_of_cell[c] == body {
                        self.cells[c] = self.cells[c].flipped();
                    }
                }
            }
        }

        // Local edge indices changed under flips; rebuild the edge map in
        // deterministic order.
        let mut users_of: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (ci, c) in self.cells.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = c.edge(e);
                users_of
                    .entry((a.min(b), a.max(b)))
                    .or_default()
                    .push((ci, e));
            }
        }
        let mut keys: Vec<(usize, usize)> = users_of.keys().copied().collect();
        // Order edges by first appearance in the cell list for locality.
        keys.sort_by_key(|k| {
            let u = &users_of[k];
            (u[0].0.min(u[1].0), u[0].1, k.0, k.1)
        });
        let mut edges = Vec::with_capacity(keys.len());
        let mut cell_edges = vec![[usize::MAX; 3]; n_cells];
        for (eid, key) in keys.iter().enumerate() {
            let mut u = users_of[key].clone();
            u.sort_unstable();
            let (plus, minus) = (u[0], u[1]);
            edges.push(InternalEdge {
                vertices: [key.0, key.1],
                cell_plus: plus.0,
                cell_minus: minus.0,
                local_plus: plus.1,
                local_minus: minus.1,
            });
            cell_edges[plus.0][plus.1] = eid;
            cell_edges[minus.0][minus.1] = eid;
        }

        for c in 0..n_cells {
            if !(self.map(c, 1.0 / 3.0, 1.0 / 3.0).jacobian > 0.0) {
                return Err(MeshError::DegenerateCell(c));
            }
        }

        self.topology = Some(Topology {
            edges,
            cell_edges,
            body_of_cell,
            n_bodies,
        });
        Ok(self)
    }
}

/// True when the shared edge of `a` and `b` is traversed in opposite
/// directions by the two cells.
fn induced_orientation_opposite(a: &Cell, b: &Cell) -> bool {
    for ea in 0..3 {
        let (a0, a1) = a.edge(ea);
        for eb in 0..3 {
            let (b0, b1) = b.edge(eb);
            if a0 == b1 && a1 == b0 {
                return true;
            }
            if a0 == b0 && a1 == b1 {
                return false;
            }
        }
    }
    true
}
