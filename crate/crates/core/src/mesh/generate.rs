use std::collections::HashMap;
use std::f64::consts::PI;

use super::{Cell, GeometricOrder, MeshError, SurfaceMesh};
use crate::geom::{self, Vec3};

/// Icosphere: an icosahedron subdivided `subdivisions` times (each
/// triangle split in four), with all nodes projected onto the sphere.
///
/// With [`GeometricOrder::Quadratic`] the mid-edge nodes are also placed on
/// the sphere, giving curvilinear cells. Connectivity is built.
pub fn generate_sphere(
    radius: f64,
    subdivisions: usize,
    order: GeometricOrder,
) -> Result<SurfaceMesh, MeshError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::BadParameters(format!("radius {radius}")));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    for v in &mut verts {
        *v = geom::normalize(*v);
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let m = geom::normalize(geom::scale(geom::add(verts[a], verts[b]), 0.5));
                verts.push(m);
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    let mut cells: Vec<Cell> = faces
        .iter()
        .map(|&corners| Cell {
            corners,
            mids: None,
        })
        .collect();

    if order == GeometricOrder::Quadratic {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        for cell in &mut cells {
            let mut mids = [0; 3];
            for (i, m) in mids.iter_mut().enumerate() {
                let a = cell.corners[i];
                let b = cell.corners[(i + 1) % 3];
                *m = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let p = geom::normalize(geom::scale(geom::add(verts[a], verts[b]), 0.5));
                    verts.push(p);
                    verts.len() - 1
                });
            }
            cell.mids = Some(mids);
        }
    }

    for v in &mut verts {
        *v = geom::scale(*v, radius);
    }
    SurfaceMesh::new(verts, cells)?.build_connectivity()
}

/// Flat-faceted torus around the z axis with `n_major * n_minor` quads,
/// each split into two triangles. Connectivity is built.
pub fn generate_torus(
    major_radius: f64,
    minor_radius: f64,
    n_major: usize,
    n_minor: usize,
) -> Result<SurfaceMesh, MeshError> {
    if n_major < 3 || n_minor < 3 {
        return Err(MeshError::BadParameters(format!(
            "torus needs at least 3 segments per direction, got ({n_major}, {n_minor})"
        )));
    }
    if !(minor_radius > 0.0 && major_radius > minor_radius && major_radius.is_finite()) {
        return Err(MeshError::BadParameters(format!(
            "torus radii must satisfy 0 < minor < major, got ({major_radius}, {minor_radius})"
        )));
    }
    let idx = |i: usize, j: usize| (i % n_major) * n_minor + (j % n_minor);
    let mut verts = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        let theta = 2.0 * PI * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let phi = 2.0 * PI * j as f64 / n_minor as f64;
            let rho = major_radius + minor_radius * phi.cos();
            verts.push([
                rho * theta.cos(),
                rho * theta.sin(),
                minor_radius * phi.sin(),
            ]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            cells.push(Cell {
                corners: [a, b, c],
                mids: None,
            });
            cells.push(Cell {
                corners: [a, c, d],
                mids: None,
            });
        }
    }
    SurfaceMesh::new(verts, cells)?.build_connectivity()
}

const TETRA_CELLS: [[usize; 3]; 4] = [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];

fn tetra_vertices(offset: Vec3) -> [Vec3; 4] {
    [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ]
    .map(|v| geom::add(v, offset))
}

/// Boundary of the unit corner tetrahedron: 4 flat cells, 6 edges.
pub fn generate_tetrahedron() -> Result<SurfaceMesh, MeshError> {
    generate_tetrahedra(&[[0.0; 3]])
}

/// Disjoint union of unit tetrahedron shells translated by `offsets`.
pub fn generate_tetrahedra(offsets: &[Vec3]) -> Result<SurfaceMesh, MeshError> {
    let mut verts = Vec::new();
    let mut cells = Vec::new();
    for (b, &o) in offsets.iter().enumerate() {
        verts.extend(tetra_vertices(o));
        cells.extend(TETRA_CELLS.iter().map(|c| Cell {
            corners: c.map(|i| i + 4 * b),
            mids: None,
        }));
    }
    SurfaceMesh::new(verts, cells)?.build_connectivity()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedra_counts() {
        let m = generate_tetrahedra(&[[0.0; 3], [3.0, 0.0, 0.0]]).unwrap();
        assert_eq!(m.n_cells(), 8);
        assert_eq!(m.n_internal_edges().unwrap(), 12);
        assert_eq!(m.n_bodies().unwrap(), 2);
        assert!((generate_tetrahedron().unwrap().signed_volume(None) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn icosahedron_counts() {
        let m = generate_sphere(1.0, 0, GeometricOrder::Flat).unwrap();
        assert_eq!(m.n_cells(), 20);
        assert_eq!(m.n_internal_edges().unwrap(), 30);
        assert_eq!(m.euler_characteristic().unwrap(), 2);
    }

    #[test]
    fn quadratic_icosphere_nodes_on_sphere() {
        let m = generate_sphere(1.0, 1, GeometricOrder::Quadratic).unwrap();
        assert_eq!(m.n_cells(), 80);
        assert_eq!(m.n_internal_edges().unwrap(), 120);
        assert_eq!(m.geometric_order(), GeometricOrder::Quadratic);
        for c in m.cells() {
            for &v in c.mids.unwrap().iter().chain(c.corners.iter()) {
                assert!((geom::norm(m.vertices()[v]) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn torus_counts_and_bad_parameters() {
        let m = generate_torus(2.0, 0.5, 8, 4).unwrap();
        assert_eq!(m.n_cells(), 64);
        assert_eq!(m.n_internal_edges().unwrap(), 96);
        assert_eq!(m.euler_characteristic().unwrap(), 0);
        assert!(m.signed_volume(None) > 0.0);
        assert!(generate_torus(1.0, 1.0, 8, 4).is_err());
        assert!(generate_torus(2.0, 0.5, 2, 4).is_err());
    }

    #[test]
    fn near_degenerate_torus_has_positive_jacobians() {
        let m = generate_torus(2.0, 1.9, 8, 4).unwrap();
        for c in 0..m.n_cells() {
            assert!(m.map(c, 1.0 / 3.0, 1.0 / 3.0).jacobian > 0.0);
        }
    }
}
