//! Property tests on generated meshes and projectors, plus a Gmsh round trip.

use efie_core::linalg::{norm, random_vector, sub};
use efie_core::mesh::{
    generate_sphere, generate_torus, parse_gmsh, write_gmsh_v22, GeometricOrder,
};
use efie_core::projectors::{apply_dense, star_rank};
use efie_core::{BasisSpace, ChargeSpace, ProjectorPair, StarVariant, SurfaceMesh};
use proptest::prelude::*;
use std::io::Write;

fn expected_dofs(mesh: &SurfaceMesh, p: usize) -> usize {
    let e = mesh.n_internal_edges().unwrap();
    (p + 1) * e + p * (p + 1) * mesh.n_cells()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn torus_topology_and_dimensions(n_major in 3usize..9, n_minor in 3usize..6, p in 0usize..3) {
        let mesh = generate_torus(2.0, 0.5, n_major, n_minor).unwrap();
        prop_assert_eq!(mesh.euler_characteristic().unwrap(), 0);
        prop_assert_eq!(mesh.n_bodies().unwrap(), 1);
        prop_assert!(mesh.signed_volume(None) > 0.0);
        let basis = BasisSpace::new(&mesh, p).unwrap();
        prop_assert_eq!(basis.len(), expected_dofs(&mesh, p));
        let charge = ChargeSpace::new(&mesh, p).unwrap();
        prop_assert_eq!(charge.len(), mesh.n_cells() * (p + 1) * (p + 2) / 2);
    }

    #[test]
    fn projector_is_idempotent_and_real_symmetric(seed in any::<u64>(), p in 0usize..3) {
        let mesh = generate_torus(2.0, 0.5, 6, 3).unwrap();
        let basis = BasisSpace::new(&mesh, p).unwrap();
        let pair = ProjectorPair::build(&mesh, &basis, StarVariant::LagrangeTested).unwrap();
        let ps = pair.dense_psigma().unwrap();
        let x = random_vector(pair.len(), seed);
        let px = apply_dense(&ps, &x);
        let ppx = apply_dense(&ps, &px);
        prop_assert!(norm(&sub(&ppx, &px)) <= 1e-9 * norm(&x));
        // <P x, y> = <x, P y> for real symmetric P
        let y = random_vector(pair.len(), seed ^ 0x9e37_79b9);
        let py = apply_dense(&ps, &y);
        let lhs: efie_core::c64 = px.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: efie_core::c64 = x.iter().zip(&py).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * norm(&x) * norm(&y));
    }

    #[test]
    fn iterative_projector_matches_dense(seed in any::<u64>()) {
        let mesh = generate_sphere(1.0, 0, GeometricOrder::Quadratic).unwrap();
        let basis = BasisSpace::new(&mesh, 1).unwrap();
        let pair = ProjectorPair::build(&mesh, &basis, StarVariant::LagrangeTested)
            .unwrap()
            .with_tolerance(1e-12);
        let ps = pair.dense_psigma().unwrap();
        let x = random_vector(pair.len(), seed);
        let a = pair.apply_psigma(&x).unwrap();
        let b = apply_dense(&ps, &x);
        prop_assert!(norm(&sub(&a, &b)) <= 1e-8 * norm(&x));
    }
}

#[test]
fn star_rank_is_charge_dimension_minus_bodies() {
    for (mesh, bodies) in [
        (generate_sphere(1.0, 0, GeometricOrder::Flat).unwrap(), 1),
        (generate_torus(2.0, 0.5, 8, 4).unwrap(), 1),
    ] {
        for p in 0..3 {
            let basis = BasisSpace::new(&mesh, p).unwrap();
            let charge = ChargeSpace::new(&mesh, p).unwrap();
            for variant in StarVariant::ALL {
                let pair = ProjectorPair::build(&mesh, &basis, variant).unwrap();
                assert_eq!(
                    star_rank(pair.sigma()).unwrap(),
                    charge.len() - bodies,
                    "p={p} {}",
                    variant.name()
                );
            }
        }
    }
}

#[test]
fn gmsh_round_trip_preserves_geometry_and_topology() {
    let mesh = generate_sphere(1.5, 1, GeometricOrder::Quadratic).unwrap();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(write_gmsh_v22(&mesh).as_bytes()).unwrap();
    let back = parse_gmsh(file.path())
        .unwrap()
        .build_connectivity()
        .unwrap();
    assert_eq!(back.n_cells(), mesh.n_cells());
    assert_eq!(back.geometric_order(), mesh.geometric_order());
    assert_eq!(
        back.n_internal_edges().unwrap(),
        mesh.n_internal_edges().unwrap()
    );
    assert_eq!(back.euler_characteristic().unwrap(), 2);
    let rel =
        (back.signed_volume(None) - mesh.signed_volume(None)).abs() / mesh.signed_volume(None);
    assert!(rel < 1e-12, "volume drift {rel:e}");
}
