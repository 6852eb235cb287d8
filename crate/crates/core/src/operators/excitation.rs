use faer::c64;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpace;
use crate::consts::{wavenumber, ETA0};
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::SurfaceMesh;
use crate::quadrature::{QuadratureConfig, TriangleRule};

/// Incident plane wave `E = E0 p exp(-jk d . r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub direction: Vec3,
    pub polarization: Vec3,
    pub amplitude: f64,
    pub frequency: f64,
}

impl PlaneWave {
    pub fn new(
        direction: Vec3,
        polarization: Vec3,
        amplitude: f64,
        frequency: f64,
    ) -> Result<Self> {
        let tol = 1e-12;
        if (geom::norm(direction) - 1.0).abs() > tol
            || (geom::norm(polarization) - 1.0).abs() > tol
            || geom::dot(direction, polarization).abs() > tol
        {
            return Err(Error::InvalidArgument(
                "plane wave needs unit, orthogonal direction and polarization".into(),
            ));
        }
        if !(frequency >= 0.0 && frequency.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad frequency {frequency}")));
        }
        Ok(Self {
            direction,
            polarization,
            amplitude,
            frequency,
        })
    }

    /// Unit-amplitude wave travelling along +z, polarized along x.
    pub fn z_incident(frequency: f64) -> Self {
        Self {
            direction: [0.0, 0.0, 1.0],
            polarization: [1.0, 0.0, 0.0],
            amplitude: 1.0,
            frequency,
        }
    }

    pub fn k(&self) -> f64 {
        wavenumber(self.frequency)
    }
}

/// Tested incident field: `e_m = -(1/eta) int E . psi_m`, and the variant
/// `e_sub` using `exp(-jk d . r) - 1`.
#[derive(Clone, Debug)]
pub struct Excitation {
    pub e: Vec<c64>,
    pub e_sub: Vec<c64>,
}

impl Excitation {
    /// `e - e_sub`: the test vector of the constant field `E0 p`.
    pub fn static_part(&self) -> Vec<c64> {
        self.e.iter().zip(&self.e_sub).map(|(a, b)| a - b).collect()
    }
}

pub(crate) fn excitation_rule(cfg: &QuadratureConfig, p: usize) -> TriangleRule {
    TriangleRule::with_degree(cfg.near_degree_for(p) + 2)
}

/// Both excitation vectors. `e_sub` is computed from
/// `exp(-jx) - 1 = -2 sin^2(x/2) - j sin x`, which keeps full relative
/// accuracy as `k -> 0`.
pub fn assemble_excitation(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    wave: &PlaneWave,
    cfg: &QuadratureConfig,
) -> Excitation {
    let n = basis.len();
    let k = wave.k();
    let zero = c64::new(0.0, 0.0);
    let mut e = vec![zero; n];
    let mut e_sub = vec![zero; n];
    let rule = excitation_rule(cfg, basis.order());
    let local = basis.local();
    let (mut vals, mut divs) = (Vec::new(), Vec::new());
    let scale = -wave.amplitude / ETA0;
    for c in 0..mesh.n_cells() {
        let dofs = basis.cell_dofs(c);
        for (xi, w) in rule.iter() {
            let mp = mesh.map(c, xi[0], xi[1]);
            local.eval_all(xi[0], xi[1], &mut vals, &mut divs);
            let x = k * geom::dot(wave.direction, mp.position);
            let h = (0.5 * x).sin();
            let sub = c64::new(-2.0 * h * h, -x.sin());
            let full = sub + 1.0;
            for (cd, v) in dofs.iter().zip(&vals) {
                // Jacobians cancel: psi dS = DF w dxi.
                let t = geom::dot(wave.polarization, mp.push(*v)) * w * cd.sign * scale;
                e[cd.dof] += full * t;
                e_sub[cd.dof] += sub * t;
            }
        }
    }
    Excitation { e, e_sub }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tests::tetrahedron;

    #[test]
    fn static_part_is_frequency_independent() {
        let m = tetrahedron();
        let b = BasisSpace::new(&m, 1).unwrap();
        let cfg = QuadratureConfig::default();
        let zero = assemble_excitation(&m, &b, &PlaneWave::z_incident(0.0), &cfg);
        assert!(zero.e_sub.iter().all(|z| *z == c64::new(0.0, 0.0)));
        let scale = zero.e.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for f in [1.0, 1e6, 3e8] {
            let ex = assemble_excitation(&m, &b, &PlaneWave::z_incident(f), &cfg);
            for (a, c) in ex.static_part().iter().zip(&zero.e) {
                assert!((a - c).norm() < 1e-14 * scale);
            }
        }
    }

    #[test]
    fn rejects_non_orthogonal_polarization() {
        assert!(PlaneWave::new([0.0, 0.0, 1.0], [0.0, 0.6, 0.8], 1.0, 1.0).is_err());
    }
}
