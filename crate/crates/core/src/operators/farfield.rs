use faer::c64;

use crate::basis::BasisSpace;
use crate::consts::ETA0;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::SurfaceMesh;
use crate::quadrature::QuadratureConfig;

use super::excitation::excitation_rule;

/// Far-field pattern `F` with `E_s ~ F exp(-jkr) / r`.
pub type FarField = Vec<[c64; 3]>;

/// Observation directions `(sin t cos f, sin t sin f, cos t)` for a cut at
/// azimuth `phi_deg`.
pub fn cut_directions(theta_deg: &[f64], phi_deg: f64) -> Vec<Vec3> {
    let phi = phi_deg.to_radians();
    theta_deg
        .iter()
        .map(|t| {
            let t = t.to_radians();
            [t.sin() * phi.cos(), t.sin() * phi.sin(), t.cos()]
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    Full,
    /// `exp(jx) - 1`, for currents with zero mean.
    Subtracted,
}

fn radiate(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    coeffs: &[c64],
    k: f64,
    dirs: &[Vec3],
    cfg: &QuadratureConfig,
    phase: Phase,
    out: &mut [[c64; 3]],
) {
    let rule = excitation_rule(cfg, basis.order());
    let local = basis.local();
    let (mut vals, mut divs) = (Vec::new(), Vec::new());
    let pre = c64::new(0.0, k * ETA0 / (4.0 * std::f64::consts::PI));
    for c in 0..mesh.n_cells() {
        let dofs = basis.cell_dofs(c);
        if dofs.iter().all(|cd| coeffs[cd.dof] == c64::new(0.0, 0.0)) {
            continue;
        }
        for (xi, w) in rule.iter() {
            let mp = mesh.map(c, xi[0], xi[1]);
            local.eval_all(xi[0], xi[1], &mut vals, &mut divs);
            // Current density times dS (Jacobian cancels with Piola).
            let mut jd = [c64::new(0.0, 0.0); 3];
            for (cd, v) in dofs.iter().zip(&vals) {
                let pv = mp.push(*v);
                let a = coeffs[cd.dof] * (cd.sign * w);
                for d in 0..3 {
                    jd[d] += a * pv[d];
                }
            }
            for (r, acc) in dirs.iter().zip(out.iter_mut()) {
                let x = k * geom::dot(*r, mp.position);
                let ph = match phase {
                    Phase::Full => c64::new(x.cos(), x.sin()),
                    Phase::Subtracted => {
                        let h = (0.5 * x).sin();
                        c64::new(-2.0 * h * h, x.sin())
                    }
                };
                let rj = jd[0] * r[0] + jd[1] * r[1] + jd[2] * r[2];
                for d in 0..3 {
                    acc[d] += pre * ph * (jd[d] - rj * r[d]);
                }
            }
        }
    }
}

/// Radiation integral `(jk eta / 4 pi) int (I - r r) J exp(jk r . r') dS'`.
pub fn far_field(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    coeffs: &[c64],
    k: f64,
    dirs: &[Vec3],
    cfg: &QuadratureConfig,
) -> FarField {
    let mut out = vec![[c64::new(0.0, 0.0); 3]; dirs.len()];
    radiate(mesh, basis, coeffs, k, dirs, cfg, Phase::Full, &mut out);
    out
}

/// Far field of split currents: the solenoidal part is radiated with the
/// static phase subtracted (its mean vanishes on closed surfaces), which
/// avoids the cancellation of `O(1)` terms at low frequency.
pub fn far_field_split(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    j_sol: &[c64],
    j_nsol: &[c64],
    k: f64,
    dirs: &[Vec3],
    cfg: &QuadratureConfig,
) -> FarField {
    let mut out = vec![[c64::new(0.0, 0.0); 3]; dirs.len()];
    radiate(
        mesh,
        basis,
        j_sol,
        k,
        dirs,
        cfg,
        Phase::Subtracted,
        &mut out,
    );
    radiate(mesh, basis, j_nsol, k, dirs, cfg, Phase::Full, &mut out);
    out
}

/// Bistatic RCS `4 pi |F|^2 / |E0|^2` in square meters.
pub fn rcs(field: &[[c64; 3]], amplitude: f64) -> Vec<f64> {
    field
        .iter()
        .map(|f| {
            let s: f64 = f.iter().map(|z| z.norm_sqr()).sum();
            4.0 * std::f64::consts::PI * s / (amplitude * amplitude)
        })
        .collect()
}

pub fn to_dbsm(sigma: f64) -> f64 {
    10.0 * sigma.log10()
}

/// Surface current density at a reference point of a cell.
pub fn sample_current(
    mesh: &SurfaceMesh,
    basis: &BasisSpace,
    coeffs: &[c64],
    cell: usize,
    xi: [f64; 2],
) -> Result<[c64; 3]> {
    if coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: coeffs.len(),
        });
    }
    let mut out = [c64::new(0.0, 0.0); 3];
    for v in basis.evaluate(mesh, cell, xi)? {
        for d in 0..3 {
            out[d] += coeffs[v.dof] * v.value[d];
        }
    }
    Ok(out)
}
