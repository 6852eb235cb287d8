//! Physics oracles and error metrics: Mie series for the PEC sphere,
//! SVD condition numbers, RCS comparisons.

use std::io::{self, Write};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::consts::wavenumber;
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::EfieBlocks;
use crate::{precond, projectors};
use faer::linalg::solvers::Solve;

/// Observation plane for a wave travelling along +z polarized along x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cut {
    /// `phi = 0`, containing the polarization.
    EPlane,
    /// `phi = 90 deg`.
    HPlane,
}

impl Cut {
    pub fn phi_deg(self) -> f64 {
        match self {
            Cut::EPlane => 0.0,
            Cut::HPlane => 90.0,
        }
    }
}

/// Mie series for plane-wave scattering by a PEC sphere.
#[derive(Clone, Debug)]
pub struct MieSolution {
    pub radius: f64,
    pub k: f64,
    pub n_terms: usize,
    a: Vec<c64>,
    b: Vec<c64>,
}

/// Default truncation `ceil(x + 4 x^(1/3) + 10)`.
pub fn default_terms(x: f64) -> usize {
    (x + 4.0 * x.cbrt() + 10.0).ceil() as usize
}

/// `j_n(x)` for `n = 0..=n_max`, from downward ratios `j_n / j_{n-1}`
/// anchored on whichever of `j_0`, `j_1` is larger.
fn spherical_j(n_max: usize, x: f64) -> Vec<f64> {
    let start = n_max + 30 + x as usize;
    let mut ratio = vec![0.0; start + 2];
    for n in (1..=start).rev() {
        ratio[n] = x / ((2 * n + 1) as f64 - x * ratio[n + 1]);
    }
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let mut out = vec![0.0; n_max + 1];
    if j0.abs() >= j1.abs() {
        out[0] = j0;
        for n in 1..=n_max {
            out[n] = out[n - 1] * ratio[n];
        }
    } else {
        out[0] = j0;
        if n_max >= 1 {
            out[1] = j1;
        }
        for n in 2..=n_max {
            out[n] = out[n - 1] * ratio[n];
        }
    }
    out
}

/// `y_n(x)` by upward recurrence (stable for the growing solution).
fn spherical_y(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    out[0] = -x.cos() / x;
    if n_max >= 1 {
        out[1] = -x.cos() / (x * x) - x.sin() / x;
    }
    for n in 1..n_max {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    out
}

impl MieSolution {
    pub fn new(radius: f64, k: f64, n_terms: Option<usize>) -> Result<Self> {
        if !(radius > 0.0 && k > 0.0) {
            return Err(Error::InvalidArgument("Mie series needs a, k > 0".into()));
        }
        let x = k * radius;
        let n_terms = n_terms.unwrap_or_else(|| default_terms(x));
        if (n_terms as f64) < x + 2.0 {
            return Err(Error::MieTruncation(n_terms));
        }
        let j = spherical_j(n_terms, x);
        let y = spherical_y(n_terms, x);
        // Riccati-Bessel psi = x j, xi = x (j - i y) and their derivatives.
        let psi: Vec<f64> = j.iter().map(|v| x * v).collect();
        let xi: Vec<c64> = j
            .iter()
            .zip(&y)
            .map(|(a, b)| c64::new(x * a, -x * b))
            .collect();
        let mut a = vec![c64::new(0.0, 0.0); n_terms + 1];
        let mut b = vec![c64::new(0.0, 0.0); n_terms + 1];
        for n in 1..=n_terms {
            let nf = n as f64;
            let dpsi = psi[n - 1] - nf * psi[n] / x;
            let dxi = xi[n - 1] - xi[n] * (nf / x);
            a[n] = c64::new(dpsi, 0.0) / dxi;
            b[n] = c64::new(psi[n], 0.0) / xi[n];
        }
        Ok(Self {
            radius,
            k,
            n_terms,
            a,
            b,
        })
    }

    pub fn from_frequency(radius: f64, freq_hz: f64) -> Result<Self> {
        Self::new(radius, wavenumber(freq_hz), None)
    }

    /// Amplitudes `(S1, S2)` at scattering angle `theta` (radians).
    pub fn amplitudes(&self, theta: f64) -> (c64, c64) {
        let mu = theta.cos();
        let (mut pi_prev, mut pi) = (0.0, 1.0);
        let mut s1 = c64::new(0.0, 0.0);
        let mut s2 = c64::new(0.0, 0.0);
        for n in 1..=self.n_terms {
            let nf = n as f64;
            let tau = nf * mu * pi - (nf + 1.0) * pi_prev;
            let f = (2.0 * nf + 1.0) / (nf * (nf + 1.0));
            s1 += (self.a[n] * pi + self.b[n] * tau) * f;
            s2 += (self.a[n] * tau + self.b[n] * pi) * f;
            let next = ((2.0 * nf + 1.0) * mu * pi - (nf + 1.0) * pi_prev) / nf;
            pi_prev = pi;
            pi = next;
        }
        (s1, s2)
    }

    /// Bistatic RCS in square meters at `theta` (radians from forward).
    pub fn rcs(&self, theta: f64, cut: Cut) -> f64 {
        let (s1, s2) = self.amplitudes(theta);
        let s = match cut {
            Cut::EPlane => s2,
            Cut::HPlane => s1,
        };
        4.0 * std::f64::consts::PI * s.norm_sqr() / (self.k * self.k)
    }

    /// Extinction cross-section from the forward amplitude.
    pub fn extinction(&self) -> f64 {
        let (s1, _) = self.amplitudes(0.0);
        4.0 * std::f64::consts::PI / (self.k * self.k) * s1.re
    }

    pub fn scattering(&self) -> f64 {
        let sum: f64 = (1..=self.n_terms)
            .map(|n| (2 * n + 1) as f64 * (self.a[n].norm_sqr() + self.b[n].norm_sqr()))
            .sum();
        2.0 * std::f64::consts::PI / (self.k * self.k) * sum
    }
}

/// Mie RCS samples `(m^2, dBsm)` for a sphere of radius `a` at `freq_hz`.
pub fn mie_rcs(a: f64, freq_hz: f64, theta_deg: &[f64], cut: Cut) -> Result<(Vec<f64>, Vec<f64>)> {
    let mie = MieSolution::from_frequency(a, freq_hz)?;
    let m2: Vec<f64> = theta_deg
        .iter()
        .map(|t| mie.rcs(t.to_radians(), cut))
        .collect();
    let db = m2.iter().map(|s| 10.0 * s.log10()).collect();
    Ok((m2, db))
}

/// 2-norm condition number by full SVD.
pub fn condition_number(m: &Mat<c64>) -> Result<f64> {
    linalg::condition_number(m)
}

/// Settings for the Krylov norm estimates behind the structured
/// condition number.
const NORM_TOL: f64 = 1e-10;
const NORM_MAX_ITER: usize = 1000;

/// 2-norm condition number of the plain EFIE matrix `T`, evaluated through
/// the exact factorization `T^{-1} = P M^{-1} P` with the well-conditioned
/// stabilized matrix `M = P T P`. Unlike an SVD of `T`, which cannot
/// resolve condition numbers beyond about `1e16`, every factor here is
/// well scaled; both norms are Lanczos estimates.
pub fn plain_condition_structured(blocks: &EfieBlocks, psigma: &Mat<f64>, c: f64) -> Result<f64> {
    let k = blocks.k;
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(
            "structured condition number needs k > 0".into(),
        ));
    }
    let n = blocks.len();
    let t = blocks.system();
    let t_norm = linalg::lanczos_norm(
        |x| linalg::matvec(&t, x),
        |x| linalg::matvec_adjoint(&t, x),
        n,
        NORM_TOL,
        NORM_MAX_ITER,
    )?;
    drop(t);
    let m = precond::assemble_stabilized(blocks, psigma, c, k);
    let lu = m.partial_piv_lu();
    let a = c64::new(0.0, (k / c).sqrt());
    let b = (c / k).sqrt();
    // P x and P^H x, with P = a P_sigma + b P_lh.
    let apply_p = |x: &[c64], alpha: c64| -> Vec<c64> {
        let ps = projectors::apply_dense(psigma, x);
        x.iter()
            .zip(&ps)
            .map(|(xi, pi)| alpha * pi + (xi - pi) * b)
            .collect()
    };
    let col = |v: &[c64]| linalg::column_vector(v);
    let back = |m: Mat<c64>| -> Vec<c64> { (0..m.nrows()).map(|i| m[(i, 0)]).collect() };
    let inv_norm = linalg::lanczos_norm(
        |x| apply_p(&back(lu.solve(col(&apply_p(x, a)))), a),
        |x| {
            apply_p(
                &back(lu.solve_adjoint(col(&apply_p(x, a.conj())))),
                a.conj(),
            )
        },
        n,
        NORM_TOL,
        NORM_MAX_ITER,
    )?;
    Ok(t_norm * inv_norm)
}

const NULL_DEPTH_DB: f64 = 60.0;

/// Differences of two dB curves on the same grid, skipping points more
/// than 60 dB below either curve's maximum.
fn compared_differences(computed: &[f64], oracle: &[f64]) -> Result<Vec<f64>> {
    if computed.len() != oracle.len() || computed.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: oracle.len(),
            got: computed.len(),
        });
    }
    let max_c = computed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_o = oracle.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let d: Vec<f64> = computed
        .iter()
        .zip(oracle)
        .filter(|(c, o)| **c >= max_c - NULL_DEPTH_DB && **o >= max_o - NULL_DEPTH_DB)
        .map(|(c, o)| c - o)
        .collect();
    if d.is_empty() {
        return Err(Error::InvalidArgument("no comparable samples".into()));
    }
    Ok(d)
}

/// RMS difference of two dB curves, ignoring nulls deeper than 60 dB.
pub fn rcs_error(computed: &[f64], oracle: &[f64]) -> Result<f64> {
    let d = compared_differences(computed, oracle)?;
    Ok((d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt())
}

/// Largest absolute difference of two dB curves, ignoring nulls deeper
/// than 60 dB.
pub fn rcs_max_deviation(computed: &[f64], oracle: &[f64]) -> Result<f64> {
    let d = compared_differences(computed, oracle)?;
    Ok(d.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

/// `rcs_error` after shifting both curves to a 0 dB peak.
pub fn rcs_error_normalized(computed: &[f64], oracle: &[f64]) -> Result<f64> {
    let shift = |v: &[f64]| -> Vec<f64> {
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        v.iter().map(|x| x - m).collect()
    };
    rcs_error(&shift(computed), &shift(oracle))
}

/// Angle grids must match sample for sample.
pub fn check_same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::InvalidArgument("angle grids differ".into()));
    }
    Ok(())
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Writes `angle_deg,sigma_dbsm` rows.
pub fn write_curve_csv(theta_deg: &[f64], dbsm: &[f64], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "angle_deg,sigma_dbsm")?;
    for (t, s) in theta_deg.iter().zip(dbsm) {
        writeln!(w, "{t},{s}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_values() {
        let x = 2.5;
        let j = spherical_j(3, x);
        let y = spherical_y(3, x);
        assert!((j[0] - x.sin() / x).abs() < 1e-15);
        let j2 = (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
        assert!((j[2] - j2).abs() < 1e-14);
        // Wronskian j_n y_{n-1} - j_{n-1} y_n = 1 / x^2.
        for n in 1..=3 {
            assert!((j[n] * y[n - 1] - j[n - 1] * y[n] - 1.0 / (x * x)).abs() < 1e-13);
        }
    }

    #[test]
    fn rayleigh_backscatter() {
        let a = 1.0;
        let k = 1e-3;
        let mie = MieSolution::new(a, k, None).unwrap();
        let ratio = mie.rcs(std::f64::consts::PI, Cut::EPlane) / (std::f64::consts::PI * a * a);
        let want = 9.0 * (k * a).powi(4);
        assert!((ratio / want - 1.0).abs() < 0.01, "{ratio} vs {want}");
    }

    #[test]
    fn optical_limit() {
        let mie = MieSolution::new(1.0, 50.0, None).unwrap();
        let ratio = mie.rcs(std::f64::consts::PI, Cut::EPlane) / std::f64::consts::PI;
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn optical_theorem() {
        for ka in [0.1, 1.0, 2.0 * std::f64::consts::PI, 20.0] {
            let mie = MieSolution::new(1.0, ka, None).unwrap();
            let (e, s) = (mie.extinction(), mie.scattering());
            assert!((e - s).abs() < 1e-8 * s, "ka={ka}: {e} vs {s}");
        }
    }

    #[test]
    fn truncation_is_certified() {
        let ka = 2.0 * std::f64::consts::PI;
        let m0 = MieSolution::new(1.0, ka, None).unwrap();
        let m5 = MieSolution::new(1.0, ka, Some(m0.n_terms + 5)).unwrap();
        for t in [0.0, 0.7, 1.9, 3.1] {
            for cut in [Cut::EPlane, Cut::HPlane] {
                let (a, b) = (m0.rcs(t, cut), m5.rcs(t, cut));
                assert!((a - b).abs() < 1e-10 * b);
            }
        }
        assert!(matches!(
            MieSolution::new(1.0, 40.0, Some(10)),
            Err(Error::MieTruncation(10))
        ));
    }

    #[test]
    fn error_metric() {
        let a = vec![1.0, 2.0, -3.0];
        assert_eq!(rcs_error(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        assert!((rcs_error(&b, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(rcs_error(&a[..2], &a).is_err());
    }

    #[test]
    fn condition_is_scale_invariant() {
        let m = Mat::from_fn(5, 5, |i, j| {
            c64::new((i * j + 1) as f64, if i == j { 3.0 } else { 0.1 })
        });
        let c1 = condition_number(&m).unwrap();
        let scaled = Mat::from_fn(5, 5, |i, j| m[(i, j)] * c64::new(0.0, -7.5));
        let c2 = condition_number(&scaled).unwrap();
        assert!((c1 - c2).abs() < 1e-12 * c1);
    }
}
