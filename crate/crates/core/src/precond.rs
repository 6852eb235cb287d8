//! Projector-based preconditioning of the EFIE.
//!
//! With `P = j sqrt(k/C) P_sigma + sqrt(C/k) P_lh` the system `P T P y = P e`
//! is assembled term by term,
//!
//! ```text
//! P T P = jC P_lh T_s P_lh + (j/C) T_h - k P_lh T_s P_sigma
//!         - k P_sigma T_s P_lh - (j k^2 / C) P_sigma T_s P_sigma,
//! ```
//!
//! so `P_lh T_h` never appears: the cancellation holds structurally. The
//! right-hand side uses the static-subtracted excitation on the solenoidal
//! side, and the current is recovered as `j_sol + j_nsol = P y`.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, IterativeSolution};
use crate::operators::{EfieBlocks, Excitation};
use crate::projectors::{apply_dense, ProjectorPair};

/// A way to apply `P_sigma`: matrix-free (CG) or a dense real matrix.
#[derive(Clone, Copy)]
pub enum Projector<'a> {
    Iterative(&'a ProjectorPair),
    Dense(&'a Mat<f64>),
}

impl Projector<'_> {
    pub fn psigma(&self, x: &[c64]) -> Result<Vec<c64>> {
        match self {
            Projector::Iterative(pp) => pp.apply_psigma(x),
            Projector::Dense(p) => Ok(apply_dense(p, x)),
        }
    }

    pub fn plh(&self, x: &[c64]) -> Result<Vec<c64>> {
        Ok(linalg::sub(x, &self.psigma(x)?))
    }
}

/// Iteration used for the spectral norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    /// Krylov-accelerated power iteration.
    Lanczos,
    /// Plain power iteration.
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSettings {
    pub method: NormMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            method: NormMethod::Lanczos,
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

impl PowerSettings {
    fn norm<F, G>(&self, apply: F, apply_adjoint: G, n: usize) -> Result<f64>
    where
        F: Fn(&[c64]) -> Vec<c64>,
        G: Fn(&[c64]) -> Vec<c64>,
    {
        match self.method {
            NormMethod::Lanczos => {
                linalg::lanczos_norm(apply, apply_adjoint, n, self.tol, self.max_iter)
            }
            NormMethod::Power => {
                linalg::power_norm(apply, apply_adjoint, n, self.tol, self.max_iter)
            }
        }
    }
}

/// `C = sqrt(||T_h||_2 / ||P_lh T_s P_lh||_2)`, both spectral norms by
/// power-type iteration.
pub fn estimate_c(
    blocks: &EfieBlocks,
    proj: Projector<'_>,
    settings: PowerSettings,
) -> Result<f64> {
    let n = blocks.len();
    let th = settings.norm(
        |x| linalg::matvec(&blocks.th, x),
        |x| linalg::matvec_adjoint(&blocks.th, x),
        n,
    )?;
    let err = std::cell::RefCell::new(None);
    let fwd = |x: &[c64]| -> Vec<c64> {
        let run = || -> Result<Vec<c64>> {
            let a = proj.plh(x)?;
            proj.plh(&linalg::matvec(&blocks.ts, &a))
        };
        run().unwrap_or_else(|e| {
            *err.borrow_mut() = Some(e);
            vec![c64::new(0.0, 0.0); n]
        })
    };
    let adj = |x: &[c64]| -> Vec<c64> {
        let run = || -> Result<Vec<c64>> {
            let a = proj.plh(x)?;
            proj.plh(&linalg::matvec_adjoint(&blocks.ts, &a))
        };
        run().unwrap_or_else(|e| {
            *err.borrow_mut() = Some(e);
            vec![c64::new(0.0, 0.0); n]
        })
    };
    let ts = settings.norm(fwd, adj, n)?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    if ts == 0.0 || !ts.is_finite() {
        return Err(Error::ZeroSolenoidalNorm);
    }
    let c = (th / ts).sqrt();
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::ZeroSolenoidalNorm);
    }
    Ok(c)
}

fn to_complex(p: &Mat<f64>) -> Mat<c64> {
    Mat::from_fn(p.nrows(), p.ncols(), |i, j| c64::new(p[(i, j)], 0.0))
}

/// The five-term preconditioned matrix from a dense `P_sigma`.
///
/// Only two dense products are formed: `X = T_s P_sigma` and
/// `S = P_sigma X`; the symmetry of `T_s` and `P_sigma` gives
/// `P_sigma T_s = X^T`.
pub fn assemble_stabilized(blocks: &EfieBlocks, psigma: &Mat<f64>, c: f64, k: f64) -> Mat<c64> {
    let pc = to_complex(psigma);
    let x = &blocks.ts * &pc;
    let s = &pc * &x;
    let n = blocks.len();
    let j = c64::new(0.0, 1.0);
    let a_ll = j * c;
    let a_h = j / c;
    let a_x = c64::new(-k, 0.0);
    let a_ss = -j * (k * k / c);
    Mat::from_fn(n, n, |r, q| {
        let ts = blocks.ts[(r, q)];
        let xrq = x[(r, q)];
        let xqr = x[(q, r)];
        let srq = s[(r, q)];
        let ll = ts - xrq - xqr + srq;
        let ls = xrq - srq;
        let sl = xqr - srq;
        a_ll * ll + a_h * blocks.th[(r, q)] + a_x * (ls + sl) + a_ss * srq
    })
}

/// `P T P` computed literally from the dense preconditioner; for
/// cross-checks only (it forms `P_lh T_h P_lh`).
pub fn naive_stabilized(blocks: &EfieBlocks, psigma: &Mat<f64>, c: f64, k: f64) -> Mat<c64> {
    let n = blocks.len();
    let a = c64::new(0.0, (k / c).sqrt());
    let b = c64::new((c / k).sqrt(), 0.0);
    let p = Mat::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        a * psigma[(i, j)] + b * (id - psigma[(i, j)])
    });
    let t = blocks.system();
    let tp = &t * &p;
    &p * &tp
}

/// `j sqrt(k/C) P_sigma e + sqrt(C/k) P_lh e_sub`
pub fn build_rhs(proj: Projector<'_>, excitation: &Excitation, c: f64, k: f64) -> Result<Vec<c64>> {
    let ps = proj.psigma(&excitation.e)?;
    let pl = proj.plh(&excitation.e_sub)?;
    let a = c64::new(0.0, (k / c).sqrt());
    let b = (c / k).sqrt();
    Ok(ps.iter().zip(&pl).map(|(x, y)| a * x + y * b).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Lu,
    Gmres,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub kind: SolverKind,
    pub gmres_restart: usize,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            kind: SolverKind::Lu,
            gmres_restart: 50,
            gmres_tol: 1e-8,
            gmres_max_iter: 5000,
        }
    }
}

/// Solves `A x = b` by dense LU or restarted GMRES; the residual is always
/// recomputed from the returned solution.
pub fn solve_dense(
    a: &Mat<c64>,
    b: &[c64],
    settings: &SolverSettings,
) -> Result<IterativeSolution> {
    let (x, iterations) = match settings.kind {
        SolverKind::Lu => (linalg::lu_solve(a, b)?, 0),
        SolverKind::Gmres => {
            let s = linalg::gmres(
                |v| linalg::matvec(a, v),
                b,
                settings.gmres_restart,
                settings.gmres_tol,
                settings.gmres_max_iter,
            )?;
            (s.x, s.iterations)
        }
    };
    let bn = linalg::norm(b);
    let r = linalg::norm(&linalg::sub(b, &linalg::matvec(a, &x)));
    Ok(IterativeSolution {
        x,
        iterations,
        residual: if bn == 0.0 { r } else { r / bn },
    })
}

/// Solution of the stabilized system with the split currents.
#[derive(Clone, Debug)]
pub struct SplitSolution {
    pub y: Vec<c64>,
    pub j_sol: Vec<c64>,
    pub j_nsol: Vec<c64>,
    pub iterations: usize,
    pub residual: f64,
}

impl SplitSolution {
    pub fn current(&self) -> Vec<c64> {
        self.j_sol
            .iter()
            .zip(&self.j_nsol)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// `j_sol = sqrt(C/k) P_lh y`, `j_nsol = j sqrt(k/C) P_sigma y`.
pub fn recover_currents(
    proj: Projector<'_>,
    y: &[c64],
    c: f64,
    k: f64,
) -> Result<(Vec<c64>, Vec<c64>)> {
    let ps = proj.psigma(y)?;
    let pl = linalg::sub(y, &ps);
    let a = (c / k).sqrt();
    let b = c64::new(0.0, (k / c).sqrt());
    Ok((
        pl.iter().map(|v| v * a).collect(),
        ps.iter().map(|v| b * v).collect(),
    ))
}

/// Stabilized system, ready to solve.
#[derive(Clone, Debug)]
pub struct StabilizedSystem {
    pub matrix: Mat<c64>,
    pub rhs: Vec<c64>,
    pub c: f64,
    pub k: f64,
}

impl StabilizedSystem {
    pub fn new(
        blocks: &EfieBlocks,
        psigma: &Mat<f64>,
        excitation: &Excitation,
        c: f64,
    ) -> Result<Self> {
        let k = blocks.k;
        if !(k > 0.0) {
            return Err(Error::InvalidArgument(
                "stabilized system needs k > 0".into(),
            ));
        }
        Ok(Self {
            matrix: assemble_stabilized(blocks, psigma, c, k),
            rhs: build_rhs(Projector::Dense(psigma), excitation, c, k)?,
            c,
            k,
        })
    }

    pub fn solve(&self, psigma: &Mat<f64>, settings: &SolverSettings) -> Result<SplitSolution> {
        let s = solve_dense(&self.matrix, &self.rhs, settings)?;
        let (j_sol, j_nsol) = recover_currents(Projector::Dense(psigma), &s.x, self.c, self.k)?;
        Ok(SplitSolution {
            y: s.x,
            j_sol,
            j_nsol,
            iterations: s.iterations,
            residual: s.residual,
        })
    }
}

/// Unpreconditioned `T j = e`.
pub fn solve_plain(
    blocks: &EfieBlocks,
    excitation: &Excitation,
    settings: &SolverSettings,
) -> Result<IterativeSolution> {
    solve_dense(&blocks.system(), &excitation.e, settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovered_currents_sum_to_preconditioned_vector() {
        let n = 4;
        // A rank-2 orthogonal projector.
        let p = Mat::<f64>::from_fn(n, n, |i, j| if i == j && i < 2 { 1.0 } else { 0.0 });
        let y = linalg::random_vector(n, 5);
        let (c, k) = (3.0, 0.01);
        let (js, jn) = recover_currents(Projector::Dense(&p), &y, c, k).unwrap();
        for i in 0..n {
            let a = if i < 2 {
                c64::new(0.0, (k / c).sqrt())
            } else {
                c64::new((c / k).sqrt(), 0.0)
            };
            assert!((js[i] + jn[i] - a * y[i]).norm() < 1e-14 * (a * y[i]).norm());
        }
    }
}
