//! Quasi-Helmholtz projectors from the high-order Star matrix.
//!
//! `P_sigma = Sigma (Sigma^T Sigma)^+ Sigma^T` projects onto the
//! non-solenoidal coefficient space and `P_lh = I - P_sigma` onto the
//! solenoidal one (local loops plus global cycles, never constructed).
//! The pseudo-inverse is applied by deflated conjugate gradients; the
//! right null space of `Sigma` (one vector per body) is projected out.

mod star;

pub use star::{StarMatrix, StarVariant};

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, Side};
use rayon::prelude::*;

use crate::basis::{BasisSpace, ChargeSpace};
use crate::error::{Error, Result};
use crate::linalg::{self, norm};
use crate::mesh::SurfaceMesh;

pub const DEFAULT_CG_TOL: f64 = 1e-10;

/// Largest `N_p` for which the SVD oracle is offered.
pub const SVD_ORACLE_LIMIT: usize = 2000;

/// Convergence record of one pseudo-inverse application.
#[derive(Clone, Debug, Default)]
pub struct CgReport {
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// The projector pair for one Star matrix.
#[derive(Clone, Debug)]
pub struct ProjectorPair {
    sigma: Arc<StarMatrix>,
    deflation: Vec<Vec<f64>>,
    inv_diag: Vec<f64>,
    pub cg_tol: f64,
    pub max_iter: usize,
}

fn project_out(z: &mut [c64], deflation: &[Vec<f64>]) {
    for d in deflation {
        let c: c64 = d.iter().zip(z.iter()).map(|(a, b)| b * a).sum();
        for (zi, di) in z.iter_mut().zip(d) {
            *zi -= c * di;
        }
    }
}

impl ProjectorPair {
    pub fn new(sigma: StarMatrix, mesh: &SurfaceMesh) -> Result<Self> {
        let topo = mesh.topology()?;
        let deflation = sigma.deflation_vectors(&topo.body_of_cell, topo.n_bodies);
        let inv_diag = sigma
            .gram_diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 0.0 })
            .collect();
        let max_iter = 10 * sigma.ncols();
        Ok(Self {
            sigma: Arc::new(sigma),
            deflation,
            inv_diag,
            cg_tol: DEFAULT_CG_TOL,
            max_iter,
        })
    }

    /// Builds the charge space and Star matrix for `basis` and wraps them.
    pub fn build(mesh: &SurfaceMesh, basis: &BasisSpace, variant: StarVariant) -> Result<Self> {
        let charge = ChargeSpace::new(mesh, basis.order())?;
        Self::new(StarMatrix::assemble(basis, &charge, variant)?, mesh)
    }

    pub fn with_tolerance(mut self, cg_tol: f64) -> Self {
        self.cg_tol = cg_tol;
        self
    }

    pub fn sigma(&self) -> &StarMatrix {
        &self.sigma
    }

    pub fn deflation(&self) -> &[Vec<f64>] {
        &self.deflation
    }

    pub fn len(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.nrows() == 0
    }

    fn precondition(&self, r: &[c64]) -> Vec<c64> {
        let mut s = r.to_vec();
        project_out(&mut s, &self.deflation);
        for (si, d) in s.iter_mut().zip(&self.inv_diag) {
            *si *= *d;
        }
        project_out(&mut s, &self.deflation);
        s
    }

    /// Solves `Sigma^T Sigma z = b` on the complement of the null space by
    /// Jacobi-preconditioned deflated CG.
    pub fn solve_normal(&self, b: &[c64]) -> Result<(Vec<c64>, CgReport)> {
        let m = self.sigma.ncols();
        let zero = c64::new(0.0, 0.0);
        let mut rhs = b.to_vec();
        project_out(&mut rhs, &self.deflation);
        let bnorm = norm(&rhs);
        let mut x = vec![zero; m];
        let mut report = CgReport::default();
        if bnorm == 0.0 {
            return Ok((x, report));
        }
        let mut r = rhs;
        let mut s = self.precondition(&r);
        let mut p = s.clone();
        let mut rs = linalg::dotc(&r, &s).re;
        for it in 1..=self.max_iter {
            let mut q = self.sigma.apply_transpose(&self.sigma.apply(&p));
            project_out(&mut q, &self.deflation);
            let pq = linalg::dotc(&p, &q).re;
            if pq <= 0.0 {
                break;
            }
            let alpha = rs / pq;
            linalg::axpy(c64::new(alpha, 0.0), &p, &mut x);
            linalg::axpy(c64::new(-alpha, 0.0), &q, &mut r);
            let rel = norm(&r) / bnorm;
            report.history.push(rel);
            report.iterations = it;
            if rel <= self.cg_tol {
                return Ok((x, report));
            }
            s = self.precondition(&r);
            let rs_new = linalg::dotc(&r, &s).re;
            let beta = rs_new / rs;
            rs = rs_new;
            for (pi, si) in p.iter_mut().zip(&s) {
                *pi = si + *pi * beta;
            }
        }
        Err(Error::CgNotConverged {
            iterations: report.iterations,
            history: report.history,
        })
    }

    /// `P_sigma x` with its CG record.
    pub fn apply_psigma_report(&self, x: &[c64]) -> Result<(Vec<c64>, CgReport)> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        let (z, report) = self.solve_normal(&self.sigma.apply_transpose(x))?;
        Ok((self.sigma.apply(&z), report))
    }

    pub fn apply_psigma(&self, x: &[c64]) -> Result<Vec<c64>> {
        Ok(self.apply_psigma_report(x)?.0)
    }

    /// `P_lh x = x - P_sigma x`
    pub fn apply_plh(&self, x: &[c64]) -> Result<Vec<c64>> {
        let ps = self.apply_psigma(x)?;
        Ok(linalg::sub(x, &ps))
    }

    /// Dense `P_sigma` from matrix-free applications to every unit vector.
    pub fn dense_psigma_iterative(&self) -> Result<Mat<f64>> {
        let n = self.len();
        let cols: Vec<Result<Vec<c64>>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![c64::new(0.0, 0.0); n];
                e[j] = c64::new(1.0, 0.0);
                self.apply_psigma(&e)
            })
            .collect();
        let mut out = Mat::<f64>::zeros(n, n);
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col?.into_iter().enumerate() {
                out[(i, j)] = v.re;
            }
        }
        Ok(out)
    }

    /// Dense `P_sigma` from a Cholesky factorization of the deflated Gram
    /// matrix `Sigma^T Sigma + Z Z^T`, whose inverse equals
    /// `(Sigma^T Sigma)^+ + Z Z^T`. Since `Sigma Z = 0` this gives
    /// `Sigma (Sigma^T Sigma + Z Z^T)^{-1} Sigma^T = P_sigma`.
    pub fn dense_psigma(&self) -> Result<Mat<f64>> {
        let n = self.len();
        let m = self.sigma.ncols();
        let s = self.sigma.to_dense();
        let mut gram = s.transpose() * &s;
        for z in &self.deflation {
            for i in 0..m {
                if z[i] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    gram[(i, j)] += z[i] * z[j];
                }
            }
        }
        let llt = gram.llt(Side::Lower).map_err(|_| Error::SingularMatrix)?;
        let y = llt.solve(s.transpose().to_owned());
        let mut p = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for (c, v) in self.sigma.row(i) {
                for j in 0..n {
                    p[(i, j)] += v * y[(c, j)];
                }
            }
        }
        // Symmetrize away rounding.
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (p[(i, j)] + p[(j, i)]);
                p[(i, j)] = v;
                p[(j, i)] = v;
            }
        }
        Ok(p)
    }
}

/// Dense `P_sigma = U_r U_r^T` from the SVD of `Sigma`, with the numerical
/// rank `r`; the oracle for `N_p <= SVD_ORACLE_LIMIT`.
pub fn svd_psigma(sigma: &StarMatrix) -> Result<(Mat<f64>, usize)> {
    if sigma.nrows() > SVD_ORACLE_LIMIT {
        return Err(Error::DenseLimit {
            size: sigma.nrows(),
            limit: SVD_ORACLE_LIMIT,
        });
    }
    let s = sigma.to_dense();
    let svd = s.thin_svd().map_err(|_| Error::SvdFailed)?;
    let sv: Vec<f64> = (0..svd.S().dim()).map(|i| svd.S()[i]).collect();
    let r = numerical_rank(&sv);
    let u = svd.U().get(.., ..r).to_owned();
    Ok((&u * u.transpose(), r))
}

fn numerical_rank(sv: &[f64]) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    let tol = smax * 1e-10;
    sv.iter().filter(|s| **s > tol).count()
}

/// Numerical rank of `Sigma` from its singular values.
pub fn star_rank(sigma: &StarMatrix) -> Result<usize> {
    let n = sigma.nrows().max(sigma.ncols());
    if n > linalg::DENSE_LIMIT {
        return Err(Error::DenseLimit {
            size: n,
            limit: linalg::DENSE_LIMIT,
        });
    }
    let sv = sigma
        .to_dense()
        .singular_values()
        .map_err(|_| Error::SvdFailed)?;
    Ok(numerical_rank(&sv))
}

/// Largest `||P_a x - P_b x||` over `trials` random unit vectors.
pub fn verify_invariance(
    a: &ProjectorPair,
    b: &ProjectorPair,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut x = linalg::random_vector(a.len(), seed.wrapping_add(t as u64));
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let pa = a.apply_psigma(&x)?;
        let pb = b.apply_psigma(&x)?;
        worst = worst.max(norm(&linalg::sub(&pa, &pb)));
    }
    Ok(worst)
}

/// `P x` for a real dense projector and a complex vector.
pub fn apply_dense(p: &Mat<f64>, x: &[c64]) -> Vec<c64> {
    (0..p.nrows())
        .map(|i| (0..p.ncols()).map(|j| x[j] * p[(i, j)]).sum())
        .collect()
}
