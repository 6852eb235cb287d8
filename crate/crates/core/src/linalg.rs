//! Dense and iterative linear-algebra helpers on complex vectors.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seed of the start vector of the power and Lanczos norm estimates.
pub const NORM_START_SEED: u64 = 0x5eed;

/// Largest dimension for which dense SVDs are attempted.
pub const DENSE_LIMIT: usize = 4000;

pub fn norm(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `x^H y`.
pub fn dotc(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn axpy(alpha: c64, x: &[c64], y: &mut [c64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[c64], b: &[c64]) -> Vec<c64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(alpha: c64, x: &[c64]) -> Vec<c64> {
    x.iter().map(|v| alpha * v).collect()
}

/// `||a - b|| / ||b||`, or `||a||` when `b` vanishes.
pub fn relative_error(a: &[c64], b: &[c64]) -> f64 {
    let nb = norm(b);
    let d = norm(&sub(a, b));
    if nb == 0.0 {
        d
    } else {
        d / nb
    }
}

/// Deterministic random complex vector with entries uniform in the unit
/// square.
pub fn random_vector(n: usize, seed: u64) -> Vec<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn matvec(a: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

/// `A^H x`
pub fn matvec_adjoint(a: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    (0..a.ncols())
        .map(|j| {
            let col = a.col(j);
            (0..a.nrows()).map(|i| col[i].conj() * x[i]).sum()
        })
        .collect()
}

pub fn column_vector(x: &[c64]) -> Mat<c64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

pub fn frobenius(a: &Mat<c64>) -> f64 {
    a.norm_l2()
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &Mat<c64>) -> Result<Vec<f64>> {
    let n = a.nrows().max(a.ncols());
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimit {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    a.singular_values().map_err(|_| Error::SvdFailed)
}

/// 2-norm condition number from a full SVD.
pub fn condition_number(a: &Mat<c64>) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let s = singular_values(a)?;
    let smin = *s.last().ok_or(Error::SingularMatrix)?;
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(s[0] / smin)
}

/// Dense LU solve with partial pivoting.
pub fn lu_solve(a: &Mat<c64>, b: &[c64]) -> Result<Vec<c64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let lu = a.partial_piv_lu();
    let x = lu.solve(column_vector(b));
    let out: Vec<c64> = (0..b.len()).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(out)
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug)]
pub struct IterativeSolution {
    pub x: Vec<c64>,
    pub iterations: usize,
    /// Final relative residual `||b - A x|| / ||b||`.
    pub residual: f64,
}

/// Restarted GMRES with modified Gram-Schmidt Arnoldi and Givens rotations.
/// Restarts until the true residual meets `tol`; a cycle that fails to
/// reduce it is reported as stagnation.
pub fn gmres<F>(
    apply: F,
    b: &[c64],
    restart: usize,
    tol: f64,
    max_iter: usize,
) -> Result<IterativeSolution>
where
    F: Fn(&[c64]) -> Vec<c64>,
{
    let s = gmres_best_effort(apply, b, restart, tol, max_iter);
    if s.residual > tol {
        return Err(Error::GmresStagnation {
            iterations: s.iterations,
            residual: s.residual,
        });
    }
    Ok(s)
}

/// As [`gmres`], but returns the last iterate even when `tol` was not met.
pub fn gmres_best_effort<F>(
    apply: F,
    b: &[c64],
    restart: usize,
    tol: f64,
    max_iter: usize,
) -> IterativeSolution
where
    F: Fn(&[c64]) -> Vec<c64>,
{
    let n = b.len();
    let zero = c64::new(0.0, 0.0);
    let bnorm = norm(b);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return IterativeSolution {
            x,
            iterations: 0,
            residual: 0.0,
        };
    }
    let m = restart.max(1);
    let mut total = 0;
    let mut previous = f64::INFINITY;
    let mut residual;
    loop {
        // True residual at every restart.
        let r = sub(b, &apply(&x));
        let beta = norm(&r);
        residual = beta / bnorm;
        if residual <= tol || total >= max_iter || residual > previous * (1.0 - 1e-6) {
            break;
        }
        previous = residual;
        let mut v: Vec<Vec<c64>> = vec![scale(c64::new(1.0 / beta, 0.0), &r)];
        let mut h = vec![vec![zero; m]; m + 1];
        let mut cs = vec![zero; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = c64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            if total >= max_iter {
                break;
            }
            total += 1;
            let mut w = apply(&v[k]);
            for (i, vi) in v.iter().enumerate() {
                let hik = dotc(vi, &w);
                h[i][k] = hik;
                axpy(-hik, vi, &mut w);
            }
            let hn = norm(&w);
            h[k + 1][k] = c64::new(hn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if d == 0.0 {
                cs[k] = c64::new(1.0, 0.0);
                sn[k] = zero;
            } else {
                cs[k] = a / d;
                sn[k] = bb / d;
            }
            h[k][k] = c64::new(d, 0.0);
            h[k + 1][k] = zero;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            if g[k + 1].norm() / bnorm <= tol || hn == 0.0 {
                break;
            }
            v.push(scale(c64::new(1.0 / hn, 0.0), &w));
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] == zero { zero } else { s / h[i][i] };
        }
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &v[j], &mut x);
        }
    }
    IterativeSolution {
        x,
        iterations: total,
        residual,
    }
}

/// Spectral norm `||A||_2` by power iteration on `A^H A`, stopping when
/// the estimate changes by less than `tol` relative.
pub fn power_norm<F, G>(
    apply: F,
    apply_adjoint: G,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(&[c64]) -> Vec<c64>,
    G: Fn(&[c64]) -> Vec<c64>,
{
    let mut x = random_vector(n, NORM_START_SEED);
    let nx = norm(&x);
    x = scale(c64::new(1.0 / nx, 0.0), &x);
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let y = apply_adjoint(&apply(&x));
        let lambda = dotc(&x, &y).re.max(0.0);
        let ny = norm(&y);
        let next = lambda.sqrt();
        if ny == 0.0 {
            return Ok(0.0);
        }
        x = scale(c64::new(1.0 / ny, 0.0), &y);
        if (next - estimate).abs() <= tol * next {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::PowerIterationNotConverged(max_iter))
}

/// Spectral norm `||A||_2` by Lanczos on `A^H A` with full
/// reorthogonalization; stops when the largest Ritz value changes by less
/// than `tol` relative. Converges far faster than power iteration when the
/// top singular values are clustered.
pub fn lanczos_norm<F, G>(
    apply: F,
    apply_adjoint: G,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(&[c64]) -> Vec<c64>,
    G: Fn(&[c64]) -> Vec<c64>,
{
    let x = random_vector(n, NORM_START_SEED);
    let mut q: Vec<Vec<c64>> = vec![scale(c64::new(1.0 / norm(&x), 0.0), &x)];
    let (mut alpha, mut beta) = (Vec::new(), Vec::<f64>::new());
    let mut estimate = 0.0;
    for it in 0..max_iter.min(n) {
        let mut w = apply_adjoint(&apply(&q[it]));
        alpha.push(dotc(&q[it], &w).re);
        for _ in 0..2 {
            for qi in &q {
                let d = dotc(qi, &w);
                axpy(-d, qi, &mut w);
            }
        }
        let m = alpha.len();
        let t = Mat::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i == j + 1 {
                beta[j]
            } else if j == i + 1 {
                beta[i]
            } else {
                0.0
            }
        });
        let ev = t
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|_| Error::PowerIterationNotConverged(it + 1))?;
        let next = ev.last().copied().unwrap_or(0.0).max(0.0).sqrt();
        let b = norm(&w);
        if (next - estimate).abs() <= tol * next || b <= 1e-14 * next || next == 0.0 {
            return Ok(next);
        }
        estimate = next;
        beta.push(b);
        q.push(scale(c64::new(1.0 / b, 0.0), &w));
    }
    if max_iter >= n {
        return Ok(estimate);
    }
    Err(Error::PowerIterationNotConverged(max_iter))
}

pub fn power_norm_dense(a: &Mat<c64>, tol: f64, max_iter: usize) -> Result<f64> {
    power_norm(
        |x| matvec(a, x),
        |x| matvec_adjoint(a, x),
        a.ncols(),
        tol,
        max_iter,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> Mat<c64> {
        Mat::from_fn(values.len(), values.len(), |i, j| {
            c64::new(if i == j { values[i] } else { 0.0 }, 0.0)
        })
    }

    #[test]
    fn condition_of_simple_matrices() {
        assert!((condition_number(&diag(&[1.0, 1.0, 1.0])).unwrap() - 1.0).abs() < 1e-14);
        assert!((condition_number(&diag(&[10.0, 1e-3])).unwrap() - 1e4).abs() < 1e-8);
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let n = power_norm_dense(&diag(&[3.0, 1.0]), 1e-10, 1000).unwrap();
        assert!((n - 3.0).abs() < 1e-8);
    }

    #[test]
    fn lanczos_matches_svd_on_clustered_spectrum() {
        let vals: Vec<f64> = (0..80).map(|i| 5.0 - 1e-4 * i as f64).collect();
        let a = diag(&vals);
        let l = lanczos_norm(|x| matvec(&a, x), |x| matvec_adjoint(&a, x), 80, 1e-12, 200).unwrap();
        assert!((l - 5.0).abs() < 1e-4 * 5.0);
    }

    #[test]
    fn gmres_matches_lu() {
        let n = 60;
        let a = Mat::from_fn(n, n, |i, j| {
            let d = if i == j { 4.0 } else { 0.0 };
            c64::new(
                d + ((i * 3 + j * 5) % 7) as f64 / 10.0,
                (i as f64 - j as f64) / 50.0,
            )
        });
        let b = random_vector(n, 3);
        let direct = lu_solve(&a, &b).unwrap();
        let it = gmres(|x| matvec(&a, x), &b, 10, 1e-12, 1000).unwrap();
        assert!(relative_error(&it.x, &direct) < 1e-10);
        assert!(it.residual <= 1e-12);
    }

    #[test]
    fn adjoint_matvec() {
        let a = Mat::from_fn(3, 2, |i, j| c64::new(i as f64, j as f64 + 1.0));
        let x = random_vector(2, 1);
        let y = random_vector(3, 2);
        let lhs = dotc(&y, &matvec(&a, &x));
        let rhs = dotc(&matvec_adjoint(&a, &y), &x);
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
