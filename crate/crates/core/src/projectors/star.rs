use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::basis::{BasisSpace, ChargeSpace};
use crate::error::{Error, Result};

/// Choice of the injective functional that turns a cell-wise divergence
/// polynomial into charge coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarVariant {
    /// `int sigma_m div psi_n` (reference integral, Jacobian-free).
    LagrangeTested,
    /// Reference divergence sampled at the charge nodes.
    NodeSampled,
    /// Reference divergence tested against orthonormal polynomials.
    OrthonormalTested,
}

impl StarVariant {
    pub const ALL: [StarVariant; 3] = [
        StarVariant::LagrangeTested,
        StarVariant::NodeSampled,
        StarVariant::OrthonormalTested,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StarVariant::LagrangeTested => "lagrange-tested",
            StarVariant::NodeSampled => "node-sampled",
            StarVariant::OrthonormalTested => "orthonormal-tested",
        }
    }
}

impl fmt::Display for StarVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StarVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StarVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown Star variant '{s}'")))
    }
}

/// Sparse real `N_p x M_p` Star matrix in compressed rows, with its
/// transpose kept alongside for `Sigma^T` products.
#[derive(Clone, Debug)]
pub struct StarMatrix {
    variant: StarVariant,
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    t_ptr: Vec<usize>,
    t_idx: Vec<usize>,
    t_values: Vec<f64>,
    /// Charge functions per cell.
    n_local: usize,
    /// Per-cell charge coefficients of the constant density, expressed in
    /// this variant's coordinates (see `deflation_vectors`).
    local_constant: Vec<f64>,
}

/// `local[f][k]`: functional `k` applied to the reference divergence of
/// local function `f`.
fn local_matrix(basis: &BasisSpace, charge: &ChargeSpace, variant: StarVariant) -> Vec<Vec<f64>> {
    let lb = basis.local();
    lb.functions
        .iter()
        .enumerate()
        .map(|(fi, f)| match variant {
            StarVariant::LagrangeTested => charge
                .local_functions()
                .iter()
                .map(|s| s.inner(&f.divergence))
                .collect(),
            StarVariant::NodeSampled => charge
                .local_nodes()
                .iter()
                .map(|x| f.divergence.eval(x[0], x[1]))
                .collect(),
            StarVariant::OrthonormalTested => lb.divergence_coefficients[fi].clone(),
        })
        .collect()
}

/// Solves `sum_k z_k l_k(s_j) = int s_j` over the local Lagrange functions
/// `s_j`, i.e. the coefficients whose pairing with every divergence
/// reproduces its plain integral.
fn local_constant(charge: &ChargeSpace, variant: StarVariant) -> Result<Vec<f64>> {
    let q = charge.local_functions();
    let n = q.len();
    let ortho = crate::poly::orthonormal_basis(charge.order());
    let a = Mat::<f64>::from_fn(n, n, |j, k| match variant {
        StarVariant::LagrangeTested => q[k].inner(&q[j]),
        StarVariant::NodeSampled => {
            let x = charge.local_nodes()[k];
            q[j].eval(x[0], x[1])
        }
        StarVariant::OrthonormalTested => ortho[k].inner(&q[j]),
    });
    let w = Mat::<f64>::from_fn(n, 1, |j, _| q[j].integrate());
    use faer::linalg::solvers::Solve;
    let z = a.partial_piv_lu().solve(&w);
    let out: Vec<f64> = (0..n).map(|i| z[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(out)
}

fn transpose_csr(
    rows: usize,
    cols: usize,
    ptr: &[usize],
    idx: &[usize],
    val: &[f64],
) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut count = vec![0usize; cols + 1];
    for &c in idx {
        count[c + 1] += 1;
    }
    for c in 0..cols {
        count[c + 1] += count[c];
    }
    let mut t_ptr = count.clone();
    let mut t_idx = vec![0; idx.len()];
    let mut t_val = vec![0.0; idx.len()];
    for r in 0..rows {
        for e in ptr[r]..ptr[r + 1] {
            let c = idx[e];
            let dst = t_ptr[c];
            t_idx[dst] = r;
            t_val[dst] = val[e];
            t_ptr[c] += 1;
        }
    }
    (count, t_idx, t_val)
}

impl StarMatrix {
    pub fn assemble(
        basis: &BasisSpace,
        charge: &ChargeSpace,
        variant: StarVariant,
    ) -> Result<Self> {
        if basis.order() != charge.order() {
            return Err(Error::OrderMismatch {
                basis: basis.order(),
                charge: charge.order(),
            });
        }
        let local = local_matrix(basis, charge, variant);
        let nq = charge.n_local();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); basis.len()];
        for c in 0..charge.n_cells() {
            for cd in basis.cell_dofs(c) {
                for (k, v) in local[cd.local].iter().enumerate() {
                    if *v != 0.0 {
                        rows[cd.dof].push((charge.dof(c, k), cd.sign * v));
                    }
                }
            }
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (c, v) in r {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        let (t_ptr, t_idx, t_values) =
            transpose_csr(basis.len(), charge.len(), &row_ptr, &col_idx, &values);
        Ok(Self {
            variant,
            rows: basis.len(),
            cols: charge.len(),
            row_ptr,
            col_idx,
            values,
            t_ptr,
            t_idx,
            t_values,
            n_local: nq,
            local_constant: local_constant(charge, variant)?,
        })
    }

    pub fn variant(&self) -> StarVariant {
        self.variant
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |e| (self.col_idx[e], self.values[e]))
    }

    /// `Sigma z`
    pub fn apply(&self, z: &[c64]) -> Vec<c64> {
        (0..self.rows)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|e| z[self.col_idx[e]] * self.values[e])
                    .sum()
            })
            .collect()
    }

    /// `Sigma^T x`
    pub fn apply_transpose(&self, x: &[c64]) -> Vec<c64> {
        (0..self.cols)
            .map(|c| {
                (self.t_ptr[c]..self.t_ptr[c + 1])
                    .map(|e| x[self.t_idx[e]] * self.t_values[e])
                    .sum()
            })
            .collect()
    }

    pub fn apply_real(&self, z: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|e| z[self.col_idx[e]] * self.values[e])
                    .sum()
            })
            .collect()
    }

    /// Squared column norms, the diagonal of `Sigma^T Sigma`.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|c| {
                (self.t_ptr[c]..self.t_ptr[c + 1])
                    .map(|e| self.t_values[e].powi(2))
                    .sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Orthonormal basis of the right null space, one vector per body: the
    /// charge coefficients of a constant density on that body, expressed in
    /// this variant's coordinates.
    pub fn deflation_vectors(&self, body_of_cell: &[usize], n_bodies: usize) -> Vec<Vec<f64>> {
        (0..n_bodies)
            .map(|b| {
                let mut v = vec![0.0; self.cols];
                for (c, &body) in body_of_cell.iter().enumerate() {
                    if body == b {
                        v[c * self.n_local..(c + 1) * self.n_local]
                            .copy_from_slice(&self.local_constant);
                    }
                }
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= n);
                v
            })
            .collect()
    }

    /// Triplet text export: a header line `rows cols nnz`, then one
    /// `row col value` line per nonzero (zero-based, row-major).
    pub fn write_triplets(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.nnz())?;
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                writeln!(w, "{r} {c} {v:e}")?;
            }
        }
        Ok(())
    }
}
