//! Reference-element GWP functions of order `p`.
//!
//! Every function is a degree-`p` interpolatory polynomial `N` times the
//! zeroth-order edge function `W_e(xi) = xi - v_e` of some local edge `e`
//! (`v_e` is the opposite vertex). `N` is built from (shifted) Silvester
//! polynomials on the lattice `(i0, i1, i2) / (p + 2)`:
//!
//! * edge functions (`i_e = 0`) interpolate the normal flux at the `p + 1`
//!   interior lattice points of edge `e`;
//! * interior functions (`i_e >= 1`) carry a factor `l_e` and so have no
//!   normal flux anywhere on the boundary. Only the families of local edges
//!   0 and 1 are kept, which removes the redundant third family.

use crate::poly::{self, orthonormal_basis, Poly2};

const VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// One reference vector function with its divergence.
#[derive(Clone, Debug)]
pub struct LocalFunction {
    pub kind: LocalKind,
    pub value: [Poly2; 2],
    pub divergence: Poly2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalKind {
    /// Edge function on local edge `edge`, interpolating at the point with
    /// parameter `(slot + 1) / (p + 2)` measured from local vertex
    /// `(edge + 1) % 3` toward `(edge + 2) % 3`.
    Edge { edge: usize, slot: usize },
    /// Cell-interior function, `index` in `0..p (p + 1)`.
    Interior { index: usize },
}

#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub order: usize,
    pub functions: Vec<LocalFunction>,
    /// Orthonormal reference polynomials of degree `<= p`.
    pub orthonormal: Vec<Poly2>,
    /// Divergences expanded in `orthonormal`, one row per function.
    pub divergence_coefficients: Vec<Vec<f64>>,
}

impl LocalBasis {
    pub fn new(p: usize) -> Self {
        let n = p + 2;
        let lam: [Poly2; 3] = [
            Poly2::barycentric(0),
            Poly2::barycentric(1),
            Poly2::barycentric(2),
        ];
        let mut functions = Vec::with_capacity((p + 1) * (p + 3));

        let make = |e: usize, idx: [usize; 3]| -> (Poly2, [Poly2; 2], Poly2) {
            let e1 = (e + 1) % 3;
            let e2 = (e + 2) % 3;
            let ie = idx[e];
            let scale = n as f64 / (n - ie) as f64;
            let shape = &(&poly::silvester(ie, n, &lam[e])
                * &poly::silvester_shifted(idx[e1], n, &lam[e1]))
                * &poly::silvester_shifted(idx[e2], n, &lam[e2]);
            let shape = shape.scaled(scale);
            let v = VERTICES[e];
            let wu = Poly2::linear(-v[0], 1.0, 0.0);
            let wv = Poly2::linear(-v[1], 0.0, 1.0);
            let value = [&shape * &wu, &shape * &wv];
            let div = &value[0].du() + &value[1].dv();
            (shape, value, div)
        };

        for e in 0..3 {
            for slot in 0..=p {
                // i_{e+2} = slot + 1 sets the position along the edge.
                let mut idx = [0; 3];
                idx[(e + 2) % 3] = slot + 1;
                idx[(e + 1) % 3] = n - (slot + 1);
                let (_, value, divergence) = make(e, idx);
                functions.push(LocalFunction {
                    kind: LocalKind::Edge { edge: e, slot },
                    value,
                    divergence,
                });
            }
        }

        let mut index = 0;
        for e in 0..2 {
            for ie in 1..n {
                for i1 in 1..n - ie {
                    let i2 = n - ie - i1;
                    if i2 < 1 {
                        continue;
                    }
                    let mut idx = [0; 3];
                    idx[e] = ie;
                    idx[(e + 1) % 3] = i1;
                    idx[(e + 2) % 3] = i2;
                    let (_, value, divergence) = make(e, idx);
                    functions.push(LocalFunction {
                        kind: LocalKind::Interior { index },
                        value,
                        divergence,
                    });
                    index += 1;
                }
            }
        }
        debug_assert_eq!(functions.len(), (p + 1) * (p + 3));

        let orthonormal = orthonormal_basis(p);
        let divergence_coefficients = functions
            .iter()
            .map(|f| orthonormal.iter().map(|q| q.inner(&f.divergence)).collect())
            .collect();

        Self {
            order: p,
            functions,
            orthonormal,
            divergence_coefficients,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn n_edge_functions(&self) -> usize {
        3 * (self.order + 1)
    }

    /// Index of the edge function `(edge, slot)` in `functions`.
    pub fn edge_function(&self, edge: usize, slot: usize) -> usize {
        edge * (self.order + 1) + slot
    }

    /// Values `[w_u, w_v]` and divergences of all functions at `(u, v)`.
    pub fn eval_all(&self, u: f64, v: f64, values: &mut Vec<[f64; 2]>, divs: &mut Vec<f64>) {
        values.clear();
        divs.clear();
        for f in &self.functions {
            values.push([f.value[0].eval(u, v), f.value[1].eval(u, v)]);
            divs.push(f.divergence.eval(u, v));
        }
    }
}

/// Outward reference flux density per unit edge parameter of a reference
/// vector field on local edge `e`, at parameter `t` from vertex
/// `(e + 1) % 3` toward `(e + 2) % 3`.
pub fn reference_edge_flux(value: &[Poly2; 2], e: usize, t: f64) -> f64 {
    let a = VERTICES[(e + 1) % 3];
    let b = VERTICES[(e + 2) % 3];
    let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let tangent = [b[0] - a[0], b[1] - a[1]];
    // Outward normal scaled by the edge length; reference cells are
    // counter-clockwise so the outward normal is the tangent rotated by -90.
    let normal = [tangent[1], -tangent[0]];
    value[0].eval(x[0], x[1]) * normal[0] + value[1].eval(x[0], x[1]) * normal[1]
}
