//! Bivariate polynomials on the reference triangle
//! `{(u, v) : u >= 0, v >= 0, u + v <= 1}`.
//!
//! Barycentric coordinates are `l0 = 1 - u - v`, `l1 = u`, `l2 = v`; local
//! vertex `i` sits where `l_i = 1`.

use std::ops::{Add, Mul, Neg, Sub};

/// Dense polynomial `sum c[a][b] u^a v^b` with `a + b <= degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coef: Vec<f64>,
}

impl Poly2 {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coef: vec![0.0; (degree + 1) * (degree + 1)],
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero(0);
        p.coef[0] = c;
        p
    }

    /// `c0 + cu * u + cv * v`
    pub fn linear(c0: f64, cu: f64, cv: f64) -> Self {
        let mut p = Self::zero(1);
        p.set(0, 0, c0);
        p.set(1, 0, cu);
        p.set(0, 1, cv);
        p
    }

    /// Monomial `u^a v^b`.
    pub fn monomial(a: usize, b: usize) -> Self {
        let mut p = Self::zero(a + b);
        p.set(a, b, 1.0);
        p
    }

    /// Barycentric coordinate `l_i` as a polynomial in `(u, v)`.
    pub fn barycentric(i: usize) -> Self {
        match i {
            0 => Self::linear(1.0, -1.0, -1.0),
            1 => Self::linear(0.0, 1.0, 0.0),
            2 => Self::linear(0.0, 0.0, 1.0),
            _ => panic!("barycentric index {i} out of range"),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    fn idx(&self, a: usize, b: usize) -> usize {
        a * (self.degree + 1) + b
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree {
            0.0
        } else {
            self.coef[self.idx(a, b)]
        }
    }

    fn set(&mut self, a: usize, b: usize, c: f64) {
        let i = self.idx(a, b);
        self.coef[i] = c;
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.degree;
        (0..=d).flat_map(move |a| (0..=d - a).map(move |b| (a, b, self.get(a, b))))
    }

    fn with_degree(&self, degree: usize) -> Self {
        let mut p = Self::zero(degree);
        for (a, b, c) in self.terms() {
            if c != 0.0 {
                assert!(a + b <= degree, "degree reduction would drop terms");
                p.set(a, b, c);
            }
        }
        p
    }

    /// Horner-free direct evaluation; degrees here never exceed ~8.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let d = self.degree;
        let mut upow = 1.0;
        let mut acc = 0.0;
        for a in 0..=d {
            let mut inner = 0.0;
            let mut vpow = 1.0;
            for b in 0..=d - a {
                inner += self.coef[self.idx(a, b)] * vpow;
                vpow *= v;
            }
            acc += inner * upow;
            upow *= u;
        }
        acc
    }

    pub fn du(&self) -> Self {
        let mut p = Self::zero(self.degree.saturating_sub(1));
        for (a, b, c) in self.terms() {
            if a > 0 {
                p.set(a - 1, b, c * a as f64);
            }
        }
        p
    }

    pub fn dv(&self) -> Self {
        let mut p = Self::zero(self.degree.saturating_sub(1));
        for (a, b, c) in self.terms() {
            if b > 0 {
                p.set(a, b - 1, c * b as f64);
            }
        }
        p
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    /// Exact integral over the reference triangle, using
    /// `int u^a v^b = a! b! / (a + b + 2)!`.
    pub fn integrate(&self) -> f64 {
        self.terms()
            .map(|(a, b, c)| c * monomial_integral(a, b))
            .sum()
    }

    /// Exact `L2` inner product on the reference triangle.
    pub fn inner(&self, other: &Self) -> f64 {
        (self * other).integrate()
    }

    /// Composition with the affine shift `l -> l - s` of a linear form.
    /// Used to build shifted Silvester polynomials.
    pub fn shifted_linear(lin: &Self, s: f64) -> Self {
        lin - &Self::constant(s)
    }
}

pub fn monomial_integral(a: usize, b: usize) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let d = self.degree.max(rhs.degree);
        let mut p = self.with_degree(d);
        for (a, b, c) in rhs.terms() {
            let i = p.idx(a, b);
            p.coef[i] += c;
        }
        p
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &(-rhs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scaled(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut p = Poly2::zero(self.degree + rhs.degree);
        for (a1, b1, c1) in self.terms() {
            if c1 == 0.0 {
                continue;
            }
            for (a2, b2, c2) in rhs.terms() {
                let i = p.idx(a1 + a2, b1 + b2);
                p.coef[i] += c1 * c2;
            }
        }
        p
    }
}

/// Silvester interpolation polynomial `R_i(n, l) = (1/i!) prod_{k<i} (n l - k)`.
///
/// Degree `i`; vanishes at `l = 0, 1/n, .., (i-1)/n` and equals 1 at `l = i/n`.
pub fn silvester(i: usize, n: usize, lin: &Poly2) -> Poly2 {
    let mut p = Poly2::constant(1.0);
    let nl = lin.scaled(n as f64);
    for k in 0..i {
        let factor = &nl - &Poly2::constant(k as f64);
        p = &p * &factor.scaled(1.0 / (k + 1) as f64);
    }
    p
}

/// Shifted Silvester polynomial `R_{i-1}(n, l - 1/n)` for `i >= 1`.
///
/// Degree `i - 1`; vanishes at `l = 1/n, .., (i-1)/n` and equals 1 at `l = i/n`.
pub fn silvester_shifted(i: usize, n: usize, lin: &Poly2) -> Poly2 {
    assert!(i >= 1, "shifted Silvester index must be positive");
    let shifted = Poly2::shifted_linear(lin, 1.0 / n as f64);
    silvester(i - 1, n, &shifted)
}

/// Orthonormal basis of polynomials of degree `<= p` on the reference
/// triangle, from modified Gram-Schmidt (applied twice) on the monomials.
pub fn orthonormal_basis(p: usize) -> Vec<Poly2> {
    let mut out: Vec<Poly2> = Vec::new();
    for total in 0..=p {
        for b in 0..=total {
            let mut q = Poly2::monomial(total - b, b).with_degree(p);
            for _ in 0..2 {
                for e in &out {
                    let c = q.inner(e);
                    q = &q - &e.scaled(c);
                }
            }
            let n = q.inner(&q).sqrt();
            out.push(q.scaled(1.0 / n));
        }
    }
    out
}

/// Whether `(u, v)` lies in the closed reference triangle, up to `tol`.
pub fn in_reference(u: f64, v: f64, tol: f64) -> bool {
    u >= -tol && v >= -tol && u + v <= 1.0 + tol
}
