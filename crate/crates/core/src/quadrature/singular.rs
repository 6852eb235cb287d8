//! Sauter-Schwab rules on the reference simplex `{0 <= x2 <= x1 <= 1}`.
//!
//! Each rule is a list of `(x, y, w)` with `x` in the test cell and `y` in
//! the trial cell. For the shared-edge rule both cells are parametrized so
//! that their common edge is `x2 = 0`, with equal `x1` at equal points; for
//! the shared-vertex rule the common vertex is the origin.

use super::rules::gauss_legendre01;
use super::PairClass;

#[derive(Clone, Debug)]
pub struct SingularRule {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    pub w: Vec<f64>,
}

impl SingularRule {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2], f64)> + '_ {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((x, y), w)| (*x, *y, *w))
    }
}

/// Tensor Gauss rule with `n` points per dimension composed with the
/// Sauter-Schwab sub-domain maps (6 for identical, 5 for shared edge, 2
/// for shared vertex).
pub fn sauter_schwab_rule(class: PairClass, n: usize) -> SingularRule {
    let (g, gw) = gauss_legendre01(n);
    let mut rule = SingularRule {
        x: Vec::new(),
        y: Vec::new(),
        w: Vec::new(),
    };
    let mut push = |x: [f64; 2], y: [f64; 2], w: f64| {
        rule.x.push(x);
        rule.y.push(y);
        rule.w.push(w);
    };
    for (i0, &xi) in g.iter().enumerate() {
        for (i1, &e1) in g.iter().enumerate() {
            for (i2, &e2) in g.iter().enumerate() {
                for (i3, &e3) in g.iter().enumerate() {
                    let w0 = gw[i0] * gw[i1] * gw[i2] * gw[i3];
                    match class {
                        PairClass::Identical => {
                            let w = w0 * xi.powi(3) * e1 * e1 * e2;
                            let s = |a: f64, b: f64| [xi * a, xi * b];
                            push(
                                s(1.0, 1.0 - e1 + e1 * e2),
                                s(1.0 - e1 * e2 * e3, 1.0 - e1),
                                w,
                            );
                            push(
                                s(1.0 - e1 * e2 * e3, 1.0 - e1),
                                s(1.0, 1.0 - e1 + e1 * e2),
                                w,
                            );
                            push(
                                s(1.0, e1 * (1.0 - e2 + e2 * e3)),
                                s(1.0 - e1 * e2, e1 * (1.0 - e2)),
                                w,
                            );
                            push(
                                s(1.0 - e1 * e2, e1 * (1.0 - e2)),
                                s(1.0, e1 * (1.0 - e2 + e2 * e3)),
                                w,
                            );
                            push(
                                s(1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)),
                                s(1.0, e1 * (1.0 - e2)),
                                w,
                            );
                            push(
                                s(1.0, e1 * (1.0 - e2)),
                                s(1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)),
                                w,
                            );
                        }
                        PairClass::SharedEdge => {
                            let w1 = w0 * xi.powi(3) * e1 * e1;
                            let w2 = w1 * e2;
                            let s = |a: f64, b: f64| [xi * a, xi * b];
                            push(s(1.0, e1 * e3), s(1.0 - e1 * e2, e1 * (1.0 - e2)), w1);
                            push(s(1.0, e1), s(1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)), w2);
                            push(s(1.0 - e1 * e2, e1 * (1.0 - e2)), s(1.0, e1 * e2 * e3), w2);
                            push(s(1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)), s(1.0, e1), w2);
                            push(
                                s(1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)),
                                s(1.0, e1 * e2),
                                w2,
                            );
                        }
                        PairClass::SharedVertex => {
                            let w = w0 * xi.powi(3) * e2;
                            push([xi, xi * e1], [xi * e2, xi * e2 * e3], w);
                            push([xi * e2, xi * e2 * e1], [xi, xi * e3], w);
                        }
                        PairClass::Near | PairClass::Far => {
                            panic!("no Sauter-Schwab rule for regular pairs")
                        }
                    }
                }
            }
        }
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_simplex(p: [f64; 2]) -> bool {
        p[1] >= -1e-15 && p[1] <= p[0] + 1e-15 && p[0] <= 1.0 + 1e-15
    }

    /// Brute-force tensor rule on the simplex product for smooth integrands.
    fn smooth_reference(f: impl Fn([f64; 2], [f64; 2]) -> f64) -> f64 {
        let (g, w) = gauss_legendre01(8);
        // Simplex {0<=x2<=x1<=1}: x1 = s, x2 = s t, Jacobian s.
        let mut pts = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                pts.push(([g[i], g[i] * g[j]], w[i] * w[j] * g[i]));
            }
        }
        let mut acc = 0.0;
        for (x, wx) in &pts {
            for (y, wy) in &pts {
                acc += wx * wy * f(*x, *y);
            }
        }
        acc
    }

    #[test]
    fn rules_cover_the_product_domain() {
        let polys: Vec<Box<dyn Fn([f64; 2], [f64; 2]) -> f64>> = vec![
            Box::new(|_, _| 1.0),
            Box::new(|x, y| x[0] * y[1] + x[1] * x[1]),
            Box::new(|x, y| (x[0] - y[0]).powi(2) + 3.0 * x[1] * y[0] * y[1]),
            Box::new(|x, y| x[0].powi(3) * y[1] - 2.0 * x[1] * y[0].powi(2)),
        ];
        for class in [
            PairClass::Identical,
            PairClass::SharedEdge,
            PairClass::SharedVertex,
        ] {
            let rule = sauter_schwab_rule(class, 5);
            for (x, y, _) in rule.iter() {
                assert!(in_simplex(x) && in_simplex(y), "{class:?}");
            }
            for f in &polys {
                let q: f64 = rule.iter().map(|(x, y, w)| w * f(x, y)).sum();
                let r = smooth_reference(f);
                assert!((q - r).abs() < 1e-12, "{class:?}: {q} vs {r}");
            }
        }
    }
}
