//! Shared helpers for the integration tests, including an adaptive
//! brute-force oracle for singular double integrals over flat triangles.

#![allow(dead_code)]

use std::f64::consts::PI;

use efie_core::c64;
use efie_core::geom::dist;
use efie_core::geom::{self, Vec3};
use efie_core::mesh::{
    generate_sphere, generate_tetrahedra, generate_tetrahedron, generate_torus, Cell,
    GeometricOrder,
};
use efie_core::quadrature::{classify_pair, double_integral, Kernel, QuadratureConfig};
use efie_core::SurfaceMesh;

/// Named test meshes: tetrahedron, two disjoint tetrahedra, quadratic
/// icosphere(1) and flat torus(8,4).
pub fn suite() -> Vec<(&'static str, SurfaceMesh)> {
    vec![
        ("tetrahedron", generate_tetrahedron().unwrap()),
        (
            "two-tetrahedra",
            generate_tetrahedra(&[[0.0; 3], [3.0, 0.0, 0.0]]).unwrap(),
        ),
        (
            "icosphere(1)",
            generate_sphere(1.0, 1, GeometricOrder::Quadratic).unwrap(),
        ),
        ("torus(8,4)", generate_torus(2.0, 0.5, 8, 4).unwrap()),
    ]
}

/// Gauss-Legendre nodes and weights on `[0, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss01(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (1.0 - x), 0.5 * w)
        })
        .collect()
}

/// Adaptive bisection: a panel is accepted when the 12-point rule on it
/// agrees with the sum over its halves to `tol`.
pub struct Adaptive {
    rule: Vec<(f64, f64)>,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self { rule: gauss01(12) }
    }
}

impl Adaptive {
    fn panel(&self, f: &mut impl FnMut(f64) -> c64, a: f64, b: f64) -> c64 {
        self.rule
            .iter()
            .map(|&(x, w)| f(a + (b - a) * x) * (w * (b - a)))
            .sum()
    }

    /// Fixed composite rule with panels no wider than `width`.
    pub fn composite(&self, mut f: impl FnMut(f64) -> c64, a: f64, b: f64, width: f64) -> c64 {
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        (0..n)
            .map(|i| self.panel(&mut f, a + i as f64 * h, a + (i + 1) as f64 * h))
            .sum()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> c64, a: f64, b: f64, tol: f64) -> c64 {
        let whole = self.panel(&mut f, a, b);
        self.refine(&mut f, a, b, whole, tol, 0)
    }

    fn refine(
        &self,
        f: &mut impl FnMut(f64) -> c64,
        a: f64,
        b: f64,
        whole: c64,
        tol: f64,
        depth: usize,
    ) -> c64 {
        let m = 0.5 * (a + b);
        let l = self.panel(f, a, m);
        let r = self.panel(f, m, b);
        let diff = (l + r - whole).norm();
        // Differences at the rounding level cannot be reduced by refinement.
        if diff <= tol || diff <= 1e-13 * (l.norm() + r.norm()) || depth >= 25 {
            return l + r;
        }
        self.refine(f, a, m, l, 0.5 * tol, depth + 1)
            + self.refine(f, m, b, r, 0.5 * tol, depth + 1)
    }
}

/// Flat triangle `p0 + u (p1 - p0) + v (p2 - p0)`.
#[derive(Clone, Copy, Debug)]
pub struct Tri(pub [Vec3; 3]);

impl Tri {
    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        let [a, b, c] = self.0;
        geom::add(
            a,
            geom::add(
                geom::scale(geom::sub(b, a), u),
                geom::scale(geom::sub(c, a), v),
            ),
        )
    }

    fn jacobian(&self) -> f64 {
        let [a, b, c] = self.0;
        geom::norm(geom::cross(geom::sub(b, a), geom::sub(c, a)))
    }

    fn normal(&self) -> Vec3 {
        let [a, b, c] = self.0;
        let n = geom::cross(geom::sub(b, a), geom::sub(c, a));
        geom::scale(n, 1.0 / geom::norm(n))
    }

    /// Reference coordinates of a point in the plane of the triangle.
    fn local(&self, y: Vec3) -> [f64; 2] {
        let [a, b, c] = self.0;
        let (e1, e2, d) = (geom::sub(b, a), geom::sub(c, a), geom::sub(y, a));
        let (g11, g12, g22) = (geom::dot(e1, e1), geom::dot(e1, e2), geom::dot(e2, e2));
        let (r1, r2) = (geom::dot(d, e1), geom::dot(d, e2));
        let det = g11 * g22 - g12 * g12;
        [(r1 * g22 - r2 * g12) / det, (r2 * g11 - r1 * g12) / det]
    }
}

/// `int_b g(xi) / (4 pi |x - y|) dS(y)`: the triangle is split into three
/// signed triangles from the projection `x0` of `x`, each swept by rays
/// from `x0`. Sinh substitutions along the ray and across the edge absorb
/// the remaining near-singular behaviour; the sweep across each edge is
/// adaptive.
pub fn inner_static(b: &Tri, x: Vec3, g: &dyn Fn([f64; 2]) -> f64, tol: f64) -> f64 {
    let ad = Adaptive::default();
    let n = b.normal();
    let h = geom::dot(geom::sub(x, b.0[0]), n);
    let x0 = geom::sub(x, geom::scale(n, h));
    let mut total = 0.0;
    for e in 0..3 {
        let (p, q) = (b.0[e], b.0[(e + 1) % 3]);
        let area2 = geom::dot(geom::cross(geom::sub(p, x0), geom::sub(q, x0)), n);
        let pq = geom::sub(q, p);
        let len = geom::norm(pq);
        if area2.abs() < 1e-14 * len * len {
            continue;
        }
        let d = area2.abs() / len;
        let s0 = (geom::dot(geom::sub(x0, p), pq) / (len * len)).clamp(0.0, 1.0);
        let foot = geom::sub(geom::add(p, geom::scale(pq, s0)), x0);
        // Integral along the ray from x0 to the edge point at parameter
        // s0 + sigma; offsets from the foot avoid cancellation near it.
        let ray = |sigma: f64| -> f64 {
            let dl = geom::add(foot, geom::scale(pq, sigma));
            let l = geom::norm(dl);
            let at = |t: f64| g(b.local(geom::add(x0, geom::scale(dl, t))));
            // Fixed rules keep this smooth in `s` for the adaptive sweep.
            if h.abs() < 1e-14 * l {
                ad.composite(|t| c64::new(at(t) / l, 0.0), 0.0, 1.0, 1.0).re
            } else {
                let hh = h.abs();
                let wmax = (l / hh).asinh();
                ad.composite(
                    |w| c64::new(hh / (l * l) * w.sinh() * at(hh / l * w.sinh()), 0.0),
                    0.0,
                    wmax,
                    2.0,
                )
                .re
            }
        };
        let scale = d / len;
        for (dir, span) in [(1.0, 1.0 - s0), (-1.0, s0)] {
            if span <= 0.0 {
                continue;
            }
            let wmax = (span / scale).asinh();
            let part = ad.integrate(
                |w| c64::new(ray(dir * scale * w.sinh()) * scale * w.cosh(), 0.0),
                0.0,
                wmax,
                tol,
            );
            total += area2 * part.re;
        }
    }
    total / (4.0 * PI)
}

/// Composite Gauss rule on `[0, 1]` with panels graded geometrically
/// towards both ends, suited to integrands with endpoint singularities.
pub fn graded01(levels: usize, sigma: f64, points: usize) -> Vec<(f64, f64)> {
    let mut breaks = vec![0.0, 1.0];
    for k in 0..levels {
        let x = 0.5 * sigma.powi(k as i32 + 1);
        breaks.push(x);
        breaks.push(1.0 - x);
    }
    breaks.push(0.5);
    breaks.sort_by(f64::total_cmp);
    let g = gauss01(points);
    breaks
        .windows(2)
        .flat_map(|w| {
            let (a, b) = (w[0], w[1]);
            g.iter()
                .map(move |&(x, wt)| (a + (b - a) * x, wt * (b - a)))
        })
        .collect()
}

/// `int_a f(xi_a) int_b g(xi_b) / (4 pi |x - y|) dS(y) dS(x)` on the
/// collapsed square of `a`, where every edge of `a` lies on the boundary.
/// The graded outer rule is refined until two successive values agree to
/// `tol` relative; returns the finest value and that difference.
pub fn oracle_static(
    a: &Tri,
    b: &Tri,
    f: &dyn Fn([f64; 2]) -> f64,
    g: &dyn Fn([f64; 2]) -> f64,
    tol: f64,
) -> (f64, f64) {
    let eval = |level: usize| -> f64 {
        let rule = graded01(4 + 3 * level, 0.15, 6 + 2 * level);
        let mut acc = 0.0;
        for &(s, ws) in &rule {
            for &(t, wt) in &rule {
                let (u, v) = (s * (1.0 - t), s * t);
                acc += ws * wt * s * f([u, v]) * inner_static(b, a.point(u, v), g, 1e-14);
            }
        }
        acc * a.jacobian()
    };
    let mut prev = eval(0);
    for level in 1..6 {
        let next = eval(level);
        let diff = (next - prev).abs() / next.abs();
        if diff < tol {
            return (next, diff);
        }
        prev = next;
    }
    panic!("oracle did not converge to {tol}");
}

/// Unit tetrahedron plus its point reflection through the origin, sharing
/// vertex 0.
pub fn bowtie() -> SurfaceMesh {
    let verts = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
    ];
    let cells = [
        [0, 2, 1],
        [0, 1, 3],
        [1, 2, 3],
        [0, 3, 2],
        [0, 4, 5],
        [0, 6, 4],
        [4, 6, 5],
        [0, 5, 6],
    ]
    .into_iter()
    .map(|corners| Cell {
        corners,
        mids: None,
    })
    .collect();
    SurfaceMesh::new(verts, cells).unwrap()
}

pub fn fa(x: [f64; 2]) -> f64 {
    1.0 + 0.3 * x[0] - 0.7 * x[1] + x[0] * x[1]
}

pub fn fb(x: [f64; 2]) -> f64 {
    2.0 - x[0] + 0.5 * x[1] * x[1]
}

pub fn tri(m: &SurfaceMesh, c: usize) -> Tri {
    Tri(m.cell(c).corners.map(|i| m.vertices()[i]))
}

pub fn production(m: &SurfaceMesh, a: usize, b: usize, order: usize) -> f64 {
    let pair = classify_pair(m, a, b, 2.5);
    let cfg = QuadratureConfig {
        singular_order: order,
        ..Default::default()
    };
    double_integral(m, &pair, &cfg, |ma, xa, mb, xb| {
        Kernel::Static.eval(dist(ma.position, mb.position)) * (fa(xa) * fb(xb))
    })
    .unwrap()
    .re
}
