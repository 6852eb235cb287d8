//! One-dimensional Gauss-Legendre and triangle rules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[0, 1]`, `n` points (exact to
/// degree `2n - 1`). Newton iteration on the Legendre recurrence.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Quadrature on the reference triangle; weights sum to 1/2.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Symmetric rules for degrees 1..=5 (1, 3, 4, 6, 7 points), collapsed
    /// Gauss above that.
    pub fn with_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::symmetric(1, &[(1.0 / 3.0, 1.0 / 3.0, 0.5)], &[]),
            2 => Self::symmetric(2, &[], &[(1.0 / 6.0, 1.0 / 6.0)]),
            3 => Self::symmetric(
                3,
                &[(1.0 / 3.0, 1.0 / 3.0, -27.0 / 96.0)],
                &[(0.2, 25.0 / 96.0)],
            ),
            4 => Self::symmetric(
                4,
                &[],
                &[
                    (0.445_948_490_915_964_9, 0.223_381_589_678_011_47 / 2.0),
                    (0.091_576_213_509_770_74, 0.109_951_743_655_321_87 / 2.0),
                ],
            ),
            5 => {
                let s15 = 15f64.sqrt();
                Self::symmetric(
                    5,
                    &[(1.0 / 3.0, 1.0 / 3.0, 9.0 / 80.0)],
                    &[
                        ((6.0 - s15) / 21.0, (155.0 - s15) / 2400.0),
                        ((6.0 + s15) / 21.0, (155.0 + s15) / 2400.0),
                    ],
                )
            }
            d => Self::collapsed_gauss(d.div_ceil(2) + 1),
        }
    }

    /// `singles` are points with their own weight; each `(a, w)` in `orbits`
    /// expands to the three points `(a, a)`, `(1 - 2a, a)`, `(a, 1 - 2a)`.
    fn symmetric(degree: usize, singles: &[(f64, f64, f64)], orbits: &[(f64, f64)]) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for &(u, v, w) in singles {
            points.push([u, v]);
            weights.push(w);
        }
        for &(a, w) in orbits {
            let b = 1.0 - 2.0 * a;
            for p in [[a, a], [b, a], [a, b]] {
                points.push(p);
                weights.push(w);
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    /// Duffy-collapsed tensor Gauss rule with `n` points per direction,
    /// exact to degree `2n - 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre01(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s = x[i];
                let t = x[j];
                points.push([s * (1.0 - t), s * t]);
                weights.push(w[i] * w[j] * s);
            }
        }
        Self {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}
