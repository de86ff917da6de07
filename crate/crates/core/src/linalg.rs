//! Small fixed-size complex linear algebra for the two-band (A, B) sublattice space.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Two-component sublattice amplitude `(A, B)`.
pub type Spinor = [C64; 2];

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn sigma_x() -> Self {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Self {
        Mat2([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma_z() -> Self {
        Mat2([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Matrix exponential, exact for 2x2: split into `tau * 1 + B` with `B` traceless, then
    /// `exp(B) = cosh(d) + sinh(d)/d * B` where `d^2 = -det(B)`.
    pub fn exp(&self) -> Self {
        let tau = self.trace() * 0.5;
        let b = *self - Mat2::identity().scale(tau);
        let d2 = -b.det();
        let d = d2.sqrt();
        let (ch, shc) = if d.norm() < 1e-4 {
            (
                ONE + d2 / 2.0 + d2 * d2 / 24.0 + d2 * d2 * d2 / 720.0,
                ONE + d2 / 6.0 + d2 * d2 / 120.0 + d2 * d2 * d2 / 5040.0,
            )
        } else {
            (d.cosh(), d.sinh() / d)
        };
        let e = tau.exp();
        (Mat2::identity().scale(ch) + b.scale(shc)).scale(e)
    }

    /// Eigenvalues and unit-norm right eigenvectors. The two eigenvalues are ordered
    /// `tau + d`, `tau - d` for the principal square root `d`.
    pub fn eigen(&self) -> ([C64; 2], [Spinor; 2]) {
        let m = &self.0;
        let tau = self.trace() * 0.5;
        let half = (m[0][0] - m[1][1]) * 0.5;
        let d = (half * half + m[0][1] * m[1][0]).sqrt();
        let vals = [tau + d, tau - d];
        let vecs = vals.map(|lam| {
            let v1 = [m[0][1], lam - m[0][0]];
            let v2 = [lam - m[1][1], m[1][0]];
            let n1 = spinor_norm(&v1);
            let n2 = spinor_norm(&v2);
            let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
            if n < 1e-300 {
                // already diagonal with equal entries
                [ONE, ZERO]
            } else {
                [v[0] / n, v[1] / n]
            }
        });
        // diagonal matrix with distinct entries: fix the degenerate branch above
        if m[0][1].norm() == 0.0 && m[1][0].norm() == 0.0 {
            let e0 = if (vals[0] - m[0][0]).norm() <= (vals[0] - m[1][1]).norm() {
                [[ONE, ZERO], [ZERO, ONE]]
            } else {
                [[ZERO, ONE], [ONE, ZERO]]
            };
            return (vals, e0);
        }
        (vals, vecs)
    }

    /// Inverse, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(ONE / det))
    }

    pub fn from_columns(c0: Spinor, c1: Spinor) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn column(&self, j: usize) -> Spinor {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn row(&self, i: usize) -> Spinor {
        self.0[i]
    }
}

impl Index<(usize, usize)> for Mat2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

pub fn spinor_norm(v: &Spinor) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// `<a|b>` with `a` conjugated.
pub fn spinor_dot(a: &Spinor, b: &Spinor) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `<a|b>` for slices of equal length, `a` conjugated.
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Wrap `x` into `[-period/2, period/2)`.
pub fn fold(x: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let y = (x + half).rem_euclid(period) - half;
    // rem_euclid can round up to exactly `period`
    if y >= half {
        y - period
    } else {
        y
    }
}
