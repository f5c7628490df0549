//! Small dense linear algebra: 2-vectors, 2×2 matrices and a tridiagonal solver.
//!
//! Every linear system in the amplitude expansion is 2×2, so closed-form
//! inverses with determinant guards are used throughout.

use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::math::{abs, sqrt};

/// A column 2-vector. Component 0 is the cell density, component 1 the chemical.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec2(pub [f64; 2]);

impl Vec2 {
    pub const ZERO: Vec2 = Vec2([0.0, 0.0]);

    pub const fn new(first: f64, second: f64) -> Self {
        Vec2([first, second])
    }

    /// `(x, 0)`, the shape of every nonlinear forcing in the cell equation.
    pub const fn first_only(x: f64) -> Self {
        Vec2([x, 0.0])
    }

    #[inline]
    pub fn first(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn second(&self) -> f64 {
        self.0[1]
    }

    #[inline]
    pub fn dot(&self, other: &Vec2) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        sqrt(self.dot(self))
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Vec2 {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    pub fn is_finite(&self) -> bool {
        self.0[0].is_finite() && self.0[1].is_finite()
    }
}

impl Index<usize> for Vec2 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.0[0] += rhs.0[0];
        self.0[1] += rhs.0[1];
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2([-self.0[0], -self.0[1]])
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        self.scale(s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v.scale(self)
    }
}

/// A complex eigenvalue `re + i·im`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub const fn real(re: f64) -> Self {
        Eigenvalue { re, im: 0.0 }
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }
}

/// Roots of `λ² + bλ + c = 0`, ordered by real part (smaller first).
///
/// Real roots use the cancellation-free pairing `r1 = c / r2`.
pub fn monic_quadratic_roots(b: f64, c: f64) -> (Eigenvalue, Eigenvalue) {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = sqrt(disc);
        let big = if b >= 0.0 { -(b + s) / 2.0 } else { (-b + s) / 2.0 };
        let other = if big != 0.0 { c / big } else { 0.0 };
        if big <= other {
            (Eigenvalue::real(big), Eigenvalue::real(other))
        } else {
            (Eigenvalue::real(other), Eigenvalue::real(big))
        }
    } else {
        let im = sqrt(-disc) / 2.0;
        let re = -b / 2.0;
        (Eigenvalue { re, im: -im }, Eigenvalue { re, im })
    }
}

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn diag(a: f64, d: f64) -> Self {
        Mat2([[a, 0.0], [0.0, d]])
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2(self.0[i])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let m = &self.0;
        sqrt(m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1])
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        Vec2([self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1], self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1]])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &other.0);
        Mat2([[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]])
    }

    /// Solves `self · x = rhs` by Cramer's rule, or `None` when
    /// `|det| < rel_tol · ‖self‖²`.
    pub fn solve(&self, rhs: &Vec2, rel_tol: f64) -> Option<Vec2> {
        let det = self.det();
        let n = self.norm();
        if !(abs(det) > rel_tol * n * n) {
            return None;
        }
        let m = &self.0;
        Some(Vec2([
            (m[1][1] * rhs.0[0] - m[0][1] * rhs.0[1]) / det,
            (m[0][0] * rhs.0[1] - m[1][0] * rhs.0[0]) / det,
        ]))
    }

    /// Eigenvalues ordered by real part.
    pub fn eigenvalues(&self) -> (Eigenvalue, Eigenvalue) {
        monic_quadratic_roots(-self.trace(), self.det())
    }
}

/// Solves a tridiagonal system in place with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (so `lower[0]` is unused) and
/// `upper[i]` multiplies `x[i+1]` (so `upper[n-1]` is unused). `scratch` must
/// have the same length as `rhs`. The matrix must be diagonally dominant.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return;
    }
    scratch[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_matches_inverse() {
        let m = Mat2::new(2.0, -1.0, 0.5, 3.0);
        let x = m.solve(&Vec2::new(1.0, 2.0), 1e-12).unwrap();
        let back = m.mul_vec(&x);
        assert!((back.first() - 1.0).abs() < 1e-14);
        assert!((back.second() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Mat2::new(1.0, 2.0, 2.0, 4.0);
        assert!(m.solve(&Vec2::new(1.0, 0.0), 1e-12).is_none());
    }

    #[test]
    fn quadratic_roots_are_ordered_and_accurate() {
        // (λ + 1e-8)(λ + 1e8): naive formula loses the small root entirely.
        let (a, b) = monic_quadratic_roots(1e8 + 1e-8, 1.0);
        assert!((a.re + 1e8).abs() < 1e-6);
        assert!((b.re + 1e-8).abs() < 1e-22);
        let (c, d) = monic_quadratic_roots(0.0, 4.0);
        assert_eq!((c.re, c.im, d.re, d.im), (0.0, -2.0, 0.0, 2.0));
    }

    #[test]
    fn thomas_solves_neumann_matrix() {
        let n = 6;
        let c = 0.7;
        let mut lower = vec![-c; n];
        let diag = vec![1.0 + 2.0 * c; n];
        let mut upper = vec![-c; n];
        upper[0] = -2.0 * c;
        lower[n - 1] = -2.0 * c;
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut r = diag[i] * x[i];
                if i > 0 {
                    r += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    r += upper[i] * x[i + 1];
                }
                r
            })
            .collect();
        let mut scratch = vec![0.0; n];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
