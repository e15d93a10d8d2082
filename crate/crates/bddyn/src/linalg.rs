//! Minimal dense 3x3 linear algebra.
//!
//! The toolkit only ever deals with 3x3 systems, so closed-form adjugate
//! inversion and Cramer solves are both simpler and more accurate here than
//! a general factorization library would be.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn zeros() -> Self {
        Mat3([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn from_diagonal(d: [T; 3]) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[i][j]
    }

    pub fn row(&self, i: usize) -> [T; 3] {
        self.0[i]
    }

    pub fn col(&self, j: usize) -> [T; 3] {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the three principal 2x2 minors.
    pub fn principal_minors_sum(&self) -> T {
        let m = &self.0;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    pub fn mul_vec(&self, v: &[T; 3]) -> [T; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul_mat(&self, other: &Mat3<T>) -> Mat3<T> {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s = s + self.0[i][k] * other.0[k][j];
                }
                out.0[i][j] = s;
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat3<T>) -> Mat3<T> {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Mat3<T> {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = out.0[i][j] * s;
            }
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for row in &self.0 {
            for &x in row {
                m = m.max(x.abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|r| r.iter().all(|x| x.is_finite()))
    }

    /// Adjugate-based inverse; `None` if the determinant is exactly zero.
    pub fn inverse(&self) -> Option<Mat3<T>> {
        let d = self.det();
        if d == T::zero() {
            return None;
        }
        let m = &self.0;
        let inv_d = T::one() / d;
        let cof = |a: T, b: T, c: T, e: T| (a * e - b * c) * inv_d;
        Some(Mat3([
            [
                cof(m[1][1], m[1][2], m[2][1], m[2][2]),
                cof(m[0][2], m[0][1], m[2][2], m[2][1]),
                cof(m[0][1], m[0][2], m[1][1], m[1][2]),
            ],
            [
                cof(m[1][2], m[1][0], m[2][2], m[2][0]),
                cof(m[0][0], m[0][2], m[2][0], m[2][2]),
                cof(m[0][2], m[0][0], m[1][2], m[1][0]),
            ],
            [
                cof(m[1][0], m[1][1], m[2][0], m[2][1]),
                cof(m[0][1], m[0][0], m[2][1], m[2][0]),
                cof(m[0][0], m[0][1], m[1][0], m[1][1]),
            ],
        ]))
    }

    /// Solve `A x = b` by Cramer's rule; `None` on zero determinant.
    pub fn solve(&self, b: &[T; 3]) -> Option<[T; 3]> {
        let d = self.det();
        if d == T::zero() {
            return None;
        }
        let mut x = [T::zero(); 3];
        for j in 0..3 {
            let mut a = *self;
            for i in 0..3 {
                a.0[i][j] = b[i];
            }
            x[j] = a.det() / d;
        }
        Some(x)
    }
}

pub fn vec_sub<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn vec_add<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn vec_scale<T: Real>(a: &[T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn vec_dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn vec_norm<T: Real>(a: &[T; 3]) -> T {
    vec_dot(a, a).sqrt()
}

pub fn vec_max_abs<T: Real>(a: &[T; 3]) -> T {
    a[0].abs().max(a[1].abs()).max(a[2].abs())
}
