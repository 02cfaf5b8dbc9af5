//! Small fixed-size complex matrix helpers.
//!
//! The per-frequency ODE works with 4x4 complex matrices and 2x2 blocks;
//! this module is the shared linear-algebra floor for both the closed-form
//! path and the numeric oracles.

use crate::error::{Error, Result};
use crate::scalar::{c_re, Scalar, C};

/// Dense complex 4x4 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat4<T> {
    pub m: [[C<T>; 4]; 4],
}

impl<T: Scalar> CMat4<T> {
    pub fn zeros() -> Self {
        Self { m: [[C::<T>::new(T::zero(), T::zero()); 4]; 4] }
    }

    pub fn identity() -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            out.m[i][i] = c_re(T::one());
        }
        out
    }

    pub fn from_rows(rows: [[C<T>; 4]; 4]) -> Self {
        Self { m: rows }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.m[i][k];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..4 {
                    out.m[i][j] = out.m[i][j] + a * other.m[k][j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>; 4]) -> [C<T>; 4] {
        let mut out = [C::<T>::new(T::zero(), T::zero()); 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] = out[i] + self.m[i][j] * v[j];
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[i][j] + other.m[i][j];
            }
        }
        out
    }

    pub fn scale(&self, a: C<T>) -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = self.m[i][j] * a;
            }
        }
        out
    }

    /// Maximum absolute row sum (1-infinity style norm for scaling decisions).
    pub fn max_abs(&self) -> T {
        let mut best = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let a = self.m[i][j].norm();
                if a > best {
                    best = a;
                }
            }
        }
        best
    }

    /// Solve `self * x = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &[C<T>; 4]) -> Result<[C<T>; 4]> {
        let mut a = self.m;
        let mut b = *rhs;
        for col in 0..4 {
            let mut piv = col;
            let mut best = a[col][col].norm_sqr();
            for row in col + 1..4 {
                let mag = a[row][col].norm_sqr();
                if mag > best {
                    best = mag;
                    piv = row;
                }
            }
            if best == T::zero() {
                return Err(Error::SingularSystem("4x4 complex solve".into()));
            }
            if piv != col {
                a.swap(piv, col);
                b.swap(piv, col);
            }
            let inv = C::<T>::new(T::one(), T::zero()) / a[col][col];
            for row in col + 1..4 {
                let factor = a[row][col] * inv;
                if factor.norm_sqr() == T::zero() {
                    continue;
                }
                for j in col..4 {
                    a[row][j] = a[row][j] - factor * a[col][j];
                }
                b[row] = b[row] - factor * b[col];
            }
        }
        for col in (0..4).rev() {
            let mut sum = b[col];
            for j in col + 1..4 {
                sum = sum - a[col][j] * b[j];
            }
            b[col] = sum / a[col][col];
        }
        Ok(b)
    }
}

/// Complex 2x2 matrix with direct inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2<T> {
    pub m: [[C<T>; 2]; 2],
}

impl<T: Scalar> CMat2<T> {
    pub fn new(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn det(&self) -> C<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn matvec(&self, v: &[C<T>; 2]) -> [C<T>; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm_sqr() == T::zero() {
            return None;
        }
        let inv = C::<T>::new(T::one(), T::zero()) / det;
        Some(Self::new(
            self.m[1][1] * inv,
            -self.m[0][1] * inv,
            -self.m[1][0] * inv,
            self.m[0][0] * inv,
        ))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::new(
            self.m[0][0] * other.m[0][0] + self.m[0][1] * other.m[1][0],
            self.m[0][0] * other.m[0][1] + self.m[0][1] * other.m[1][1],
            self.m[1][0] * other.m[0][0] + self.m[1][1] * other.m[1][0],
            self.m[1][0] * other.m[0][1] + self.m[1][1] * other.m[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn solve_recovers_known_vector() {
        let mut a = CMat4::<f64>::identity();
        a.m[0][1] = Complex64::new(2.0, -1.0);
        a.m[2][3] = Complex64::new(0.5, 0.5);
        a.m[3][0] = Complex64::new(-1.0, 0.25);
        let x = [
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(2.0, -2.0),
        ];
        let b = a.matvec(&x);
        let got = a.solve(&b).unwrap();
        for i in 0..4 {
            assert!((got[i] - x[i]).norm() < 1e-13);
        }
    }
}
