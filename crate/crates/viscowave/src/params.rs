//! Physical problem parameters and horizontal frequencies.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Physical constants of the traveling wave problem.
///
/// `gamma` is the wave speed along the first horizontal axis, `sigma` the
/// surface tension coefficient, `b` the equilibrium depth, and `horiz_dim`
/// the horizontal dimension `d = n - 1` (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams<T> {
    pub gamma: T,
    pub sigma: T,
    pub b: T,
    pub horiz_dim: usize,
}

impl<T: Scalar> WaveParams<T> {
    pub fn new(gamma: T, sigma: T, b: T, horiz_dim: usize) -> Result<Self> {
        if !(b > T::zero()) {
            return Err(Error::InvalidParams(format!("depth b = {b} must be positive")));
        }
        if sigma < T::zero() {
            return Err(Error::InvalidParams(format!(
                "surface tension sigma = {sigma} must be nonnegative"
            )));
        }
        if horiz_dim != 1 && horiz_dim != 2 {
            return Err(Error::InvalidParams(format!(
                "horiz_dim = {horiz_dim} must be 1 or 2"
            )));
        }
        Ok(Self { gamma, sigma, b, horiz_dim })
    }

    /// Fluid dimension `n = horiz_dim + 1`.
    pub fn n(&self) -> usize {
        self.horiz_dim + 1
    }

    /// The linear and nonlinear solvers reject `sigma = 0` in two horizontal
    /// dimensions; symbol evaluation itself stays valid.
    pub fn check_solver_supported(&self) -> Result<()> {
        if self.sigma == T::zero() && self.horiz_dim != 1 {
            return Err(Error::CapillaryDimension);
        }
        Ok(())
    }
}

/// A horizontal frequency in cycles per unit length (the transform pairs
/// carry `2 pi` inside the exponential).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency<T> {
    pub xi: [T; 2],
    pub dim: usize,
}

impl<T: Scalar> Frequency<T> {
    pub fn new_1d(xi: T) -> Self {
        Self { xi: [xi, T::zero()], dim: 1 }
    }

    pub fn new_2d(xi1: T, xi2: T) -> Self {
        Self { xi: [xi1, xi2], dim: 2 }
    }

    pub fn norm(&self) -> T {
        self.xi[0].hypot(self.xi[1])
    }

    pub fn is_zero(&self) -> bool {
        self.xi[0] == T::zero() && self.xi[1] == T::zero()
    }

    /// Unit direction `xi / |xi|`; zero vector at the zero frequency.
    pub fn direction(&self) -> [T; 2] {
        let n = self.norm();
        if n == T::zero() {
            [T::zero(), T::zero()]
        } else {
            [self.xi[0] / n, self.xi[1] / n]
        }
    }
}
