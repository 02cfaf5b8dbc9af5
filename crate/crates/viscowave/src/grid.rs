//! Periodic horizontal grid and Fourier transforms.
//!
//! The horizontal domain is a torus with period `length` per axis and `npts`
//! points per axis; frequencies are `k / length` for integer `k` in
//! `[-npts/2, npts/2)`. Forward coefficients are normalized so a plane wave
//! `exp(2 pi i x . xi_k)` has coefficient one at mode `k`.
//!
//! The lone asymmetric frequency `k = -npts/2` is kept in storage but its
//! coefficient is pinned to zero by every transform, so the active frequency
//! set is closed under negation.

use crate::error::{Error, Result};
use crate::params::Frequency;
use crate::scalar::{Scalar, C};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct HorizontalGrid<T> {
    pub d: usize,
    pub npts: usize,
    pub length: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T> std::fmt::Debug for HorizontalGrid<T>
where
    T: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HorizontalGrid")
            .field("d", &self.d)
            .field("npts", &self.npts)
            .field("length", &self.length)
            .finish()
    }
}

impl<T: Scalar> HorizontalGrid<T> {
    pub fn new(d: usize, npts: usize, length: T) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::SizeMismatch(format!("horizontal dimension {d} must be 1 or 2")));
        }
        if npts < 4 || npts % 2 != 0 || npts & (npts - 1) != 0 {
            return Err(Error::SizeMismatch(format!(
                "npts = {npts} must be an even power of two >= 4"
            )));
        }
        if !(length > T::zero()) {
            return Err(Error::SizeMismatch("period must be positive".into()));
        }
        let mut planner = FftPlanner::<T>::new();
        Ok(Self {
            d,
            npts,
            length,
            forward: planner.plan_fft_forward(npts),
            inverse: planner.plan_fft_inverse(npts),
        })
    }

    pub fn num_modes(&self) -> usize {
        self.npts.pow(self.d as u32)
    }

    pub fn num_points(&self) -> usize {
        self.num_modes()
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.d == other.d && self.npts == other.npts && self.length == other.length
    }

    /// Integer frequency of a linear mode index.
    pub fn mode_k(&self, index: usize) -> [i64; 2] {
        let n = self.npts;
        let unwrap = |i: usize| -> i64 {
            if i < n / 2 {
                i as i64
            } else {
                i as i64 - n as i64
            }
        };
        if self.d == 1 {
            [unwrap(index), 0]
        } else {
            [unwrap(index / n), unwrap(index % n)]
        }
    }

    /// Linear index of an integer frequency (must lie on the grid).
    pub fn index_of(&self, k: [i64; 2]) -> usize {
        let n = self.npts as i64;
        let wrap = |k: i64| -> usize {
            debug_assert!(k >= -n / 2 && k < n / 2, "mode {k} off grid");
            (k.rem_euclid(n)) as usize
        };
        if self.d == 1 {
            wrap(k[0])
        } else {
            wrap(k[0]) * self.npts + wrap(k[1])
        }
    }

    /// Index of the negated frequency, or `None` for the asymmetric Nyquist.
    pub fn negated_index(&self, index: usize) -> Option<usize> {
        let k = self.mode_k(index);
        if self.is_nyquist(index) {
            return None;
        }
        Some(self.index_of([-k[0], -k[1]]))
    }

    pub fn is_nyquist(&self, index: usize) -> bool {
        let k = self.mode_k(index);
        let ny = -(self.npts as i64) / 2;
        k[0] == ny || (self.d == 2 && k[1] == ny)
    }

    pub fn modes(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        (0..self.num_modes()).map(move |i| self.mode_k(i))
    }

    pub fn frequency(&self, k: [i64; 2]) -> Frequency<T> {
        let xi1 = T::of(k[0] as f64) / self.length;
        if self.d == 1 {
            Frequency::new_1d(xi1)
        } else {
            Frequency::new_2d(xi1, T::of(k[1] as f64) / self.length)
        }
    }

    pub fn frequency_at(&self, index: usize) -> Frequency<T> {
        self.frequency(self.mode_k(index))
    }

    /// Physical coordinates of a linear point index.
    pub fn point(&self, index: usize) -> [T; 2] {
        let h = self.length / T::of(self.npts as f64);
        if self.d == 1 {
            [T::of(index as f64) * h, T::zero()]
        } else {
            let i1 = index / self.npts;
            let i2 = index % self.npts;
            [T::of(i1 as f64) * h, T::of(i2 as f64) * h]
        }
    }

    /// Frequency-space cell measure `length^{-d}`.
    pub fn cell_measure(&self) -> T {
        let inv = T::one() / self.length;
        if self.d == 1 {
            inv
        } else {
            inv * inv
        }
    }

    /// Largest grid frequency magnitude (for guardrails and splits).
    pub fn max_frequency(&self) -> T {
        let half = T::of((self.npts / 2) as f64) / self.length;
        if self.d == 1 {
            half
        } else {
            half * T::two().sqrt()
        }
    }

    /// Forward transform of physical samples (complex), normalized, with the
    /// Nyquist coefficients zeroed.
    pub fn fft_forward(&self, samples: &[C<T>]) -> Result<Vec<C<T>>> {
        if samples.len() != self.num_points() {
            return Err(Error::SizeMismatch(format!(
                "fft_forward: {} samples for a grid of {}",
                samples.len(),
                self.num_points()
            )));
        }
        let mut data = samples.to_vec();
        self.transform(&mut data, true);
        let scale = T::one() / T::of(self.num_points() as f64);
        for v in &mut data {
            *v = *v * C::<T>::new(scale, T::zero());
        }
        for i in 0..data.len() {
            if self.is_nyquist(i) {
                data[i] = C::<T>::new(T::zero(), T::zero());
            }
        }
        Ok(data)
    }

    /// Inverse transform back to physical samples.
    pub fn fft_inverse(&self, coeffs: &[C<T>]) -> Result<Vec<C<T>>> {
        if coeffs.len() != self.num_modes() {
            return Err(Error::SizeMismatch(format!(
                "fft_inverse: {} coefficients for a grid of {}",
                coeffs.len(),
                self.num_modes()
            )));
        }
        let mut data = coeffs.to_vec();
        self.transform(&mut data, false);
        Ok(data)
    }

    fn transform(&self, data: &mut [C<T>], forward: bool) {
        let plan = if forward { &self.forward } else { &self.inverse };
        let n = self.npts;
        if self.d == 1 {
            plan.process(data);
            return;
        }
        // rows (contiguous)
        for row in data.chunks_exact_mut(n) {
            plan.process(row);
        }
        // columns (gather/scatter)
        let mut scratch = vec![C::<T>::new(T::zero(), T::zero()); n];
        for col in 0..n {
            for row in 0..n {
                scratch[row] = data[row * n + col];
            }
            plan.process(&mut scratch);
            for row in 0..n {
                data[row * n + col] = scratch[row];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn cosine_transforms_to_half_amplitudes() {
        let grid = HorizontalGrid::<f64>::new(1, 32, 4.0).unwrap();
        let samples: Vec<Complex64> = (0..32)
            .map(|j| {
                let x = grid.point(j)[0];
                Complex64::new((2.0 * std::f64::consts::PI * x / 4.0).cos(), 0.0)
            })
            .collect();
        let coeffs = grid.fft_forward(&samples).unwrap();
        for (i, c) in coeffs.iter().enumerate() {
            let k = grid.mode_k(i)[0];
            if k == 1 || k == -1 {
                assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-13);
            } else {
                assert!(c.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn round_trip_identity() {
        let grid = HorizontalGrid::<f64>::new(2, 16, 3.0).unwrap();
        let mut state = 0xABCDEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        // random spectral data with Nyquist already zero, conj-symmetrized
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.num_modes()];
        for i in 0..grid.num_modes() {
            if grid.is_nyquist(i) {
                continue;
            }
            coeffs[i] = Complex64::new(next(), next());
        }
        let phys = grid.fft_inverse(&coeffs).unwrap();
        let back = grid.fft_forward(&phys).unwrap();
        let err = coeffs
            .iter()
            .zip(back.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn real_input_gives_conjugate_symmetry() {
        let grid = HorizontalGrid::<f64>::new(1, 16, 1.0).unwrap();
        let samples: Vec<Complex64> =
            (0..16).map(|j| Complex64::new((j as f64).sin() + 0.3, 0.0)).collect();
        let coeffs = grid.fft_forward(&samples).unwrap();
        for i in 0..grid.num_modes() {
            if let Some(neg) = grid.negated_index(i) {
                assert!((coeffs[i].conj() - coeffs[neg]).norm() < 1e-13);
            }
        }
    }
}
