//! Spectral field containers on (horizontal modes) x (vertical nodes).

use crate::error::{Error, Result};
use crate::grid::HorizontalGrid;
use crate::quadrature::VerticalNodes;
use crate::scalar::{c_im, Scalar, C};
use ndarray::Array2;

/// A scalar field on the slab, stored as Fourier coefficients per horizontal
/// mode at each vertical Gauss-Legendre node.
#[derive(Debug, Clone)]
pub struct VolumeField<T> {
    pub grid: HorizontalGrid<T>,
    pub nodes: VerticalNodes<T>,
    /// coefficients indexed `[mode, node]`
    pub data: Array2<C<T>>,
}

impl<T: Scalar> VolumeField<T> {
    pub fn zeros(grid: &HorizontalGrid<T>, nodes: &VerticalNodes<T>) -> Self {
        Self {
            grid: grid.clone(),
            nodes: nodes.clone(),
            data: Array2::from_elem(
                (grid.num_modes(), nodes.len()),
                C::<T>::new(T::zero(), T::zero()),
            ),
        }
    }

    /// Build from a spectral closure `(mode index, kvec, node index, x_n) -> coeff`.
    pub fn from_spectral(
        grid: &HorizontalGrid<T>,
        nodes: &VerticalNodes<T>,
        f: impl Fn([i64; 2], usize, T) -> C<T>,
    ) -> Self {
        let mut out = Self::zeros(grid, nodes);
        for mode in 0..grid.num_modes() {
            if grid.is_nyquist(mode) {
                continue;
            }
            let k = grid.mode_k(mode);
            for (node, &x) in nodes.nodes().iter().enumerate() {
                out.data[[mode, node]] = f(k, node, x);
            }
        }
        out
    }

    /// Sample a physical-space function and transform to coefficients.
    pub fn from_physical(
        grid: &HorizontalGrid<T>,
        nodes: &VerticalNodes<T>,
        f: impl Fn([T; 2], T) -> T,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, nodes);
        let npts = grid.num_points();
        let mut column = vec![C::<T>::new(T::zero(), T::zero()); npts];
        for (node, &x_n) in nodes.nodes().iter().enumerate() {
            for (p, slot) in column.iter_mut().enumerate() {
                *slot = C::<T>::new(f(grid.point(p), x_n), T::zero());
            }
            let coeffs = grid.fft_forward(&column)?;
            for (mode, c) in coeffs.into_iter().enumerate() {
                out.data[[mode, node]] = c;
            }
        }
        Ok(out)
    }

    /// Physical samples `[point, node]` (drops imaginary round-off).
    pub fn to_physical(&self) -> Result<Array2<T>> {
        let npts = self.grid.num_points();
        let nn = self.nodes.len();
        let mut out = Array2::from_elem((npts, nn), T::zero());
        let mut column = vec![C::<T>::new(T::zero(), T::zero()); self.grid.num_modes()];
        for node in 0..nn {
            for mode in 0..column.len() {
                column[mode] = self.data[[mode, node]];
            }
            let phys = self.grid.fft_inverse(&column)?;
            for (p, v) in phys.into_iter().enumerate() {
                out[[p, node]] = v.re;
            }
        }
        Ok(out)
    }

    /// Largest imaginary part left over by an inverse transform; a real-data
    /// sanity diagnostic.
    pub fn max_imag_residual(&self) -> Result<T> {
        let mut column = vec![C::<T>::new(T::zero(), T::zero()); self.grid.num_modes()];
        let mut worst = T::zero();
        for node in 0..self.nodes.len() {
            for mode in 0..column.len() {
                column[mode] = self.data[[mode, node]];
            }
            let phys = self.grid.fft_inverse(&column)?;
            for v in phys {
                if v.im.abs() > worst {
                    worst = v.im.abs();
                }
            }
        }
        Ok(worst)
    }

    pub fn mode_profile(&self, mode: usize) -> Vec<C<T>> {
        (0..self.nodes.len()).map(|node| self.data[[mode, node]]).collect()
    }

    pub fn set_mode_profile(&mut self, mode: usize, values: &[C<T>]) {
        for (node, v) in values.iter().enumerate() {
            self.data[[mode, node]] = *v;
        }
    }

    /// Spectral derivative along a horizontal axis.
    pub fn horizontal_derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for mode in 0..self.grid.num_modes() {
            let xi = self.grid.frequency_at(mode);
            let mult = c_im(T::TAU() * xi.xi[axis]);
            for node in 0..self.nodes.len() {
                out.data[[mode, node]] = self.data[[mode, node]] * mult;
            }
        }
        out
    }

    /// Barycentric derivative along the vertical axis.
    pub fn vertical_derivative(&self) -> Self {
        let mut out = self.clone();
        for mode in 0..self.grid.num_modes() {
            let profile = self.mode_profile(mode);
            out.set_mode_profile(mode, &self.nodes.differentiate(&profile));
        }
        out
    }

    /// Barycentric trace at the top boundary `x_n = b`.
    pub fn boundary_top(&self) -> SurfaceField<T> {
        let weights = self.nodes.interpolation_weights(self.nodes.b);
        let mut coeffs = vec![C::<T>::new(T::zero(), T::zero()); self.grid.num_modes()];
        for (mode, slot) in coeffs.iter_mut().enumerate() {
            let mut acc = C::<T>::new(T::zero(), T::zero());
            for (node, &w) in weights.iter().enumerate() {
                acc = acc + self.data[[mode, node]] * C::<T>::new(w, T::zero());
            }
            *slot = acc;
        }
        SurfaceField { grid: self.grid.clone(), coeffs }
    }

    /// Vertical integral `int_0^b . dx_n` per mode.
    pub fn vertical_integral(&self) -> SurfaceField<T> {
        let mut coeffs = vec![C::<T>::new(T::zero(), T::zero()); self.grid.num_modes()];
        for (mode, slot) in coeffs.iter_mut().enumerate() {
            *slot = self.nodes.integrate(&self.mode_profile(mode));
        }
        SurfaceField { grid: self.grid.clone(), coeffs }
    }

    pub fn assign(&mut self, other: &Self) {
        self.data.assign(&other.data);
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.data.zip_mut_with(&other.data, |a, b| *a = *a + *b);
    }

    pub fn sub_assign(&mut self, other: &Self) {
        self.data.zip_mut_with(&other.data, |a, b| *a = *a - *b);
    }

    pub fn scale_assign(&mut self, factor: C<T>) {
        self.data.map_inplace(|a| *a = *a * factor);
    }

    pub fn axpy(&mut self, factor: C<T>, other: &Self) {
        self.data.zip_mut_with(&other.data, |a, b| *a = *a + factor * *b);
    }

    /// Conjugate-symmetry defect, zero for fields representing real data.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for mode in 0..self.grid.num_modes() {
            if let Some(neg) = self.grid.negated_index(mode) {
                for node in 0..self.nodes.len() {
                    let defect = (self.data[[mode, node]].conj() - self.data[[neg, node]]).norm();
                    if defect > worst {
                        worst = defect;
                    }
                }
            }
        }
        worst
    }
}

/// A surface quantity stored as Fourier coefficients per horizontal mode.
#[derive(Debug, Clone)]
pub struct SurfaceField<T> {
    pub grid: HorizontalGrid<T>,
    pub coeffs: Vec<C<T>>,
}

impl<T: Scalar> SurfaceField<T> {
    pub fn zeros(grid: &HorizontalGrid<T>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![C::<T>::new(T::zero(), T::zero()); grid.num_modes()],
        }
    }

    pub fn from_spectral(grid: &HorizontalGrid<T>, f: impl Fn([i64; 2]) -> C<T>) -> Self {
        let mut out = Self::zeros(grid);
        for mode in 0..grid.num_modes() {
            if grid.is_nyquist(mode) {
                continue;
            }
            out.coeffs[mode] = f(grid.mode_k(mode));
        }
        out
    }

    pub fn from_physical(grid: &HorizontalGrid<T>, f: impl Fn([T; 2]) -> T) -> Result<Self> {
        let samples: Vec<C<T>> = (0..grid.num_points())
            .map(|p| C::<T>::new(f(grid.point(p)), T::zero()))
            .collect();
        Ok(Self { grid: grid.clone(), coeffs: grid.fft_forward(&samples)? })
    }

    pub fn to_physical(&self) -> Result<Vec<T>> {
        Ok(self.grid.fft_inverse(&self.coeffs)?.into_iter().map(|v| v.re).collect())
    }

    pub fn max_imag_residual(&self) -> Result<T> {
        Ok(self
            .grid
            .fft_inverse(&self.coeffs)?
            .into_iter()
            .fold(T::zero(), |m, v| if v.im.abs() > m { v.im.abs() } else { m }))
    }

    pub fn zero_mode(&self) -> C<T> {
        self.coeffs[self.grid.index_of([0, 0])]
    }

    pub fn set_zero_mode(&mut self, value: C<T>) {
        let idx = self.grid.index_of([0, 0]);
        self.coeffs[idx] = value;
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for (mode, c) in out.coeffs.iter_mut().enumerate() {
            let xi = self.grid.frequency_at(mode);
            *c = *c * c_im(T::TAU() * xi.xi[axis]);
        }
        out
    }

    /// `Delta' = sum of second horizontal derivatives` as a multiplier.
    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        for (mode, c) in out.coeffs.iter_mut().enumerate() {
            let xi = self.grid.frequency_at(mode);
            let norm2 = xi.norm() * xi.norm();
            *c = *c * C::<T>::new(-T::TAU() * T::TAU() * norm2, T::zero());
        }
        out
    }

    /// Lift to an `x_n`-independent volume field.
    pub fn lift(&self, nodes: &VerticalNodes<T>) -> VolumeField<T> {
        let mut out = VolumeField::zeros(&self.grid, nodes);
        for mode in 0..self.grid.num_modes() {
            for node in 0..nodes.len() {
                out.data[[mode, node]] = self.coeffs[mode];
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a = *a + *b;
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a = *a - *b;
        }
    }

    pub fn scale_assign(&mut self, factor: C<T>) {
        for a in self.coeffs.iter_mut() {
            *a = *a * factor;
        }
    }

    pub fn axpy(&mut self, factor: C<T>, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a = *a + factor * *b;
        }
    }

    pub fn linf_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| if c.norm() > m { c.norm() } else { m })
    }

    pub fn l2_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt()
    }

    pub fn conjugate_symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for mode in 0..self.grid.num_modes() {
            if let Some(neg) = self.grid.negated_index(mode) {
                let defect = (self.coeffs[mode].conj() - self.coeffs[neg]).norm();
                if defect > worst {
                    worst = defect;
                }
            }
        }
        worst
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid.compatible(&other.grid) {
            return Err(Error::SizeMismatch("surface fields on different grids".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c_re;
    use num_complex::Complex64;

    #[test]
    fn derivative_of_plane_wave() {
        let grid = HorizontalGrid::<f64>::new(1, 16, 2.0).unwrap();
        let mut eta = SurfaceField::zeros(&grid);
        let idx = grid.index_of([3, 0]);
        eta.coeffs[idx] = Complex64::new(1.0, 0.0);
        let d = eta.derivative(0);
        let expect = Complex64::new(0.0, 2.0 * std::f64::consts::PI * 1.5);
        assert!((d.coeffs[idx] - expect).norm() < 1e-14);
    }

    #[test]
    fn lift_and_boundary_round_trip() {
        let grid = HorizontalGrid::<f64>::new(1, 8, 1.0).unwrap();
        let nodes = VerticalNodes::<f64>::new(12, 1.0);
        let eta = SurfaceField::from_spectral(&grid, |k| {
            Complex64::new(1.0 / (1.0 + k[0].abs() as f64), 0.1 * k[0] as f64)
        });
        let lifted = eta.lift(&nodes);
        let back = lifted.boundary_top();
        for mode in 0..grid.num_modes() {
            assert!((back.coeffs[mode] - eta.coeffs[mode]).norm() < 1e-12);
        }
    }

    #[test]
    fn vertical_derivative_of_polynomial_profile() {
        let grid = HorizontalGrid::<f64>::new(1, 4, 1.0).unwrap();
        let nodes = VerticalNodes::<f64>::new(10, 2.0);
        let field = VolumeField::from_spectral(&grid, &nodes, |_k, _node, x| {
            c_re(x * x * x - 2.0 * x)
        });
        let d = field.vertical_derivative();
        for (node, &x) in nodes.nodes().iter().enumerate() {
            let got = d.data[[0, node]].re;
            assert!((got - (3.0 * x * x - 2.0)).abs() < 1e-11);
        }
    }
}
