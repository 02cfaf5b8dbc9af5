//! Flattening geometry, the nonlinear residual, and the quasi-Newton solve.
//!
//! The residual measures how far a state `(u, q + eta, eta)` is from solving
//! the flattened traveling-wave system with the supplied forcing; the
//! iteration inverts the frozen linearization at the trivial state (the
//! gravity-capillary isomorphism) on every step.

use crate::error::{Error, Result};
use crate::field::{SurfaceField, VolumeField};
use crate::grid::HorizontalGrid;
use crate::linear::{solve_gravity_capillary, DataQuadruple, SolutionTriple};
use crate::params::WaveParams;
use crate::quadrature::VerticalNodes;
use crate::scalar::{Scalar, C};
use ndarray::Array2;
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;

/// Symmetric tensor value; only the leading `n x n` block is used.
pub type SymTensor<T> = [[T; 3]; 3];

/// Vector value; only the leading `n` entries are used.
pub type VecValue<T> = [T; 3];

pub type AmbientVectorFn<T> = Arc<dyn Fn([T; 2], T) -> VecValue<T> + Send + Sync>;
pub type AmbientStressFn<T> = Arc<dyn Fn([T; 2], T) -> SymTensor<T> + Send + Sync>;
pub type SliceVectorFn<T> = Arc<dyn Fn([T; 2]) -> VecValue<T> + Send + Sync>;
pub type SliceStressFn<T> = Arc<dyn Fn([T; 2]) -> SymTensor<T> + Send + Sync>;

/// Ambient field sampled on uniform vertical levels, interpolated cubically
/// when evaluated at deformed points; the callable forms are the accuracy
/// reference.
#[derive(Clone)]
pub struct GriddedAmbient<T> {
    /// Uniform levels covering the deformed range (at least 4).
    pub levels: Vec<T>,
    /// `[component][point, level]` physical samples on the horizontal grid.
    pub values: Vec<Array2<T>>,
}

impl<T: Scalar> GriddedAmbient<T> {
    /// Cubic Lagrange interpolation in the vertical at one horizontal point.
    pub fn eval(&self, point: usize, z: T) -> Vec<T> {
        let m = self.levels.len();
        assert!(m >= 4, "gridded ambient field needs at least 4 levels");
        let z0 = self.levels[0];
        let dz = self.levels[1] - self.levels[0];
        let pos = ((z - z0) / dz).floor().to_f64().unwrap_or(0.0) as i64;
        let base = pos.clamp(1, m as i64 - 3) as usize - 1;
        let xs = [
            self.levels[base],
            self.levels[base + 1],
            self.levels[base + 2],
            self.levels[base + 3],
        ];
        let mut weights = [T::one(); 4];
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    weights[i] = weights[i] * (z - xs[j]) / (xs[i] - xs[j]);
                }
            }
        }
        self.values
            .iter()
            .map(|comp| {
                let mut acc = T::zero();
                for i in 0..4 {
                    acc = acc + weights[i] * comp[[point, base + i]];
                }
                acc
            })
            .collect()
    }
}

/// Bulk force and surface stress specification. Ambient fields live on the
/// deformed domain and are composed with the flattening; slice fields depend
/// only on the horizontal coordinate and are lifted verbatim.
#[derive(Clone)]
pub struct ForcingSpec<T> {
    pub bulk_ambient: Option<AmbientVectorFn<T>>,
    pub bulk_ambient_grid: Option<GriddedAmbient<T>>,
    pub bulk_slice: Option<SliceVectorFn<T>>,
    pub stress_ambient: Option<AmbientStressFn<T>>,
    pub stress_slice: Option<SliceStressFn<T>>,
}

impl<T> Default for ForcingSpec<T> {
    fn default() -> Self {
        Self {
            bulk_ambient: None,
            bulk_ambient_grid: None,
            bulk_slice: None,
            stress_ambient: None,
            stress_slice: None,
        }
    }
}

impl<T: Scalar> ForcingSpec<T> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.bulk_ambient.is_none()
            && self.bulk_ambient_grid.is_none()
            && self.bulk_slice.is_none()
            && self.stress_ambient.is_none()
            && self.stress_slice.is_none()
    }

    /// Localized normal-stress bump `T = a exp(-|x - c|^2 / w^2) I` applied
    /// as a slice stress.
    pub fn gaussian_bump_stress(amplitude: T, width: T, center: [T; 2], dim: usize) -> Self {
        Self {
            stress_slice: Some(Arc::new(move |x: [T; 2]| {
                let mut r2 = (x[0] - center[0]) * (x[0] - center[0]);
                if dim == 2 {
                    r2 = r2 + (x[1] - center[1]) * (x[1] - center[1]);
                }
                let phi = amplitude * (-r2 / (width * width)).exp();
                let mut t = [[T::zero(); 3]; 3];
                for i in 0..3 {
                    t[i][i] = phi;
                }
                t
            })),
            ..Self::default()
        }
    }

    /// Localized horizontal slice force `f = a exp(-|x - c|^2/w^2) e_1`.
    pub fn slice_force(amplitude: T, width: T, center: [T; 2], dim: usize) -> Self {
        Self {
            bulk_slice: Some(Arc::new(move |x: [T; 2]| {
                let mut r2 = (x[0] - center[0]) * (x[0] - center[0]);
                if dim == 2 {
                    r2 = r2 + (x[1] - center[1]) * (x[1] - center[1]);
                }
                let mut f = [T::zero(); 3];
                f[0] = amplitude * (-r2 / (width * width)).exp();
                f
            })),
            ..Self::default()
        }
    }

    /// Ambient pressure patch `T = a exp(-(|x' - c|^2 + (x_n - b)^2)/w^2) I`,
    /// exercising the composition with the flattening map.
    pub fn traveling_pressure_patch(amplitude: T, width: T, center: [T; 2], b: T, dim: usize) -> Self {
        Self {
            stress_ambient: Some(Arc::new(move |x: [T; 2], z: T| {
                let mut r2 = (x[0] - center[0]) * (x[0] - center[0]) + (z - b) * (z - b);
                if dim == 2 {
                    r2 = r2 + (x[1] - center[1]) * (x[1] - center[1]);
                }
                let phi = amplitude * (-r2 / (width * width)).exp();
                let mut t = [[T::zero(); 3]; 3];
                for i in 0..3 {
                    t[i][i] = phi;
                }
                t
            })),
            ..Self::default()
        }
    }
}

/// Flattening geometry sampled on the physical grid.
#[derive(Debug, Clone)]
pub struct GeometryPack<T> {
    pub eta: Vec<T>,
    /// `grad' eta` per point.
    pub grad_eta: Vec<[T; 2]>,
    /// Jacobian `J = 1 + eta / b` per point (constant in the vertical).
    pub j: Vec<T>,
    /// Inverse Jacobian `b / (b + eta)` per point.
    pub kinv: Vec<T>,
    /// Mean curvature `H(eta)` per point.
    pub meancurv: Vec<T>,
}

impl<T: Scalar> GeometryPack<T> {
    /// Upper-right column entry `A_{i,n} = -x_n d_i eta / (b + eta)`.
    #[inline]
    pub fn a_in(&self, point: usize, axis: usize, x_n: T, b: T) -> T {
        -x_n * self.grad_eta[point][axis] * self.kinv[point] / b
    }

    /// Non-unit normal `(-grad' eta, 1)` at one point.
    pub fn normal(&self, point: usize, dim: usize) -> VecValue<T> {
        let mut n = [T::zero(); 3];
        for axis in 0..dim {
            n[axis] = -self.grad_eta[point][axis];
        }
        n[dim] = T::one();
        n
    }
}

/// Build the geometry; fails when the surface exceeds half the depth.
pub fn build_geometry<T: Scalar>(eta: &SurfaceField<T>, params: &WaveParams<T>) -> Result<GeometryPack<T>> {
    let b = params.b;
    let d = eta.grid.d;
    let eta_phys = eta.to_physical()?;
    let cap = b * T::half();
    let max_eta = eta_phys.iter().fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m });
    if max_eta > cap {
        return Err(Error::SurfaceTooLarge {
            max_eta: max_eta.to_f64().unwrap_or(f64::NAN),
            cap: cap.to_f64().unwrap_or(f64::NAN),
        });
    }
    let npts = eta.grid.num_points();
    let mut grad_eta = vec![[T::zero(); 2]; npts];
    for axis in 0..d {
        let da = eta.derivative(axis).to_physical()?;
        for (p, slot) in grad_eta.iter_mut().enumerate() {
            slot[axis] = da[p];
        }
    }
    // mean curvature: div'( grad eta / sqrt(1 + |grad eta|^2) ), the quotient
    // pointwise and the divergence spectral
    let mut meancurv = vec![T::zero(); npts];
    for axis in 0..d {
        let quotient: Vec<C<T>> = (0..npts)
            .map(|p| {
                let g = grad_eta[p];
                let denom = (T::one() + g[0] * g[0] + g[1] * g[1]).sqrt();
                C::<T>::new(g[axis] / denom, T::zero())
            })
            .collect();
        let coeffs = eta.grid.fft_forward(&quotient)?;
        let spectral = SurfaceField { grid: eta.grid.clone(), coeffs };
        let dcomp = spectral.derivative(axis).to_physical()?;
        for (p, slot) in meancurv.iter_mut().enumerate() {
            *slot = *slot + dcomp[p];
        }
    }
    let j: Vec<T> = eta_phys.iter().map(|&e| T::one() + e / b).collect();
    let kinv: Vec<T> = eta_phys.iter().map(|&e| b / (b + e)).collect();
    Ok(GeometryPack { eta: eta_phys, grad_eta, j, kinv, meancurv })
}

/// Physical-space scratch pad for one state: values and all first
/// derivatives of the velocity components and the full pressure.
struct PhysState<T> {
    u: Vec<Array2<T>>,
    /// `du[i][k] = d_k u_i`, `k < n-1` horizontal, `k = n-1` vertical.
    du: Vec<Vec<Array2<T>>>,
    p: Array2<T>,
}

fn phys_to_spectral<T: Scalar>(
    grid: &HorizontalGrid<T>,
    nodes: &VerticalNodes<T>,
    values: &Array2<T>,
) -> Result<VolumeField<T>> {
    let mut out = VolumeField::zeros(grid, nodes);
    let npts = grid.num_points();
    let mut column = vec![C::<T>::new(T::zero(), T::zero()); npts];
    for node in 0..nodes.len() {
        for (p, slot) in column.iter_mut().enumerate() {
            *slot = C::<T>::new(values[[p, node]], T::zero());
        }
        let coeffs = grid.fft_forward(&column)?;
        for (mode, c) in coeffs.into_iter().enumerate() {
            out.data[[mode, node]] = c;
        }
    }
    Ok(out)
}

fn build_phys_state<T: Scalar>(state: &SolutionTriple<T>) -> Result<PhysState<T>> {
    let n = state.n();
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    for comp in &state.u {
        u.push(comp.to_physical()?);
        let mut derivs = Vec::with_capacity(n);
        for axis in 0..n - 1 {
            derivs.push(comp.horizontal_derivative(axis).to_physical()?);
        }
        derivs.push(comp.vertical_derivative().to_physical()?);
        du.push(derivs);
    }
    let pressure = state.pressure();
    let p = pressure.to_physical()?;
    Ok(PhysState { u, du, p })
}

/// Evaluate the total bulk force at a deformed point.
fn total_bulk_force<T: Scalar>(
    forcing: &ForcingSpec<T>,
    point: usize,
    x: [T; 2],
    z_deformed: T,
    n: usize,
) -> VecValue<T> {
    let mut f = [T::zero(); 3];
    if let Some(ambient) = &forcing.bulk_ambient {
        let v = ambient(x, z_deformed);
        for i in 0..n {
            f[i] = f[i] + v[i];
        }
    }
    if let Some(gridded) = &forcing.bulk_ambient_grid {
        let v = gridded.eval(point, z_deformed);
        for (i, val) in v.into_iter().take(n).enumerate() {
            f[i] = f[i] + val;
        }
    }
    if let Some(slice) = &forcing.bulk_slice {
        let v = slice(x);
        for i in 0..n {
            f[i] = f[i] + v[i];
        }
    }
    f
}

/// Evaluate the total surface stress at the deformed top boundary.
fn total_surface_stress<T: Scalar>(
    forcing: &ForcingSpec<T>,
    x: [T; 2],
    z_deformed: T,
    n: usize,
) -> SymTensor<T> {
    let mut t = [[T::zero(); 3]; 3];
    if let Some(ambient) = &forcing.stress_ambient {
        let v = ambient(x, z_deformed);
        for i in 0..n {
            for j in 0..n {
                t[i][j] = t[i][j] + v[i][j];
            }
        }
    }
    if let Some(slice) = &forcing.stress_slice {
        let v = slice(x);
        for i in 0..n {
            for j in 0..n {
                t[i][j] = t[i][j] + v[i][j];
            }
        }
    }
    t
}

/// The nonlinear residual of the flattened traveling-wave system:
///
/// * `f`-residual: `(u - gamma e_1) . grad_A u + div_A S_A(p, u) - F_total`
/// * `g`-residual: `J div_A u`
/// * `h`-residual: `u . N + gamma d_1 eta` at the top
/// * `k`-residual: `(p I - D_A u) N - (eta - sigma H(eta)) N - T_total N`
///
/// with `p = q + eta`, horizontal derivatives spectral, vertical derivatives
/// barycentric, and all products formed pointwise.
pub fn nonlinear_residual<T: Scalar>(
    state: &SolutionTriple<T>,
    forcing: &ForcingSpec<T>,
    params: &WaveParams<T>,
) -> Result<DataQuadruple<T>> {
    let geometry = build_geometry(&state.eta, params)?;
    residual_with_geometry(state, forcing, params, &geometry)
}

fn residual_with_geometry<T: Scalar>(
    state: &SolutionTriple<T>,
    forcing: &ForcingSpec<T>,
    params: &WaveParams<T>,
    geo: &GeometryPack<T>,
) -> Result<DataQuadruple<T>> {
    let grid = state.q.grid.clone();
    let nodes = state.q.nodes.clone();
    let n = params.n();
    let d = n - 1;
    let b = params.b;
    let gamma = params.gamma;
    let sigma = params.sigma;
    let npts = grid.num_points();
    let nn = nodes.len();
    let phys = build_phys_state(state)?;
    let xs = nodes.nodes().to_vec();

    // grad_A of a scalar from its raw derivative stack, per point/node
    let grad_a = |dstack: &[Array2<T>], point: usize, node: usize, x_n: T| -> VecValue<T> {
        let dn = dstack[n - 1][[point, node]];
        let mut out = [T::zero(); 3];
        for axis in 0..d {
            out[axis] = dstack[axis][[point, node]] + geo.a_in(point, axis, x_n, b) * dn;
        }
        out[d] = geo.kinv[point] * dn;
        out
    };

    // S_A(p, u) = p I - D_A u; also J div_A u and the advective term
    let mut s_entries: Vec<Array2<T>> = vec![Array2::from_elem((npts, nn), T::zero()); n * n];
    let mut g_res_phys = Array2::from_elem((npts, nn), T::zero());
    let mut advect: Vec<Array2<T>> = vec![Array2::from_elem((npts, nn), T::zero()); n];
    for point in 0..npts {
        for node in 0..nn {
            let x_n = xs[node];
            let mut grads: Vec<VecValue<T>> = Vec::with_capacity(n);
            for i in 0..n {
                grads.push(grad_a(&phys.du[i], point, node, x_n));
            }
            let mut div = T::zero();
            for i in 0..n {
                div = div + grads[i][i];
            }
            g_res_phys[[point, node]] = geo.j[point] * div;
            let pval = phys.p[[point, node]];
            for i in 0..n {
                for jj in 0..n {
                    let dij = grads[jj][i] + grads[i][jj];
                    let sij = if i == jj { pval - dij } else { -dij };
                    s_entries[i * n + jj][[point, node]] = sij;
                }
            }
            for i in 0..n {
                let mut acc = T::zero();
                for jj in 0..n {
                    let coeff = phys.u[jj][[point, node]] - if jj == 0 { gamma } else { T::zero() };
                    acc = acc + coeff * grads[i][jj];
                }
                advect[i][[point, node]] = acc;
            }
        }
    }

    // derivative stacks of the stress entries, for div_A S_A
    let diff = nodes.diff_matrix().clone();
    let mut s_derivs: Vec<Vec<Array2<T>>> = Vec::with_capacity(n * n);
    for entry in &s_entries {
        let spectral = phys_to_spectral(&grid, &nodes, entry)?;
        let mut stack = Vec::with_capacity(n);
        for axis in 0..d {
            stack.push(spectral.horizontal_derivative(axis).to_physical()?);
        }
        let mut vert = Array2::from_elem((npts, nn), T::zero());
        for point in 0..npts {
            for node in 0..nn {
                let mut acc = T::zero();
                for k in 0..nn {
                    acc = acc + diff[[node, k]] * entry[[point, k]];
                }
                vert[[point, node]] = acc;
            }
        }
        stack.push(vert);
        s_derivs.push(stack);
    }

    // f-residual
    let mut f_res: Vec<Array2<T>> = vec![Array2::from_elem((npts, nn), T::zero()); n];
    for point in 0..npts {
        let x = grid.point(point);
        for node in 0..nn {
            let x_n = xs[node];
            let z_def = x_n * (T::one() + geo.eta[point] / b);
            let force = total_bulk_force(forcing, point, x, z_def, n);
            for i in 0..n {
                // (div_A S)_i = sum_j (grad_A S_{ij})_j, using symmetry of S
                let mut div_s = T::zero();
                for jj in 0..n {
                    let g = grad_a(&s_derivs[i * n + jj], point, node, x_n);
                    div_s = div_s + g[jj];
                }
                f_res[i][[point, node]] = advect[i][[point, node]] + div_s - force[i];
            }
        }
    }

    // boundary residuals at x_n = b
    let top_weights = nodes.interpolation_weights(b);
    let top_value = |field: &Array2<T>, point: usize| -> T {
        let mut acc = T::zero();
        for (node, &w) in top_weights.iter().enumerate() {
            acc = acc + w * field[[point, node]];
        }
        acc
    };
    let eta_d1 = state.eta.derivative(0).to_physical()?;
    let mut h_res_phys = vec![T::zero(); npts];
    let mut k_res_phys: Vec<Vec<T>> = vec![vec![T::zero(); npts]; n];
    for point in 0..npts {
        let x = grid.point(point);
        let normal = geo.normal(point, d);
        let mut un = T::zero();
        for i in 0..n {
            un = un + top_value(&phys.u[i], point) * normal[i];
        }
        h_res_phys[point] = un + gamma * eta_d1[point];
        let z_def = b + geo.eta[point];
        let t_tot = total_surface_stress(forcing, x, z_def, n);
        let gc = geo.eta[point] - sigma * geo.meancurv[point];
        for i in 0..n {
            let mut row = T::zero();
            for jj in 0..n {
                row = row + top_value(&s_entries[i * n + jj], point) * normal[jj];
            }
            let mut t_row = T::zero();
            for jj in 0..n {
                t_row = t_row + t_tot[i][jj] * normal[jj];
            }
            k_res_phys[i][point] = row - gc * normal[i] - t_row;
        }
    }

    // package into spectral data
    let mut f_fields = Vec::with_capacity(n);
    for comp in &f_res {
        f_fields.push(phys_to_spectral(&grid, &nodes, comp)?);
    }
    let g_field = phys_to_spectral(&grid, &nodes, &g_res_phys)?;
    let h_samples: Vec<C<T>> = h_res_phys.iter().map(|&v| C::<T>::new(v, T::zero())).collect();
    let h_field = SurfaceField { grid: grid.clone(), coeffs: grid.fft_forward(&h_samples)? };
    let mut k_fields = Vec::with_capacity(n);
    for comp in &k_res_phys {
        let samples: Vec<C<T>> = comp.iter().map(|&v| C::<T>::new(v, T::zero())).collect();
        k_fields.push(SurfaceField { grid: grid.clone(), coeffs: grid.fft_forward(&samples)? });
    }
    Ok(DataQuadruple::assemble(f_fields, g_field, h_field, k_fields, &nodes))
}

/// Power-balance diagnostics on a state: bulk input, surface input, viscous
/// dissipation, all evaluated in flattened coordinates weighted by `J`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBalance {
    pub bulk_power: f64,
    pub surface_power: f64,
    pub dissipation: f64,
    pub defect: f64,
    pub relative_defect: f64,
}

pub fn energy_balance<T: Scalar>(
    state: &SolutionTriple<T>,
    forcing: &ForcingSpec<T>,
    params: &WaveParams<T>,
) -> Result<EnergyBalance> {
    let geo = build_geometry(&state.eta, params)?;
    let grid = state.q.grid.clone();
    let nodes = state.q.nodes.clone();
    let n = params.n();
    let d = n - 1;
    let b = params.b;
    let npts = grid.num_points();
    let nn = nodes.len();
    let phys = build_phys_state(state)?;
    let xs = nodes.nodes().to_vec();
    let wts = nodes.weights().to_vec();
    let cell = {
        let h = grid.length / T::of(grid.npts as f64);
        if d == 1 {
            h
        } else {
            h * h
        }
    };

    let grad_a = |dstack: &[Array2<T>], point: usize, node: usize, x_n: T| -> VecValue<T> {
        let dn = dstack[n - 1][[point, node]];
        let mut out = [T::zero(); 3];
        for axis in 0..d {
            out[axis] = dstack[axis][[point, node]] + geo.a_in(point, axis, x_n, b) * dn;
        }
        out[d] = geo.kinv[point] * dn;
        out
    };

    let mut dissipation = T::zero();
    let mut bulk_power = T::zero();
    for point in 0..npts {
        let x = grid.point(point);
        for node in 0..nn {
            let x_n = xs[node];
            let mut grads: Vec<VecValue<T>> = Vec::with_capacity(n);
            for i in 0..n {
                grads.push(grad_a(&phys.du[i], point, node, x_n));
            }
            let mut frob = T::zero();
            for i in 0..n {
                for jj in 0..n {
                    let dij = grads[jj][i] + grads[i][jj];
                    frob = frob + dij * dij;
                }
            }
            let z_def = x_n * (T::one() + geo.eta[point] / b);
            let force = total_bulk_force(forcing, point, x, z_def, n);
            let mut power = T::zero();
            for i in 0..n {
                power = power + force[i] * phys.u[i][[point, node]];
            }
            let weight = wts[node] * geo.j[point] * cell;
            dissipation = dissipation + T::half() * frob * weight;
            bulk_power = bulk_power + power * weight;
        }
    }

    let top_weights = nodes.interpolation_weights(b);
    let top_value = |field: &Array2<T>, point: usize| -> T {
        let mut acc = T::zero();
        for (node, &w) in top_weights.iter().enumerate() {
            acc = acc + w * field[[point, node]];
        }
        acc
    };
    let mut surface_power = T::zero();
    for point in 0..npts {
        let x = grid.point(point);
        let normal = geo.normal(point, d);
        let z_def = b + geo.eta[point];
        let t_tot = total_surface_stress(forcing, x, z_def, n);
        let mut acc = T::zero();
        for i in 0..n {
            let mut t_row = T::zero();
            for jj in 0..n {
                t_row = t_row + t_tot[i][jj] * normal[jj];
            }
            acc = acc + t_row * top_value(&phys.u[i], point);
        }
        surface_power = surface_power + acc * cell;
    }

    let bulk = bulk_power.to_f64().unwrap_or(f64::NAN);
    let surf = surface_power.to_f64().unwrap_or(f64::NAN);
    let diss = dissipation.to_f64().unwrap_or(f64::NAN);
    let defect = (bulk - surf - diss).abs();
    Ok(EnergyBalance {
        bulk_power: bulk,
        surface_power: surf,
        dissipation: diss,
        defect,
        relative_defect: if diss > 0.0 { defect / diss } else { defect },
    })
}

/// Quasi-Newton iteration controls.
#[derive(Debug, Clone, Copy)]
pub struct IterationConfig {
    pub max_iters: usize,
    /// Residual tolerance in the discrete data norm.
    pub tol: f64,
    /// Step damping in (0, 1]; halved automatically on residual growth.
    pub damping: f64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self { max_iters: 25, tol: 1e-10, damping: 1.0 }
    }
}

/// One iteration record for the convergence report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual: f64,
    pub damping: f64,
}

/// Machine-readable convergence report.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub iterations: Vec<IterationRecord>,
    pub final_residual: f64,
    pub energy: Option<EnergyBalance>,
    pub wall_seconds: f64,
}

/// Solve the traveling-wave system by damped quasi-Newton iteration with the
/// frozen linearization: `x <- x - damping * Upsilon^{-1} Xi(x)` starting
/// from the zero state.
pub fn solve_traveling_wave<T: Scalar>(
    forcing: &ForcingSpec<T>,
    params: &WaveParams<T>,
    grid: &HorizontalGrid<T>,
    nodes: &VerticalNodes<T>,
    cfg: &IterationConfig,
) -> Result<(SolutionTriple<T>, ConvergenceReport)> {
    if params.gamma == T::zero() {
        return Err(Error::GammaZero);
    }
    params.check_solver_supported()?;
    let start = Instant::now();
    let n = params.n();
    let mut state = SolutionTriple::zeros(grid, nodes, n);
    let mut records = Vec::new();
    let mut damping = cfg.damping;
    let mut prev_residual = f64::INFINITY;
    let mut growth_streak = 0usize;
    let mut final_residual = f64::NAN;
    let mut converged = false;
    for iter in 0..cfg.max_iters {
        let residual = nonlinear_residual(&state, forcing, params).map_err(|e| match e {
            Error::SurfaceTooLarge { .. } => {
                Error::Diverged { iterations: iter, residual: prev_residual }
            }
            other => other,
        })?;
        let res_norm = residual.y0_norm().to_f64().unwrap_or(f64::NAN);
        records.push(IterationRecord { iteration: iter, residual: res_norm, damping });
        final_residual = res_norm;
        if res_norm <= cfg.tol {
            converged = true;
            break;
        }
        if res_norm > prev_residual * (1.0 + 1e-12) {
            growth_streak += 1;
            damping *= 0.5;
            if growth_streak >= 3 || damping < 1.0 / 16.0 {
                return Err(Error::Diverged { iterations: iter, residual: res_norm });
            }
        } else {
            growth_streak = 0;
        }
        let step = solve_gravity_capillary(&residual, params)?;
        state.axpy(T::of(-damping), &step);
        prev_residual = res_norm;
    }
    if !converged {
        return Err(Error::MaxIterations { iterations: cfg.max_iters, residual: final_residual });
    }
    let energy = if forcing.is_zero() { None } else { Some(energy_balance(&state, forcing, params)?) };
    let report = ConvergenceReport {
        converged,
        iterations: records,
        final_residual,
        energy,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((state, report))
}
