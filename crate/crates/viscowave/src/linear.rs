//! Linear solves: applied stress, traveling gravity-capillary, the
//! over-determined compatibility functional, and Navier conditions.
//!
//! The gravity-capillary solve determines the free surface first, dividing
//! the compatibility functional `psi` by the synthesized symbol `rho`, then
//! hands modified data to the stress solve. The pressure is returned in the
//! canonical split `p = q + eta` with `q` stored explicitly.

use crate::error::{Error, Result};
use crate::field::{SurfaceField, VolumeField};
use crate::frequency_ode::{assemble_field, solve_coupled, solve_transverse, FrequencyBvp};
use crate::grid::HorizontalGrid;
use crate::params::WaveParams;
use crate::quadrature::VerticalNodes;
use crate::scalar::{c_im, c_re, Scalar, C};
use crate::symbols::{eval_symbols, reparam, rho_value};
use rayon::prelude::*;

/// Guard on dividing by `rho`; tripping it means parameter misuse since
/// `rho` vanishes only at the zero frequency when `gamma != 0`.
const RHO_FLOOR: f64 = 1e-300;

/// Tolerance scale for the zero-mode (torus `H^{-1}`) compatibility check.
const COMPAT_TOL: f64 = 1e-8;

/// Zero-mode compatibility metadata carried by assembled data.
#[derive(Debug, Clone, Copy)]
pub struct CompatReport<T> {
    pub zero_mode_ok: bool,
    pub zero_mode_residual: T,
    /// Seminorm of `h - int_0^b g dx_n` over nonzero modes.
    pub hdot1_value: T,
}

/// Spectral data quadruple `(f, g, h, k)` with vertical-derivative access
/// for `g` and the compatibility record.
#[derive(Debug, Clone)]
pub struct DataQuadruple<T> {
    pub f: Vec<VolumeField<T>>,
    pub g: VolumeField<T>,
    pub g_dn: VolumeField<T>,
    pub h: SurfaceField<T>,
    pub k: Vec<SurfaceField<T>>,
    pub compat: CompatReport<T>,
}

impl<T: Scalar> DataQuadruple<T> {
    /// Assemble from raw components; computes the vertical derivative of `g`
    /// from its spectral representation and the compatibility record.
    pub fn assemble(
        f: Vec<VolumeField<T>>,
        g: VolumeField<T>,
        h: SurfaceField<T>,
        k: Vec<SurfaceField<T>>,
        nodes: &VerticalNodes<T>,
    ) -> Self {
        let _ = nodes;
        let g_dn = g.vertical_derivative();
        let compat = compat_report(&g, &h);
        Self { f, g, g_dn, h, k, compat }
    }

    pub fn zeros(grid: &HorizontalGrid<T>, nodes: &VerticalNodes<T>, n: usize) -> Self {
        let f = (0..n).map(|_| VolumeField::zeros(grid, nodes)).collect();
        let k = (0..n).map(|_| SurfaceField::zeros(grid)).collect();
        Self {
            f,
            g: VolumeField::zeros(grid, nodes),
            g_dn: VolumeField::zeros(grid, nodes),
            h: SurfaceField::zeros(grid),
            k,
            compat: CompatReport {
                zero_mode_ok: true,
                zero_mode_residual: T::zero(),
                hdot1_value: T::zero(),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// Discrete norm of the data space at regularity zero:
    /// `L^2` for `f`, `H^1` for `g`, `H^{3/2}` for `h`, `H^{1/2}` for `k`,
    /// plus the homogeneous `-1` piece of `h - int g` and the raw zero-mode
    /// defect.
    pub fn y0_norm(&self) -> T {
        let mu = self.g.grid.cell_measure();
        let weights = self.g.nodes.weights().to_vec();
        let mut vol2 = T::zero();
        for comp in &self.f {
            vol2 = vol2 + volume_l2_sq(comp, &weights);
        }
        let mut g2 = volume_l2_sq(&self.g, &weights) + volume_l2_sq(&self.g_dn, &weights);
        for axis in 0..self.g.grid.d {
            g2 = g2 + volume_l2_sq(&self.g.horizontal_derivative(axis), &weights);
        }
        let mut surf2 = T::zero();
        for (mode, c) in self.h.coeffs.iter().enumerate() {
            let norm = self.h.grid.frequency_at(mode).norm();
            surf2 = surf2 + (T::one() + norm * norm).powf(T::of(1.5)) * c.norm_sqr() * mu;
        }
        for comp in &self.k {
            for (mode, c) in comp.coeffs.iter().enumerate() {
                let norm = comp.grid.frequency_at(mode).norm();
                surf2 = surf2 + (T::one() + norm * norm).powf(T::half()) * c.norm_sqr() * mu;
            }
        }
        let hd = self.compat.hdot1_value;
        let zm = self.compat.zero_mode_residual;
        ((vol2 + g2) * mu + surf2 + hd * hd + zm * zm).sqrt()
    }

    pub fn scale(&mut self, factor: T) {
        let fc = c_re(factor);
        for comp in &mut self.f {
            comp.scale_assign(fc);
        }
        self.g.scale_assign(fc);
        self.g_dn.scale_assign(fc);
        self.h.scale_assign(fc);
        for comp in &mut self.k {
            comp.scale_assign(fc);
        }
        self.compat.zero_mode_residual = self.compat.zero_mode_residual * factor.abs();
        self.compat.hdot1_value = self.compat.hdot1_value * factor.abs();
    }

    pub fn axpy(&mut self, factor: T, other: &Self) {
        let fc = c_re(factor);
        for (a, b) in self.f.iter_mut().zip(other.f.iter()) {
            a.axpy(fc, b);
        }
        self.g.axpy(fc, &other.g);
        self.g_dn.axpy(fc, &other.g_dn);
        self.h.axpy(fc, &other.h);
        for (a, b) in self.k.iter_mut().zip(other.k.iter()) {
            a.axpy(fc, b);
        }
        let refreshed = compat_report(&self.g, &self.h);
        self.compat = refreshed;
    }
}

fn volume_l2_sq<T: Scalar>(field: &VolumeField<T>, weights: &[T]) -> T {
    let mut acc = T::zero();
    for mode in 0..field.grid.num_modes() {
        for (node, &w) in weights.iter().enumerate() {
            acc = acc + field.data[[mode, node]].norm_sqr() * w;
        }
    }
    acc
}

fn compat_report<T: Scalar>(g: &VolumeField<T>, h: &SurfaceField<T>) -> CompatReport<T> {
    let mu = g.grid.cell_measure();
    let gint = g.vertical_integral();
    let mut defect = h.clone();
    defect.sub_assign(&gint);
    let zero_mode_residual = defect.zero_mode().norm();
    let mut hdot2 = T::zero();
    for (mode, c) in defect.coeffs.iter().enumerate() {
        let norm = defect.grid.frequency_at(mode).norm();
        if norm > T::zero() {
            hdot2 = hdot2 + c.norm_sqr() / (norm * norm);
        }
    }
    let scale = T::one() + h.l2_coeff() + gint.l2_coeff();
    CompatReport {
        zero_mode_ok: zero_mode_residual <= T::of(COMPAT_TOL) * scale,
        zero_mode_residual,
        hdot1_value: (hdot2 * mu).sqrt(),
    }
}

/// Solution triple with the pressure split stored explicitly: the field `q`
/// is the regular part and the full pressure is `q + lift(eta)`.
#[derive(Debug, Clone)]
pub struct SolutionTriple<T> {
    pub u: Vec<VolumeField<T>>,
    pub q: VolumeField<T>,
    pub eta: SurfaceField<T>,
}

impl<T: Scalar> SolutionTriple<T> {
    pub fn zeros(grid: &HorizontalGrid<T>, nodes: &VerticalNodes<T>, n: usize) -> Self {
        Self {
            u: (0..n).map(|_| VolumeField::zeros(grid, nodes)).collect(),
            q: VolumeField::zeros(grid, nodes),
            eta: SurfaceField::zeros(grid),
        }
    }

    /// The full pressure `p = q + lift(eta)`.
    pub fn pressure(&self) -> VolumeField<T> {
        let mut p = self.q.clone();
        p.add_assign(&self.eta.lift(&self.q.nodes));
        p
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn scale(&mut self, factor: T) {
        let fc = c_re(factor);
        for comp in &mut self.u {
            comp.scale_assign(fc);
        }
        self.q.scale_assign(fc);
        self.eta.scale_assign(fc);
    }

    pub fn axpy(&mut self, factor: T, other: &Self) {
        let fc = c_re(factor);
        for (a, b) in self.u.iter_mut().zip(other.u.iter()) {
            a.axpy(fc, b);
        }
        self.q.axpy(fc, &other.q);
        self.eta.axpy(fc, &other.eta);
    }

    /// Coefficient-level magnitude, for convergence diagnostics.
    pub fn linf_coeff(&self) -> T {
        let mut worst = self.eta.linf_coeff();
        for comp in self.u.iter().chain(std::iter::once(&self.q)) {
            for v in comp.data.iter() {
                if v.norm() > worst {
                    worst = v.norm();
                }
            }
        }
        worst
    }
}

/// Per-mode data extracted for the reduced solve.
struct ModeData<T> {
    f_hat: Vec<Vec<C<T>>>,
    g_hat: Vec<C<T>>,
    dg_hat: Vec<C<T>>,
    k_hat: Vec<C<T>>,
}

fn extract_mode<T: Scalar>(
    f: &[VolumeField<T>],
    g: &VolumeField<T>,
    g_dn: &VolumeField<T>,
    k: &[SurfaceField<T>],
    mode: usize,
) -> ModeData<T> {
    ModeData {
        f_hat: f.iter().map(|c| c.mode_profile(mode)).collect(),
        g_hat: g.mode_profile(mode),
        dg_hat: g_dn.mode_profile(mode),
        k_hat: k.iter().map(|c| c.coeffs[mode]).collect(),
    }
}

/// Solve the applied-stress problem: find `(u, p)` with
/// `div S(p,u) - gamma d1 u = f`, `div u = g`, `S(p,u) e_n |_b = k`,
/// `u |_0 = 0`.
pub fn solve_stress<T: Scalar>(
    f: &[VolumeField<T>],
    g: &VolumeField<T>,
    g_dn: &VolumeField<T>,
    k: &[SurfaceField<T>],
    gamma: T,
    params: &WaveParams<T>,
) -> Result<(Vec<VolumeField<T>>, VolumeField<T>)> {
    let n = params.n();
    assert_eq!(f.len(), n);
    assert_eq!(k.len(), n);
    let grid = g.grid.clone();
    let nodes = g.nodes.clone();
    let d = grid.d;
    let num_modes = grid.num_modes();
    let nn = nodes.len();

    let results: Vec<Result<(usize, Vec<Vec<C<T>>>, Vec<C<T>>)>> = (0..num_modes)
        .into_par_iter()
        .map(|mode| {
            let zero = C::<T>::new(T::zero(), T::zero());
            if grid.is_nyquist(mode) {
                return Ok((mode, vec![vec![zero; nn]; n], vec![zero; nn]));
            }
            let data = extract_mode(f, g, g_dn, k, mode);
            let xi = grid.frequency_at(mode);
            let solve = || -> Result<(Vec<Vec<C<T>>>, Vec<C<T>>)> {
                if xi.is_zero() {
                    return solve_zero_mode(&data, &nodes, gamma, d);
                }
                let rp = reparam(&xi, gamma);
                let dir = xi.direction();
                // project onto the longitudinal scalar data
                let mut f1 = Vec::with_capacity(nn);
                let mut f2 = Vec::with_capacity(nn);
                for node in 0..nn {
                    let mut dot = zero;
                    for axis in 0..d {
                        dot = dot + data.f_hat[axis][node] * c_re(dir[axis]);
                    }
                    f1.push(c_im(T::one()) * dot);
                    f2.push(data.f_hat[d][node]);
                }
                let mut kdot = zero;
                for axis in 0..d {
                    kdot = kdot + data.k_hat[axis] * c_re(dir[axis]);
                }
                let k1 = c_im(T::one()) * kdot;
                let k2 = data.k_hat[d];
                let bvp = FrequencyBvp {
                    rp,
                    f1,
                    f2,
                    g: data.g_hat.clone(),
                    dg: data.dg_hat.clone(),
                    k: [k1, k2],
                };
                let y = solve_coupled(&bvp, &nodes)?;
                // transverse part only exists for d = 2
                let theta = if d == 2 {
                    let perp = [-dir[1], dir[0]];
                    let mut f_perp = Vec::with_capacity(nn);
                    for node in 0..nn {
                        let mut dot = zero;
                        for axis in 0..d {
                            dot = dot + data.f_hat[axis][node] * c_re(perp[axis]);
                        }
                        f_perp.push(dot);
                    }
                    let mut k_perp = zero;
                    for axis in 0..d {
                        k_perp = k_perp + data.k_hat[axis] * c_re(perp[axis]);
                    }
                    Some(solve_transverse(&rp, &nodes, &f_perp, k_perp)?)
                } else {
                    None
                };
                let assembled = assemble_field(&xi, &y, theta.as_deref());
                Ok((assembled.u, assembled.p))
            };
            match solve() {
                Ok((u, p)) => Ok((mode, u, p)),
                Err(e) => Err(Error::FrequencyFailure { mode: grid.mode_k(mode), source: Box::new(e) }),
            }
        })
        .collect();

    let mut u: Vec<VolumeField<T>> = (0..n).map(|_| VolumeField::zeros(&grid, &nodes)).collect();
    let mut p = VolumeField::zeros(&grid, &nodes);
    for item in results {
        let (mode, u_hat, p_hat) = item?;
        for comp in 0..n {
            u[comp].set_mode_profile(mode, &u_hat[comp]);
        }
        p.set_mode_profile(mode, &p_hat);
    }
    Ok((u, p))
}

/// The zero-frequency solve decouples into scalar problems per horizontal
/// component: each shares the `(w, q)` pair, while `phi` carries the
/// component's own data without the longitudinal projection factor.
fn solve_zero_mode<T: Scalar>(
    data: &ModeData<T>,
    nodes: &VerticalNodes<T>,
    gamma: T,
    d: usize,
) -> Result<(Vec<Vec<C<T>>>, Vec<C<T>>)> {
    let rp = crate::symbols::Reparam::from_r_kappa(T::zero(), T::zero());
    let nn = nodes.len();
    let mut u = Vec::with_capacity(d + 1);
    let mut shared: Option<(Vec<C<T>>, Vec<C<T>>)> = None;
    for axis in 0..d {
        let bvp = FrequencyBvp {
            rp,
            f1: data.f_hat[axis].clone(),
            f2: data.f_hat[d].clone(),
            g: data.g_hat.clone(),
            dg: data.dg_hat.clone(),
            k: [data.k_hat[axis], data.k_hat[d]],
        };
        let y = solve_coupled(&bvp, nodes)?;
        let mut u_axis = Vec::with_capacity(nn);
        let mut w = Vec::with_capacity(nn);
        let mut q = Vec::with_capacity(nn);
        for row in &y {
            u_axis.push(row[0]);
            w.push(row[1]);
            q.push(row[2]);
        }
        u.push(u_axis);
        if shared.is_none() {
            shared = Some((w, q));
        }
        let _ = gamma;
    }
    let (w, q) = shared.expect("at least one horizontal component");
    u.push(w);
    Ok((u, q))
}

/// The compatibility functional
/// `psi(xi) = int_0^b (f_hat . conj V - g_hat conj Q) dx_n
///            - k_hat . conj V(b) + h_hat`,
/// with `V`, `Q` evaluated at speed `-gamma`. Its zero mode equals the
/// divergence-trace defect `h_hat(0) - int g_hat(0)`.
pub fn compute_psi<T: Scalar>(data: &DataQuadruple<T>, params: &WaveParams<T>) -> Result<SurfaceField<T>> {
    let grid = data.g.grid.clone();
    let nodes = data.g.nodes.clone();
    let n = params.n();
    let d = grid.d;
    let gamma = params.gamma;
    let num_modes = grid.num_modes();
    let coeffs: Vec<Result<C<T>>> = (0..num_modes)
        .into_par_iter()
        .map(|mode| {
            let zero = C::<T>::new(T::zero(), T::zero());
            if grid.is_nyquist(mode) {
                return Ok(zero);
            }
            let xi = grid.frequency_at(mode);
            let sample = eval_symbols(&xi, -gamma, params, nodes.nodes())
                .map_err(|e| Error::FrequencyFailure { mode: grid.mode_k(mode), source: Box::new(e) })?;
            // integrand per node: f . conj V - g conj Q
            let mut integrand = Vec::with_capacity(nodes.len());
            for node in 0..nodes.len() {
                let mut dot = zero;
                for axis in 0..d {
                    dot = dot + data.f[axis].data[[mode, node]] * sample.v_prime[node][axis].conj();
                }
                dot = dot + data.f[n - 1].data[[mode, node]] * sample.v_n[node].conj();
                dot = dot - data.g.data[[mode, node]] * sample.q[node].conj();
                integrand.push(dot);
            }
            let mut psi = nodes.integrate(&integrand);
            // boundary pairing: V at x_n = b (V' from the last node sample set
            // would be off-node; evaluate directly)
            let v_b = boundary_v(&xi, -gamma, params)?;
            for axis in 0..d {
                psi = psi - data.k[axis].coeffs[mode] * v_b[axis].conj();
            }
            psi = psi - data.k[n - 1].coeffs[mode] * v_b[2].conj();
            psi = psi + data.h.coeffs[mode];
            Ok(psi)
        })
        .collect();
    let mut out = SurfaceField::zeros(&grid);
    for (mode, c) in coeffs.into_iter().enumerate() {
        out.coeffs[mode] = c?;
    }
    Ok(out)
}

/// `(V'_1, V'_2, V_n)` at the top boundary for one frequency and speed.
fn boundary_v<T: Scalar>(
    xi: &crate::params::Frequency<T>,
    gamma: T,
    params: &WaveParams<T>,
) -> Result<[C<T>; 3]> {
    let zero = C::<T>::new(T::zero(), T::zero());
    if xi.is_zero() {
        return Ok([zero, zero, zero]);
    }
    let rp = reparam(xi, gamma);
    let y = crate::symbols::eval_y(&rp, params.b, params.b)?;
    let dir = xi.direction();
    let factor = c_im(-T::one()) * y[0];
    Ok([factor * c_re(dir[0]), factor * c_re(dir[1]), y[1]])
}

/// Residual spectrum of the over-determined problem: `psi` itself. A
/// near-zero spectrum certifies that `(f, g, h, k)` is solvable with the
/// extra Dirichlet datum.
pub fn check_overdetermined<T: Scalar>(
    data: &DataQuadruple<T>,
    params: &WaveParams<T>,
) -> Result<SurfaceField<T>> {
    compute_psi(data, params)
}

/// Solve the traveling gravity-capillary problem for `(u, p, eta)`.
pub fn solve_gravity_capillary<T: Scalar>(
    data: &DataQuadruple<T>,
    params: &WaveParams<T>,
) -> Result<SolutionTriple<T>> {
    if params.gamma == T::zero() {
        return Err(Error::GammaZero);
    }
    params.check_solver_supported()?;
    if !data.compat.zero_mode_ok {
        return Err(Error::CompatibilityViolated {
            residual: data.compat.zero_mode_residual.to_f64().unwrap_or(f64::NAN),
            tol: COMPAT_TOL,
        });
    }
    let grid = data.g.grid.clone();
    let nodes = data.g.nodes.clone();
    let n = params.n();
    let d = grid.d;
    let sigma = params.sigma;
    let gamma = params.gamma;

    // eta_hat = psi / rho off the zero mode
    let psi = compute_psi(data, params)?;
    let mut eta = SurfaceField::zeros(&grid);
    for mode in 0..grid.num_modes() {
        let xi = grid.frequency_at(mode);
        if xi.is_zero() || grid.is_nyquist(mode) {
            continue;
        }
        let rho = rho_value(&xi, params)
            .map_err(|e| Error::FrequencyFailure { mode: grid.mode_k(mode), source: Box::new(e) })?;
        if rho.norm() < T::of(RHO_FLOOR) {
            return Err(Error::FrequencyFailure {
                mode: grid.mode_k(mode),
                source: Box::new(Error::SingularSystem("rho below floor".into())),
            });
        }
        eta.coeffs[mode] = psi.coeffs[mode] / rho;
    }

    // modified data for the stress solve
    let mut h_mod = data.h.clone();
    let d1_eta = eta.derivative(0);
    h_mod.axpy(c_re(-gamma), &d1_eta);

    let mut k_mod: Vec<SurfaceField<T>> = data.k.clone();
    let mut f_mod: Vec<VolumeField<T>> = data.f.clone();
    if sigma > T::zero() {
        // f - lift(grad' eta, 0), k - sigma lap' eta e_n
        for axis in 0..d {
            let grad = eta.derivative(axis);
            f_mod[axis].sub_assign(&grad.lift(&nodes));
        }
        let mut lap = eta.laplacian();
        lap.scale_assign(c_re(sigma));
        k_mod[n - 1].sub_assign(&lap);
    } else {
        // sigma = 0, one horizontal dimension: k + eta e_n
        k_mod[n - 1].add_assign(&eta);
    }

    let (u, p_stress) = solve_stress(&f_mod, &data.g, &data.g_dn, &k_mod, gamma, params)?;

    // canonical split p = q + lift(eta): with surface tension the stress
    // pressure already is q; without it the stress pressure is the full p
    let mut q = p_stress;
    if sigma == T::zero() {
        q.sub_assign(&eta.lift(&nodes));
    }
    Ok(SolutionTriple { u, q, eta })
}

/// Data for the Navier-condition problem: the horizontal stress trace
/// `k'` replaces the full stress vector.
#[derive(Debug, Clone)]
pub struct NavierData<T> {
    pub f: Vec<VolumeField<T>>,
    pub g: VolumeField<T>,
    pub g_dn: VolumeField<T>,
    pub h: SurfaceField<T>,
    pub kprime: Vec<SurfaceField<T>>,
}

impl<T: Scalar> NavierData<T> {
    pub fn assemble(
        f: Vec<VolumeField<T>>,
        g: VolumeField<T>,
        h: SurfaceField<T>,
        kprime: Vec<SurfaceField<T>>,
    ) -> Self {
        let g_dn = g.vertical_derivative();
        Self { f, g, g_dn, h, kprime }
    }
}

/// Result of the Navier solve, keeping the reconstructed normal stress.
#[derive(Debug, Clone)]
pub struct NavierSolution<T> {
    pub u: Vec<VolumeField<T>>,
    pub p: VolumeField<T>,
    /// The recovered normal stress trace `k_n` completing `k = (k', k_n)`.
    pub normal_stress: SurfaceField<T>,
}

/// The functional `W(f, g, h, k')(xi)`; like `psi` but pairing only the
/// horizontal stress components.
pub fn compute_w<T: Scalar>(ndata: &NavierData<T>, params: &WaveParams<T>) -> Result<SurfaceField<T>> {
    let grid = ndata.g.grid.clone();
    let nodes = ndata.g.nodes.clone();
    let n = params.n();
    let d = grid.d;
    let gamma = params.gamma;
    let mut out = SurfaceField::zeros(&grid);
    let coeffs: Vec<Result<C<T>>> = (0..grid.num_modes())
        .into_par_iter()
        .map(|mode| {
            let zero = C::<T>::new(T::zero(), T::zero());
            if grid.is_nyquist(mode) {
                return Ok(zero);
            }
            let xi = grid.frequency_at(mode);
            let sample = eval_symbols(&xi, -gamma, params, nodes.nodes())
                .map_err(|e| Error::FrequencyFailure { mode: grid.mode_k(mode), source: Box::new(e) })?;
            let mut integrand = Vec::with_capacity(nodes.len());
            for node in 0..nodes.len() {
                let mut dot = zero;
                for axis in 0..d {
                    dot = dot + ndata.f[axis].data[[mode, node]] * sample.v_prime[node][axis].conj();
                }
                dot = dot + ndata.f[n - 1].data[[mode, node]] * sample.v_n[node].conj();
                dot = dot - ndata.g.data[[mode, node]] * sample.q[node].conj();
                integrand.push(dot);
            }
            let mut w = nodes.integrate(&integrand);
            let v_b = boundary_v(&xi, -gamma, params)?;
            for axis in 0..d {
                w = w - ndata.kprime[axis].coeffs[mode] * v_b[axis].conj();
            }
            w = w + ndata.h.coeffs[mode];
            Ok(w)
        })
        .collect();
    for (mode, c) in coeffs.into_iter().enumerate() {
        out.coeffs[mode] = c?;
    }
    Ok(out)
}

/// Solve the Navier-condition problem by reconstructing the missing normal
/// stress via `psi_hat = W / conj m(., -gamma)` and running the stress solve
/// with the completed boundary vector.
pub fn solve_navier<T: Scalar>(ndata: &NavierData<T>, params: &WaveParams<T>) -> Result<NavierSolution<T>> {
    let grid = ndata.g.grid.clone();
    let n = params.n();
    let gamma = params.gamma;
    let w = compute_w(ndata, params)?;
    let scale = T::one() + w.l2_coeff();
    let w0 = w.zero_mode().norm();
    if w0 > T::of(COMPAT_TOL) * scale {
        return Err(Error::NavierCompatibility {
            residual: w0.to_f64().unwrap_or(f64::NAN),
            tol: COMPAT_TOL,
        });
    }
    let mut psi = SurfaceField::zeros(&grid);
    for mode in 0..grid.num_modes() {
        let xi = grid.frequency_at(mode);
        if xi.is_zero() || grid.is_nyquist(mode) {
            continue;
        }
        let m = crate::symbols::eval_m(&xi, -gamma, params.b)
            .map_err(|e| Error::FrequencyFailure { mode: grid.mode_k(mode), source: Box::new(e) })?;
        psi.coeffs[mode] = w.coeffs[mode] / m.conj();
    }
    let mut k_full = ndata.kprime.clone();
    k_full.push(psi.clone());
    debug_assert_eq!(k_full.len(), n);
    let (u, p) = solve_stress(&ndata.f, &ndata.g, &ndata.g_dn, &k_full, gamma, params)?;
    // the reconstruction is only valid if the extra Dirichlet datum is met
    let mut trace = u[n - 1].boundary_top();
    trace.sub_assign(&ndata.h);
    let defect = trace.linf_coeff();
    let scale = T::one() + ndata.h.linf_coeff();
    if defect > T::of(1e-6) * scale {
        return Err(Error::NavierCompatibility {
            residual: (defect / scale).to_f64().unwrap_or(f64::NAN),
            tol: 1e-6,
        });
    }
    Ok(NavierSolution { u, p, normal_stress: psi })
}
