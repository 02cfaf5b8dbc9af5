//! Independent brute-force references used by the test suite.
//!
//! Nothing here calls into the closed-form symbol path or the Duhamel
//! solver: the matrix exponential is Taylor with scaling and squaring, the
//! boundary value reference is a finite-difference collocation of the
//! second-order system, and the forward operators apply raw differentiation
//! to a candidate solution. Shared code stops at the linear-algebra floor.

use crate::error::{Error, Result};
use crate::field::{SurfaceField, VolumeField};
use crate::grid::HorizontalGrid;
use crate::linear::{DataQuadruple, SolutionTriple};
use crate::mat4::CMat4;
use crate::params::WaveParams;
use crate::quadrature::VerticalNodes;
use crate::scalar::{c_im, c_re, Scalar, C};

/// Configuration knobs for the reference computations.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub collocation_points: usize,
    pub expm_scaling_threshold: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { collocation_points: 2000, expm_scaling_threshold: 0.5 }
    }
}

/// Matrix exponential by Taylor series with scaling and squaring.
pub fn expm_numeric<T: Scalar>(a: &CMat4<T>) -> CMat4<T> {
    let norm = a.max_abs() * T::of(4.0); // crude upper bound on the 1-norm
    let mut squarings = 0u32;
    let mut scale = T::one();
    let threshold = T::of(0.5);
    if norm > threshold {
        let k = (norm / threshold).log2().ceil();
        squarings = k.to_f64().unwrap_or(0.0) as u32;
        scale = T::one() / T::of((1u64 << squarings.min(62)) as f64);
    }
    let scaled = a.scale(c_re(scale));
    // Taylor sum: converges to machine precision for max|entry| <= ~0.5
    let mut result = CMat4::<T>::identity();
    let mut term = CMat4::<T>::identity();
    for j in 1..60 {
        term = term.matmul(&scaled).scale(c_re(T::one() / T::of(j as f64)));
        result = result.add(&term);
        if term.max_abs() < T::epsilon() * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Uniform-grid collocation solution of the coupled second-order system.
#[derive(Debug, Clone)]
pub struct CollocationSolution<T> {
    pub x: Vec<T>,
    pub phi: Vec<C<T>>,
    pub w: Vec<C<T>>,
    pub q: Vec<C<T>>,
}

/// Solve the second-order boundary value problem for `(phi, w, q)` with
/// second-order centered finite differences on `npts + 1` uniform nodes,
/// the pressure staggered to cell midpoints so every coupling stencil is
/// compact (no odd-even pressure mode).
///
/// `f1`, `f2`, `g` are callables on `[0, b]`; `k = (K1, K2)` the boundary
/// data. The derivative of `g` on the right side comes from the same compact
/// midpoint differences, keeping the oracle self-contained.
pub fn collocate_bvp<T: Scalar>(
    r: T,
    kappa: T,
    b: T,
    f1: &dyn Fn(T) -> C<T>,
    f2: &dyn Fn(T) -> C<T>,
    g: &dyn Fn(T) -> C<T>,
    k: [C<T>; 2],
    npts: usize,
) -> Result<CollocationSolution<T>> {
    assert!(npts >= 64, "collocation needs at least 64 intervals");
    let n = npts; // intervals; nodes 0..=n, midpoints 0..n
    let h = b / T::of(npts as f64);
    let x: Vec<T> = (0..=n).map(|j| T::of(j as f64) * h).collect();
    let xm: Vec<T> = (0..n).map(|j| (T::of(j as f64) + T::half()) * h).collect();
    let s2 = c_re(r * r) + c_im(-r * kappa);
    let rc = c_re(r);
    let inv_h = c_re(T::one() / h);
    let inv_h2 = c_re(T::one() / (h * h));
    let inv_2h = c_re(T::one() / (T::two() * h));
    let half = c_re(T::half());

    // unknown layout per cell j: (phi_j, w_j, q_{j+1/2}); tail (phi_n, w_n)
    let size = 3 * n + 2;
    let kl = 8usize;
    let ku = 8usize;
    let mut band = BandedMatrix::<T>::new(size, kl, ku);
    let mut rhs = vec![C::<T>::new(T::zero(), T::zero()); size];
    let idx_phi = |j: usize| if j < n { 3 * j } else { 3 * n };
    let idx_w = |j: usize| if j < n { 3 * j + 1 } else { 3 * n + 1 };
    let idx_q = |j: usize| 3 * j + 2; // midpoint j + 1/2

    // bottom Dirichlet rows
    band.add(0, idx_phi(0), c_re(T::one()));
    band.add(1, idx_w(0), c_re(T::one()));
    // interior momentum rows at nodes j = 1..n-1
    for j in 1..n {
        let row_a = 3 * j;
        let row_b = 3 * j + 1;
        // -phi'' + s^2 phi - r (q_{j-1/2} + q_{j+1/2})/2 = F1 - r G(x_j)
        band.add(row_a, idx_phi(j - 1), -inv_h2);
        band.add(row_a, idx_phi(j), inv_h2 * c_re(T::two()) + s2);
        band.add(row_a, idx_phi(j + 1), -inv_h2);
        band.add(row_a, idx_q(j - 1), -rc * half);
        band.add(row_a, idx_q(j), -rc * half);
        rhs[row_a] = f1(x[j]) - rc * g(x[j]);
        // -w'' + s^2 w + (q_{j+1/2} - q_{j-1/2})/h = F2 + G'(x_j)
        band.add(row_b, idx_w(j - 1), -inv_h2);
        band.add(row_b, idx_w(j), inv_h2 * c_re(T::two()) + s2);
        band.add(row_b, idx_w(j + 1), -inv_h2);
        band.add(row_b, idx_q(j - 1), -inv_h);
        band.add(row_b, idx_q(j), inv_h);
        rhs[row_b] = f2(x[j]) + (g(xm[j]) - g(xm[j - 1])) * inv_h;
    }
    // continuity at midpoints: r (phi_j + phi_{j+1})/2 + (w_{j+1} - w_j)/h = G
    for j in 0..n {
        let row_c = 3 * j + 2;
        band.add(row_c, idx_phi(j), rc * half);
        band.add(row_c, idx_phi(j + 1), rc * half);
        band.add(row_c, idx_w(j), -inv_h);
        band.add(row_c, idx_w(j + 1), inv_h);
        rhs[row_c] = g(xm[j]);
    }
    // top rows: -phi'(b) + r w(b) = K1; q(b) - 2 w'(b) = K2 with
    // q(b) extrapolated from the last two midpoints
    let row_k1 = 3 * n;
    band.add(row_k1, idx_phi(n - 2), -inv_2h);
    band.add(row_k1, idx_phi(n - 1), c_re(T::of(4.0)) * inv_2h);
    band.add(row_k1, idx_phi(n), c_re(-T::of(3.0)) * inv_2h);
    band.add(row_k1, idx_w(n), rc);
    rhs[row_k1] = k[0];
    let row_k2 = 3 * n + 1;
    band.add(row_k2, idx_q(n - 1), c_re(T::of(1.5)));
    band.add(row_k2, idx_q(n - 2), c_re(-T::half()));
    let m2 = c_re(-T::two());
    band.add(row_k2, idx_w(n - 2), inv_2h * m2);
    band.add(row_k2, idx_w(n - 1), c_re(-T::of(4.0)) * inv_2h * m2);
    band.add(row_k2, idx_w(n), c_re(T::of(3.0)) * inv_2h * m2);
    rhs[row_k2] = k[1];

    let sol = band.solve(rhs)?;
    let mut phi = Vec::with_capacity(n + 1);
    let mut w = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    for j in 0..=n {
        phi.push(sol[idx_phi(j)]);
        w.push(sol[idx_w(j)]);
    }
    // pressure back to the nodes: averages inside, extrapolation at the ends
    q.push(sol[idx_q(0)] * c_re(T::of(1.5)) - sol[idx_q(1)] * half);
    for j in 1..n {
        q.push((sol[idx_q(j - 1)] + sol[idx_q(j)]) * half);
    }
    q.push(sol[idx_q(n - 1)] * c_re(T::of(1.5)) - sol[idx_q(n - 2)] * half);
    Ok(CollocationSolution { x, phi, w, q })
}

/// Richardson extrapolation of two nested collocation solves (orders h, h/2),
/// reported on the coarse node set.
pub fn collocate_bvp_richardson<T: Scalar>(
    r: T,
    kappa: T,
    b: T,
    f1: &dyn Fn(T) -> C<T>,
    f2: &dyn Fn(T) -> C<T>,
    g: &dyn Fn(T) -> C<T>,
    k: [C<T>; 2],
    npts: usize,
) -> Result<CollocationSolution<T>> {
    let coarse = collocate_bvp(r, kappa, b, f1, f2, g, k, npts)?;
    let fine = collocate_bvp(r, kappa, b, f1, f2, g, k, 2 * npts)?;
    let third = c_re(T::one() / T::of(3.0));
    let four = c_re(T::of(4.0));
    let n = coarse.x.len();
    let mut out = coarse.clone();
    for j in 0..n {
        out.phi[j] = (fine.phi[2 * j] * four - coarse.phi[j]) * third;
        out.w[j] = (fine.w[2 * j] * four - coarse.w[j]) * third;
        out.q[j] = (fine.q[2 * j] * four - coarse.q[j]) * third;
    }
    Ok(out)
}

/// Complex banded matrix with LAPACK-style in-band storage and partial
/// pivoting restricted to the band.
struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    /// storage[(kl + ku + row - col) + col * ld] with fill-in space for pivots
    data: Vec<C<T>>,
    ld: usize,
}

impl<T: Scalar> BandedMatrix<T> {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self { n, kl, ku, data: vec![C::<T>::new(T::zero(), T::zero()); ld * n], ld }
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        self.kl + self.ku + row - col + col * self.ld
    }

    fn add(&mut self, row: usize, col: usize, val: C<T>) {
        debug_assert!(row < self.n && col < self.n);
        debug_assert!(col <= row + self.ku && row <= col + self.kl, "outside band");
        let i = self.idx(row, col);
        self.data[i] = self.data[i] + val;
    }

    fn get(&self, row: usize, col: usize) -> C<T> {
        self.data[self.idx(row, col)]
    }

    fn set(&mut self, row: usize, col: usize, val: C<T>) {
        let i = self.idx(row, col);
        self.data[i] = val;
    }

    /// Gaussian elimination with partial pivoting within the band.
    fn solve(mut self, mut rhs: Vec<C<T>>) -> Result<Vec<C<T>>> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        for col in 0..n {
            let last_row = (col + kl).min(n - 1);
            let mut piv = col;
            let mut best = self.get(col, col).norm_sqr();
            for row in col + 1..=last_row {
                let mag = self.get(row, col).norm_sqr();
                if mag > best {
                    best = mag;
                    piv = row;
                }
            }
            if best == T::zero() {
                return Err(Error::SingularSystem("banded collocation system".into()));
            }
            let last_col = (col + kl + ku).min(n - 1);
            if piv != col {
                for c in col..=last_col {
                    let a = self.get(col, c);
                    let b = self.get(piv, c);
                    self.set(col, c, b);
                    self.set(piv, c, a);
                }
                rhs.swap(piv, col);
            }
            let inv = C::<T>::new(T::one(), T::zero()) / self.get(col, col);
            for row in col + 1..=last_row {
                let factor = self.get(row, col) * inv;
                if factor.norm_sqr() == T::zero() {
                    continue;
                }
                for c in col..=last_col {
                    let v = self.get(row, c) - factor * self.get(col, c);
                    self.set(row, c, v);
                }
                rhs[row] = rhs[row] - factor * rhs[col];
            }
        }
        for col in (0..n).rev() {
            let mut sum = rhs[col];
            let last_col = (col + kl + ku).min(n - 1);
            for c in col + 1..=last_col {
                sum = sum - self.get(col, c) * rhs[c];
            }
            rhs[col] = sum / self.get(col, col);
        }
        Ok(rhs)
    }
}

/// Apply the full linearized traveling-wave operator to a solution triple:
/// `(div S(p,u) - gamma d1 u, div u, u_n + gamma d1 eta,
///   S(p,u) e_n - (eta - sigma lap' eta) e_n)` with `p = q + eta`.
pub fn forward_operator<T: Scalar>(
    state: &SolutionTriple<T>,
    params: &WaveParams<T>,
) -> DataQuadruple<T> {
    let (f, g, k_stress) = forward_stress_parts(&state.u, &state.pressure(), params);
    let grid = state.u[0].grid.clone();
    let nodes = state.u[0].nodes.clone();
    let n = params.n();
    let gamma = params.gamma;
    let sigma = params.sigma;
    // boundary rows
    let mut h = state.u[n - 1].boundary_top();
    let mut k = k_stress;
    for (mode, kvec) in grid.modes().enumerate() {
        let xi = grid.frequency(kvec);
        let eta = state.eta.coeffs[mode];
        h.coeffs[mode] = h.coeffs[mode] + c_im(T::TAU() * gamma * xi.xi[0]) * eta;
        let norm2 = xi.norm() * xi.norm();
        let gc = c_re(T::one() + T::two() * T::TAU() * T::PI() * sigma * norm2) * eta;
        k[n - 1].coeffs[mode] = k[n - 1].coeffs[mode] - gc;
    }
    DataQuadruple::assemble(f, g, h, k, &nodes)
}

/// The stress-problem forward operator `Phi_gamma(u, p)`:
/// `(div S(p,u) - gamma d1 u, div u, S(p,u) e_n |_b)`.
pub fn forward_stress<T: Scalar>(
    u: &[VolumeField<T>],
    p: &VolumeField<T>,
    params: &WaveParams<T>,
) -> (Vec<VolumeField<T>>, VolumeField<T>, Vec<SurfaceField<T>>) {
    forward_stress_parts(u, p, params)
}

fn forward_stress_parts<T: Scalar>(
    u: &[VolumeField<T>],
    p: &VolumeField<T>,
    params: &WaveParams<T>,
) -> (Vec<VolumeField<T>>, VolumeField<T>, Vec<SurfaceField<T>>) {
    let n = params.n();
    assert_eq!(u.len(), n);
    let gamma = params.gamma;
    let grid = p.grid.clone();
    let nodes = p.nodes.clone();

    // gradients: horizontal spectral, vertical barycentric
    let du: Vec<Vec<VolumeField<T>>> = u.iter().map(|c| gradient(c, n)).collect();
    let dp = gradient(p, n);

    // g = div u
    let mut g = VolumeField::zeros(&grid, &nodes);
    for i in 0..n {
        g.add_assign(&du[i][i]);
    }
    let dg = gradient(&g, n);

    // f_i = d_i p - lap u_i - d_i g - gamma d1 u_i
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        let mut lap = VolumeField::zeros(&grid, &nodes);
        for j in 0..n {
            lap.add_assign(&gradient(&du[i][j], n)[j]);
        }
        let mut fi = dp[i].clone();
        fi.sub_assign(&lap);
        fi.sub_assign(&dg[i]);
        let mut adv = du[i][0].clone();
        adv.scale_assign(c_re(gamma));
        fi.sub_assign(&adv);
        f.push(fi);
    }

    // k = S(p, u) e_n |_b: components j < n: -(d_n u_j + d_j u_n); n: p - 2 d_n u_n
    let mut k = Vec::with_capacity(n);
    for j in 0..n - 1 {
        let mut kj = du[j][n - 1].clone();
        kj.add_assign(&du[n - 1][j]);
        kj.scale_assign(c_re(-T::one()));
        k.push(kj.boundary_top());
    }
    let mut kn_field = dp[0].clone();
    kn_field.assign(p);
    let mut dnun2 = du[n - 1][n - 1].clone();
    dnun2.scale_assign(c_re(T::two()));
    kn_field.sub_assign(&dnun2);
    k.push(kn_field.boundary_top());

    (f, g, k)
}

/// All first derivatives of a volume field: `n - 1` horizontal spectral
/// derivatives followed by the vertical barycentric derivative.
pub fn gradient<T: Scalar>(field: &VolumeField<T>, n: usize) -> Vec<VolumeField<T>> {
    let mut out = Vec::with_capacity(n);
    for axis in 0..n - 1 {
        out.push(field.horizontal_derivative(axis));
    }
    out.push(field.vertical_derivative());
    out
}

/// Evaluate the action of the forward operator on a single Fourier mode by
/// direct assembly in the reduced variables; used for per-mode spot checks.
pub fn forward_single_mode<T: Scalar>(
    grid: &HorizontalGrid<T>,
    nodes: &VerticalNodes<T>,
    kvec: [i64; 2],
    u_hat: &[Vec<C<T>>],
    p_hat: &[C<T>],
    gamma: T,
) -> (Vec<Vec<C<T>>>, Vec<C<T>>, Vec<C<T>>) {
    let xi = grid.frequency(kvec);
    let n = u_hat.len();
    let nn = nodes.len();
    let tau = T::TAU();
    let mut du = Vec::with_capacity(n);
    for comp in u_hat {
        let mut d = Vec::with_capacity(n);
        for axis in 0..n - 1 {
            let mult = c_im(tau * xi.xi[axis]);
            d.push(comp.iter().map(|v| *v * mult).collect::<Vec<_>>());
        }
        d.push(nodes.differentiate(comp));
        du.push(d);
    }
    let dp: Vec<Vec<C<T>>> = {
        let mut d = Vec::new();
        for axis in 0..n - 1 {
            let mult = c_im(tau * xi.xi[axis]);
            d.push(p_hat.iter().map(|v| *v * mult).collect::<Vec<_>>());
        }
        d.push(nodes.differentiate(p_hat));
        d
    };
    let mut g = vec![C::<T>::new(T::zero(), T::zero()); nn];
    for i in 0..n {
        for (node, val) in du[i][i].iter().enumerate() {
            g[node] = g[node] + *val;
        }
    }
    let dg: Vec<Vec<C<T>>> = {
        let mut d = Vec::new();
        for axis in 0..n - 1 {
            let mult = c_im(tau * xi.xi[axis]);
            d.push(g.iter().map(|v| *v * mult).collect::<Vec<_>>());
        }
        d.push(nodes.differentiate(&g));
        d
    };
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        let mut fi = vec![C::<T>::new(T::zero(), T::zero()); nn];
        // laplacian of u_i
        let mut lap = vec![C::<T>::new(T::zero(), T::zero()); nn];
        for axis in 0..n - 1 {
            let mult = c_im(tau * xi.xi[axis]);
            for (node, val) in du[i][axis].iter().enumerate() {
                lap[node] = lap[node] + *val * mult;
            }
        }
        let second = nodes.differentiate(&du[i][n - 1]);
        for (node, val) in second.iter().enumerate() {
            lap[node] = lap[node] + *val;
        }
        for node in 0..nn {
            fi[node] = dp[i][node] - lap[node] - dg[i][node] - c_re(gamma) * du[i][0][node];
        }
        f.push(fi);
    }
    let mut k = Vec::with_capacity(n);
    for j in 0..n - 1 {
        let vals: Vec<C<T>> = (0..nn).map(|node| -(du[j][n - 1][node] + du[n - 1][j][node])).collect();
        k.push(nodes.interpolate(&vals, nodes.b));
    }
    let kn_vals: Vec<C<T>> =
        (0..nn).map(|node| p_hat[node] - c_re(T::two()) * du[n - 1][n - 1][node]).collect();
    k.push(nodes.interpolate(&kn_vals, nodes.b));
    (f, g, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn expm_zero_is_identity() {
        let z = CMat4::<f64>::zeros();
        let e = expm_numeric(&z);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((e.m[i][j] - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn expm_diagonal() {
        let mut a = CMat4::<f64>::zeros();
        a.m[0][0] = Complex64::new(1.0, 0.0);
        a.m[1][1] = Complex64::new(-1.0, 0.0);
        a.m[2][2] = Complex64::new(0.0, 1.0);
        a.m[3][3] = Complex64::new(0.0, -1.0);
        let e = expm_numeric(&a);
        let expect = [
            Complex64::new(1.0f64.exp(), 0.0),
            Complex64::new((-1.0f64).exp(), 0.0),
            Complex64::new(0.0, 1.0).exp(),
            Complex64::new(0.0, -1.0).exp(),
        ];
        for (i, want) in expect.iter().enumerate() {
            assert!((e.m[i][i] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn collocation_converges_to_unit_load_solution() {
        // z = 0, d = e4 load: exact solution is Y from the closed form
        let r = 2.0f64;
        let kappa = 0.7f64;
        let b = 1.0f64;
        let zero = |_x: f64| Complex64::new(0.0, 0.0);
        let k = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let rp = crate::symbols::Reparam::from_r_kappa(r, kappa);
        // raw scheme converges at second order within 20% on a log-log fit
        let mut raw_errors = Vec::new();
        for npts in [250usize, 500, 1000] {
            let raw = collocate_bvp(r, kappa, b, &zero, &zero, &zero, k, npts).unwrap();
            let mut worst_raw = 0.0f64;
            for (j, &x) in raw.x.iter().enumerate() {
                let y = crate::symbols::eval_y(&rp, x, b).unwrap();
                worst_raw = worst_raw
                    .max((raw.phi[j] - y[0]).norm())
                    .max((raw.w[j] - y[1]).norm())
                    .max((raw.q[j] - y[2]).norm());
            }
            raw_errors.push(worst_raw);
        }
        let slope = (raw_errors[0] / raw_errors[2]).log2() / 2.0;
        assert!((slope - 2.0).abs() <= 0.4, "raw convergence order {slope}");
        let mut previous = f64::INFINITY;
        for npts in [250usize, 500, 1000] {
            let sol = collocate_bvp_richardson(r, kappa, b, &zero, &zero, &zero, k, npts).unwrap();
            let mut worst = 0.0f64;
            for (j, &x) in sol.x.iter().enumerate() {
                let y = crate::symbols::eval_y(&rp, x, b).unwrap();
                worst = worst
                    .max((sol.phi[j] - y[0]).norm())
                    .max((sol.w[j] - y[1]).norm())
                    .max((sol.q[j] - y[2]).norm());
            }
            assert!(worst < previous, "no refinement gain at npts = {npts}");
            previous = worst;
            if npts == 1000 {
                assert!(worst < 1e-6, "collocation limit off by {worst}");
            }
        }
    }

    #[test]
    fn collocation_zero_data_is_zero_and_deterministic() {
        let zero = |_x: f64| Complex64::new(0.0, 0.0);
        let sol = collocate_bvp(
            2.0,
            0.5,
            1.0,
            &zero,
            &zero,
            &zero,
            [Complex64::new(0.0, 0.0); 2],
            128,
        )
        .unwrap();
        assert!(sol.phi.iter().all(|v| v.norm() == 0.0));
        assert!(sol.w.iter().all(|v| v.norm() == 0.0));
        assert!(sol.q.iter().all(|v| v.norm() == 0.0));
        let f1 = |x: f64| Complex64::new(x.sin(), x);
        let sol_a = collocate_bvp(2.0, 0.5, 1.0, &f1, &zero, &zero, [Complex64::new(1.0, 0.0); 2], 128)
            .unwrap();
        let sol_b = collocate_bvp(2.0, 0.5, 1.0, &f1, &zero, &zero, [Complex64::new(1.0, 0.0); 2], 128)
            .unwrap();
        assert_eq!(sol_a.q, sol_b.q);
    }
}
