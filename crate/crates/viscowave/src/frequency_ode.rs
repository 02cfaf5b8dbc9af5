//! Per-frequency two-point boundary value solves.
//!
//! For a fixed horizontal frequency the transformed Stokes system reduces to
//! a first-order ODE for `y = (phi, w, q, phi')`, solved in closed form with
//! the boundary matrix:
//!
//! `y(x) = exp(x A) B^{-1} (d - N I_b) + int_0^x exp((x - t) A) z(t) dt`,
//!
//! where `I_b = int_0^b exp((b - t) A) z(t) dt`. Integrals are Gauss-Legendre
//! against the closed-form exponential; interior data is interpolated
//! barycentrically from its nodal values, never finite-differenced.

use crate::error::{Error, Result};
use crate::params::Frequency;
use crate::quadrature::VerticalNodes;
use crate::scalar::{c_im, c_re, Scalar, C};
use crate::symbols::{boundary_block_peeled, exp_a_closed_form, reparam, Reparam};

/// Interior and boundary data for the reduced coupled system at one frequency.
///
/// `f1`, `f2` are the right sides of the momentum rows, `g` the divergence
/// datum with its vertical derivative `dg`, all sampled at the vertical
/// nodes; `k = (K1, K2)` the top boundary rows.
#[derive(Debug, Clone)]
pub struct FrequencyBvp<T> {
    pub rp: Reparam<T>,
    pub f1: Vec<C<T>>,
    pub f2: Vec<C<T>>,
    pub g: Vec<C<T>>,
    pub dg: Vec<C<T>>,
    pub k: [C<T>; 2],
}

impl<T: Scalar> FrequencyBvp<T> {
    /// The first-order source `z(t) = (0, G, F2 + 2 G', -F1 + r G)` at `t`.
    fn z_at(&self, nodes: &VerticalNodes<T>, t: T) -> [C<T>; 4] {
        let g = nodes.interpolate(&self.g, t);
        let dg = nodes.interpolate(&self.dg, t);
        let f1 = nodes.interpolate(&self.f1, t);
        let f2 = nodes.interpolate(&self.f2, t);
        let r = c_re(self.rp.r);
        [
            C::<T>::new(T::zero(), T::zero()),
            g,
            f2 + (dg + dg),
            -f1 + r * g,
        ]
    }
}

/// Guard for the unpeeled exponential: beyond this the closed-form columns
/// overflow and the Duhamel formula is meaningless in double precision.
fn check_exp_range<T: Scalar>(rp: &Reparam<T>, b: T) -> Result<()> {
    if rp.s.re * b > T::of(690.0) {
        return Err(Error::DegenerateBoundaryMatrix {
            r: rp.r.to_f64().unwrap_or(f64::NAN),
            kappa: rp.kappa.to_f64().unwrap_or(f64::NAN),
            det_mag: 0.0,
        });
    }
    Ok(())
}

/// Solve the coupled two-point problem; returns `y = (phi, w, q, phi')` at
/// every vertical node.
pub fn solve_coupled<T: Scalar>(
    bvp: &FrequencyBvp<T>,
    nodes: &VerticalNodes<T>,
) -> Result<Vec<[C<T>; 4]>> {
    let b = nodes.b;
    let rp = &bvp.rp;
    check_exp_range(rp, b)?;
    let bound = boundary_block_peeled(rp, b)?;
    let zero = C::<T>::new(T::zero(), T::zero());
    let m = nodes.len();

    // I_b = int_0^b exp((b - t) A) z(t) dt over the global rule
    let mut i_b = [zero; 4];
    for (q, (&t, &w)) in nodes.nodes().iter().zip(nodes.weights().iter()).enumerate() {
        let _ = q;
        let kernel = exp_a_closed_form(rp, b - t);
        let z = bvp.z_at(nodes, t);
        let kz = kernel.matvec(&z);
        for i in 0..4 {
            i_b[i] = i_b[i] + kz[i] * c_re(w);
        }
    }

    // dd = d - N I_b has zero first components; rows 3 and 4:
    // d3 = K1, d4 = K2 + 2 G(b); (N I)_3 = r I_2 - I_4, (N I)_4 = 2 r I_1 + I_3
    let g_b = nodes.interpolate(&bvp.g, b);
    let r = c_re(rp.r);
    let dd3 = bvp.k[0] - (r * i_b[1] - i_b[3]);
    let dd4 = bvp.k[1] + (g_b + g_b) - ((r + r) * i_b[0] + i_b[2]);

    // w_tilde = peeled B4^{-1} (dd3, dd4)
    let det = bound.det;
    let b4 = bound.b4;
    let w1 = (b4.m[1][1] * dd3 - b4.m[0][1] * dd4) / det;
    let w2 = (-b4.m[1][0] * dd3 + b4.m[0][0] * dd4) / det;

    let mut out = vec![[zero; 4]; m];
    let (unit_nodes, unit_weights) = crate::quadrature::gauss_legendre_unit::<T>(m.max(8));
    for (i, &x) in nodes.nodes().iter().enumerate() {
        // homogeneous part: E_peeled(x) cols 3,4 * w_tilde * exp(-(b - x) s)
        let ex = crate::symbols::exp_a_peeled(rp, x);
        let tail = (ex.ts - bound.bs).exp();
        let mut y = [zero; 4];
        for j in 0..4 {
            y[j] = (ex.e[j][2] * w1 + ex.e[j][3] * w2) * tail;
        }
        // particular part: int_0^x exp((x - t) A) z(t) dt on a mapped rule
        if x > T::zero() {
            let half = x * T::half();
            for (qt, &un) in unit_nodes.iter().enumerate() {
                let t = half * (un + T::one());
                let w_q = unit_weights[qt] * half;
                let kernel = exp_a_closed_form(rp, x - t);
                let z = bvp.z_at(nodes, t);
                let kz = kernel.matvec(&z);
                for j in 0..4 {
                    y[j] = y[j] + kz[j] * c_re(w_q);
                }
            }
        }
        out[i] = y;
    }
    Ok(out)
}

/// Solve the decoupled transverse problem
/// `(-d^2/dx^2 + s^2) theta = f`, `theta(0) = 0`, `theta'(b) = -k`,
/// for one transverse component, by variation of parameters.
pub fn solve_transverse<T: Scalar>(
    rp: &Reparam<T>,
    nodes: &VerticalNodes<T>,
    f: &[C<T>],
    k: C<T>,
) -> Result<Vec<C<T>>> {
    let b = nodes.b;
    check_exp_range(rp, b)?;
    let s = rp.s;
    let zero = C::<T>::new(T::zero(), T::zero());
    let m = nodes.len();
    let cosh_sb = (s * c_re(b)).cosh();
    if cosh_sb.norm() < T::of(1e-300) {
        return Err(Error::SingularSystem("transverse solve: cosh(s b) underflow".into()));
    }
    let (unit_nodes, unit_weights) = crate::quadrature::gauss_legendre_unit::<T>(m.max(8));
    // particular solution of (-d^2 + s^2) theta = f with theta(0) = theta'(0) = 0
    // is theta_p(x) = -(1/s) int_0^x sinh(s (x - t)) f(t) dt
    let theta_part = |x: T, derivative: bool| -> C<T> {
        if x == T::zero() {
            return zero;
        }
        let half = x * T::half();
        let mut acc = zero;
        for (q, &un) in unit_nodes.iter().enumerate() {
            let t = half * (un + T::one());
            let w_q = unit_weights[q] * half;
            let arg = s * c_re(x - t);
            let kernel = if derivative { -arg.cosh() } else { -arg.sinh() / s };
            acc = acc + kernel * nodes.interpolate(f, t) * c_re(w_q);
        }
        acc
    };
    let dpart_b = theta_part(b, true);
    let coeff = (-k - dpart_b) / (s * cosh_sb);
    let mut out = Vec::with_capacity(m);
    for &x in nodes.nodes() {
        out.push(theta_part(x, false) + coeff * (s * c_re(x)).sinh());
    }
    Ok(out)
}

/// Derivative of the transverse solution at `x`, for boundary-row checks.
pub fn transverse_derivative<T: Scalar>(
    rp: &Reparam<T>,
    nodes: &VerticalNodes<T>,
    f: &[C<T>],
    k: C<T>,
    x: T,
) -> Result<C<T>> {
    let b = nodes.b;
    let s = rp.s;
    let cosh_sb = (s * c_re(b)).cosh();
    if cosh_sb.norm() < T::of(1e-300) {
        return Err(Error::SingularSystem("transverse solve: cosh(s b) underflow".into()));
    }
    let m = nodes.len();
    let (unit_nodes, unit_weights) = crate::quadrature::gauss_legendre_unit::<T>(m.max(8));
    let part = |x: T| -> C<T> {
        if x == T::zero() {
            return C::<T>::new(T::zero(), T::zero());
        }
        let half = x * T::half();
        let mut acc = C::<T>::new(T::zero(), T::zero());
        for (q, &un) in unit_nodes.iter().enumerate() {
            let t = half * (un + T::one());
            let w_q = unit_weights[q] * half;
            acc = acc - (s * c_re(x - t)).cosh() * nodes.interpolate(f, t) * c_re(w_q);
        }
        acc
    };
    let coeff = (-k - part(b)) / (s * cosh_sb);
    Ok(part(x) + coeff * s * (s * c_re(x)).cosh())
}

/// Per-node physical unknowns recovered from the reduced solve.
#[derive(Debug, Clone)]
pub struct FrequencySolution<T> {
    /// `u_hat` components per node (length `n` each row).
    pub u: Vec<Vec<C<T>>>,
    /// `p_hat` per node.
    pub p: Vec<C<T>>,
}

/// Assemble `(u_hat, p_hat)` from the reduced solve and the transverse part.
///
/// For `xi != 0`: `u' = -i phi xi/|xi| + theta e_perp`, `u_n = w`, `p = q`.
/// The zero frequency is handled by the component-wise solve in the linear
/// layer, not here.
pub fn assemble_field<T: Scalar>(
    xi: &Frequency<T>,
    y: &[[C<T>; 4]],
    theta: Option<&[C<T>]>,
) -> FrequencySolution<T> {
    assert!(!xi.is_zero(), "assemble_field requires xi != 0");
    let dir = xi.direction();
    let d = xi.dim;
    let n = d + 1;
    let mut u = vec![Vec::with_capacity(y.len()); n];
    let mut p = Vec::with_capacity(y.len());
    // transverse unit vector for d = 2
    let perp = [-dir[1], dir[0]];
    for (node, row) in y.iter().enumerate() {
        let phi_factor = c_im(-T::one()) * row[0];
        for j in 0..d {
            let mut val = phi_factor * c_re(dir[j]);
            if let Some(th) = theta {
                if d == 2 {
                    val = val + th[node] * c_re(perp[j]);
                }
            }
            u[j].push(val);
        }
        u[n - 1].push(row[1]);
        p.push(row[2]);
    }
    FrequencySolution { u, p }
}

/// Convenience: solve the reduced system for the `Y`-defining data
/// (`z = 0`, `d = e_4`) and return `y` per node; used in tests.
pub fn solve_unit_normal_load<T: Scalar>(
    xi: &Frequency<T>,
    gamma: T,
    nodes: &VerticalNodes<T>,
) -> Result<Vec<[C<T>; 4]>> {
    let rp = reparam(xi, gamma);
    let m = nodes.len();
    let zero = C::<T>::new(T::zero(), T::zero());
    let bvp = FrequencyBvp {
        rp,
        f1: vec![zero; m],
        f2: vec![zero; m],
        g: vec![zero; m],
        dg: vec![zero; m],
        k: [zero, c_re(T::one())],
    };
    solve_coupled(&bvp, nodes)
}
