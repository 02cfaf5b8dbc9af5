//! Closed-form evaluation of the per-frequency ODE matrices and the derived
//! Fourier symbols `Q`, `V`, `m`, and `rho`.
//!
//! The first-order system matrix `A`, the boundary matrices `M`, `N`, and
//! `B = M + N exp(bA)` depend on the frequency only through `r = 2 pi |xi|`
//! and `kappa = gamma xi_1 / |xi|`, with the complex rate `s` satisfying
//! `s^2 = r^2 - i r kappa`. The matrix exponential has explicit columns in
//! hyperbolic functions of `x_n s` and `x_n r`; the solver evaluates them in
//! a "peeled" form (scaled by `exp(-x_n s)`) with all differences of nearby
//! hyperbolics factored analytically, so one code path is accurate from
//! `kappa = 0` through large `r` without overflow.

use crate::error::{Error, Result};
use crate::mat4::{CMat2, CMat4};
use crate::params::{Frequency, WaveParams};
use crate::scalar::{c_im, c_re, cosh_peel, sinh_minus_x, sinh_peel, sinhc_peel, Scalar, C};

/// Absolute floor on the peeled boundary-matrix determinant.
pub const DET_FLOOR: f64 = 1e-300;

/// Reparameterization of a frequency/speed pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reparam<T> {
    /// `r = 2 pi |xi| >= 0`.
    pub r: T,
    /// `kappa = gamma xi_1 / |xi|` (zero at `xi = 0`).
    pub kappa: T,
    /// Principal-branch root with `s^2 = r^2 - i r kappa`, `Re s >= r`.
    pub s: C<T>,
}

/// Compute the reparameterization `(r, kappa, s)` for a frequency and speed.
///
/// The real and imaginary parts of `s` come from the nested-root expressions,
/// which pin `Re s >= r` by construction.
pub fn reparam<T: Scalar>(xi: &Frequency<T>, gamma: T) -> Reparam<T> {
    let norm = xi.norm();
    let r = T::TAU() * norm;
    let kappa = if norm == T::zero() { T::zero() } else { gamma * xi.xi[0] / norm };
    Reparam { r, kappa, s: s_root(r, kappa) }
}

impl<T: Scalar> Reparam<T> {
    pub fn from_r_kappa(r: T, kappa: T) -> Self {
        Self { r, kappa, s: s_root(r, kappa) }
    }
}

/// The root `s(r, kappa)` with `s^2 = r^2 - i r kappa` and `Re s >= r`.
pub fn s_root<T: Scalar>(r: T, kappa: T) -> C<T> {
    if r == T::zero() {
        return C::<T>::new(T::zero(), T::zero());
    }
    // scaled form of the printed nested roots: well-conditioned for all r > 0
    let q = kappa / r;
    let inner = (T::one() + q * q).sqrt();
    let re = r * ((T::one() + inner) * T::half()).sqrt();
    let im = -kappa / (T::two() * (T::one() + inner)).sqrt();
    C::<T>::new(re, im)
}

/// System matrix `A(xi, gamma)` of the first-order reformulation.
pub fn build_system_matrix<T: Scalar>(xi: &Frequency<T>, gamma: T) -> CMat4<T> {
    let rp = reparam(xi, gamma);
    system_matrix_from_reparam(&rp)
}

/// `A` in the `(r, s)` parameterization:
/// rows `(0,0,0,1)`, `(-r,0,0,0)`, `(0,-s^2,0,-r)`, `(s^2,0,-r,0)`.
pub fn system_matrix_from_reparam<T: Scalar>(rp: &Reparam<T>) -> CMat4<T> {
    let z = C::<T>::new(T::zero(), T::zero());
    let one = c_re(T::one());
    let r = c_re(rp.r);
    let s2 = c_re(rp.r * rp.r) + c_im(-rp.r * rp.kappa);
    CMat4::from_rows([
        [z, z, z, one],
        [-r, z, z, z],
        [z, -s2, z, -r],
        [s2, z, -r, z],
    ])
}

/// Boundary matrix `M` (fixed).
pub fn matrix_m<T: Scalar>() -> CMat4<T> {
    let z = C::<T>::new(T::zero(), T::zero());
    let one = c_re(T::one());
    CMat4::from_rows([
        [one, z, z, z],
        [z, one, z, z],
        [z, z, z, z],
        [z, z, z, z],
    ])
}

/// Boundary matrix `N(r)`: rows 3 and 4 are `(0, r, 0, -1)` and `(2r, 0, 1, 0)`.
pub fn matrix_n<T: Scalar>(r: T) -> CMat4<T> {
    let z = C::<T>::new(T::zero(), T::zero());
    let one = c_re(T::one());
    let rc = c_re(r);
    CMat4::from_rows([
        [z, z, z, z],
        [z, z, z, z],
        [z, rc, z, -one],
        [rc + rc, z, one, z],
    ])
}

/// Peeled matrix exponential: entries of `exp(t A(r,s)) * exp(-t s)`.
///
/// All hyperbolic differences are factored through `u = t (s - r) / 2`
/// computed as `-i t kappa r / (2 (s + r))`, so the evaluation is uniformly
/// accurate through `kappa -> 0` and never overflows in `r`.
#[derive(Debug, Clone, Copy)]
pub struct PeeledExp<T> {
    pub e: [[C<T>; 4]; 4],
    /// The peel factor exponent: true matrix is `e * exp(t s)`.
    pub ts: C<T>,
}

pub fn exp_a_peeled<T: Scalar>(rp: &Reparam<T>, t: T) -> PeeledExp<T> {
    let zero = C::<T>::new(T::zero(), T::zero());
    let r = rp.r;
    let s = rp.s;
    if r == T::zero() {
        // A(0) is nilpotent: exp(tA) = I + tA, only entry (1,4) = t
        let mut e = [[zero; 4]; 4];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = c_re(T::one());
        }
        e[0][3] = c_re(t);
        return PeeledExp { e, ts: zero };
    }
    let rc = c_re(r);
    let tc = c_re(t);
    let sr = s + rc; // s + r, never small for r > 0
    let dsr = c_im(-rp.kappa * r) / sr; // s - r, no cancellation
    let u = tc * dsr * c_re(T::half());
    let v = tc * sr * c_re(T::half());
    let ts = tc * s;
    let tr = c_re(t * r);

    let p_ts = sinh_peel(ts);
    let c_ts = cosh_peel(ts);
    let e2u = (-(u + u)).exp(); // exp(t(r - s)); |.| <= 1
    let p_tr = sinh_peel(tr) * e2u; // sinh(tr) e^{-ts}
    let c_tr = cosh_peel(tr) * e2u; // cosh(tr) e^{-ts}
    let pv = sinh_peel(v);
    let cv = cosh_peel(v);
    let shc = sinhc_peel(u);

    let s2 = s * s;
    // common building blocks
    let cv_shc = cv * shc;
    let pv_shc = pv * shc;
    let bracket = (tc * rc * cv_shc - p_tr) / sr; // [tr Cp(v) Shc(u) - P(tr) E2u]/(s+r)
    let plus = (s * tc * cv_shc + p_tr) / sr; // [st Cp(v) Shc(u) + P(tr) E2u]/(s+r)
    let diag = tc * pv_shc / sr; // t P(v) Shc(u) / (s+r)

    let mut e = [[zero; 4]; 4];
    // column 1
    e[0][0] = c_ts;
    e[1][0] = -(rc / s) * p_ts;
    e[2][0] = zero;
    e[3][0] = s * p_ts;
    // column 2
    e[0][1] = s * bracket;
    e[1][1] = -rc * rc * diag + c_tr;
    e[2][1] = -(s2 / rc) * p_tr;
    e[3][1] = s2 * rc * diag;
    // column 3
    e[0][2] = -rc * diag;
    e[1][2] = (rc / s) * bracket;
    e[2][2] = c_tr;
    e[3][2] = -rc * plus;
    // column 4
    e[0][3] = plus;
    e[1][3] = -rc * diag;
    e[2][3] = -p_tr;
    e[3][3] = s2 * diag + c_tr;

    PeeledExp { e, ts }
}

/// `exp(x_n A)` assembled from the closed-form columns (unpeeled).
///
/// Valid while `x_n Re s` stays below the overflow threshold; the symbol
/// evaluation itself never unpeels.
pub fn exp_a_closed_form<T: Scalar>(rp: &Reparam<T>, x_n: T) -> CMat4<T> {
    let peeled = exp_a_peeled(rp, x_n);
    let scale = peeled.ts.exp();
    let mut out = CMat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out.m[i][j] = peeled.e[i][j] * scale;
        }
    }
    out
}

/// The boundary-matrix bundle for one frequency.
#[derive(Debug, Clone)]
pub struct SystemMatrices<T> {
    pub a: CMat4<T>,
    pub m: CMat4<T>,
    pub n: CMat4<T>,
    pub b: CMat4<T>,
    pub b3: CMat2<T>,
    pub b4: CMat2<T>,
}

/// Peeled boundary blocks: `b4_peeled = B4 * exp(-b s)` and its determinant.
#[derive(Debug, Clone, Copy)]
pub struct PeeledBoundary<T> {
    pub b4: CMat2<T>,
    pub det: C<T>,
    pub bs: C<T>,
}

/// Assemble the peeled `B4` block from the peeled exponential at `x_n = b`.
pub fn boundary_block_peeled<T: Scalar>(rp: &Reparam<T>, b: T) -> Result<PeeledBoundary<T>> {
    let eb = exp_a_peeled(rp, b);
    let r = c_re(rp.r);
    let e = &eb.e;
    let b11 = r * e[1][2] - e[3][2];
    let b12 = r * e[1][3] - e[3][3];
    let b21 = (r + r) * e[0][2] + e[2][2];
    let b22 = (r + r) * e[0][3] + e[2][3];
    let b4 = CMat2::new(b11, b12, b21, b22);
    let det = b4.det();
    if det.norm() < T::of(DET_FLOOR) {
        return Err(Error::DegenerateBoundaryMatrix {
            r: rp.r.to_f64().unwrap_or(f64::NAN),
            kappa: rp.kappa.to_f64().unwrap_or(f64::NAN),
            det_mag: det.norm().to_f64().unwrap_or(0.0),
        });
    }
    Ok(PeeledBoundary { b4, det, bs: eb.ts })
}

/// Full (unpeeled) boundary matrices `A, M, N, B` with the `B3`, `B4` blocks.
pub fn boundary_matrix<T: Scalar>(xi: &Frequency<T>, gamma: T, b: T) -> Result<SystemMatrices<T>> {
    let rp = reparam(xi, gamma);
    boundary_matrix_from_reparam(&rp, b)
}

pub fn boundary_matrix_from_reparam<T: Scalar>(rp: &Reparam<T>, b: T) -> Result<SystemMatrices<T>> {
    // the peeled determinant guards degeneracy before any unpeeling
    let peeled = boundary_block_peeled(rp, b)?;
    let a = system_matrix_from_reparam(rp);
    let m = matrix_m::<T>();
    let n = matrix_n::<T>(rp.r);
    let exp_b = exp_a_closed_form(rp, b);
    let bmat = m.add(&n.matmul(&exp_b));
    let b3 = CMat2::new(bmat.m[2][0], bmat.m[2][1], bmat.m[3][0], bmat.m[3][1]);
    let b4 = CMat2::new(bmat.m[2][2], bmat.m[2][3], bmat.m[3][2], bmat.m[3][3]);
    let _ = peeled;
    Ok(SystemMatrices { a, m, n, b: bmat, b3, b4 })
}

/// `Y(r, kappa, x_n) = exp(x_n A) B^{-1} e_4`, evaluated stably.
///
/// Uses the block structure `B^{-1} e_4 = (0, 0, w)` with `w` from the
/// peeled 2x2 block, then unwinds the peel with the bounded factor
/// `exp(-(b - x_n) s)`.
pub fn eval_y<T: Scalar>(rp: &Reparam<T>, x_n: T, b: T) -> Result<[C<T>; 4]> {
    let zero = C::<T>::new(T::zero(), T::zero());
    if rp.r == T::zero() {
        // Y(0, kappa, x_n) = e_3
        return Ok([zero, c_re(T::zero()), c_re(T::one()), zero]);
    }
    let bound = boundary_block_peeled(rp, b)?;
    // w_tilde = B4_peeled^{-1} e_2 = (-B12, B11)/det
    let w1 = -bound.b4.m[0][1] / bound.det;
    let w2 = bound.b4.m[0][0] / bound.det;
    let ex = exp_a_peeled(rp, x_n);
    // unpeel: exp(x_n A) B^{-1} e_4 = E_peeled(x_n) w_tilde exp(-(b - x_n) s)
    let tail = (ex.ts - bound.bs).exp();
    let mut y = [zero; 4];
    for i in 0..4 {
        y[i] = (ex.e[i][2] * w1 + ex.e[i][3] * w2) * tail;
    }
    Ok(y)
}

/// Derivative `dY/dx_n = A Y` from the ODE, avoiding extra evaluations.
pub fn eval_y_derivative<T: Scalar>(rp: &Reparam<T>, y: &[C<T>; 4]) -> [C<T>; 4] {
    system_matrix_from_reparam(rp).matvec(y)
}

/// Symbol values at one frequency over a vertical node list.
#[derive(Debug, Clone)]
pub struct SymbolSample<T> {
    /// `Q(xi, x_n, gamma)` per node.
    pub q: Vec<C<T>>,
    /// `V'(xi, x_n, gamma)` per node (length `horiz_dim` each).
    pub v_prime: Vec<[C<T>; 2]>,
    /// `V_n(xi, x_n, gamma)` per node.
    pub v_n: Vec<C<T>>,
    /// `m(xi, gamma) = V_n(xi, b, gamma)`.
    pub m: C<T>,
    /// `rho(xi) = 2 pi i gamma xi_1 + (1 + 4 pi^2 sigma |xi|^2) conj m(xi, -gamma)`.
    pub rho: C<T>,
}

/// Evaluate `Q`, `V`, `m` at `(xi, gamma)` and `rho` with the parameters'
/// `sigma`; note `rho` pairs against the symbols at speed `-gamma`.
pub fn eval_symbols<T: Scalar>(
    xi: &Frequency<T>,
    gamma: T,
    params: &WaveParams<T>,
    nodes: &[T],
) -> Result<SymbolSample<T>> {
    let zero = C::<T>::new(T::zero(), T::zero());
    let b = params.b;
    if xi.is_zero() {
        return Ok(SymbolSample {
            q: vec![c_re(T::one()); nodes.len()],
            v_prime: vec![[zero, zero]; nodes.len()],
            v_n: vec![zero; nodes.len()],
            m: zero,
            rho: zero,
        });
    }
    let rp = reparam(xi, gamma);
    let dir = xi.direction();
    let mut q = Vec::with_capacity(nodes.len());
    let mut v_prime = Vec::with_capacity(nodes.len());
    let mut v_n = Vec::with_capacity(nodes.len());
    for &x in nodes {
        let y = eval_y(&rp, x, b)?;
        q.push(y[2]);
        v_n.push(y[1]);
        let factor = c_im(-T::one()) * y[0];
        v_prime.push([factor * c_re(dir[0]), factor * c_re(dir[1])]);
    }
    let m = eval_y(&rp, b, b)?[1];
    let rho = rho_value(xi, params)?;
    Ok(SymbolSample { q, v_prime, v_n, m, rho })
}

/// `m(xi, gamma)` alone.
pub fn eval_m<T: Scalar>(xi: &Frequency<T>, gamma: T, b: T) -> Result<C<T>> {
    if xi.is_zero() {
        return Ok(C::<T>::new(T::zero(), T::zero()));
    }
    let rp = reparam(xi, gamma);
    Ok(eval_y(&rp, b, b)?[1])
}

/// The traveling gravity-capillary symbol
/// `rho(xi) = 2 pi i gamma xi_1 + (1 + 4 pi^2 sigma |xi|^2) conj m(xi, -gamma)`.
pub fn rho_value<T: Scalar>(xi: &Frequency<T>, params: &WaveParams<T>) -> Result<C<T>> {
    if xi.is_zero() {
        return Ok(C::<T>::new(T::zero(), T::zero()));
    }
    let m_neg = eval_m(xi, -params.gamma, params.b)?;
    let norm2 = xi.norm() * xi.norm();
    let weight = T::one() + T::two() * T::TAU() * T::PI() * params.sigma * norm2;
    Ok(c_im(T::TAU() * params.gamma * xi.xi[0]) + c_re(weight) * m_neg.conj())
}

/// Low-frequency reference `m ~ -4 pi^2 |xi|^2 b^3 / 3` (validation only).
pub fn m_asymptotic_zero<T: Scalar>(xi: &Frequency<T>, params: &WaveParams<T>) -> C<T> {
    let norm2 = xi.norm() * xi.norm();
    let b3 = params.b * params.b * params.b;
    c_re(-T::TAU() * T::PI() * norm2 * b3 / T::of(1.5))
}

/// High-frequency reference `m ~ -1/(4 pi |xi|)` (validation only).
pub fn m_asymptotic_infty<T: Scalar>(xi: &Frequency<T>, _params: &WaveParams<T>) -> C<T> {
    let norm = xi.norm();
    assert!(norm > T::zero(), "infinity asymptotic needs xi != 0");
    c_re(-T::one() / (T::two() * T::TAU() * norm))
}

/// Printed closed form of `m` on the `kappa = 0` slice:
/// `(2rb - sinh 2rb) / (2r (cosh 2rb + 1 + 2 b^2 r^2))`, peeled for large `r`
/// and series-stabilized for small `r`.
pub fn m_kappa_zero<T: Scalar>(r: T, b: T) -> T {
    assert!(r > T::zero());
    let two_rb = T::two() * r * b;
    let b2r2 = T::two() * b * b * r * r;
    if two_rb < T::of(350.0) {
        -sinh_minus_x(two_rb) / (T::two() * r * (two_rb.cosh() + T::one() + b2r2))
    } else {
        // scale numerator and denominator by exp(-2rb)
        let e = (-two_rb).exp();
        let num = -(T::half() * (T::one() - e * e) - two_rb * e);
        let den = T::two() * r * (T::half() * (T::one() + e * e) + (T::one() + b2r2) * e);
        num / den
    }
}

/// Printed `kappa = 0` limits of `Y_1..Y_3` (used for cross-validation).
pub fn y_kappa_zero<T: Scalar>(r: T, x_n: T, b: T) -> [T; 3] {
    assert!(r > T::zero());
    let d = b - x_n;
    let p = b + x_n;
    // peel everything by exp(-r p); all remaining exponents are <= 0
    let em = |z: T| (-(r * (p - z))).exp(); // e^{r z} * e^{-r p} for z <= p
    let sh = |z: T| (em(z) - em(-z)) * T::half(); // sinh(rz) e^{-rp}
    let ch = |z: T| (em(z) + em(-z)) * T::half(); // cosh(rz) e^{-rp}
    // denominator (cosh(2rb) + 1 + 2 b^2 r^2) e^{-rp}
    let den = ch(T::two() * b) + (T::one() + T::two() * b * b * r * r) * em(T::zero());
    let y1 = (d * (sh(p) - sh(d)) + T::two() * b * r * x_n * ch(d)) / (T::two() * den);
    let y2 = (-sh(p) - r * d * ch(p) + (T::one() + T::two() * b * r * r * x_n) * sh(d) + r * p * ch(d))
        / (T::two() * r * den);
    let y3 = (ch(p) + ch(d) + T::two() * r * b * sh(d)) / den;
    [y1, y2, y3]
}

/// The expanded `n_j / det B` forms of `Y_1..Y_3`, evaluated peeled.
///
/// These are the fully expanded rational-in-hyperbolics expressions; they
/// carry a structural `kappa^2` cancellation and are therefore only used
/// (and tested) away from the `kappa -> 0` band. The block path in
/// [`eval_y`] is the production route.
pub fn eval_y_expanded<T: Scalar>(rp: &Reparam<T>, x_n: T, b: T) -> [C<T>; 3] {
    let r = c_re(rp.r);
    let s = rp.s;
    let kappa = rp.kappa;
    let x = x_n;
    let two = c_re(T::two());
    let four = c_re(T::of(4.0));
    let ik = c_im(kappa);
    let two_r_ik = two * r - ik;
    // peel factor p = b(r + s): each exponential term e^z is stored as e^{z - p}
    let p = c_re(b * rp.r) + c_re(b) * s;
    let pe = |z: C<T>| (z - p).exp();
    let ch = |z: C<T>| (pe(z) + pe(-z)) * c_re(T::half());
    let sh = |z: C<T>| (pe(z) - pe(-z)) * c_re(T::half());

    let bs_xr = c_re(b) * s - c_re(x * rp.r);
    let br_xs = c_re(b * rp.r) - c_re(x) * s;
    let s_bx = s * c_re(b - x);
    let r_bx = c_re(rp.r * (b - x));
    let bs_pxr = c_re(b) * s + c_re(x * rp.r);
    let br_pxs = c_re(b * rp.r) + c_re(x) * s;

    let n1 = (r + s) * two_r_ik * ch(bs_xr) + two * s * (r + s) * ch(br_xs)
        - two * s * two_r_ik * ch(s_bx)
        - four * r * s * ch(r_bx)
        - (r - s) * two_r_ik * ch(bs_pxr)
        + two * s * (r - s) * ch(br_pxs);
    let n2 = -(r + s) * two_r_ik * sh(bs_xr) - two * r * (r + s) * sh(br_xs)
        + two * r * two_r_ik * sh(s_bx)
        + four * r * s * sh(r_bx)
        - (r - s) * two_r_ik * sh(bs_pxr)
        + two * r * (r - s) * sh(br_pxs);
    let n3 = -(r + s) * two_r_ik * ch(bs_xr) + four * r * s * ch(r_bx)
        + (r - s) * two_r_ik * ch(bs_pxr);

    let k2 = c_re(kappa * kappa);
    let eight_r2 = c_re(T::of(8.0)) * r * r;
    let br = c_re(b * rp.r);
    let bs = c_re(b) * s;
    // cosh(br)cosh(bs) and sinh(br)sinh(bs) via sum/difference arguments
    let chch = (ch(br + bs) + ch(br - bs)) * c_re(T::half());
    let shsh = (ch(br + bs) - ch(br - bs)) * c_re(T::half());
    let det = s * (eight_r2 - k2 - four * ik * r) * chch
        - r * (eight_r2 - k2 - c_re(T::of(8.0)) * ik * r) * shsh
        - four * r * s * two_r_ik * pe(C::<T>::new(T::zero(), T::zero()));

    // prefactor bookkeeping: n1 -> -1/(2 k^2 s), n2 -> +1/(2 k^2 s),
    // n3 -> -i/(2 k s), det -> -1/(k^2 s)
    let y1 = n1 / (two * det);
    let y2 = -n2 / (two * det);
    let y3 = c_im(kappa) * n3 / (two * det);
    [y1, y2, y3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::expm_numeric;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn freq1(xi: f64) -> Frequency<f64> {
        Frequency::new_1d(xi)
    }

    #[test]
    fn s_root_examples() {
        // kappa = 0 collapses to r
        let s = s_root(3.0f64, 0.0);
        assert_relative_eq!(s.re, 3.0, epsilon = 1e-15);
        assert_relative_eq!(s.im, 0.0, epsilon = 1e-15);
        // r = 1, kappa = 1: Re s = sqrt((1+sqrt2)/2), Im s = -1/(sqrt2 sqrt(1+sqrt2))
        let s = s_root(1.0f64, 1.0);
        let re_expect = ((1.0 + 2.0f64.sqrt()) / 2.0).sqrt();
        let im_expect = -1.0 / (2.0f64.sqrt() * (1.0 + 2.0f64.sqrt()).sqrt());
        assert_relative_eq!(s.re, re_expect, epsilon = 1e-15);
        assert_relative_eq!(s.im, im_expect, epsilon = 1e-15);
        // defining identity
        let sq = s * s;
        assert_relative_eq!(sq.re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(sq.im, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn s_root_invariants_random() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let r = 1e-3 + 30.0 * next();
            let kappa = -2.0 + 4.0 * next();
            let s = s_root(r, kappa);
            let sq = s * s;
            assert_relative_eq!(sq.re, r * r, max_relative = 1e-13);
            assert_relative_eq!(sq.im, -r * kappa, max_relative = 1e-12, epsilon = 1e-13);
            assert!(s.re >= r - 1e-12 * r.max(1.0));
            assert!(s.re <= r + kappa * kappa / (8.0 * r) + 1e-10 * (1.0 + r));
            let signed = -kappa.signum() * s.im;
            assert!(signed >= -1e-14 && signed <= kappa.abs() / 2.0 + 1e-14);
        }
    }

    #[test]
    fn s_root_high_r_expansion() {
        // |Re s - r - kappa^2/(8r)| <= c kappa^4 / r^3 for |kappa| <= r
        let kappa = 1.0f64;
        let mut prev = f64::INFINITY;
        for &r in &[10.0f64, 100.0] {
            let s = s_root(r, kappa);
            let defect = (s.re - r - kappa * kappa / (8.0 * r)).abs();
            let scaled = defect * r.powi(3) / kappa.powi(4);
            assert!(scaled < 0.1, "scaled defect {scaled} too large at r = {r}");
            assert!(defect < prev);
            prev = defect;
        }
    }

    #[test]
    fn system_matrix_zero_frequency() {
        let a = build_system_matrix(&freq1(0.0), 1.7);
        let mut expect = CMat4::<f64>::zeros();
        expect.m[0][3] = Complex64::new(1.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.m[i][j], expect.m[i][j]);
            }
        }
    }

    #[test]
    fn system_matrix_printed_entries() {
        // 2 pi |xi| = 1, gamma xi_1 = 0: all i-terms vanish
        let xi = freq1(1.0 / (2.0 * std::f64::consts::PI));
        let a = build_system_matrix(&xi, 0.0);
        assert_relative_eq!(a.m[1][0].re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(a.m[2][1].re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(a.m[2][3].re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(a.m[3][0].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(a.m[3][2].re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(a.m[0][3].re, 1.0, epsilon = 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.m[i][j].im, 0.0);
            }
        }
    }

    #[test]
    fn sixth_power_vanishes_cubically() {
        // |A(xi)^6| = O(|xi|^3): check the ratio between two small magnitudes
        let gamma = 1.3;
        let pow6 = |mag: f64| {
            let a = build_system_matrix(&freq1(mag), gamma);
            let a2 = a.matmul(&a);
            let a4 = a2.matmul(&a2);
            a4.matmul(&a2).max_abs()
        };
        let v3 = pow6(1e-3);
        let v2 = pow6(1e-2);
        let ratio = v3 / v2;
        // cubic scaling: ratio should be ~1e-3
        assert!(ratio < 3e-3 && ratio > 3e-4, "ratio {ratio} not cubic");
        assert!(v3 < 1e4 * 1e-9);
    }

    #[test]
    fn closed_form_exponential_matches_numeric() {
        let cases = [
            (1.0, 0.5, 0.7),
            (2.0, -1.0, 1.0),
            (0.3, 2.0, 0.2),
            (10.0, 0.01, 0.9),
            (5.0, 0.0, 0.5),
            (1e-3, 1.0, 0.8),
        ];
        for &(r, kappa, t) in &cases {
            let rp = Reparam::from_r_kappa(r, kappa);
            let closed = exp_a_closed_form(&rp, t);
            let a = system_matrix_from_reparam(&rp).scale(Complex64::new(t, 0.0));
            let numeric = expm_numeric(&a);
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    err = err.max((closed.m[i][j] - numeric.m[i][j]).norm());
                    scale = scale.max(numeric.m[i][j].norm());
                }
            }
            assert!(
                err / scale < 1e-12,
                "exp mismatch {:.2e} at r={r}, kappa={kappa}, t={t}",
                err / scale
            );
        }
    }

    #[test]
    fn exponential_identity_and_printed_entry() {
        let rp = Reparam::from_r_kappa(1.3, 0.4);
        let e0 = exp_a_closed_form(&rp, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(e0.m[i][j].re, expect, epsilon = 1e-14);
                assert_relative_eq!(e0.m[i][j].im, 0.0, epsilon = 1e-14);
            }
        }
        // column 3 entry (3,3) is cosh(x_n r) for all (r, s)
        for &(r, kappa, t) in &[(0.8f64, 1.7f64, 0.6f64), (3.0, -0.2, 0.25)] {
            let rp = Reparam::from_r_kappa(r, kappa);
            let e = exp_a_closed_form(&rp, t);
            assert_relative_eq!(e.m[2][2].re, (t * r).cosh(), max_relative = 1e-13);
            assert_relative_eq!(e.m[2][2].im, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn boundary_matrix_zero_frequency_block() {
        let sm = boundary_matrix(&freq1(0.0), 0.7, 1.0).unwrap();
        assert_relative_eq!(sm.b4.m[0][0].norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(sm.b4.m[0][1].re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(sm.b4.m[1][0].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(sm.b4.m[1][1].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn boundary_matrix_matches_numeric_oracle() {
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let r = 1e-2 + 20.0 * next();
            let gamma = -2.0 + 4.0 * next();
            let xi = freq1(r / (2.0 * std::f64::consts::PI));
            let sm = boundary_matrix(&xi, gamma, 1.0).unwrap();
            let a_b = sm.a.scale(Complex64::new(1.0, 0.0));
            let num = sm.m.add(&sm.n.matmul(&expm_numeric(&a_b)));
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    err = err.max((sm.b.m[i][j] - num.m[i][j]).norm());
                    scale = scale.max(num.m[i][j].norm());
                }
            }
            assert!(err / scale < 1e-10, "B mismatch {:.2e}", err / scale);
        }
    }

    #[test]
    fn zero_frequency_y_is_e3() {
        let rp = Reparam::from_r_kappa(0.0, 0.0);
        for &t in &[0.0, 0.3, 1.0] {
            let y = eval_y(&rp, t, 1.0).unwrap();
            assert_eq!(y[0].norm(), 0.0);
            assert_eq!(y[1].norm(), 0.0);
            assert_eq!(y[2], Complex64::new(1.0, 0.0));
            assert_eq!(y[3].norm(), 0.0);
        }
    }

    #[test]
    fn y_matches_printed_kappa_zero_forms() {
        for &(r, x, b) in &[(0.7f64, 0.3, 1.0), (4.0, 0.9, 1.0), (12.0, 0.1, 0.5)] {
            let rp = Reparam::from_r_kappa(r, 0.0);
            let y = eval_y(&rp, x, b).unwrap();
            let printed = y_kappa_zero(r, x, b);
            for j in 0..3 {
                assert_relative_eq!(y[j].re, printed[j], max_relative = 1e-11, epsilon = 1e-13);
                assert_relative_eq!(y[j].im, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn y_continuous_across_kappa_zero() {
        for &(r, x, b) in &[(1.0f64, 0.4, 1.0), (9.0, 0.8, 1.0)] {
            let base = eval_y(&Reparam::from_r_kappa(r, 0.0), x, b).unwrap();
            for &kappa in &[1e-8f64, -1e-8] {
                let y = eval_y(&Reparam::from_r_kappa(r, kappa), x, b).unwrap();
                for j in 0..4 {
                    assert!(
                        (y[j] - base[j]).norm() <= 1e-6,
                        "jump at kappa={kappa}: {:?} vs {:?}",
                        y[j],
                        base[j]
                    );
                }
            }
        }
    }

    #[test]
    fn expanded_forms_match_block_path_in_stable_region() {
        let mut state = 0xD1B54A32D192ED03u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let r = 0.2 + 25.0 * next();
            let kappa_mag = 0.05 * r.max(1.0) + 1.9 * next();
            let kappa = if next() > 0.5 { kappa_mag } else { -kappa_mag };
            let x = next();
            let b = 1.0;
            if x > b {
                continue;
            }
            let rp = Reparam::from_r_kappa(r, kappa.clamp(-2.0, 2.0));
            let block = eval_y(&rp, x, b).unwrap();
            let expanded = eval_y_expanded(&rp, x, b);
            let scale = block.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for j in 0..3 {
                assert!(
                    (block[j] - expanded[j]).norm() <= 1e-9 * scale.max(1e-3),
                    "expanded mismatch at r={r} kappa={} x={x}: {:?} vs {:?}",
                    rp.kappa,
                    block[j],
                    expanded[j]
                );
            }
        }
    }

    #[test]
    fn symbols_zero_frequency() {
        let params = WaveParams::new(1.0f64, 1.0, 1.0, 1).unwrap();
        let sample = eval_symbols(&freq1(0.0), 1.0, &params, &[0.25, 0.75]).unwrap();
        assert!(sample.q.iter().all(|q| (*q - Complex64::new(1.0, 0.0)).norm() == 0.0));
        assert!(sample.v_n.iter().all(|v| v.norm() == 0.0));
        assert_eq!(sample.m.norm(), 0.0);
        assert_eq!(sample.rho.norm(), 0.0);
    }

    #[test]
    fn m_at_unit_r_closed_form() {
        // b = 1, kappa = 0, 2 pi |xi| = 1 -> m = (2 - sinh 2)/(2 (cosh 2 + 3))
        let xi = freq1(1.0 / (2.0 * std::f64::consts::PI));
        let m = eval_m(&xi, 0.0, 1.0).unwrap();
        let expect = (2.0 - 2.0f64.sinh()) / (2.0 * (2.0f64.cosh() + 3.0));
        assert_relative_eq!(m.re, expect, max_relative = 1e-12);
        assert_relative_eq!(m.im, 0.0, epsilon = 1e-14);
        assert_relative_eq!(expect, -0.120291, max_relative = 1e-4);
        assert_relative_eq!(m_kappa_zero(1.0, 1.0), expect, max_relative = 1e-14);
    }

    #[test]
    fn m_zero_asymptotic_ratio() {
        let params = WaveParams::new(1.0f64, 0.0, 1.0, 1).unwrap();
        for &(mag, tol) in &[(1e-2f64, 0.1), (1e-3, 0.01)] {
            let xi = freq1(mag);
            let m = eval_m(&xi, 1.0, 1.0).unwrap();
            let reference = m_asymptotic_zero(&xi, &params);
            let ratio = (m / reference).re;
            assert!((ratio - 1.0).abs() < tol, "ratio {ratio} at |xi| = {mag}");
        }
    }

    #[test]
    fn m_infty_asymptotic_scaled_residual_bounded() {
        let params = WaveParams::new(1.0f64, 0.0, 1.0, 1).unwrap();
        let mut values = Vec::new();
        for &mag in &[10.0f64, 50.0, 100.0] {
            let xi = freq1(mag);
            let m = eval_m(&xi, 1.0, 1.0).unwrap();
            let resid = (m - m_asymptotic_infty(&xi, &params)).norm() * mag * mag;
            values.push(resid);
        }
        let max = values.iter().cloned().fold(0.0, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max < 1.0, "scaled residuals {values:?} unexpectedly large");
        assert!(max / min.max(1e-12) < 10.0, "scaled residuals {values:?} drift");
    }

    #[test]
    fn real_part_of_m_negative_off_zero() {
        for &mag in &[1e-3f64, 0.1, 1.0, 10.0, 1e3] {
            for &gamma in &[-2.0f64, 1.0] {
                let m = eval_m(&freq1(mag), gamma, 1.0).unwrap();
                assert!(m.re < 0.0, "Re m = {} at |xi| = {mag}, gamma = {gamma}", m.re);
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let params = WaveParams::new(0.8f64, 0.5, 1.0, 1).unwrap();
        for &mag in &[0.3f64, 2.0] {
            let plus = eval_symbols(&freq1(mag), 0.8, &params, &[0.5]).unwrap();
            let minus = eval_symbols(&freq1(-mag), 0.8, &params, &[0.5]).unwrap();
            assert_eq!(plus.m.conj(), minus.m);
            assert_eq!(plus.rho.conj(), minus.rho);
            assert_eq!(plus.q[0].conj(), minus.q[0]);
            assert_eq!(plus.v_n[0].conj(), minus.v_n[0]);
            assert_eq!(plus.v_prime[0][0].conj(), minus.v_prime[0][0]);
        }
    }

    #[test]
    fn top_boundary_relation() {
        // Q - 2 dV_n/dx_n = 1 at x_n = b
        for &(mag, gamma) in &[(0.5f64, 1.0f64), (3.0, -1.5)] {
            let xi = freq1(mag);
            let rp = reparam(&xi, gamma);
            let y = eval_y(&rp, 1.0, 1.0).unwrap();
            let dy = eval_y_derivative(&rp, &y);
            let relation = y[2] - Complex64::new(2.0, 0.0) * dy[1];
            assert!((relation - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn rho_vanishes_only_at_zero_and_low_freq_equivalence() {
        let params = WaveParams::new(1.0f64, 1.0, 1.0, 2).unwrap();
        let mut ratios = Vec::new();
        for k in 0..24 {
            let mag = 10f64.powf(-3.0 + 3.0 * (k as f64) / 23.0); // up to 1
            for &angle in &[0.0f64, 0.7, std::f64::consts::FRAC_PI_2] {
                let xi = Frequency::new_2d(mag * angle.cos(), mag * angle.sin());
                let rho = rho_value(&xi, &params).unwrap();
                assert!(rho.norm() > 0.0);
                let weight = (xi.xi[0].powi(2) + mag.powi(4)) / mag.powi(2);
                ratios.push(rho.norm_sqr() / mag.powi(2) / weight);
            }
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            max / min < 1e3,
            "|rho|^2/|xi|^2 vs (xi_1^2+|xi|^4)/|xi|^2 ratio spread too large: [{min}, {max}]"
        );
    }

    #[test]
    fn f32_instantiation_smoke() {
        let xi = Frequency::<f32>::new_1d(0.2);
        let m = eval_m(&xi, 1.0f32, 1.0).unwrap();
        let m64 = eval_m(&Frequency::<f64>::new_1d(0.2), 1.0, 1.0).unwrap();
        assert!((m.re as f64 - m64.re).abs() < 1e-4);
        assert!(m.re < 0.0);
    }
}
