//! Anisotropic surface norms, homogeneous seminorms, and frequency splits.
//!
//! The surface weight is
//! `omega_s(xi) = (xi_1^2 + |xi|^4)/|xi|^2` for `0 < |xi| < 1` and
//! `(1 + |xi|^2)^s` for `|xi| >= 1`, with the zero mode carrying no weight;
//! all discrete norms sum `weight * |coeff|^2 * cell_measure`.

use crate::error::{Error, Result};
use crate::field::SurfaceField;
use crate::scalar::Scalar;

/// The anisotropic low-frequency weight.
pub fn omega_weight<T: Scalar>(xi1: T, norm: T, s: T) -> T {
    if norm == T::zero() {
        T::zero()
    } else if norm < T::one() {
        (xi1 * xi1 + norm * norm * norm * norm) / (norm * norm)
    } else {
        (T::one() + norm * norm).powf(s)
    }
}

/// Norm bundle for one surface spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport<T> {
    pub xs: T,
    pub hs: T,
    pub hdot_minus1: T,
    pub low_part: T,
    pub high_part: T,
}

/// The discrete anisotropic norm with its low/high split at `|xi| = 1`,
/// together with the standard Sobolev norm and the order `-1` seminorm
/// (zero mode excluded).
pub fn xs_norm<T: Scalar>(eta: &SurfaceField<T>, s: T) -> NormReport<T> {
    let mu = eta.grid.cell_measure();
    let mut low2 = T::zero();
    let mut high2 = T::zero();
    let mut hs2 = T::zero();
    let mut hdot2 = T::zero();
    for (mode, c) in eta.coeffs.iter().enumerate() {
        let xi = eta.grid.frequency_at(mode);
        let norm = xi.norm();
        let mag2 = c.norm_sqr();
        hs2 = hs2 + (T::one() + norm * norm).powf(s) * mag2;
        if norm == T::zero() {
            continue;
        }
        let w = omega_weight(xi.xi[0], norm, s);
        if norm < T::one() {
            low2 = low2 + w * mag2;
        } else {
            high2 = high2 + w * mag2;
        }
        hdot2 = hdot2 + mag2 / (norm * norm);
    }
    NormReport {
        xs: ((low2 + high2) * mu).sqrt(),
        hs: (hs2 * mu).sqrt(),
        hdot_minus1: (hdot2 * mu).sqrt(),
        low_part: (low2 * mu).sqrt(),
        high_part: (high2 * mu).sqrt(),
    }
}

/// Plain discrete Sobolev norm of order `s` for a surface spectrum.
pub fn hs_norm<T: Scalar>(f: &SurfaceField<T>, s: T) -> T {
    let mu = f.grid.cell_measure();
    let mut acc = T::zero();
    for (mode, c) in f.coeffs.iter().enumerate() {
        let norm = f.grid.frequency_at(mode).norm();
        acc = acc + (T::one() + norm * norm).powf(s) * c.norm_sqr();
    }
    (acc * mu).sqrt()
}

/// Homogeneous seminorm of negative order; errors when the zero mode is not
/// negligible relative to `tol * l2`.
pub fn hdot_seminorm<T: Scalar>(f: &SurfaceField<T>, order: T, tol: T) -> Result<T> {
    assert!(order < T::zero(), "homogeneous seminorm only for negative order");
    let zero_mode = f.zero_mode().norm();
    let scale = f.l2_coeff();
    if zero_mode > tol * scale && zero_mode > T::of(1e-300) {
        return Err(Error::ZeroModeViolation {
            zero_mode: zero_mode.to_f64().unwrap_or(f64::NAN),
            norm: scale.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mu = f.grid.cell_measure();
    let mut acc = T::zero();
    for (mode, c) in f.coeffs.iter().enumerate() {
        let norm = f.grid.frequency_at(mode).norm();
        if norm == T::zero() {
            continue;
        }
        acc = acc + norm.powf(T::two() * order) * c.norm_sqr();
    }
    Ok((acc * mu).sqrt())
}

/// Indicator split at `|xi| = R`: low carries `|xi| < R`, high the rest;
/// the pieces reassemble exactly.
pub fn split_low_high<T: Scalar>(f: &SurfaceField<T>, radius: T) -> (SurfaceField<T>, SurfaceField<T>) {
    assert!(radius > T::zero());
    let mut low = f.clone();
    let mut high = f.clone();
    for mode in 0..f.grid.num_modes() {
        let norm = f.grid.frequency_at(mode).norm();
        if norm < radius {
            high.coeffs[mode] = num_complex::Complex::new(T::zero(), T::zero());
        } else {
            low.coeffs[mode] = num_complex::Complex::new(T::zero(), T::zero());
        }
    }
    (low, high)
}

/// Adaptive quadrature of the dual weight `|x|^2 / (x_1^2 + |x|^4)` over the
/// planar ball `B(0, R)`.
///
/// The integrand has an integrable spike along the `x_1 = 0` axis whose
/// width shrinks like `|x|^2`, so fixed frequency-cell midpoints cannot reach
/// tight absolute tolerances. Instead the integral is computed as a nested
/// one-dimensional adaptive rule: the inner `x_1` integral is split at the
/// known spike scales `x_2^2` and `x_2` before adaptive refinement, and the
/// outer `x_2` integral is refined dyadically toward the origin. Symmetry in
/// both coordinates reduces the domain to one quadrant.
pub fn dual_weight_integral<T: Scalar>(radius: T, tol: T) -> T {
    let inner = |rho: T| -> T {
        // g(rho) = int_0^sqrt(R^2 - rho^2) (x1^2 + rho^2)/(x1^2 + (x1^2+rho^2)^2) dx1
        let upper2 = radius * radius - rho * rho;
        if upper2 <= T::zero() {
            return T::zero();
        }
        let upper = upper2.sqrt();
        let f = |x1: T| -> T {
            let n2 = x1 * x1 + rho * rho;
            if n2 == T::zero() {
                return T::zero();
            }
            n2 / (x1 * x1 + n2 * n2)
        };
        // breakpoints around the moving spike of width ~ rho^2
        let mut cuts: Vec<T> = vec![T::zero(), upper];
        for &scale in &[rho * rho, T::of(8.0) * rho * rho, rho, T::of(8.0) * rho] {
            if scale > T::zero() && scale < upper {
                cuts.push(scale);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut acc = T::zero();
        for pair in cuts.windows(2) {
            acc = acc + adaptive_simpson(&f, pair[0], pair[1], tol / T::of(64.0), 40);
        }
        acc
    };
    // outer integral over rho in [0, R], graded dyadically toward 0
    let mut acc = T::zero();
    let mut hi = radius;
    for _ in 0..48 {
        let lo = hi * T::half();
        acc = acc + adaptive_simpson(&inner, lo, hi, tol / T::of(128.0), 32);
        hi = lo;
        if hi < T::of(1e-9) * radius {
            break;
        }
    }
    // the remaining sliver [0, hi] contributes at most ~ pi/2 * hi
    acc = acc + adaptive_simpson(&inner, T::zero(), hi, tol / T::of(128.0), 32);
    T::of(4.0) * acc
}

/// Standard recursive adaptive Simpson with a depth cap.
fn adaptive_simpson<T: Scalar>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T, depth: usize) -> T {
    let m = (a + b) * T::half();
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
) -> T {
    let m = (a + b) * T::half();
    let lm = (a + m) * T::half();
    let rm = (m + b) * T::half();
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / T::of(6.0) * (fa + T::of(4.0) * flm + fm);
    let right = (b - m) / T::of(6.0) * (fm + T::of(4.0) * frm + fb);
    let defect = left + right - whole;
    if depth == 0 || defect.abs() <= T::of(15.0) * tol {
        return left + right + defect / T::of(15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol * T::half(), depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol * T::half(), depth - 1)
}
