//! Scalar abstraction and numerically careful complex helpers.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Signed};
use std::fmt::{Debug, Display};

/// Real scalar type the solver is generic over: `f32` or `f64`.
///
/// The bound set is what the numerics actually need: IEEE float behavior,
/// the usual constants, conversion from literals, and FFT support.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Signed
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + rustfft::FftNum
{
    /// Shorthand for converting an `f64` literal into the scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable in scalar type")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over the generic scalar.
pub type C<T> = Complex<T>;

pub fn c_re<T: Scalar>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

pub fn c_im<T: Scalar>(y: T) -> C<T> {
    Complex::new(T::zero(), y)
}

/// `exp(z) - 1` without cancellation for small `z`.
///
/// Splits into `expm1(x)*cos(y) - 2 sin^2(y/2) + i e^x sin(y)` so both parts
/// stay accurate when `|z|` is tiny.
pub fn cexpm1<T: Scalar>(z: C<T>) -> C<T> {
    let ex_m1 = z.re.exp_m1();
    let cos_y = z.im.cos();
    let sin_y = z.im.sin();
    let sin_half = (z.im * T::half()).sin();
    let re = ex_m1 * cos_y - T::two() * sin_half * sin_half;
    let im = z.re.exp() * sin_y;
    Complex::new(re, im)
}

/// `sinh(w) * exp(-w)`, requires `Re w >= 0`; equals `-(expm1(-2w))/2`.
pub fn sinh_peel<T: Scalar>(w: C<T>) -> C<T> {
    -cexpm1(-(w + w)) * c_re(T::half())
}

/// `cosh(w) * exp(-w)`, requires `Re w >= 0`; equals `1 + expm1(-2w)/2`.
pub fn cosh_peel<T: Scalar>(w: C<T>) -> C<T> {
    c_re(T::one()) + cexpm1(-(w + w)) * c_re(T::half())
}

/// `sinh(w) * exp(-w) / w` with the removable singularity at `w = 0`.
pub fn sinhc_peel<T: Scalar>(w: C<T>) -> C<T> {
    if w.norm_sqr() == T::zero() {
        return c_re(T::one());
    }
    sinh_peel(w) / w
}

/// `sinh(x) - x`, series-stabilized for small real `x`.
pub fn sinh_minus_x<T: Scalar>(x: T) -> T {
    if x.abs() < T::of(0.5) {
        // sum x^(2k+1)/(2k+1)! for k >= 1
        let x2 = x * x;
        let mut term = x * x2 / T::of(6.0);
        let mut sum = term;
        let mut n = T::of(3.0);
        for _ in 0..20 {
            term = term * x2 / ((n + T::one()) * (n + T::two()));
            let next = sum + term;
            if next == sum {
                break;
            }
            sum = next;
            n = n + T::two();
        }
        sum
    } else {
        x.sinh() - x
    }
}

/// `x cosh(x) - sinh(x)`, series-stabilized for small real `x`.
pub fn xcosh_minus_sinh<T: Scalar>(x: T) -> T {
    if x.abs() < T::of(0.5) {
        // sum x^(2k+1) * 2k/(2k+1)! for k >= 1
        let x2 = x * x;
        let mut sum = T::zero();
        let mut pow = x * x2; // x^3
        let mut fact = T::of(6.0); // 3!
        let mut k = T::one();
        for _ in 0..20 {
            let term = pow * (T::two() * k) / fact;
            let next = sum + term;
            if next == sum {
                break;
            }
            sum = next;
            k = k + T::one();
            let n = T::two() * k; // next odd factorial step: (2k)!->(2k+1)!
            fact = fact * n * (n + T::one());
            pow = pow * x2;
        }
        sum
    } else {
        x * x.cosh() - x.sinh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cexpm1_matches_direct_for_moderate_args() {
        let z = Complex::new(0.7f64, -1.3);
        let direct = z.exp() - Complex::new(1.0, 0.0);
        let stable = cexpm1(z);
        assert_relative_eq!(stable.re, direct.re, max_relative = 1e-14);
        assert_relative_eq!(stable.im, direct.im, max_relative = 1e-14);
    }

    #[test]
    fn cexpm1_small_argument_accuracy() {
        let z = Complex::new(1e-9f64, -2e-9);
        let v = cexpm1(z);
        // exp(z)-1 ~ z + z^2/2
        assert_relative_eq!(v.re, 1e-9, max_relative = 1e-6);
        assert_relative_eq!(v.im, -2e-9, max_relative = 1e-6);
    }

    #[test]
    fn peeled_hyperbolics() {
        let w = Complex::new(3.0f64, 0.4);
        assert_relative_eq!(
            (sinh_peel(w) - w.sinh() * (-w).exp()).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            (cosh_peel(w) - w.cosh() * (-w).exp()).norm(),
            0.0,
            epsilon = 1e-15
        );
        // large argument must not overflow
        let big = Complex::new(5000.0f64, 1.0);
        assert!(sinh_peel(big).norm() <= 0.5000001);
        assert!(cosh_peel(big).norm() <= 0.5000001);
    }

    #[test]
    fn series_helpers() {
        assert_relative_eq!(sinh_minus_x(2.0f64), 2.0f64.sinh() - 2.0, max_relative = 1e-14);
        let x = 1e-4f64;
        assert_relative_eq!(sinh_minus_x(x), x * x * x / 6.0, max_relative = 1e-7);
        assert_relative_eq!(
            xcosh_minus_sinh(2.0f64),
            2.0 * 2.0f64.cosh() - 2.0f64.sinh(),
            max_relative = 1e-14
        );
        assert_relative_eq!(xcosh_minus_sinh(x), x * x * x / 3.0, max_relative = 1e-7);
    }
}
