//! Gauss-Legendre quadrature and barycentric differentiation on [0, b].
//!
//! The vertical node set doubles as the output sample set for all solvers,
//! so nodes, weights, the differentiation matrix, and interpolation weights
//! live together in one immutable object.

use crate::scalar::{Scalar, C};
use ndarray::Array2;
use std::sync::Arc;

/// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial with the asymptotic initial guess.
pub fn gauss_legendre_unit<T: Scalar>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 2, "quadrature order must be at least 2");
    let mut nodes = vec![T::zero(); order];
    let mut weights = vec![T::zero(); order];
    let n_t = T::of(order as f64);
    for k in 0..(order + 1) / 2 {
        // Chebyshev-like initial guess
        let theta = T::PI() * (T::of(k as f64) + T::of(0.75)) / (n_t + T::half());
        let mut x = theta.cos();
        let mut dp = T::zero();
        for _ in 0..100 {
            // Bonnet recurrence for P_n(x) and P_{n-1}(x)
            let mut p0 = T::one();
            let mut p1 = x;
            for j in 2..=order {
                let j_t = T::of(j as f64);
                let p2 = ((T::two() * j_t - T::one()) * x * p1 - (j_t - T::one()) * p0) / j_t;
                p0 = p1;
                p1 = p2;
            }
            dp = n_t * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * (T::one() + x.abs()) {
                break;
            }
        }
        let w = T::two() / ((T::one() - x * x) * dp * dp);
        nodes[k] = -x.abs();
        nodes[order - 1 - k] = x.abs();
        weights[k] = w;
        weights[order - 1 - k] = w;
        if order % 2 == 1 && k == order / 2 {
            nodes[k] = T::zero();
        }
    }
    (nodes, weights)
}

/// Vertical Gauss-Legendre node set on `[0, b]` with barycentric machinery.
#[derive(Debug, Clone)]
pub struct VerticalNodes<T> {
    pub b: T,
    nodes: Arc<Vec<T>>,
    weights: Arc<Vec<T>>,
    bary: Arc<Vec<T>>,
    diff: Arc<Array2<T>>,
}

impl<T: Scalar> VerticalNodes<T> {
    pub fn new(order: usize, b: T) -> Self {
        let (xs_unit, ws_unit) = gauss_legendre_unit::<T>(order);
        let half_b = b * T::half();
        let nodes: Vec<T> = xs_unit.iter().map(|&x| half_b * (x + T::one())).collect();
        let weights: Vec<T> = ws_unit.iter().map(|&w| w * half_b).collect();
        let bary = barycentric_weights(&nodes);
        let diff = differentiation_matrix(&nodes, &bary);
        Self {
            b,
            nodes: Arc::new(nodes),
            weights: Arc::new(weights),
            bary: Arc::new(bary),
            diff: Arc::new(diff),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Quadrature of complex nodal values over [0, b].
    pub fn integrate(&self, values: &[C<T>]) -> C<T> {
        debug_assert_eq!(values.len(), self.len());
        let mut acc = C::<T>::new(T::zero(), T::zero());
        for (v, &w) in values.iter().zip(self.weights.iter()) {
            acc = acc + *v * C::<T>::new(w, T::zero());
        }
        acc
    }

    pub fn integrate_real(&self, values: &[T]) -> T {
        let mut acc = T::zero();
        for (v, &w) in values.iter().zip(self.weights.iter()) {
            acc = acc + *v * w;
        }
        acc
    }

    /// Spectral derivative of nodal values.
    pub fn differentiate(&self, values: &[C<T>]) -> Vec<C<T>> {
        let n = self.len();
        debug_assert_eq!(values.len(), n);
        let mut out = vec![C::<T>::new(T::zero(), T::zero()); n];
        for i in 0..n {
            let mut acc = C::<T>::new(T::zero(), T::zero());
            for j in 0..n {
                acc = acc + values[j] * C::<T>::new(self.diff[[i, j]], T::zero());
            }
            out[i] = acc;
        }
        out
    }

    /// Barycentric interpolation of nodal values to an arbitrary point.
    pub fn interpolate(&self, values: &[C<T>], x: T) -> C<T> {
        debug_assert_eq!(values.len(), self.len());
        let mut num = C::<T>::new(T::zero(), T::zero());
        let mut den = T::zero();
        // exact-node hit
        for (j, &xj) in self.nodes.iter().enumerate() {
            if x == xj {
                return values[j];
            }
        }
        for (j, (&xj, &wj)) in self.nodes.iter().zip(self.bary.iter()).enumerate() {
            let t = wj / (x - xj);
            num = num + values[j] * C::<T>::new(t, T::zero());
            den = den + t;
        }
        num / C::<T>::new(den, T::zero())
    }

    /// Weights `l_j(x)` such that `f(x) = sum_j l_j(x) f(x_j)`.
    pub fn interpolation_weights(&self, x: T) -> Vec<T> {
        let n = self.len();
        let mut out = vec![T::zero(); n];
        for (j, &xj) in self.nodes.iter().enumerate() {
            if x == xj {
                out[j] = T::one();
                return out;
            }
        }
        let mut den = T::zero();
        for (j, (&xj, &wj)) in self.nodes.iter().zip(self.bary.iter()).enumerate() {
            let t = wj / (x - xj);
            out[j] = t;
            den = den + t;
        }
        for v in &mut out {
            *v = *v / den;
        }
        out
    }

    pub fn diff_matrix(&self) -> &Array2<T> {
        &self.diff
    }
}

fn barycentric_weights<T: Scalar>(nodes: &[T]) -> Vec<T> {
    let n = nodes.len();
    let mut w = vec![T::one(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] = w[i] / (nodes[i] - nodes[j]);
            }
        }
    }
    // normalize to curb under/overflow of the products
    let max = w.iter().fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m });
    for v in &mut w {
        *v = *v / max;
    }
    w
}

fn differentiation_matrix<T: Scalar>(nodes: &[T], bary: &[T]) -> Array2<T> {
    let n = nodes.len();
    let mut d = Array2::<T>::from_elem((n, n), T::zero());
    for i in 0..n {
        let mut row_sum = T::zero();
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[[i, j]] = v;
                row_sum = row_sum + v;
            }
        }
        d[[i, i]] = -row_sum;
    }
    d
}
