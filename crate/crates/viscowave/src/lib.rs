//! Spectral solver for viscous traveling free-surface waves.
//!
//! The library computes traveling wave solutions of the incompressible
//! Navier-Stokes equations in a periodic fluid layer with a free upper
//! surface, driven by bulk forces and surface stresses that are stationary
//! in a frame moving at speed `gamma` along the first horizontal axis.
//!
//! The pipeline, bottom to top:
//!
//! * [`symbols`] - closed-form evaluation of the per-frequency ODE system
//!   matrix, its boundary matrix, the matrix exponential, and the derived
//!   Fourier symbols `Q`, `V`, `m`, `rho`.
//! * [`frequency_ode`] - the per-frequency two-point boundary value solve for
//!   the transformed Stokes system, plus the decoupled transverse solve in
//!   three dimensions.
//! * [`grid`], [`field`], [`norms`], [`io`] - the periodic horizontal grid,
//!   FFT transforms, spectral field containers, the anisotropic surface
//!   norms, and field file formats.
//! * [`linear`] - the linear solves: applied-stress, gravity-capillary
//!   (via the surface symbol division `eta_hat = psi / rho`), the
//!   over-determined compatibility check, and the Navier-condition solve.
//! * [`nonlinear`] - flattening geometry, the nonlinear residual, and the
//!   quasi-Newton iteration with the frozen linearization.
//! * [`oracles`] - independent brute-force references used by the test
//!   suite (numeric matrix exponential, finite-difference collocation,
//!   forward differential operators).
//! * [`validation`] - the acceptance checks, runnable from tests or the CLI.
//!
//! Core numerics are generic over the scalar type through the [`Scalar`]
//! trait (`f32` or `f64`); the concrete aliases below pin the common
//! double-precision configuration.

pub mod error;
pub mod scalar;

pub mod field;
pub mod frequency_ode;
pub mod grid;
pub mod io;
pub mod linear;
pub mod mat4;
pub mod nonlinear;
pub mod norms;
pub mod oracles;
pub mod params;
pub mod quadrature;
pub mod symbols;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use params::{Frequency, WaveParams};

/// Double-precision aliases for the main user-facing types.
pub type WaveParams64 = params::WaveParams<f64>;
pub type Frequency64 = params::Frequency<f64>;
pub type Grid64 = grid::HorizontalGrid<f64>;
pub type VerticalNodes64 = quadrature::VerticalNodes<f64>;
pub type VolumeField64 = field::VolumeField<f64>;
pub type SurfaceField64 = field::SurfaceField<f64>;
pub type DataQuadruple64 = linear::DataQuadruple<f64>;
pub type SolutionTriple64 = linear::SolutionTriple<f64>;

/// Single-precision aliases; useful for storage-bound experiments.
pub type WaveParams32 = params::WaveParams<f32>;
pub type Grid32 = grid::HorizontalGrid<f32>;
