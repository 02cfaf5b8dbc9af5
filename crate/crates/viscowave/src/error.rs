//! Error types shared across the solver layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate boundary matrix at r = {r}, kappa = {kappa}: |det B4| = {det_mag} below floor")]
    DegenerateBoundaryMatrix { r: f64, kappa: f64, det_mag: f64 },

    #[error("wave speed gamma must be nonzero for this solve")]
    GammaZero,

    #[error("zero surface tension requires one horizontal dimension (sigma = 0 with horiz_dim = 2 is unsupported)")]
    CapillaryDimension,

    #[error("invalid wave parameters: {0}")]
    InvalidParams(String),

    #[error("compatibility violated: zero-mode residual {residual} exceeds tolerance {tol}")]
    CompatibilityViolated { residual: f64, tol: f64 },

    #[error("Navier compatibility violated: |W(0)| = {residual} exceeds tolerance {tol}")]
    NavierCompatibility { residual: f64, tol: f64 },

    #[error("zero-mode violation: |f(0)| = {zero_mode} not negligible against norm {norm}")]
    ZeroModeViolation { zero_mode: f64, norm: f64 },

    #[error("grid/field size mismatch: {0}")]
    SizeMismatch(String),

    #[error("per-frequency solve failed at mode {mode:?}: {source}")]
    FrequencyFailure {
        mode: [i64; 2],
        #[source]
        source: Box<Error>,
    },

    #[error("surface too large: max |eta| = {max_eta} exceeds cap {cap}")]
    SurfaceTooLarge { max_eta: f64, cap: f64 },

    #[error("iteration diverged after {iterations} steps, residual {residual}")]
    Diverged { iterations: usize, residual: f64 },

    #[error("maximum iterations ({iterations}) reached, residual {residual}")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("singular linear system in {0}")]
    SingularSystem(String),

    #[error("invalid field file: {0}")]
    BadFieldFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
