//! TOML run configuration with a versioned schema.

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use viscowave::nonlinear::{ForcingSpec, IterationConfig};
use viscowave::params::WaveParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub params: ParamsSection,
    pub grid: GridSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub iteration: IterationSection,
    #[serde(default)]
    pub symbols: SymbolsSection,
    #[serde(default)]
    pub linear_data: Option<LinearDataSection>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma: f64,
    pub sigma: f64,
    pub depth: f64,
    pub horiz_dim: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub npts: usize,
    pub length: f64,
    #[serde(default)]
    pub vertical_nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    #[serde(default)]
    pub preset: ForcingPreset,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub center: Option<[f64; 2]>,
}

fn default_amplitude() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingPreset {
    #[default]
    GaussianBumpStress,
    TravelingPressurePatch,
    SliceForce,
    None,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationSection {
    pub max_iters: usize,
    pub tol: f64,
    pub damping: f64,
}

impl Default for IterationSection {
    fn default() -> Self {
        Self { max_iters: 25, tol: 1e-10, damping: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolsSection {
    pub xi_min: f64,
    pub xi_max: f64,
    pub samples: usize,
}

impl Default for SymbolsSection {
    fn default() -> Self {
        Self { xi_min: 1e-3, xi_max: 1e3, samples: 61 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearDataSection {
    pub f: PathBuf,
    pub g: PathBuf,
    pub h: PathBuf,
    pub k: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text).context("parsing config")?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            bail!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.schema);
        }
        if self.params.horiz_dim != 1 && self.params.horiz_dim != 2 {
            bail!("horiz_dim must be 1 or 2");
        }
        if self.params.sigma == 0.0 && self.params.horiz_dim == 2 {
            bail!("sigma = 0 requires horiz_dim = 1");
        }
        if self.params.depth <= 0.0 {
            bail!("depth must be positive");
        }
        if !self.grid.npts.is_power_of_two() || self.grid.npts < 4 {
            bail!("grid.npts must be a power of two >= 4");
        }
        if self.grid.length <= 0.0 {
            bail!("grid.length must be positive");
        }
        if self.iteration.damping <= 0.0 || self.iteration.damping > 1.0 {
            bail!("iteration.damping must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn wave_params(&self) -> Result<WaveParams<f64>> {
        WaveParams::new(self.params.gamma, self.params.sigma, self.params.depth, self.params.horiz_dim)
            .map_err(anyhow::Error::from)
    }

    /// Vertical quadrature order: explicit, or scaled so the Duhamel kernels
    /// at the largest grid frequency stay spectrally resolved.
    pub fn vertical_order(&self) -> usize {
        if let Some(m) = self.grid.vertical_nodes {
            return m.max(8);
        }
        let r_max = std::f64::consts::PI * self.grid.npts as f64 / self.grid.length
            * if self.params.horiz_dim == 2 { std::f64::consts::SQRT_2 } else { 1.0 };
        let scaled = (0.75 * r_max * self.params.depth).ceil() as usize + 8;
        scaled.clamp(48, 192)
    }

    pub fn forcing_spec(&self) -> ForcingSpec<f64> {
        let width = self.forcing.width.unwrap_or(self.grid.length / 16.0);
        let center = self.forcing.center.unwrap_or([
            self.grid.length / 2.0,
            if self.params.horiz_dim == 2 { self.grid.length / 2.0 } else { 0.0 },
        ]);
        let a = self.forcing.amplitude;
        let d = self.params.horiz_dim;
        match self.forcing.preset {
            ForcingPreset::GaussianBumpStress => ForcingSpec::gaussian_bump_stress(a, width, center, d),
            ForcingPreset::TravelingPressurePatch => {
                ForcingSpec::traveling_pressure_patch(a, width, center, self.params.depth, d)
            }
            ForcingPreset::SliceForce => ForcingSpec::slice_force(a, width, center, d),
            ForcingPreset::None => ForcingSpec::none(),
        }
    }

    pub fn iteration_config(&self) -> IterationConfig {
        IterationConfig {
            max_iters: self.iteration.max_iters,
            tol: self.iteration.tol,
            damping: self.iteration.damping,
        }
    }
}
