//! Run configuration: TOML or JSON files describing a lattice, a collision
//! rule, optional potentials, and per-subcommand sections.
//!
//! All collision and potential-phase angles are given in units of pi
//! (`theta_pi = 0.25` means theta = pi/4).  Wavenumbers are plain lattice
//! units (radians per site) since they are momenta, not tunable phases.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use qlga::collision::{
    Collision1DParams, CollisionDDParams, PairPotential, PairPotentialSpec, Potential,
};
use qlga::evolve::{CollisionRule, QlgaModel};
use qlga::lattice::LatticeSpec;
use qlga::state::{config_state, gaussian_state, point_state, SectorState, WavepacketParams};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub collision: CollisionConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    #[serde(default)]
    pub pair_potential: Option<PairPotentialConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub run: Option<EvolveConfig>,
    #[serde(default)]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub dispersion: Option<DispersionConfig>,
    #[serde(default)]
    pub arbitrate: Option<ArbitrateConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dimension: usize,
    pub extent: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "rule")]
pub enum CollisionConfig {
    /// 1D collision: mixing angle and optional double-occupancy phase.
    OneD {
        theta_pi: f64,
        #[serde(default)]
        phi_pi: f64,
    },
    /// D-dimensional one-particle collision from three eigenphases.
    Isotropic { mu_pi: f64, nu_pi: f64, lambda_pi: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Lattice spacing; physical positions are `eps * (site - extent/2)`.
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { eps: default_eps() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "form")]
pub enum PotentialConfig {
    /// `V(x) = coefficient * |x|^2`.
    Quadratic { coefficient: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "form")]
pub enum PairPotentialConfig {
    /// `V(x, y) = coefficient * |x - y|^2`.
    QuadraticDistance { coefficient: f64 },
    /// Tabulated by separation: `values[round(|x - y| / spacing)]`, zero
    /// beyond the table.
    Table { spacing: f64, values: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum InitialConfig {
    /// Single-particle Gaussian packet (center/sigma in lattice units,
    /// wavenumber in radians per site).
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
        wavenumber: Vec<f64>,
        /// Per-direction complex weights as `[re, im]`; defaults to equal
        /// weights on every direction.
        #[serde(default)]
        weights: Option<Vec<[f64; 2]>>,
    },
    /// One particle on one slot.
    Point { site: Vec<usize>, direction: usize },
    /// An n-particle basis configuration given by occupied slot indices.
    Configuration { slots: Vec<usize> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub steps: usize,
    /// Write every k-th step to the evolution table (first and last steps
    /// are always written).
    #[serde(default = "default_observe_every")]
    pub observe_every: usize,
}

fn default_observe_every() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_particles")]
    pub n: usize,
    /// When set (and the model is a 1D quadratic well), also run the
    /// bound-state comparison for this many levels.
    #[serde(default)]
    pub oscillator_levels: Option<usize>,
}

fn default_particles() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    /// Wavenumbers to probe, radians per site.
    pub ks: Vec<f64>,
    #[serde(default)]
    pub axis: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArbitrateConfig {
    /// Wavenumbers for the dispersion fit, radians per site.
    pub ks: Vec<f64>,
}

/// Load a config from a `.toml` or `.json` file (decided by extension).
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => {
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid TOML config: {e}")))
        }
        Some("json") => serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid JSON config: {e}"))),
        other => Err(CliError::Usage(format!(
            "config must be a .toml or .json file (got extension {other:?})"
        ))),
    }
}

impl RunConfig {
    pub fn lattice(&self) -> Result<LatticeSpec, CliError> {
        Ok(LatticeSpec::new(self.lattice.dimension, self.lattice.extent)?)
    }

    /// Assemble the model described by the lattice/collision/model/potential
    /// sections.
    pub fn model(&self) -> Result<QlgaModel, CliError> {
        let lattice = self.lattice()?;
        let rule = match &self.collision {
            CollisionConfig::OneD { theta_pi, phi_pi } => {
                CollisionRule::OneD(Collision1DParams::from_angles(theta_pi * PI, phi_pi * PI)?)
            }
            CollisionConfig::Isotropic { mu_pi, nu_pi, lambda_pi } => {
                CollisionRule::Isotropic(CollisionDDParams::from_angles(
                    self.lattice.dimension,
                    mu_pi * PI,
                    nu_pi * PI,
                    lambda_pi * PI,
                )?)
            }
        };
        let potential = self.potential.as_ref().map(|p| match p {
            PotentialConfig::Quadratic { coefficient } => {
                Potential::Quadratic { coefficient: *coefficient }
            }
        });
        let pair = match &self.pair_potential {
            Some(PairPotentialConfig::QuadraticDistance { coefficient }) => {
                Some(PairPotentialSpec::new(PairPotential::QuadraticDistance {
                    coefficient: *coefficient,
                })?)
            }
            Some(PairPotentialConfig::Table { spacing, values }) => {
                Some(PairPotentialSpec::new(PairPotential::Table {
                    spacing: *spacing,
                    values: values.clone(),
                })?)
            }
            None => None,
        };
        Ok(QlgaModel::new(lattice, rule, potential, pair, self.model.eps)?)
    }

    /// Build the initial state for `evolve`.
    pub fn initial_state(&self) -> Result<SectorState, CliError> {
        let lattice = self.lattice()?;
        let initial = self
            .initial
            .as_ref()
            .ok_or_else(|| CliError::Usage("evolve needs an [initial] section".into()))?;
        let state = match initial {
            InitialConfig::Gaussian { center, sigma, wavenumber, weights } => {
                let packet = WavepacketParams::new(center.clone(), *sigma, wavenumber.clone())?;
                let weights: Vec<Complex64> = match weights {
                    Some(list) => list.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
                    None => vec![Complex64::ONE; lattice.directions_per_site()],
                };
                gaussian_state(&lattice, &packet, &weights)?
            }
            InitialConfig::Point { site, direction } => {
                if site.len() != lattice.dimension() {
                    return Err(CliError::Usage(format!(
                        "point site has {} coordinates, lattice dimension is {}",
                        site.len(),
                        lattice.dimension()
                    )));
                }
                let slot = lattice.slot_index(lattice.site_index(site), *direction);
                point_state(&lattice, slot)?
            }
            InitialConfig::Configuration { slots } => config_state(&lattice, slots)?,
        };
        Ok(state)
    }
}
