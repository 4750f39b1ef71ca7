//! Run configuration: a single JSON document plus command-line overrides.
//!
//! Physical quantities are SI; energies are dimensionless shell energies
//! matching the scaled Hamiltonian (optionally given in kelvin and converted
//! through the energy unit).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nanobeam::beam::{CaseLabel, StrainCase, BOLTZMANN};
use nanobeam::{Beam, Constants, Integrator, Params};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub beam: BeamConfig,
    /// Strain preset: "I", "II", or "III".
    pub case: String,
    /// Explicit strain; overrides `case` when set.
    pub epsilon: Option<f64>,
    /// Shell energies in scaled units; empty selects the per-case defaults.
    pub energies: Vec<f64>,
    /// Additional energies in kelvin, converted via the energy unit.
    pub energies_kelvin: Vec<f64>,
    pub samples: SamplesConfig,
    pub integrator: IntegratorConfigSection,
    pub map: MapConfig,
    pub fluxcorr: FluxCorrConfig,
    pub histogram: HistogramConfig,
    pub trajectories: TrajectoriesConfig,
    pub seed: u64,
    pub out_dir: String,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beam: BeamConfig::default(),
            case: "I".to_string(),
            epsilon: None,
            energies: Vec::new(),
            energies_kelvin: Vec::new(),
            samples: SamplesConfig::default(),
            integrator: IntegratorConfigSection::default(),
            map: MapConfig::default(),
            fluxcorr: FluxCorrConfig::default(),
            histogram: HistogramConfig::default(),
            trajectories: TrajectoriesConfig::default(),
            seed: 1,
            out_dir: "out".to_string(),
            format: OutputFormat::Both,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamConfig {
    pub elastic_modulus: f64,
    pub rest_length: f64,
    pub width: f64,
    pub depth: f64,
    pub mass_density: f64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        let b = Beam::silicon_nanobeam();
        Self {
            elastic_modulus: b.elastic_modulus,
            rest_length: b.rest_length,
            width: b.width,
            depth: b.depth,
            mass_density: b.mass_density,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplesConfig {
    /// Monte Carlo flux samples per energy.
    pub flux_mc: u64,
    /// Trajectories per gap ensemble.
    pub gap: u64,
    /// Trajectories per flux-correlation ensemble.
    pub fluxcorr: u64,
    /// 4-D phase-volume samples for the density-of-states cross-check.
    pub dos_mc: u64,
}

impl Default for SamplesConfig {
    fn default() -> Self {
        Self {
            flux_mc: 100_000,
            gap: 10_000,
            fluxcorr: 2_000,
            dos_mc: 400_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfigSection {
    pub dt: f64,
    pub t_max: f64,
    pub crossing_tol: f64,
    pub energy_tol: f64,
}

impl Default for IntegratorConfigSection {
    fn default() -> Self {
        let c = Integrator::default();
        Self {
            dt: c.dt,
            t_max: c.t_max,
            crossing_tol: c.crossing_tol,
            energy_tol: c.energy_tol,
        }
    }
}

impl IntegratorConfigSection {
    pub fn build(&self) -> Integrator {
        Integrator {
            dt: self.dt,
            t_max: self.t_max,
            crossing_tol: self.crossing_tol,
            energy_tol: self.energy_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    /// Grid nodes per axis (odd keeps the p̄₂ = 0 slice on the grid).
    pub resolution: usize,
    /// Censoring horizon for map cells, scaled time.
    pub t_max: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            resolution: 101,
            t_max: 2e4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxCorrConfig {
    /// End of the correlation time grid, scaled units.
    pub t_end: f64,
    /// Number of grid points (including t = 0).
    pub points: usize,
}

impl Default for FluxCorrConfig {
    fn default() -> Self {
        Self {
            t_end: 5000.0,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    /// Bin width = pilot mean gap / bins_per_mean.
    pub bins_per_mean: f64,
    /// Pilot ensemble size used to set the bin width.
    pub pilot: u64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins_per_mean: 50.0,
            pilot: 500,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoriesConfig {
    /// Number of first-crossing trajectories to dump.
    pub first_crossing_count: u64,
    /// Dividing-surface crossings for the long single-trajectory dump.
    pub crossings: u64,
    /// Sampling stride for the dumps, scaled time.
    pub stride: f64,
}

impl Default for TrajectoriesConfig {
    fn default() -> Self {
        Self {
            first_crossing_count: 20,
            crossings: 200,
            stride: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// The configuration after resolving the strain case and energy list.
pub struct Resolved {
    pub config: RunConfig,
    pub beam: Beam,
    pub case_name: String,
    pub epsilon: f64,
    pub constants: Constants,
    pub params: Params,
    pub energies: Vec<f64>,
    pub config_hash: String,
}

impl RunConfig {
    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse config {path}: {e}")))
    }

    /// Checks invariants, derives the model parameters, and fixes the energy list.
    pub fn resolve(self) -> Result<Resolved, CliError> {
        let beam = Beam::new(
            self.beam.elastic_modulus,
            self.beam.rest_length,
            self.beam.width,
            self.beam.depth,
            self.beam.mass_density,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let (case_name, epsilon) = match self.epsilon {
            Some(eps) => ("custom".to_string(), eps),
            None => {
                let label: CaseLabel = self
                    .case
                    .parse()
                    .map_err(|e: nanobeam::Error| CliError::Config(e.to_string()))?;
                (label.to_string(), StrainCase::<f64>::preset(label).epsilon)
            }
        };
        let constants = beam
            .derive_constants(epsilon)
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.integrator
            .build()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.map.resolution < 3 {
            return Err(CliError::Config("map.resolution must be >= 3".into()));
        }
        if self.fluxcorr.points < 2 || !(self.fluxcorr.t_end > 0.0) {
            return Err(CliError::Config("fluxcorr grid must have >= 2 points".into()));
        }
        let mut energies = if self.energies.is_empty() && self.energies_kelvin.is_empty() {
            default_energies(&case_name)
        } else {
            self.energies.clone()
        };
        let per_kelvin = BOLTZMANN / constants.energy_unit;
        energies.extend(self.energies_kelvin.iter().map(|k| k * per_kelvin));
        if energies.is_empty() {
            return Err(CliError::Config("no energies to analyse".into()));
        }
        let config_hash = hash_config(&self)?;
        Ok(Resolved {
            params: constants.model_params(),
            beam,
            case_name,
            epsilon,
            constants,
            energies,
            config_hash,
            config: self,
        })
    }
}

/// The studied shell energies per preset.
pub fn default_energies(case_name: &str) -> Vec<f64> {
    match case_name {
        "II" => vec![-2.12e-7, -2e-7, -1e-7, 1e-9, 1e-8, 1e-7],
        "III" => vec![-4e-9, -2.5e-9, 1e-9, 1e-8, 1e-7],
        _ => vec![1e-9, 1e-8, 1e-7],
    }
}

/// Hash over the analysis-affecting fields only: where the files go and which
/// encodings are written do not change their contents, so runs differing only
/// in `out_dir`/`format` share a hash and must reproduce byte-identical files.
fn hash_config(config: &RunConfig) -> Result<String, CliError> {
    let mut normalized = config.clone();
    normalized.out_dir = String::new();
    normalized.format = OutputFormat::Both;
    let canonical = serde_json::to_string(&normalized)
        .map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
}
