//! Experiment configuration: a TOML file with sections mirroring the crate
//! modules. Every behavioural constant is overridable; the built-in defaults
//! are the committed reference parameterization.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::CalibrationSettings;
use crate::dynamics::{AdoptionParams, LaggardParams, ScenarioConfig};
use crate::economics::{MilkPriceParams, PriceTable, SubstitutionMode};
use crate::emissions::{FertilizerTable, IntensityParams};
use crate::error::{Error, Result};
use crate::network::SocialNetwork;
use crate::policy::{PolicyInstrument, PolicyKind};
use crate::population::Population;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSettings {
    pub n: usize,
    pub seed: u64,
}

impl Default for PopulationSettings {
    fn default() -> Self {
        PopulationSettings { n: 295, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSettings {
    pub k: usize,
    pub p: f64,
    pub seed: u64,
}

impl Default for NetworkSettings {
    fn default() -> Self {
        NetworkSettings {
            k: 4,
            p: 0.1,
            seed: 7,
        }
    }
}

/// Which coefficient set seeds the adoption probability; explicit values in
/// the `[dynamics]` section override the preset field-by-field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdoptionPreset {
    #[default]
    Calibrated,
    Theoretical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSettings {
    pub horizon: u32,
    pub initial_adopter_fraction: f64,
    pub preset: AdoptionPreset,
    pub beta0: Option<f64>,
    pub omega: Option<f64>,
    pub beta_size: Option<f64>,
    pub beta_milk: Option<f64>,
    pub laggard_fraction: f64,
    pub laggard_resistance_max: f64,
}

impl Default for DynamicsSettings {
    fn default() -> Self {
        let laggards = LaggardParams::default();
        DynamicsSettings {
            horizon: 15,
            initial_adopter_fraction: 0.01,
            preset: AdoptionPreset::Calibrated,
            beta0: None,
            omega: None,
            beta_size: None,
            beta_milk: None,
            laggard_fraction: laggards.fraction,
            laggard_resistance_max: laggards.resistance_max,
        }
    }
}

impl DynamicsSettings {
    pub fn adoption_params(&self) -> AdoptionParams {
        let mut params = match self.preset {
            AdoptionPreset::Calibrated => AdoptionParams::calibrated(),
            AdoptionPreset::Theoretical => AdoptionParams::theoretical(),
        };
        if let Some(v) = self.beta0 {
            params.beta0 = v;
        }
        if let Some(v) = self.omega {
            params.omega = v;
        }
        if let Some(v) = self.beta_size {
            params.beta_size = v;
        }
        if let Some(v) = self.beta_milk {
            params.beta_milk = v;
        }
        params
    }

    pub fn laggard_params(&self) -> LaggardParams {
        LaggardParams {
            fraction: self.laggard_fraction,
            resistance_max: self.laggard_resistance_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySettings {
    pub tax_rate_eur_per_t_co2: f64,
    pub subsidy_rate_eur_per_t: f64,
    pub tax_delta: f64,
    pub subsidy_delta: f64,
    pub reference_subsidy_rate: f64,
    pub tax_covers_adopters: bool,
}

impl Default for PolicySettings {
    fn default() -> Self {
        let base = PolicyInstrument::default();
        PolicySettings {
            tax_rate_eur_per_t_co2: base.tax_rate_eur_per_t_co2,
            subsidy_rate_eur_per_t: base.subsidy_rate_eur_per_t,
            tax_delta: base.tax_delta,
            subsidy_delta: base.subsidy_delta,
            reference_subsidy_rate: base.reference_subsidy_rate,
            tax_covers_adopters: base.tax_covers_adopters,
        }
    }
}

impl PolicySettings {
    pub fn instrument(&self, kind: PolicyKind) -> PolicyInstrument {
        PolicyInstrument {
            kind,
            tax_rate_eur_per_t_co2: self.tax_rate_eur_per_t_co2,
            subsidy_rate_eur_per_t: self.subsidy_rate_eur_per_t,
            tax_delta: self.tax_delta,
            subsidy_delta: self.subsidy_delta,
            reference_subsidy_rate: self.reference_subsidy_rate,
            tax_covers_adopters: self.tax_covers_adopters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FertilizerSettings {
    pub n_content: f64,
    pub emission_factor: f64,
    pub embedded_intensity: Option<f64>,
}

impl Default for FertilizerSettings {
    fn default() -> Self {
        FertilizerSettings {
            n_content: 1.0,
            emission_factor: 0.0,
            embedded_intensity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FertilizerSectionSettings {
    pub can: FertilizerSettings,
    pub urea: FertilizerSettings,
    pub pu: FertilizerSettings,
    pub p: FertilizerSettings,
    pub k: FertilizerSettings,
}

impl Default for FertilizerSectionSettings {
    fn default() -> Self {
        // Embedded intensities (t CO2/t product) are accounting assumptions,
        // not measured values; the tax pathway requires them.
        FertilizerSectionSettings {
            can: FertilizerSettings {
                n_content: 0.27,
                emission_factor: 0.0149,
                embedded_intensity: Some(1.10),
            },
            urea: FertilizerSettings {
                n_content: 0.46,
                emission_factor: 0.0025,
                embedded_intensity: Some(0.60),
            },
            pu: FertilizerSettings {
                n_content: 0.46,
                emission_factor: 0.0040,
                embedded_intensity: Some(0.75),
            },
            p: FertilizerSettings::default(),
            k: FertilizerSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSettings {
    pub iterations: usize,
    pub calibration_iterations: usize,
    pub base_seed: u64,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        MonteCarloSettings {
            iterations: 250,
            calibration_iterations: 50,
            base_seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntensitySettings {
    pub fertilizer_share: f64,
    pub ef_cut: Option<f64>,
    pub tail_threshold: f64,
}

impl Default for IntensitySettings {
    fn default() -> Self {
        let params = IntensityParams::default();
        IntensitySettings {
            fertilizer_share: params.fertilizer_share,
            ef_cut: params.ef_cut,
            tail_threshold: crate::stats::DEFAULT_TAIL_THRESHOLD,
        }
    }
}

impl IntensitySettings {
    pub fn params(&self) -> IntensityParams {
        IntensityParams {
            fertilizer_share: self.fertilizer_share,
            ef_cut: self.ef_cut,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySettings {
    pub snapshot_years: Vec<u32>,
    pub substitution_mode: SubstitutionMode,
}

impl Default for StudySettings {
    fn default() -> Self {
        StudySettings {
            snapshot_years: vec![1, 5, 15],
            substitution_mode: SubstitutionMode::AsWritten,
        }
    }
}

/// Top-level configuration; all sections optional with full defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub population: PopulationSettings,
    pub network: NetworkSettings,
    pub dynamics: DynamicsSettings,
    pub policy: PolicySettings,
    pub fertilizers: FertilizerSectionSettings,
    pub prices: PriceTable,
    pub milk: MilkPriceParams,
    pub intensity: IntensitySettings,
    pub montecarlo: MonteCarloSettings,
    pub calibrate: CalibrationSettings,
    pub study: StudySettings,
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: AppConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario_config(PolicyKind::Baseline)?.validate()?;
        self.prices.validate()?;
        if self.population.n < 2 {
            return Err(Error::Config(format!(
                "population.n must be at least 2, got {}",
                self.population.n
            )));
        }
        if self.montecarlo.iterations == 0 || self.montecarlo.calibration_iterations == 0 {
            return Err(Error::Config(
                "montecarlo.iterations must be at least 1".to_string(),
            ));
        }
        if !(self.intensity.fertilizer_share >= 0.0 && self.intensity.fertilizer_share <= 1.0) {
            return Err(Error::Config(
                "intensity.fertilizer_share must be in [0, 1]".to_string(),
            ));
        }
        Ok(())
    }

    /// The fertilizer table with prices wired in from the `[prices]` section.
    pub fn fertilizer_table(&self) -> FertilizerTable {
        let mut table = FertilizerTable::default();
        for (spec, settings, price) in [
            (&mut table.can, &self.fertilizers.can, self.prices.can),
            (&mut table.urea, &self.fertilizers.urea, self.prices.urea),
            (&mut table.pu, &self.fertilizers.pu, self.prices.pu),
            (&mut table.p, &self.fertilizers.p, self.prices.p),
            (&mut table.k, &self.fertilizers.k, self.prices.k),
        ] {
            spec.n_content = settings.n_content;
            spec.emission_factor = settings.emission_factor;
            spec.embedded_intensity = settings.embedded_intensity;
            spec.price_eur_per_t = price;
        }
        table
    }

    /// Assembles the per-run scenario configuration for one policy kind.
    pub fn scenario_config(&self, kind: PolicyKind) -> Result<ScenarioConfig> {
        let config = ScenarioConfig {
            horizon: self.dynamics.horizon,
            policy: self.policy.instrument(kind),
            initial_adopter_fraction: self.dynamics.initial_adopter_fraction,
            adoption: self.dynamics.adoption_params(),
            laggards: self.dynamics.laggard_params(),
            fertilizers: self.fertilizer_table(),
            prices: self.prices,
            base_seed: self.montecarlo.base_seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Synthesizes the configured population, or loads it from `path`.
    pub fn population(&self, path: Option<&Path>) -> Result<Population> {
        match path {
            Some(p) => Population::load_csv(p),
            None => Population::synthesize(self.population.n, self.population.seed),
        }
    }

    /// Builds the shared social network for a population of size `n`.
    pub fn build_network(&self, n: usize) -> Result<SocialNetwork> {
        SocialNetwork::watts_strogatz(n, self.network.k, self.network.p, self.network.seed)
    }
}
