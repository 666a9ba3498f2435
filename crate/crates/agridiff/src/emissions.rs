//! Nitrogen-to-product conversion, direct N₂O accounting, CO₂-equivalents,
//! sectoral aggregation, and carbon-intensity metrics.
//!
//! The model boundary is fertilizer-related direct N₂O only; whole-farm
//! totals enter solely through the static `total_emissions_kg` column used
//! for carbon-intensity analytics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Farm, Population};

/// Molecular-mass ratio converting N₂O-N to N₂O.
pub const N2O_MASS_RATIO: f64 = 44.0 / 28.0;

/// Global warming potential of N₂O in CO₂-equivalents.
pub const GWP_N2O: f64 = 298.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FertilizerKind {
    Can,
    Urea,
    Pu,
    P,
    K,
}

impl FertilizerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FertilizerKind::Can => "can",
            FertilizerKind::Urea => "urea",
            FertilizerKind::Pu => "pu",
            FertilizerKind::P => "p",
            FertilizerKind::K => "k",
        }
    }
}

/// Per-product parameters.
///
/// `n_content` is the nutrient mass fraction of the product (for P and K the
/// farm columns already record product mass, so their content is 1.0).
/// `embedded_intensity` (t CO₂ per t product) carries no default: it is an
/// accounting assumption that must come from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FertilizerSpec {
    pub kind: FertilizerKind,
    pub n_content: f64,
    pub emission_factor: f64,
    pub embedded_intensity: Option<f64>,
    pub price_eur_per_t: f64,
}

impl FertilizerSpec {
    pub fn new(kind: FertilizerKind, n_content: f64, emission_factor: f64) -> Self {
        FertilizerSpec {
            kind,
            n_content,
            emission_factor,
            embedded_intensity: None,
            price_eur_per_t: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_content > 0.0 && self.n_content <= 1.0) {
            return Err(Error::Config(format!(
                "fertilizers.{}.n_content must be in (0, 1], got {}",
                self.kind.as_str(),
                self.n_content
            )));
        }
        if !(self.emission_factor >= 0.0 && self.emission_factor.is_finite()) {
            return Err(Error::Config(format!(
                "fertilizers.{}.emission_factor must be finite and >= 0",
                self.kind.as_str()
            )));
        }
        if self.price_eur_per_t < 0.0 {
            return Err(Error::Config(format!(
                "fertilizers.{}.price must be >= 0",
                self.kind.as_str()
            )));
        }
        Ok(())
    }
}

/// The full product table used by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FertilizerTable {
    pub can: FertilizerSpec,
    pub urea: FertilizerSpec,
    pub pu: FertilizerSpec,
    pub p: FertilizerSpec,
    pub k: FertilizerSpec,
}

impl Default for FertilizerTable {
    fn default() -> Self {
        FertilizerTable {
            can: FertilizerSpec::new(FertilizerKind::Can, 0.27, 0.0149),
            urea: FertilizerSpec::new(FertilizerKind::Urea, 0.46, 0.0025),
            pu: FertilizerSpec::new(FertilizerKind::Pu, 0.46, 0.0040),
            p: FertilizerSpec::new(FertilizerKind::P, 1.0, 0.0),
            k: FertilizerSpec::new(FertilizerKind::K, 1.0, 0.0),
        }
    }
}

impl FertilizerTable {
    /// The reference parameterization: default nutrient contents and emission
    /// factors plus the assumed embedded intensities and market prices that
    /// the policy and costing layers need. The embedded values are accounting
    /// assumptions, mirrored by the bundled configuration file.
    pub fn reference() -> Self {
        let mut table = FertilizerTable::default();
        table.can.embedded_intensity = Some(1.10);
        table.urea.embedded_intensity = Some(0.60);
        table.pu.embedded_intensity = Some(0.75);
        let prices = crate::economics::PriceTable::default();
        table.can.price_eur_per_t = prices.can;
        table.urea.price_eur_per_t = prices.urea;
        table.pu.price_eur_per_t = prices.pu;
        table.p.price_eur_per_t = prices.p;
        table.k.price_eur_per_t = prices.k;
        table
    }

    pub fn get(&self, kind: FertilizerKind) -> &FertilizerSpec {
        match kind {
            FertilizerKind::Can => &self.can,
            FertilizerKind::Urea => &self.urea,
            FertilizerKind::Pu => &self.pu,
            FertilizerKind::P => &self.p,
            FertilizerKind::K => &self.k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.can.validate()?;
        self.urea.validate()?;
        self.pu.validate()?;
        self.p.validate()?;
        self.k.validate()
    }
}

/// Tonnes of product required to deliver `n_kg` kilograms of nutrient.
pub fn fertilizer_quantity_t(n_kg: f64, spec: &FertilizerSpec) -> Result<f64> {
    if spec.n_content <= 0.0 {
        return Err(Error::Config(format!(
            "fertilizers.{}.n_content must be positive",
            spec.kind.as_str()
        )));
    }
    Ok((n_kg / 1000.0) / spec.n_content)
}

/// Direct N₂O (kg) from applying `n_kg` kilograms of nitrogen as `spec`.
pub fn n2o_direct_kg(n_kg: f64, spec: &FertilizerSpec) -> f64 {
    n_kg * spec.emission_factor * N2O_MASS_RATIO
}

/// Converts kilograms of N₂O to kilograms of CO₂-equivalent.
pub fn co2_equivalent_kg(n2o_kg: f64) -> f64 {
    n2o_kg * GWP_N2O
}

/// Annual fertilizer N₂O emissions for one farm in kg CO₂-eq, given its
/// adoption state. Adopters apply their entire nitrogen as protected urea,
/// non-adopters as CAN; the nitrogen mass itself is unchanged by adoption.
pub fn farm_emissions_kg(farm: &Farm, adopted: bool, table: &FertilizerTable) -> f64 {
    let spec = if adopted { &table.pu } else { &table.can };
    co2_equivalent_kg(n2o_direct_kg(farm.nitrogen_kg, spec))
}

/// Sector total in Gg CO₂-eq for one year. Per-farm math stays in kg; the
/// Gg conversion happens once at aggregation.
pub fn sector_emissions_gg(pop: &Population, adopted: &[bool], table: &FertilizerTable) -> f64 {
    let total_kg: f64 = pop
        .farms
        .iter()
        .enumerate()
        .map(|(i, farm)| farm_emissions_kg(farm, adopted.get(i).copied().unwrap_or(false), table))
        .sum();
    total_kg / 1.0e6
}

/// Carbon intensity in kg CO₂-eq per kg FPCM.
pub fn carbon_intensity(farm: &Farm) -> Result<f64> {
    if farm.fpcm_kg <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "farm {}: fpcm_kg must be positive to compute carbon intensity",
            farm.id
        )));
    }
    Ok(farm.total_emissions_kg / farm.fpcm_kg)
}

/// Post-policy carbon intensity: `ci_base * (1 - delta * mean_adoption_final)`.
pub fn post_policy_intensity(ci_base: f64, delta: f64, mean_adoption_final: f64) -> Result<f64> {
    let reduction = delta * mean_adoption_final;
    if reduction > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "intensity reduction delta * adoption = {reduction} exceeds 1"
        )));
    }
    Ok(ci_base * (1.0 - reduction))
}

/// Knobs controlling how the whole-farm intensity reduction at full adoption
/// is derived from the fertilizer-level emission-factor cut.
///
/// The product substitution cuts the direct fertilizer emission factor by
/// `1 - EF_PU/EF_CAN` (~73% at the default factors), but only a share of a
/// farm's total emissions is fertilizer-related. Both pieces are exposed
/// rather than hard-coding their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityParams {
    /// Fertilizer share of whole-farm emissions (assumption).
    pub fertilizer_share: f64,
    /// Override for the fertilizer-level proportional cut; when absent it is
    /// computed from the active emission factors.
    pub ef_cut: Option<f64>,
}

impl Default for IntensityParams {
    fn default() -> Self {
        IntensityParams {
            fertilizer_share: 0.25,
            ef_cut: None,
        }
    }
}

impl IntensityParams {
    /// Whole-farm proportional intensity reduction at full adoption.
    pub fn delta(&self, table: &FertilizerTable) -> f64 {
        let cut = self
            .ef_cut
            .unwrap_or(1.0 - table.pu.emission_factor / table.can.emission_factor);
        cut * self.fertilizer_share
    }
}

/// Carbon-intensity shift summary for one policy scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityRecord {
    pub ci_base_mean: f64,
    pub ci_post_mean: f64,
    pub delta: f64,
    pub mean_adoption_final: f64,
}
