//! Fertilizer cost accounting, CAN-to-protected-urea substitution, abatement
//! totals, marginal/private/social abatement costs, and milk revenue.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Farm, Population};

/// Market prices in euro per tonne of product (lime priced per tonne spread).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceTable {
    pub can: f64,
    pub urea: f64,
    pub pu: f64,
    pub p: f64,
    pub k: f64,
    pub lime: f64,
}

impl Default for PriceTable {
    fn default() -> Self {
        // Representative market levels; assumptions, not observed quotes.
        PriceTable {
            can: 420.0,
            urea: 450.0,
            pu: 520.0,
            p: 600.0,
            k: 480.0,
            lime: 30.0,
        }
    }
}

impl PriceTable {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("can", self.can),
            ("urea", self.urea),
            ("pu", self.pu),
            ("p", self.p),
            ("k", self.k),
            ("lime", self.lime),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "prices.{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// How adopted protected urea replaces CAN in the costing layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstitutionMode {
    /// Transfer product mass: `CAN' = CAN (1 - a)`, `PU' = PU + a CAN`.
    #[default]
    AsWritten,
    /// Transfer nitrogen mass: `PU' = PU + a CAN (NC_CAN / NC_PU)`, keeping
    /// the nitrogen supplied by the swapped share constant.
    NitrogenEquivalent,
}

/// Fertilizer product masses for one farm (kg except lime in tonnes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FertilizerMasses {
    pub can_kg: f64,
    pub urea_kg: f64,
    pub pu_kg: f64,
    pub p_kg: f64,
    pub k_kg: f64,
    pub lime_t: f64,
}

impl From<&Farm> for FertilizerMasses {
    fn from(farm: &Farm) -> Self {
        FertilizerMasses {
            can_kg: farm.can_kg,
            urea_kg: farm.urea_kg,
            pu_kg: farm.pu_kg,
            p_kg: farm.p_kg,
            k_kg: farm.k_kg,
            lime_t: farm.lime_t,
        }
    }
}

/// Applies the adoption-share substitution to one farm's product masses.
/// Urea, P, K, and lime are untouched. `nc_ratio` is NC_CAN / NC_PU and is
/// only used in nitrogen-equivalent mode.
pub fn apply_substitution(
    farm: &Farm,
    alpha: f64,
    mode: SubstitutionMode,
    nc_ratio: f64,
) -> Result<FertilizerMasses> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "adoption share alpha must be in [0, 1], got {alpha}"
        )));
    }
    let mut masses = FertilizerMasses::from(farm);
    let swapped = alpha * farm.can_kg;
    masses.can_kg = farm.can_kg * (1.0 - alpha);
    masses.pu_kg = match mode {
        SubstitutionMode::AsWritten => farm.pu_kg + swapped,
        SubstitutionMode::NitrogenEquivalent => farm.pu_kg + swapped * nc_ratio,
    };
    Ok(masses)
}

/// Fertilizer expenditure for one farm's masses at the given prices.
pub fn masses_cost_eur(masses: &FertilizerMasses, prices: &PriceTable) -> f64 {
    prices.can * masses.can_kg / 1000.0
        + prices.urea * masses.urea_kg / 1000.0
        + prices.pu * masses.pu_kg / 1000.0
        + prices.p * masses.p_kg / 1000.0
        + prices.k * masses.k_kg / 1000.0
        + prices.lime * masses.lime_t
}

/// Sector fertilizer expenditure under the observed product mix.
pub fn baseline_cost_eur(pop: &Population, prices: &PriceTable) -> f64 {
    pop.farms
        .iter()
        .map(|farm| masses_cost_eur(&FertilizerMasses::from(farm), prices))
        .sum()
}

/// Sector fertilizer expenditure after substituting the adoption share.
pub fn policy_cost_eur(
    pop: &Population,
    alpha: f64,
    mode: SubstitutionMode,
    nc_ratio: f64,
    prices: &PriceTable,
) -> Result<f64> {
    let mut total = 0.0;
    for farm in &pop.farms {
        let masses = apply_substitution(farm, alpha, mode, nc_ratio)?;
        total += masses_cost_eur(&masses, prices);
    }
    Ok(total)
}

/// Cumulative abatement in tonnes CO₂-eq between two equal-length emission
/// series given in Gg per year.
pub fn total_abatement_t(base_gg: &[f64], policy_gg: &[f64]) -> Result<f64> {
    if base_gg.len() != policy_gg.len() {
        return Err(Error::LengthMismatch(format!(
            "emission series lengths {} and {} differ",
            base_gg.len(),
            policy_gg.len()
        )));
    }
    Ok(base_gg
        .iter()
        .zip(policy_gg)
        .map(|(b, p)| (b - p) * 1.0e3)
        .sum())
}

/// Cost-effectiveness summary of one policy run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbatementReport {
    pub total_abatement_t: f64,
    pub delta_cost_eur: f64,
    pub government_expenditure_eur: f64,
    /// Marginal abatement cost, euro per tonne CO₂-eq.
    pub mac_eur_per_t: f64,
    pub private_cost_eur_per_t: f64,
    pub social_cost_eur_per_t: f64,
}

impl AbatementReport {
    /// Flat key-value rendering for terminal output and text artifacts.
    pub fn to_text_table(&self) -> String {
        format!(
            "total_abatement_t        {:.3}\n\
             delta_cost_eur           {:.2}\n\
             government_expenditure   {:.2}\n\
             mac_eur_per_t            {:.4}\n\
             private_cost_eur_per_t   {:.4}\n\
             social_cost_eur_per_t    {:.4}\n",
            self.total_abatement_t,
            self.delta_cost_eur,
            self.government_expenditure_eur,
            self.mac_eur_per_t,
            self.private_cost_eur_per_t,
            self.social_cost_eur_per_t
        )
    }
}

/// MAC and private cost are the input-cost change per tonne abated; the
/// social cost additionally internalizes government expenditure.
pub fn abatement_costs(
    delta_cost_eur: f64,
    abatement_t: f64,
    gov_expenditure_eur: f64,
) -> Result<AbatementReport> {
    if abatement_t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "abatement must be positive to report unit costs, got {abatement_t}"
        )));
    }
    let private = delta_cost_eur / abatement_t;
    Ok(AbatementReport {
        total_abatement_t: abatement_t,
        delta_cost_eur,
        government_expenditure_eur: gov_expenditure_eur,
        mac_eur_per_t: private,
        private_cost_eur_per_t: private,
        social_cost_eur_per_t: (delta_cost_eur + gov_expenditure_eur) / abatement_t,
    })
}

/// Milk pricing convention. Component percentages multiply euro-per-kg price
/// coefficients to a per-litre value, which is then mass-corrected, netted of
/// processing, VAT-adjusted, and topped with any quality bonus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilkPriceParams {
    pub protein_price_eur_per_kg: f64,
    pub fat_price_eur_per_kg: f64,
    pub kg_per_litre: f64,
    pub processing_cost_per_litre: f64,
    pub vat_multiplier: f64,
    pub bonus_per_litre: f64,
}

impl Default for MilkPriceParams {
    fn default() -> Self {
        MilkPriceParams {
            protein_price_eur_per_kg: 8.0,
            fat_price_eur_per_kg: 5.0,
            kg_per_litre: 1.0297,
            processing_cost_per_litre: 0.05,
            vat_multiplier: 1.044594,
            bonus_per_litre: 0.0,
        }
    }
}

/// Revenue for `milk_yield_litres` delivered by the farm under `params`.
pub fn milk_revenue_eur(farm: &Farm, params: &MilkPriceParams, milk_yield_litres: f64) -> f64 {
    let component_value = farm.protein_pct * params.protein_price_eur_per_kg
        + farm.fat_pct * params.fat_price_eur_per_kg;
    let per_litre = (component_value * params.kg_per_litre - params.processing_cost_per_litre)
        * params.vat_multiplier
        + params.bonus_per_litre;
    per_litre * milk_yield_litres
}
