//! Policy instruments: carbon-tax liabilities on embedded fertilizer
//! emissions, protected-urea subsidies, and per-year cash-flow aggregation.

use serde::{Deserialize, Serialize};

use crate::emissions::{fertilizer_quantity_t, FertilizerSpec, FertilizerTable};
use crate::error::{Error, Result};
use crate::population::Population;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Baseline,
    CarbonTax,
    Subsidy,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Baseline => "baseline",
            PolicyKind::CarbonTax => "tax",
            PolicyKind::Subsidy => "subsidy",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "baseline" => Ok(PolicyKind::Baseline),
            "tax" | "carbon_tax" | "carbon-tax" => Ok(PolicyKind::CarbonTax),
            "subsidy" => Ok(PolicyKind::Subsidy),
            other => Err(Error::InvalidParameter(format!(
                "unknown scenario `{other}` (expected baseline, tax, or subsidy)"
            ))),
        }
    }
}

/// A policy instrument plus the adoption-probability shift it induces.
///
/// The subsidy shift scales linearly with the rate through the reference
/// point (delta = subsidy_delta * rate / reference_rate). The tax shift
/// applies only while taxed CAN is more expensive per tonne of nitrogen than
/// protected urea; at the default prices that holds in every year, so it
/// reduces to the flat shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyInstrument {
    pub kind: PolicyKind,
    pub tax_rate_eur_per_t_co2: f64,
    pub subsidy_rate_eur_per_t: f64,
    pub tax_delta: f64,
    pub subsidy_delta: f64,
    pub reference_subsidy_rate: f64,
    /// When true, adopters also pay the carbon tax on the embedded emissions
    /// of their protected urea.
    pub tax_covers_adopters: bool,
}

impl Default for PolicyInstrument {
    fn default() -> Self {
        PolicyInstrument {
            kind: PolicyKind::Baseline,
            tax_rate_eur_per_t_co2: 71.0,
            subsidy_rate_eur_per_t: 200.0,
            tax_delta: 0.08,
            subsidy_delta: 0.15,
            reference_subsidy_rate: 200.0,
            tax_covers_adopters: false,
        }
    }
}

impl PolicyInstrument {
    pub fn with_kind(kind: PolicyKind) -> Self {
        PolicyInstrument {
            kind,
            ..PolicyInstrument::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tax_rate_eur_per_t_co2 < 0.0 {
            return Err(Error::Config("policy.tax_rate must be >= 0".to_string()));
        }
        if self.subsidy_rate_eur_per_t < 0.0 {
            return Err(Error::Config("policy.subsidy_rate must be >= 0".to_string()));
        }
        if self.reference_subsidy_rate <= 0.0 {
            return Err(Error::Config(
                "policy.reference_subsidy_rate must be > 0".to_string(),
            ));
        }
        Ok(())
    }

    /// The adoption-probability shift this instrument exerts.
    pub fn adoption_delta(&self, table: &FertilizerTable) -> Result<f64> {
        match self.kind {
            PolicyKind::Baseline => Ok(0.0),
            PolicyKind::Subsidy => Ok(self.subsidy_delta * self.subsidy_rate_eur_per_t
                / self.reference_subsidy_rate),
            PolicyKind::CarbonTax => {
                if self.tax_incentive_active(table)? {
                    Ok(self.tax_delta)
                } else {
                    Ok(0.0)
                }
            }
        }
    }

    /// True when taxed CAN costs more per tonne of nitrogen than protected
    /// urea under the active prices, i.e. the tax actually pushes adoption.
    pub fn tax_incentive_active(&self, table: &FertilizerTable) -> Result<bool> {
        let can_embedded = require_embedded(&table.can)?;
        let can_per_t_n = (table.can.price_eur_per_t
            + can_embedded * self.tax_rate_eur_per_t_co2)
            / table.can.n_content;
        let mut pu_per_t_n = table.pu.price_eur_per_t / table.pu.n_content;
        if self.tax_covers_adopters {
            pu_per_t_n +=
                require_embedded(&table.pu)? * self.tax_rate_eur_per_t_co2 / table.pu.n_content;
        }
        Ok(can_per_t_n > pu_per_t_n)
    }
}

fn require_embedded(spec: &FertilizerSpec) -> Result<f64> {
    spec.embedded_intensity.ok_or_else(|| {
        Error::Config(format!(
            "fertilizers.{}.embedded_intensity is required for carbon-tax accounting",
            spec.kind.as_str()
        ))
    })
}

/// Tax owed on `q_tonnes` of product with embedded intensity from `spec`.
pub fn tax_liability(q_tonnes: f64, spec: &FertilizerSpec, rate: f64) -> Result<f64> {
    if q_tonnes < 0.0 {
        return Err(Error::InvalidParameter(
            "taxed quantity must be non-negative".to_string(),
        ));
    }
    Ok(q_tonnes * require_embedded(spec)? * rate)
}

/// Subsidy paid on `q_pu_tonnes` of protected urea.
pub fn subsidy_payment(q_pu_tonnes: f64, rate: f64) -> f64 {
    rate * q_pu_tonnes
}

/// One year of policy cash flows across the population.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CashFlow {
    pub tax_eur: f64,
    pub subsidy_eur: f64,
}

impl CashFlow {
    pub fn combined(&self) -> f64 {
        self.tax_eur + self.subsidy_eur
    }
}

/// Sums the year's tax on non-adopters' CAN and subsidies on adopters'
/// protected urea under the active instrument. Quantities come from each
/// farm's nitrogen application through the product nutrient contents, since
/// adoption switches the entire nitrogen supply between products.
pub fn policy_cashflow(
    pop: &Population,
    adopted: &[bool],
    instrument: &PolicyInstrument,
    table: &FertilizerTable,
) -> Result<CashFlow> {
    let mut flow = CashFlow::default();
    match instrument.kind {
        PolicyKind::Baseline => {}
        PolicyKind::CarbonTax => {
            for (i, farm) in pop.farms.iter().enumerate() {
                let is_adopter = adopted.get(i).copied().unwrap_or(false);
                if !is_adopter {
                    let q = fertilizer_quantity_t(farm.nitrogen_kg, &table.can)?;
                    flow.tax_eur += tax_liability(q, &table.can, instrument.tax_rate_eur_per_t_co2)?;
                } else if instrument.tax_covers_adopters {
                    let q = fertilizer_quantity_t(farm.nitrogen_kg, &table.pu)?;
                    flow.tax_eur += tax_liability(q, &table.pu, instrument.tax_rate_eur_per_t_co2)?;
                }
            }
        }
        PolicyKind::Subsidy => {
            for (i, farm) in pop.farms.iter().enumerate() {
                if adopted.get(i).copied().unwrap_or(false) {
                    let q = fertilizer_quantity_t(farm.nitrogen_kg, &table.pu)?;
                    flow.subsidy_eur += subsidy_payment(q, instrument.subsidy_rate_eur_per_t);
                }
            }
        }
    }
    Ok(flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::Farm;
    use approx::assert_relative_eq;

    fn table_with_embedded() -> FertilizerTable {
        let mut table = FertilizerTable::default();
        table.can.embedded_intensity = Some(1.10);
        table.pu.embedded_intensity = Some(0.75);
        table.can.price_eur_per_t = 420.0;
        table.pu.price_eur_per_t = 520.0;
        table
    }

    #[test]
    fn tax_liability_examples() {
        let mut spec = FertilizerSpec::new(FertilizerKind::Can, 0.27, 0.0149);
        spec.embedded_intensity = Some(1.0);
        assert_relative_eq!(tax_liability(1.0, &spec, 71.0).unwrap(), 71.0);
        assert_relative_eq!(tax_liability(0.0, &spec, 71.0).unwrap(), 0.0);
        spec.embedded_intensity = Some(0.5);
        assert_relative_eq!(tax_liability(2.0, &spec, 71.0).unwrap(), 71.0);

        spec.embedded_intensity = None;
        assert!(tax_liability(1.0, &spec, 71.0).is_err());
    }

    use crate::emissions::FertilizerKind;

    #[test]
    fn subsidy_payment_examples() {
        assert_relative_eq!(subsidy_payment(1.0, 200.0), 200.0);
        assert_relative_eq!(subsidy_payment(0.0, 200.0), 0.0);
        assert_relative_eq!(subsidy_payment(2.5, 150.0), 375.0);
    }

    #[test]
    fn baseline_cashflow_is_zero() {
        let farms: Vec<Farm> = (0..5).map(|i| Farm::test_farm(i, 20.0, 270.0)).collect();
        let pop = Population::from_farms(farms).unwrap();
        let table = table_with_embedded();
        let flow = policy_cashflow(
            &pop,
            &[true, false, true, false, true],
            &PolicyInstrument::with_kind(PolicyKind::Baseline),
            &table,
        )
        .unwrap();
        assert_eq!((flow.tax_eur, flow.subsidy_eur, flow.combined()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn subsidy_cashflow_covers_all_adopters() {
        // 460 kg N through protected urea is exactly 1 t of product per farm.
        let farms: Vec<Farm> = (0..295).map(|i| Farm::test_farm(i, 20.0, 460.0)).collect();
        let pop = Population::from_farms(farms).unwrap();
        let adopted = vec![true; 295];
        let flow = policy_cashflow(
            &pop,
            &adopted,
            &PolicyInstrument::with_kind(PolicyKind::Subsidy),
            &table_with_embedded(),
        )
        .unwrap();
        assert_relative_eq!(flow.subsidy_eur, 59_000.0, epsilon = 1e-6);
        assert_eq!(flow.tax_eur, 0.0);
    }

    #[test]
    fn tax_cashflow_covers_nonadopting_can_users() {
        // 270 kg N through CAN is 1 t of product; E_f = 1 makes the tax 71/farm.
        let farms: Vec<Farm> = (0..295).map(|i| Farm::test_farm(i, 20.0, 270.0)).collect();
        let pop = Population::from_farms(farms).unwrap();
        let mut table = table_with_embedded();
        table.can.embedded_intensity = Some(1.0);
        let adopted = vec![false; 295];
        let flow = policy_cashflow(
            &pop,
            &adopted,
            &PolicyInstrument::with_kind(PolicyKind::CarbonTax),
            &table,
        )
        .unwrap();
        assert_relative_eq!(flow.tax_eur, 20_945.0, epsilon = 1e-6);
        assert_eq!(flow.subsidy_eur, 0.0);

        // Adopters are exempt unless the coverage flag is set.
        let all = vec![true; 295];
        let exempt = policy_cashflow(
            &pop,
            &all,
            &PolicyInstrument::with_kind(PolicyKind::CarbonTax),
            &table,
        )
        .unwrap();
        assert_eq!(exempt.tax_eur, 0.0);

        let mut covering = PolicyInstrument::with_kind(PolicyKind::CarbonTax);
        covering.tax_covers_adopters = true;
        let covered = policy_cashflow(&pop, &all, &covering, &table).unwrap();
        assert!(covered.tax_eur > 0.0);
    }

    #[test]
    fn adoption_delta_by_instrument() {
        let table = table_with_embedded();
        let baseline = PolicyInstrument::with_kind(PolicyKind::Baseline);
        assert_eq!(baseline.adoption_delta(&table).unwrap(), 0.0);

        let subsidy = PolicyInstrument::with_kind(PolicyKind::Subsidy);
        assert_relative_eq!(subsidy.adoption_delta(&table).unwrap(), 0.15);
        let mut scaled = subsidy.clone();
        scaled.subsidy_rate_eur_per_t = 150.0;
        assert_relative_eq!(scaled.adoption_delta(&table).unwrap(), 0.1125);

        // Default prices: taxed CAN costs more per tonne N, so the shift is on.
        let tax = PolicyInstrument::with_kind(PolicyKind::CarbonTax);
        assert_relative_eq!(tax.adoption_delta(&table).unwrap(), 0.08);

        // Make protected urea prohibitively expensive; the shift switches off.
        let mut pricey = table.clone();
        pricey.pu.price_eur_per_t = 5_000.0;
        assert_eq!(tax.adoption_delta(&pricey).unwrap(), 0.0);
    }
}
