//! Milk revenue valuation from component composition, the mass-to-volume
//! factor, processing costs, VAT, and quality bonuses.
//!
//! ```bash
//! cargo run --example milk_revenue
//! ```

use agridiff::config::AppConfig;
use agridiff::economics::milk_revenue_eur;
use agridiff::population::Population;

fn main() -> agridiff::Result<()> {
    let app = AppConfig::default();
    let pop = Population::synthesize(5, 1)?;

    println!("farm  protein%  fat%   yield (L)    revenue (EUR)");
    for farm in &pop.farms {
        let litres = farm.milk_production_kg / app.milk.kg_per_litre;
        let revenue = milk_revenue_eur(farm, &app.milk, litres);
        println!(
            "{:>4}  {:7.2}  {:5.2}  {:10.0}  {:14.0}",
            farm.id, farm.protein_pct, farm.fat_pct, litres, revenue
        );
    }
    Ok(())
}
