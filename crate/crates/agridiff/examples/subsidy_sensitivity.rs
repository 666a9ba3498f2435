//! Sweep the subsidy rate and compare adoption speed against the carbon tax
//! and the no-policy baseline.
//!
//! ```bash
//! cargo run --release --example subsidy_sensitivity
//! ```

use agridiff::calibrate::sensitivity_subsidy;
use agridiff::config::AppConfig;
use agridiff::montecarlo::run_ensemble;
use agridiff::policy::PolicyKind;

fn main() -> agridiff::Result<()> {
    let app = AppConfig::default();
    let pop = app.population(None)?;
    let net = app.build_network(pop.len())?;
    let base = app.scenario_config(PolicyKind::Baseline)?;
    let iterations = 50;

    let sweep = sensitivity_subsidy(&base, &pop, &net, &app.calibrate.subsidy_rates, iterations)?;

    let tax = run_ensemble(
        &app.scenario_config(PolicyKind::CarbonTax)?,
        &pop,
        &net,
        iterations,
        base.base_seed,
    )?;
    let baseline = run_ensemble(&base, &pop, &net, iterations, base.base_seed)?;

    println!("series          delta    year-5 adoption");
    for level in &sweep {
        println!(
            "subsidy {:3.0}    {:5.3}    {:8.4}",
            level.rate_eur_per_t, level.adoption_delta, level.mean_adoption[4]
        );
    }
    println!(
        "carbon tax     0.080    {:8.4}",
        tax.mean_adoption_series()[4]
    );
    println!(
        "baseline       0.000    {:8.4}",
        baseline.mean_adoption_series()[4]
    );
    Ok(())
}
