//! Fertilizer-cost accounting for the subsidy scenario: substitution of the
//! adopted share, marginal abatement cost, and private vs social cost.
//!
//! ```bash
//! cargo run --release --example abatement_economics
//! ```

use agridiff::config::AppConfig;
use agridiff::economics::{abatement_costs, baseline_cost_eur, policy_cost_eur};
use agridiff::montecarlo::{abatement_distribution, run_ensemble};
use agridiff::policy::PolicyKind;
use agridiff::stats::mean;

fn main() -> agridiff::Result<()> {
    let app = AppConfig::default();
    let pop = app.population(None)?;
    let net = app.build_network(pop.len())?;
    let iterations = 100;
    let seed = app.montecarlo.base_seed;

    let base = run_ensemble(&app.scenario_config(PolicyKind::Baseline)?, &pop, &net, iterations, seed)?;
    let subsidy = run_ensemble(&app.scenario_config(PolicyKind::Subsidy)?, &pop, &net, iterations, seed)?;

    let alpha = subsidy.final_adoption_mean();
    let table = app.fertilizer_table();
    let nc_ratio = table.can.n_content / table.pu.n_content;
    let base_cost = baseline_cost_eur(&pop, &app.prices);
    let policy_cost = policy_cost_eur(&pop, alpha, app.study.substitution_mode, nc_ratio, &app.prices)?;
    let abatement = mean(&abatement_distribution(&base, &subsidy)?);
    let gov = subsidy.mean_subsidy_outlay_eur();

    let report = abatement_costs(policy_cost - base_cost, abatement, gov)?;
    println!("final adoption share          {alpha:>12.4}");
    println!("baseline fertilizer cost      {base_cost:>12.0} EUR");
    println!("policy fertilizer cost        {policy_cost:>12.0} EUR");
    println!("net private cost change       {:>12.0} EUR", report.delta_cost_eur);
    println!("government expenditure        {gov:>12.0} EUR");
    println!("cumulative abatement          {abatement:>12.0} t CO2-eq");
    println!("marginal abatement cost       {:>12.2} EUR/t", report.mac_eur_per_t);
    println!("private abatement cost        {:>12.2} EUR/t", report.private_cost_eur_per_t);
    println!("social abatement cost         {:>12.2} EUR/t", report.social_cost_eur_per_t);
    Ok(())
}
