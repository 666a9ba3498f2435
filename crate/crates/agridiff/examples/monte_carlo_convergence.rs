//! Convergence diagnostics of the subsidy-scenario abatement estimate: the
//! running mean over iterations and both dispersion measures.
//!
//! ```bash
//! cargo run --release --example monte_carlo_convergence
//! ```

use agridiff::config::AppConfig;
use agridiff::montecarlo::{abatement_distribution, run_ensemble};
use agridiff::policy::PolicyKind;
use agridiff::stats::convergence;

fn main() -> agridiff::Result<()> {
    let app = AppConfig::default();
    let pop = app.population(None)?;
    let net = app.build_network(pop.len())?;
    let iterations = app.montecarlo.iterations;
    let seed = app.montecarlo.base_seed;

    let base = run_ensemble(&app.scenario_config(PolicyKind::Baseline)?, &pop, &net, iterations, seed)?;
    let subsidy = run_ensemble(&app.scenario_config(PolicyKind::Subsidy)?, &pop, &net, iterations, seed)?;
    let totals = abatement_distribution(&base, &subsidy)?;
    let report = convergence(&totals)?;

    println!("iterations                  {:>10}", totals.len());
    println!("final mean abatement        {:>10.0} t CO2-eq", report.final_mean);
    println!("run-to-run CV               {:>10.2}%", report.cv * 100.0);
    println!("running-mean stability CV   {:>10.3}%", report.running_mean_cv * 100.0);
    println!("\nrunning mean (every 25th iteration):");
    for (i, m) in report.running_mean.iter().enumerate() {
        if (i + 1) % 25 == 0 || i == 0 {
            println!("  after {:>3} runs: {:>10.0} t", i + 1, m);
        }
    }
    Ok(())
}
