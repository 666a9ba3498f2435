//! Back-test the social-influence weight against the bundled adoption
//! anchors and quantify the network's predictive value via ablation.
//!
//! ```bash
//! cargo run --release --example calibrate_omega
//! ```

use agridiff::calibrate::{ablate_network, calibrate_omega, AnchorSeries};
use agridiff::config::AppConfig;
use agridiff::policy::PolicyKind;

fn main() -> agridiff::Result<()> {
    let app = AppConfig::default();
    let pop = app.population(None)?;
    let net = app.build_network(pop.len())?;
    let config = app.scenario_config(PolicyKind::Baseline)?;
    let anchors = AnchorSeries::bundled();

    println!("anchors (train through {}):", anchors.train_through);
    for row in &anchors.rows {
        println!(
            "  {}: {:.3}{}",
            row.year,
            row.adoption,
            if row.interpolated { "  (interpolated)" } else { "" }
        );
    }

    let outcome = calibrate_omega(
        &config,
        &pop,
        &net,
        &anchors,
        &app.calibrate.omega_grid,
        app.montecarlo.calibration_iterations,
        &app.calibrate,
    )?;
    println!("\ncandidate -> test RMSE");
    for (omega, err) in outcome.grid.iter().zip(&outcome.test_rmse) {
        println!("  {omega:4.2} -> {err:.4}");
    }
    println!("selected omega: {}", outcome.selected_omega);

    let ablation = ablate_network(
        &config,
        &pop,
        &net,
        &anchors,
        app.montecarlo.calibration_iterations,
        &app.calibrate,
    )?;
    println!(
        "\nnetwork value: RMSE with {:.4}, without {:.4}, delta {:.4}",
        ablation.rmse_with, ablation.rmse_without, ablation.delta_rmse
    );
    Ok(())
}
