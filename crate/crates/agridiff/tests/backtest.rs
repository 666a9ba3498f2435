//! Back-testing against the bundled observed-adoption anchors: the grid
//! search lands on the strong-peer-influence weight and the network
//! ablation shows the peer term carries most of the predictive power.

use agridiff::calibrate::{ablate_network, calibrate_omega, AnchorSeries};
use agridiff::config::AppConfig;
use agridiff::policy::PolicyKind;

#[test]
fn bundled_anchor_backtest_selects_the_strong_peer_weight() {
    let app = AppConfig::default();
    let pop = app.population(None).unwrap();
    let net = app.build_network(pop.len()).unwrap();
    let config = app.scenario_config(PolicyKind::Baseline).unwrap();
    let anchors = AnchorSeries::bundled();

    let outcome = calibrate_omega(
        &config,
        &pop,
        &net,
        &anchors,
        &app.calibrate.omega_grid,
        app.montecarlo.calibration_iterations,
        &app.calibrate,
    )
    .unwrap();

    assert_eq!(outcome.selected_omega, 0.85, "rmse: {:?}", outcome.test_rmse);
    assert!(
        outcome.metrics.rmse < 0.08,
        "test RMSE {:.4} against the observed anchors",
        outcome.metrics.rmse
    );
    // Errors shrink monotonically toward the selected weight.
    assert!(outcome.test_rmse[0] > outcome.test_rmse[1]);
    assert!(outcome.test_rmse[1] > outcome.test_rmse[2]);
}

#[test]
fn network_ablation_degrades_the_backtest() {
    let app = AppConfig::default();
    let pop = app.population(None).unwrap();
    let net = app.build_network(pop.len()).unwrap();
    let config = app.scenario_config(PolicyKind::Baseline).unwrap();
    let anchors = AnchorSeries::bundled();

    let ablation = ablate_network(
        &config,
        &pop,
        &net,
        &anchors,
        app.montecarlo.calibration_iterations,
        &app.calibrate,
    )
    .unwrap();
    assert!(ablation.delta_rmse > 0.0);
    assert!(
        ablation.rmse_without > 2.0 * ablation.rmse_with,
        "with {:.4} vs without {:.4}",
        ablation.rmse_with,
        ablation.rmse_without
    );
}
