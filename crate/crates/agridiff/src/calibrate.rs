//! Back-testing against observed adoption anchors: grid calibration of the
//! social-influence weight, sensitivity sweeps, and the network-ablation
//! counterfactual.
//!
//! Calendar anchors map onto simulation years through a configurable start
//! year (simulation year 1 = start_year), with a train/test split for
//! out-of-sample evaluation.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::ScenarioConfig;
use crate::error::{Error, Result};
use crate::montecarlo::run_ensemble;
use crate::network::SocialNetwork;
use crate::policy::PolicyKind;
use crate::population::Population;
use crate::seed::derive_stream_seed;
use crate::stats::{fit_logistic, rmse, threshold_year, FitMetrics, LogisticFit};

/// One observed (or interpolated) adoption level for a calendar year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorRow {
    pub year: i32,
    pub adoption: f64,
    pub interpolated: bool,
}

/// Observed adoption series with a marker separating training years from the
/// held-out test years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSeries {
    pub rows: Vec<AnchorRow>,
    pub train_through: i32,
}

impl AnchorSeries {
    pub fn new(rows: Vec<AnchorRow>, train_through: i32) -> Result<Self> {
        let series = AnchorSeries {
            rows,
            train_through,
        };
        series.validate()?;
        Ok(series)
    }

    /// The shipped anchor set: three observed points with linearly
    /// interpolated intermediate years, training through 2022.
    pub fn bundled() -> Self {
        AnchorSeries {
            rows: vec![
                AnchorRow { year: 2019, adoption: 0.03, interpolated: false },
                AnchorRow { year: 2020, adoption: 0.07, interpolated: true },
                AnchorRow { year: 2021, adoption: 0.11, interpolated: false },
                AnchorRow { year: 2022, adoption: 0.206667, interpolated: true },
                AnchorRow { year: 2023, adoption: 0.303333, interpolated: true },
                AnchorRow { year: 2024, adoption: 0.40, interpolated: false },
            ],
            train_through: 2022,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::InvalidParameter(
                "anchor series must not be empty".to_string(),
            ));
        }
        for pair in self.rows.windows(2) {
            if pair[1].year <= pair[0].year {
                return Err(Error::InvalidParameter(
                    "anchor years must be strictly increasing".to_string(),
                ));
            }
        }
        for row in &self.rows {
            if !(0.0..=1.0).contains(&row.adoption) {
                return Err(Error::InvalidParameter(format!(
                    "anchor adoption for {} must be in [0, 1], got {}",
                    row.year, row.adoption
                )));
            }
        }
        Ok(())
    }

    pub fn train_rows(&self) -> Vec<AnchorRow> {
        self.rows
            .iter()
            .copied()
            .filter(|r| r.year <= self.train_through)
            .collect()
    }

    pub fn test_rows(&self) -> Vec<AnchorRow> {
        self.rows
            .iter()
            .copied()
            .filter(|r| r.year > self.train_through)
            .collect()
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for (idx, record) in reader.deserialize::<AnchorRow>().enumerate() {
            rows.push(record.map_err(|e| Error::Parse {
                row: idx + 1,
                column: "<anchor>".to_string(),
                message: e.to_string(),
            })?);
        }
        // The split marker is not part of the file; callers set it. Default
        // to everything-but-the-last-two-years, matching the bundled series.
        let train_through = rows
            .len()
            .checked_sub(3)
            .and_then(|i| rows.get(i))
            .map_or(i32::MAX, |r| r.year);
        AnchorSeries::new(rows, train_through)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Back-testing protocol settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    /// Calendar year mapped to simulation year 1.
    pub start_year: i32,
    /// Last calendar year in the training window.
    pub train_through: i32,
    /// Restrict error evaluation to non-interpolated anchor rows.
    pub observed_only: bool,
    pub omega_grid: Vec<f64>,
    pub subsidy_rates: Vec<f64>,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            start_year: 2019,
            train_through: 2022,
            observed_only: false,
            omega_grid: vec![0.2, 0.5, 0.85],
            subsidy_rates: vec![150.0, 200.0, 250.0],
        }
    }
}

impl CalibrationSettings {
    fn sim_year(&self, calendar_year: i32) -> i32 {
        calendar_year - self.start_year + 1
    }

    /// Simulated ensemble-mean adoption at each anchor's calendar year.
    fn simulated_at(&self, mean_series: &[f64], rows: &[AnchorRow]) -> Result<Vec<f64>> {
        rows.iter()
            .map(|row| {
                let sim_year = self.sim_year(row.year);
                if sim_year < 1 || sim_year as usize > mean_series.len() {
                    return Err(Error::InvalidParameter(format!(
                        "anchor year {} maps to simulation year {sim_year}, outside 1..={}",
                        row.year,
                        mean_series.len()
                    )));
                }
                Ok(mean_series[sim_year as usize - 1])
            })
            .collect()
    }

    fn select_rows(&self, rows: Vec<AnchorRow>) -> Vec<AnchorRow> {
        if self.observed_only {
            rows.into_iter().filter(|r| !r.interpolated).collect()
        } else {
            rows
        }
    }
}

/// Outcome of the grid search over the social-influence weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub grid: Vec<f64>,
    pub test_rmse: Vec<f64>,
    pub selected_omega: f64,
    /// Goodness of fit of the winning candidate on the test rows.
    pub metrics: FitMetrics,
}

impl CalibrationOutcome {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs a back-testing ensemble per candidate weight (baseline policy,
/// historical mode) and selects the candidate minimizing RMSE on the test
/// years; ties break toward the smaller weight.
pub fn calibrate_omega(
    base: &ScenarioConfig,
    pop: &Population,
    net: &SocialNetwork,
    anchors: &AnchorSeries,
    grid: &[f64],
    iterations: usize,
    settings: &CalibrationSettings,
) -> Result<CalibrationOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(
            "calibration grid must not be empty".to_string(),
        ));
    }
    anchors.validate()?;
    if anchors.rows.len() < 3 {
        return Err(Error::InvalidParameter(
            "calibration needs anchors spanning at least 3 years".to_string(),
        ));
    }
    let test_rows = settings.select_rows(anchors.test_rows());
    if test_rows.is_empty() {
        return Err(Error::InvalidParameter(
            "no test rows after the train/test split".to_string(),
        ));
    }

    // Each candidate gets an independent seed family derived from its index.
    let candidate_errors: Result<Vec<(f64, Vec<f64>)>> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &omega)| {
            let mut config = base.clone();
            config.policy.kind = PolicyKind::Baseline;
            config.adoption.omega = omega;
            let family_seed = derive_stream_seed(base.base_seed, "calibrate", idx as u64);
            let ensemble = run_ensemble(&config, pop, net, iterations, family_seed)?;
            let mean_series = ensemble.mean_adoption_series();
            let simulated = settings.simulated_at(&mean_series, &test_rows)?;
            Ok((omega, simulated))
        })
        .collect();
    let candidate_errors = candidate_errors?;

    let observed: Vec<f64> = test_rows.iter().map(|r| r.adoption).collect();
    let mut test_rmse = Vec::with_capacity(grid.len());
    let mut winner: Option<(f64, f64, Vec<f64>)> = None;
    for (omega, simulated) in candidate_errors {
        let err = rmse(&observed, &simulated)?;
        test_rmse.push(err);
        let better = match &winner {
            None => true,
            Some((_, best, _)) => {
                err < *best || (err == *best && omega < winner.as_ref().unwrap().0)
            }
        };
        if better {
            winner = Some((omega, err, simulated));
        }
    }
    let (selected_omega, _, winning_sim) = winner.unwrap();
    let metrics = match crate::stats::fit_metrics(&observed, &winning_sim) {
        Ok(m) => m,
        // Two identical observed test points leave R² undefined; fall back
        // to the error measures alone.
        Err(_) => FitMetrics {
            rmse: rmse(&observed, &winning_sim)?,
            mae: observed
                .iter()
                .zip(&winning_sim)
                .map(|(y, s)| (s - y).abs())
                .sum::<f64>()
                / observed.len() as f64,
            r2: f64::NAN,
        },
    };

    Ok(CalibrationOutcome {
        grid: grid.to_vec(),
        test_rmse,
        selected_omega,
        metrics,
    })
}

/// Summary of one sensitivity level of the social-influence weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSensitivity {
    pub omega: f64,
    /// Logistic fit of the baseline ensemble-mean trajectory.
    pub baseline_fit: LogisticFit,
    /// Censored mean first-crossing year of 50% adoption per scenario
    /// (runs that never cross count as horizon + 1).
    pub t50_baseline: f64,
    pub t50_tax: f64,
    pub t50_subsidy: f64,
}

/// Runs baseline/tax/subsidy ensembles at each weight with common random
/// numbers and reports inflection timing plus the scenario ordering.
pub fn sensitivity_omega(
    base: &ScenarioConfig,
    pop: &Population,
    net: &SocialNetwork,
    omegas: &[f64],
    iterations: usize,
) -> Result<Vec<OmegaSensitivity>> {
    omegas
        .iter()
        .map(|&omega| {
            let mut config = base.clone();
            config.adoption.omega = omega;
            let mut t50 = [0.0f64; 3];
            let mut baseline_fit = None;
            for (slot, kind) in [
                PolicyKind::Baseline,
                PolicyKind::CarbonTax,
                PolicyKind::Subsidy,
            ]
            .iter()
            .enumerate()
            {
                let mut scenario = config.clone();
                scenario.policy.kind = *kind;
                let ensemble = run_ensemble(&scenario, pop, net, iterations, base.base_seed)?;
                t50[slot] = censored_mean_t50(&ensemble, 0.5);
                if *kind == PolicyKind::Baseline {
                    baseline_fit = Some(fit_logistic(&ensemble.mean_adoption_series())?);
                }
            }
            Ok(OmegaSensitivity {
                omega,
                baseline_fit: baseline_fit.unwrap(),
                t50_baseline: t50[0],
                t50_tax: t50[1],
                t50_subsidy: t50[2],
            })
        })
        .collect()
}

/// Mean first-crossing year of `threshold`, counting runs that never cross
/// as horizon + 1.
pub fn censored_mean_t50(ensemble: &crate::montecarlo::Ensemble, threshold: f64) -> f64 {
    let horizon = ensemble.runs[0].records.len(); // T + 1 records
    let values: Vec<f64> = ensemble
        .runs
        .iter()
        .map(|run| {
            threshold_year(&run.adoption_series(), threshold)
                .map_or(horizon as f64, |y| y as f64)
        })
        .collect();
    crate::stats::mean(&values)
}

/// Summary of one subsidy-rate level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsidySensitivity {
    pub rate_eur_per_t: f64,
    pub adoption_delta: f64,
    pub mean_adoption: Vec<f64>,
}

/// Sweeps the subsidy rate with common random numbers; the induced adoption
/// shift scales linearly through the reference rate.
pub fn sensitivity_subsidy(
    base: &ScenarioConfig,
    pop: &Population,
    net: &SocialNetwork,
    rates: &[f64],
    iterations: usize,
) -> Result<Vec<SubsidySensitivity>> {
    rates
        .iter()
        .map(|&rate| {
            if rate < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "subsidy rate must be >= 0, got {rate}"
                )));
            }
            let mut config = base.clone();
            config.policy.kind = PolicyKind::Subsidy;
            config.policy.subsidy_rate_eur_per_t = rate;
            let delta = config.policy.adoption_delta(&config.fertilizers)?;
            let ensemble = run_ensemble(&config, pop, net, iterations, base.base_seed)?;
            Ok(SubsidySensitivity {
                rate_eur_per_t: rate,
                adoption_delta: delta,
                mean_adoption: ensemble.mean_adoption_series(),
            })
        })
        .collect()
}

/// Predictive value of the social network: RMSE against the anchors with the
/// peer term active versus removed (all else identical).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkAblation {
    pub rmse_with: f64,
    pub rmse_without: f64,
    pub delta_rmse: f64,
}

pub fn ablate_network(
    base: &ScenarioConfig,
    pop: &Population,
    net: &SocialNetwork,
    anchors: &AnchorSeries,
    iterations: usize,
    settings: &CalibrationSettings,
) -> Result<NetworkAblation> {
    anchors.validate()?;
    let rows = settings.select_rows(anchors.rows.clone());
    let observed: Vec<f64> = rows.iter().map(|r| r.adoption).collect();

    // The same seed family drives both runs, so removing the peer term is
    // the only difference between them.
    let seed = derive_stream_seed(base.base_seed, "ablation", 0);
    let evaluate = |omega: f64| -> Result<f64> {
        let mut config = base.clone();
        config.policy.kind = PolicyKind::Baseline;
        config.adoption.omega = omega;
        let ensemble = run_ensemble(&config, pop, net, iterations, seed)?;
        let simulated = settings.simulated_at(&ensemble.mean_adoption_series(), &rows)?;
        rmse(&observed, &simulated)
    };

    let rmse_with = evaluate(base.adoption.omega)?;
    let rmse_without = evaluate(0.0)?;
    Ok(NetworkAblation {
        rmse_with,
        rmse_without,
        delta_rmse: rmse_without - rmse_with,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Population, SocialNetwork, ScenarioConfig) {
        let pop = Population::synthesize(120, 1).unwrap();
        let net = SocialNetwork::watts_strogatz(120, 4, 0.1, 7).unwrap();
        (pop, net, ScenarioConfig::default())
    }

    /// Anchors produced by the model itself at a given weight.
    fn self_anchors(
        config: &ScenarioConfig,
        pop: &Population,
        net: &SocialNetwork,
        omega: f64,
        settings: &CalibrationSettings,
    ) -> AnchorSeries {
        let mut gen_config = config.clone();
        gen_config.policy.kind = PolicyKind::Baseline;
        gen_config.adoption.omega = omega;
        let seed = derive_stream_seed(9_999, "anchor-gen", (omega * 1000.0) as u64);
        let ensemble = run_ensemble(&gen_config, pop, net, 50, seed).unwrap();
        let mean = ensemble.mean_adoption_series();
        let rows: Vec<AnchorRow> = (0..6)
            .map(|i| AnchorRow {
                year: settings.start_year + i as i32,
                adoption: mean[i],
                interpolated: false,
            })
            .collect();
        AnchorSeries::new(rows, settings.train_through).unwrap()
    }

    #[test]
    fn anchor_series_validation_and_split() {
        let anchors = AnchorSeries::bundled();
        anchors.validate().unwrap();
        assert_eq!(anchors.train_rows().len(), 4);
        assert_eq!(anchors.test_rows().len(), 2);

        let bad = AnchorSeries {
            rows: vec![
                AnchorRow { year: 2020, adoption: 0.1, interpolated: false },
                AnchorRow { year: 2019, adoption: 0.2, interpolated: false },
            ],
            train_through: 2019,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn singleton_grid_returns_its_only_candidate() {
        let (pop, net, config) = fixture();
        let settings = CalibrationSettings::default();
        let anchors = AnchorSeries::bundled();
        let outcome =
            calibrate_omega(&config, &pop, &net, &anchors, &[0.85], 10, &settings).unwrap();
        assert_eq!(outcome.selected_omega, 0.85);
        assert_eq!(outcome.test_rmse.len(), 1);
        assert!(calibrate_omega(&config, &pop, &net, &anchors, &[], 10, &settings).is_err());
    }

    #[test]
    fn recovers_the_generating_weight() {
        let (pop, net, config) = fixture();
        let settings = CalibrationSettings::default();
        let anchors = self_anchors(&config, &pop, &net, 0.85, &settings);
        let outcome = calibrate_omega(
            &config,
            &pop,
            &net,
            &anchors,
            &[0.2, 0.5, 0.85],
            50,
            &settings,
        )
        .unwrap();
        assert_eq!(outcome.selected_omega, 0.85, "rmse: {:?}", outcome.test_rmse);
    }

    #[test]
    fn ablation_removes_predictive_power_on_self_anchors() {
        let (pop, net, config) = fixture();
        let settings = CalibrationSettings::default();
        let anchors = self_anchors(&config, &pop, &net, 0.85, &settings);
        let ablation =
            ablate_network(&config, &pop, &net, &anchors, 50, &settings).unwrap();
        assert!(ablation.delta_rmse > 0.0);
        assert!(
            ablation.rmse_without >= 3.0 * ablation.rmse_with,
            "with {} vs without {}",
            ablation.rmse_with,
            ablation.rmse_without
        );

        // With the weight already at zero the ablation changes nothing.
        let mut zero = config.clone();
        zero.adoption.omega = 0.0;
        let unchanged = ablate_network(&zero, &pop, &net, &anchors, 20, &settings).unwrap();
        assert_eq!(unchanged.delta_rmse, 0.0);
    }

    #[test]
    fn modest_subsidy_beats_the_baseline_every_year() {
        let (pop, net, config) = fixture();
        let sweep = sensitivity_subsidy(&config, &pop, &net, &[150.0], 25).unwrap();
        let mut baseline = config.clone();
        baseline.policy.kind = PolicyKind::Baseline;
        let base = run_ensemble(&baseline, &pop, &net, 25, config.base_seed).unwrap();
        for (s, b) in sweep[0].mean_adoption.iter().zip(base.mean_adoption_series()) {
            assert!(s > &b, "subsidy {s} vs baseline {b}");
        }
    }

    #[test]
    fn subsidy_rate_zero_matches_baseline() {
        let (pop, net, config) = fixture();
        let sweep = sensitivity_subsidy(&config, &pop, &net, &[0.0], 10).unwrap();
        let mut baseline = config.clone();
        baseline.policy.kind = PolicyKind::Baseline;
        let base_ens = run_ensemble(&baseline, &pop, &net, 10, config.base_seed).unwrap();
        let base_mean = base_ens.mean_adoption_series();
        for (a, b) in sweep[0].mean_adoption.iter().zip(&base_mean) {
            assert_eq!(a, b);
        }
        assert_eq!(sweep[0].adoption_delta, 0.0);
    }
}
