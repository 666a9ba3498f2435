//! Monte Carlo ensembles: N independent seeded replicas of one scenario,
//! order-invariant aggregation, and paired abatement distributions.
//!
//! Runs execute in a rayon worker pool but are collected by run index, and
//! every aggregate is a sequential fold over that order, so summaries are
//! bit-identical whatever the worker count.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_scenario, ScenarioConfig, Trajectory};
use crate::economics::total_abatement_t;
use crate::error::{Error, Result};
use crate::network::SocialNetwork;
use crate::population::Population;
use crate::seed::derive_run_seed;
use crate::stats::{mean, sample_std};

/// All runs of one scenario under a common base seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub scenario: String,
    pub base_seed: u64,
    pub runs: Vec<Trajectory>,
}

impl Ensemble {
    pub fn n_iterations(&self) -> usize {
        self.runs.len()
    }

    pub fn horizon(&self) -> usize {
        self.runs.first().map_or(0, |r| r.records.len())
    }

    /// Ensemble-mean adoption for years 1..=T.
    pub fn mean_adoption_series(&self) -> Vec<f64> {
        let series: Vec<Vec<f64>> = self.runs.iter().map(Trajectory::adoption_series).collect();
        mean_by_year(&series)
    }

    /// Ensemble-mean emissions (Gg) for years 1..=T.
    pub fn mean_emissions_series(&self) -> Vec<f64> {
        let series: Vec<Vec<f64>> = self.runs.iter().map(Trajectory::emissions_series).collect();
        mean_by_year(&series)
    }

    /// Mean adoption fraction in the final simulated year.
    pub fn final_adoption_mean(&self) -> f64 {
        let finals: Vec<f64> = self.runs.iter().map(Trajectory::final_adoption).collect();
        mean(&finals)
    }

    /// Mean cumulative subsidy outlay per run.
    pub fn mean_subsidy_outlay_eur(&self) -> f64 {
        let totals: Vec<f64> = self.runs.iter().map(Trajectory::total_subsidy_eur).collect();
        mean(&totals)
    }
}

fn mean_by_year(series: &[Vec<f64>]) -> Vec<f64> {
    if series.is_empty() {
        return Vec::new();
    }
    let years = series[0].len();
    (0..years)
        .map(|t| series.iter().map(|s| s[t]).sum::<f64>() / series.len() as f64)
        .collect()
}

/// Runs `n` independent replicas; run i draws its stream from
/// `(base_seed, i)`, so the result does not depend on scheduling.
pub fn run_ensemble(
    config: &ScenarioConfig,
    pop: &Population,
    net: &SocialNetwork,
    n: usize,
    base_seed: u64,
) -> Result<Ensemble> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "ensemble size must be at least 1".to_string(),
        ));
    }
    let runs: Result<Vec<Trajectory>> = (0..n as u64)
        .into_par_iter()
        .map(|i| run_scenario(config, pop, net, derive_run_seed(base_seed, i)))
        .collect();
    Ok(Ensemble {
        scenario: config.policy.kind.as_str().to_string(),
        base_seed,
        runs: runs?,
    })
}

/// Per-year ensemble means and standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub scenario: String,
    pub years: Vec<u32>,
    pub adoption_mean: Vec<f64>,
    pub adoption_std: Vec<f64>,
    pub emissions_gg_mean: Vec<f64>,
    pub emissions_gg_std: Vec<f64>,
    pub tax_eur_mean: Vec<f64>,
    pub subsidy_eur_mean: Vec<f64>,
}

impl EnsembleSummary {
    pub fn from_ensemble(ensemble: &Ensemble) -> Self {
        let years: Vec<u32> = ensemble
            .runs
            .first()
            .map(|r| r.records.iter().map(|rec| rec.year).collect())
            .unwrap_or_default();
        let collect =
            |f: &dyn Fn(&crate::dynamics::YearRecord) -> f64| -> Vec<Vec<f64>> {
                ensemble
                    .runs
                    .iter()
                    .map(|run| run.records.iter().map(f).collect())
                    .collect()
            };
        let adoption = collect(&|r| r.adoption_fraction);
        let emissions = collect(&|r| r.emissions_gg);
        let tax = collect(&|r| r.tax_eur);
        let subsidy = collect(&|r| r.subsidy_eur);

        let per_year = |series: &[Vec<f64>], agg: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
            (0..years.len())
                .map(|t| {
                    let column: Vec<f64> = series.iter().map(|s| s[t]).collect();
                    agg(&column)
                })
                .collect()
        };

        EnsembleSummary {
            scenario: ensemble.scenario.clone(),
            adoption_mean: per_year(&adoption, &mean),
            adoption_std: per_year(&adoption, &sample_std),
            emissions_gg_mean: per_year(&emissions, &mean),
            emissions_gg_std: per_year(&emissions, &sample_std),
            tax_eur_mean: per_year(&tax, &mean),
            subsidy_eur_mean: per_year(&subsidy, &mean),
            years,
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "year,adoption_mean,adoption_std,emissions_gg_mean,emissions_gg_std,tax_eur_mean,subsidy_eur_mean\n",
        );
        for (i, year) in self.years.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                year,
                self.adoption_mean[i],
                self.adoption_std[i],
                self.emissions_gg_mean[i],
                self.emissions_gg_std[i],
                self.tax_eur_mean[i],
                self.subsidy_eur_mean[i]
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Per-run cumulative abatement (tonnes CO₂-eq) of a policy ensemble against
/// the baseline ensemble, paired by run index.
pub fn abatement_distribution(base: &Ensemble, policy: &Ensemble) -> Result<Vec<f64>> {
    if base.n_iterations() != policy.n_iterations() {
        return Err(Error::LengthMismatch(format!(
            "ensembles have {} and {} runs",
            base.n_iterations(),
            policy.n_iterations()
        )));
    }
    base.runs
        .iter()
        .zip(&policy.runs)
        .map(|(b, p)| total_abatement_t(&b.emissions_series(), &p.emissions_series()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::YearRecord;
    use crate::policy::PolicyKind;
    use approx::assert_relative_eq;

    fn fixture() -> (Population, SocialNetwork) {
        let pop = Population::synthesize(100, 1).unwrap();
        let net = SocialNetwork::watts_strogatz(100, 4, 0.1, 7).unwrap();
        (pop, net)
    }

    fn toy_trajectory(emissions: &[f64]) -> Trajectory {
        let records = std::iter::once(0.0)
            .chain(emissions.iter().copied())
            .enumerate()
            .map(|(year, e)| YearRecord {
                year: year as u32,
                adoption_fraction: 0.0,
                emissions_gg: e,
                tax_eur: 0.0,
                subsidy_eur: 0.0,
            })
            .collect();
        Trajectory {
            scenario: "toy".to_string(),
            run_seed: 0,
            records,
        }
    }

    #[test]
    fn single_run_ensemble_equals_run_scenario() {
        let (pop, net) = fixture();
        let config = ScenarioConfig::with_policy(PolicyKind::Subsidy);
        let ensemble = run_ensemble(&config, &pop, &net, 1, 99).unwrap();
        let direct = run_scenario(&config, &pop, &net, derive_run_seed(99, 0)).unwrap();
        assert_eq!(ensemble.runs[0], direct);
        assert!(run_ensemble(&config, &pop, &net, 0, 99).is_err());
    }

    #[test]
    fn repeated_ensembles_are_identical() {
        let (pop, net) = fixture();
        let config = ScenarioConfig::default();
        let a = run_ensemble(&config, &pop, &net, 8, 5).unwrap();
        let b = run_ensemble(&config, &pop, &net, 8, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            EnsembleSummary::from_ensemble(&a).to_csv_string(),
            EnsembleSummary::from_ensemble(&b).to_csv_string()
        );
    }

    #[test]
    fn summary_mean_lies_within_run_envelope() {
        let (pop, net) = fixture();
        let config = ScenarioConfig::with_policy(PolicyKind::CarbonTax);
        let ensemble = run_ensemble(&config, &pop, &net, 12, 3).unwrap();
        let summary = EnsembleSummary::from_ensemble(&ensemble);
        for (t, &m) in summary.adoption_mean.iter().enumerate() {
            let column: Vec<f64> = ensemble
                .runs
                .iter()
                .map(|r| r.records[t].adoption_fraction)
                .collect();
            let lo = column.iter().cloned().fold(f64::MAX, f64::min);
            let hi = column.iter().cloned().fold(f64::MIN, f64::max);
            assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        }
        // Mean trajectory of absorbing runs is non-decreasing.
        assert!(summary
            .adoption_mean
            .windows(2)
            .all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn paired_abatement_is_zero_against_itself_and_matches_hand_sums() {
        let (pop, net) = fixture();
        let config = ScenarioConfig::default();
        let ensemble = run_ensemble(&config, &pop, &net, 4, 21).unwrap();
        let zeros = abatement_distribution(&ensemble, &ensemble).unwrap();
        assert!(zeros.iter().all(|&v| v == 0.0));

        let base = Ensemble {
            scenario: "baseline".to_string(),
            base_seed: 0,
            runs: vec![toy_trajectory(&[2.0, 2.0]), toy_trajectory(&[3.0, 1.0])],
        };
        let policy = Ensemble {
            scenario: "subsidy".to_string(),
            base_seed: 0,
            runs: vec![toy_trajectory(&[1.0, 1.0]), toy_trajectory(&[2.5, 0.5])],
        };
        let dist = abatement_distribution(&base, &policy).unwrap();
        assert_relative_eq!(dist[0], 2000.0);
        assert_relative_eq!(dist[1], 1000.0);

        let short = Ensemble {
            scenario: "baseline".to_string(),
            base_seed: 0,
            runs: vec![toy_trajectory(&[2.0, 2.0])],
        };
        assert!(abatement_distribution(&short, &policy).is_err());
    }

    #[test]
    fn paired_runs_give_nonnegative_abatement() {
        let (pop, net) = fixture();
        let base = ScenarioConfig::with_policy(PolicyKind::Baseline);
        let subsidy = ScenarioConfig::with_policy(PolicyKind::Subsidy);
        let base_ens = run_ensemble(&base, &pop, &net, 20, 42).unwrap();
        let sub_ens = run_ensemble(&subsidy, &pop, &net, 20, 42).unwrap();
        let dist = abatement_distribution(&base_ens, &sub_ens).unwrap();
        assert!(
            dist.iter().all(|&v| v >= 0.0),
            "common random numbers make per-run abatement non-negative"
        );
        assert!(mean(&dist) > 0.0);
    }
}
