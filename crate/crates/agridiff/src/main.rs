//! Thin command-line front end over the library: batch scenario jobs whose
//! outputs are plot-ready tables.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 1 runtime error.
//! Worker-pool size follows `RAYON_NUM_THREADS` when set.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use agridiff::calibrate::{ablate_network, calibrate_omega, AnchorSeries};
use agridiff::config::AppConfig;
use agridiff::montecarlo::{run_ensemble, EnsembleSummary};
use agridiff::pipeline::{run_full_study, run_quartile_study};
use agridiff::policy::PolicyKind;
use agridiff::population::Population;
use agridiff::Result;

#[derive(Parser)]
#[command(
    name = "agridiff",
    version,
    about = "Agent-based simulator of low-emission fertilizer adoption on dairy-farm networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    Baseline,
    Tax,
    Subsidy,
}

impl From<ScenarioArg> for PolicyKind {
    fn from(value: ScenarioArg) -> Self {
        match value {
            ScenarioArg::Baseline => PolicyKind::Baseline,
            ScenarioArg::Tax => PolicyKind::CarbonTax,
            ScenarioArg::Subsidy => PolicyKind::Subsidy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic farm population CSV.
    GenPop {
        /// Number of farms.
        #[arg(long, default_value_t = 295)]
        n: usize,
        /// Generator seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario ensemble and write trajectory/summary tables.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// Monte Carlo iterations (defaults to the configured count).
        #[arg(long)]
        iterations: Option<usize>,
        /// Ensemble base seed (defaults to the configured seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Population CSV; synthesized from config when absent.
        #[arg(long)]
        population: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Grid-search the social-influence weight against observed anchors.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Anchor CSV (year, adoption, interpolated).
        #[arg(long)]
        anchors: PathBuf,
        /// Comma-separated candidate weights.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        population: Option<PathBuf>,
        /// Also report the network-ablation counterfactual.
        #[arg(long, default_value_t = false)]
        ablate: bool,
        /// Output JSON report path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full study and write the artifact directory with a manifest.
    Study {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        population: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Simulate each land-area quartile as an isolated sub-population.
    Quartiles {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "subsidy")]
        scenario: ScenarioArg,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        population: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<AppConfig> {
    match path {
        Some(p) => AppConfig::load(p),
        None => Ok(AppConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenPop { n, seed, out } => {
            let pop = Population::synthesize(n, seed)?;
            pop.write_csv(&out)?;
            println!("wrote {} farms to {}", pop.len(), out.display());
        }
        Command::Simulate {
            config,
            scenario,
            iterations,
            seed,
            population,
            out_dir,
        } => {
            let app = load_config(&config)?;
            let pop = app.population(population.as_deref())?;
            let net = app.build_network(pop.len())?;
            let scenario_config = app.scenario_config(scenario.into())?;
            let n = iterations.unwrap_or(app.montecarlo.iterations);
            let base_seed = seed.unwrap_or(app.montecarlo.base_seed);

            let ensemble = run_ensemble(&scenario_config, &pop, &net, n, base_seed)?;
            std::fs::create_dir_all(&out_dir)?;
            let summary = EnsembleSummary::from_ensemble(&ensemble);
            let tag = ensemble.scenario.clone();
            summary.write_csv(&out_dir.join(format!("ensemble_summary_{tag}.csv")))?;
            if n == 1 {
                ensemble.runs[0].write_csv(&out_dir.join(format!("trajectory_{tag}.csv")))?;
            }
            println!(
                "{tag}: {n} runs, seed {base_seed}, final adoption {:.4}",
                ensemble.final_adoption_mean()
            );
            println!("wrote {}", out_dir.display());
        }
        Command::Calibrate {
            config,
            anchors,
            grid,
            iterations,
            population,
            ablate,
            out,
        } => {
            let app = load_config(&config)?;
            let pop = app.population(population.as_deref())?;
            let net = app.build_network(pop.len())?;
            let scenario_config = app.scenario_config(PolicyKind::Baseline)?;
            let mut anchor_series = AnchorSeries::load_csv(&anchors)?;
            // The configured split wins over the one inferred from the file.
            anchor_series.train_through = app.calibrate.train_through;
            let n = iterations.unwrap_or(app.montecarlo.calibration_iterations);

            let outcome = calibrate_omega(
                &scenario_config,
                &pop,
                &net,
                &anchor_series,
                &grid,
                n,
                &app.calibrate,
            )?;
            let mut report = serde_json::to_value(&outcome)?;
            if ablate {
                let ablation = ablate_network(
                    &scenario_config,
                    &pop,
                    &net,
                    &anchor_series,
                    n,
                    &app.calibrate,
                )?;
                report["ablation"] = serde_json::to_value(ablation)?;
            }
            report["winner"] = serde_json::to_value(outcome.selected_omega)?;
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            println!(
                "selected omega {} (test RMSE {:.4}); wrote {}",
                outcome.selected_omega,
                outcome.metrics.rmse,
                out.display()
            );
        }
        Command::Study {
            config,
            iterations,
            population,
            out_dir,
        } => {
            let mut app = load_config(&config)?;
            if let Some(n) = iterations {
                app.montecarlo.iterations = n;
            }
            let pop = app.population(population.as_deref())?;
            let net = app.build_network(pop.len())?;
            let report = run_full_study(&app, &pop, &net)?;
            let manifest = report.write_artifacts(&out_dir, &net)?;
            println!(
                "study complete: {} artifacts in {}",
                manifest.artifacts.len(),
                out_dir.display()
            );
            println!(
                "t50 subsidy/tax/baseline: {:.2}/{:.2}/{:.2}",
                report.subsidy.diffusion.t50.mean,
                report.tax.diffusion.t50.mean,
                report.baseline.diffusion.t50.mean
            );
        }
        Command::Quartiles {
            config,
            scenario,
            iterations,
            population,
            out_dir,
        } => {
            let app = load_config(&config)?;
            let pop = app.population(population.as_deref())?;
            let n = iterations.unwrap_or(app.montecarlo.calibration_iterations);
            let study = run_quartile_study(&app, &pop, scenario.into(), n)?;
            study.write_artifacts(&out_dir)?;
            for curve in &study.curves {
                println!(
                    "Q{} ({} farms): year-5 adoption {:.3}",
                    curve.quartile + 1,
                    curve.n_farms,
                    curve.mean_adoption.get(4).copied().unwrap_or(f64::NAN)
                );
            }
            println!("wrote {}", out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(u8::try_from(err.exit_code()).unwrap_or(1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use agridiff::Error;

    #[test]
    fn scenario_arg_maps_to_policy_kind() {
        assert_eq!(PolicyKind::from(ScenarioArg::Tax), PolicyKind::CarbonTax);
        assert_eq!(PolicyKind::from(ScenarioArg::Baseline), PolicyKind::Baseline);
        assert_eq!(PolicyKind::from(ScenarioArg::Subsidy), PolicyKind::Subsidy);
    }

    #[test]
    fn exit_codes_follow_the_error_class() {
        assert_eq!(Error::InvalidParameter("bad".to_string()).exit_code(), 2);
        assert_eq!(Error::Io(std::io::Error::other("io")).exit_code(), 1);
    }
}
