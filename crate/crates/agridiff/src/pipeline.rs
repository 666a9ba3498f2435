//! Full-study orchestration: the three policy ensembles on one shared
//! network and population, every derived statistic, quartile sub-studies,
//! and a manifest-hashed artifact directory.
//!
//! All scenarios reuse the same (population, network, seed family), so
//! cross-scenario differences are attributable to the policy shift alone.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::AppConfig;
use crate::dynamics::run_scenario_observed;
use crate::economics::{
    abatement_costs, baseline_cost_eur, policy_cost_eur, total_abatement_t, AbatementReport,
};
use crate::emissions::{carbon_intensity, post_policy_intensity};
use crate::error::{Error, Result};
use crate::montecarlo::{abatement_distribution, run_ensemble, Ensemble, EnsembleSummary};
use crate::network::{snapshot, SocialNetwork, Snapshot};
use crate::policy::PolicyKind;
use crate::population::Population;
use crate::seed::derive_run_seed;
use crate::stats::{
    convergence, fit_logistic, kde, ks_two_sample, mean, sample_std, summarize,
    ConvergenceReport, DensityEstimate, DiffusionMetrics, GridSpec, KsResult, LogisticFit,
    SummaryStats,
};

/// Distribution of one timing metric across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std: f64,
    /// Runs for which the metric was defined (threshold reached).
    pub n_defined: usize,
}

impl MetricStats {
    fn from_values(values: &[f64]) -> Self {
        MetricStats {
            mean: mean(values),
            std: sample_std(values),
            n_defined: values.len(),
        }
    }
}

/// Timing metrics aggregated over one ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSummary {
    pub t50: MetricStats,
    pub t90: MetricStats,
    pub peak_velocity: MetricStats,
    pub peak_year: MetricStats,
}

pub fn diffusion_summary(ensemble: &Ensemble) -> Result<DiffusionSummary> {
    let mut t50 = Vec::new();
    let mut t90 = Vec::new();
    let mut peaks = Vec::new();
    let mut peak_years = Vec::new();
    for run in &ensemble.runs {
        let series = run.adoption_series();
        let metrics = DiffusionMetrics::from_trajectory(&series)?;
        if let Some(y) = metrics.t50 {
            t50.push(y as f64);
        }
        if let Some(y) = metrics.t90 {
            t90.push(y as f64);
        }
        peaks.push(metrics.peak_velocity);
        peak_years.push(metrics.peak_year as f64);
    }
    Ok(DiffusionSummary {
        t50: MetricStats::from_values(&t50),
        t90: MetricStats::from_values(&t90),
        peak_velocity: MetricStats::from_values(&peaks),
        peak_year: MetricStats::from_values(&peak_years),
    })
}

/// Everything the study derives from one scenario ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBlock {
    pub scenario: String,
    pub summary: EnsembleSummary,
    pub diffusion: DiffusionSummary,
    pub logistic_fit: LogisticFit,
    pub final_adoption_mean: f64,
}

/// Abatement accounting of one policy scenario against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbatementBlock {
    pub scenario: String,
    pub per_run_t: Vec<f64>,
    pub mean_t: f64,
    pub std_t: f64,
    /// Abatement of the ensemble-mean emission series.
    pub mean_series_t: f64,
    /// None when the scenario abated nothing, leaving unit costs undefined.
    pub economics: Option<AbatementReport>,
}

/// Carbon-intensity distribution shift for one policy scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityShift {
    pub scenario: String,
    pub delta: f64,
    pub mean_adoption_final: f64,
    pub ci_post: Vec<f64>,
    pub post_summary: SummaryStats,
    pub delta_mu: f64,
    pub kde_post: DensityEstimate,
    pub ks_vs_base: KsResult,
}

/// The consolidated study output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub iterations: usize,
    pub base_seed: u64,
    pub baseline: ScenarioBlock,
    pub tax: ScenarioBlock,
    pub subsidy: ScenarioBlock,
    pub abatement_tax: AbatementBlock,
    pub abatement_subsidy: AbatementBlock,
    /// None when the subsidy scenario abated nothing.
    pub convergence_subsidy: Option<ConvergenceReport>,
    pub ci_base: Vec<f64>,
    pub ci_base_summary: SummaryStats,
    pub kde_base: DensityEstimate,
    pub intensity_tax: IntensityShift,
    pub intensity_subsidy: IntensityShift,
    pub snapshots: Vec<Snapshot>,
}

fn scenario_block(ensemble: &Ensemble) -> Result<ScenarioBlock> {
    Ok(ScenarioBlock {
        scenario: ensemble.scenario.clone(),
        summary: EnsembleSummary::from_ensemble(ensemble),
        diffusion: diffusion_summary(ensemble)?,
        logistic_fit: fit_logistic(&ensemble.mean_adoption_series())?,
        final_adoption_mean: ensemble.final_adoption_mean(),
    })
}

fn abatement_block(
    app: &AppConfig,
    pop: &Population,
    base: &Ensemble,
    policy: &Ensemble,
) -> Result<AbatementBlock> {
    let per_run = abatement_distribution(base, policy)?;
    let mean_series =
        total_abatement_t(&base.mean_emissions_series(), &policy.mean_emissions_series())?;

    // Costing layer: substitute the final ensemble-mean adoption share into
    // the survey product mix.
    let alpha = policy.final_adoption_mean();
    let table = app.fertilizer_table();
    let nc_ratio = table.can.n_content / table.pu.n_content;
    let base_cost = baseline_cost_eur(pop, &app.prices);
    let policy_cost = policy_cost_eur(
        pop,
        alpha,
        app.study.substitution_mode,
        nc_ratio,
        &app.prices,
    )?;
    let gov = policy.mean_subsidy_outlay_eur();
    let abated = mean(&per_run);
    let economics = if abated > 0.0 {
        Some(abatement_costs(policy_cost - base_cost, abated, gov)?)
    } else {
        None
    };

    Ok(AbatementBlock {
        scenario: policy.scenario.clone(),
        mean_t: mean(&per_run),
        std_t: sample_std(&per_run),
        per_run_t: per_run,
        mean_series_t: mean_series,
        economics,
    })
}

fn intensity_shift(
    app: &AppConfig,
    ci_base: &[f64],
    kde_grid: GridSpec,
    base_summary: &SummaryStats,
    ensemble: &Ensemble,
) -> Result<IntensityShift> {
    let delta = app.intensity.params().delta(&app.fertilizer_table());
    let abar = ensemble.final_adoption_mean();
    let ci_post: Vec<f64> = ci_base
        .iter()
        .map(|&ci| post_policy_intensity(ci, delta, abar))
        .collect::<Result<_>>()?;
    let post_summary = summarize(&ci_post, app.intensity.tail_threshold)?;
    Ok(IntensityShift {
        scenario: ensemble.scenario.clone(),
        delta,
        mean_adoption_final: abar,
        kde_post: kde(&ci_post, kde_grid)?,
        ks_vs_base: ks_two_sample(ci_base, &ci_post)?,
        delta_mu: post_summary.mean - base_summary.mean,
        ci_post,
        post_summary,
    })
}

/// Runs the full experiment suite on a shared population and network.
pub fn run_full_study(
    app: &AppConfig,
    pop: &Population,
    net: &SocialNetwork,
) -> Result<StudyReport> {
    app.validate()?;
    let iterations = app.montecarlo.iterations;
    let base_seed = app.montecarlo.base_seed;

    let baseline_cfg = app.scenario_config(PolicyKind::Baseline)?;
    let tax_cfg = app.scenario_config(PolicyKind::CarbonTax)?;
    let subsidy_cfg = app.scenario_config(PolicyKind::Subsidy)?;

    let base_ens = run_ensemble(&baseline_cfg, pop, net, iterations, base_seed)?;
    let tax_ens = run_ensemble(&tax_cfg, pop, net, iterations, base_seed)?;
    let sub_ens = run_ensemble(&subsidy_cfg, pop, net, iterations, base_seed)?;

    let abatement_tax = abatement_block(app, pop, &base_ens, &tax_ens)?;
    let abatement_subsidy = abatement_block(app, pop, &base_ens, &sub_ens)?;
    let convergence_subsidy = match convergence(&abatement_subsidy.per_run_t) {
        Ok(report) => Some(report),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };

    let ci_base: Vec<f64> = pop
        .farms
        .iter()
        .map(carbon_intensity)
        .collect::<Result<_>>()?;
    let ci_base_summary = summarize(&ci_base, app.intensity.tail_threshold)?;
    let kde_grid = GridSpec::default();
    let kde_base = kde(&ci_base, kde_grid)?;
    let intensity_tax = intensity_shift(app, &ci_base, kde_grid, &ci_base_summary, &tax_ens)?;
    let intensity_subsidy = intensity_shift(app, &ci_base, kde_grid, &ci_base_summary, &sub_ens)?;

    // Diffusion snapshots come from run 0 of the subsidy ensemble.
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let wanted: Vec<u32> = app
        .study
        .snapshot_years
        .iter()
        .copied()
        .filter(|&y| y <= app.dynamics.horizon)
        .collect();
    run_scenario_observed(
        &subsidy_cfg,
        pop,
        net,
        derive_run_seed(base_seed, 0),
        |year, adopted| {
            if wanted.contains(&year) {
                snapshots.push(snapshot(pop, net, adopted, year));
            }
        },
    )?;

    Ok(StudyReport {
        iterations,
        base_seed,
        baseline: scenario_block(&base_ens)?,
        tax: scenario_block(&tax_ens)?,
        subsidy: scenario_block(&sub_ens)?,
        abatement_tax,
        abatement_subsidy,
        convergence_subsidy,
        ci_base,
        ci_base_summary,
        kde_base,
        intensity_tax,
        intensity_subsidy,
        snapshots,
    })
}

// ---------------------------------------------------------------------------
// Quartile study
// ---------------------------------------------------------------------------

/// Ensemble-mean adoption curve of one farm-size quartile simulated as an
/// isolated population with its own small-world network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileCurve {
    pub quartile: u8,
    pub n_farms: usize,
    pub mean_adoption: Vec<f64>,
    pub std_adoption: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileStudy {
    pub scenario: String,
    pub iterations: usize,
    pub curves: Vec<QuartileCurve>,
}

/// Splits the population into land-area quartiles and simulates each as an
/// independent sub-population. Sub-populations keep the parent norms so that
/// scale effects stay comparable; each gets a freshly generated network with
/// the configured (k, p).
pub fn run_quartile_study(
    app: &AppConfig,
    pop: &Population,
    kind: PolicyKind,
    iterations: usize,
) -> Result<QuartileStudy> {
    let assignment = pop.assign_quartiles()?;
    let config = app.scenario_config(kind)?;
    let mut curves = Vec::with_capacity(4);
    for q in 0u8..4 {
        let indices = assignment.indices_of(q);
        if indices.len() <= app.network.k {
            return Err(Error::InvalidParameter(format!(
                "quartile {q} has {} farms, too few for a degree-{} network",
                indices.len(),
                app.network.k
            )));
        }
        let sub_pop = pop.subset_with_parent_norms(&indices)?;
        let sub_net = SocialNetwork::watts_strogatz(
            sub_pop.len(),
            app.network.k,
            app.network.p,
            crate::seed::derive_stream_seed(app.network.seed, "quartile", u64::from(q)),
        )?;
        let ensemble = run_ensemble(
            &config,
            &sub_pop,
            &sub_net,
            iterations,
            crate::seed::derive_stream_seed(app.montecarlo.base_seed, "quartile", u64::from(q)),
        )?;
        let summary = EnsembleSummary::from_ensemble(&ensemble);
        curves.push(QuartileCurve {
            quartile: q,
            n_farms: sub_pop.len(),
            // Drop the year-0 seed row to match the trajectory convention.
            mean_adoption: summary.adoption_mean[1..].to_vec(),
            std_adoption: summary.adoption_std[1..].to_vec(),
        });
    }
    Ok(QuartileStudy {
        scenario: kind.as_str().to_string(),
        iterations,
        curves,
    })
}

// ---------------------------------------------------------------------------
// Artifact directory and manifest
// ---------------------------------------------------------------------------

/// Artifact names mapped to the SHA-256 of their content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifacts: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct ArtifactWriter<'a> {
    dir: &'a Path,
    manifest: Manifest,
}

impl<'a> ArtifactWriter<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(ArtifactWriter {
            dir,
            manifest: Manifest {
                artifacts: BTreeMap::new(),
            },
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), content)?;
        self.manifest
            .artifacts
            .insert(name.to_string(), sha256_hex(content.as_bytes()));
        Ok(())
    }

    fn finish(self) -> Result<Manifest> {
        std::fs::write(self.dir.join("manifest.json"), self.manifest.to_json()?)?;
        Ok(self.manifest)
    }
}

fn kde_csv(estimate: &DensityEstimate) -> String {
    let mut out = String::from("x,density\n");
    for (x, d) in estimate.grid.iter().zip(&estimate.density) {
        out.push_str(&format!("{x},{d}\n"));
    }
    out
}

impl StudyReport {
    /// Writes every artifact plus `manifest.json` (name -> SHA-256) into
    /// `dir` and returns the manifest. Identical studies produce identical
    /// manifests byte for byte.
    pub fn write_artifacts(&self, dir: &Path, net: &SocialNetwork) -> Result<Manifest> {
        let mut w = ArtifactWriter::new(dir)?;

        for block in [&self.baseline, &self.tax, &self.subsidy] {
            w.write(
                &format!("ensemble_summary_{}.csv", block.scenario),
                &block.summary.to_csv_string(),
            )?;
        }

        // Mean emission paths side by side for plotting.
        let mut emissions = String::from("year,baseline_gg,tax_gg,subsidy_gg\n");
        for (i, year) in self.baseline.summary.years.iter().enumerate() {
            emissions.push_str(&format!(
                "{},{},{},{}\n",
                year,
                self.baseline.summary.emissions_gg_mean[i],
                self.tax.summary.emissions_gg_mean[i],
                self.subsidy.summary.emissions_gg_mean[i]
            ));
        }
        w.write("emissions_series.csv", &emissions)?;

        for block in [&self.abatement_tax, &self.abatement_subsidy] {
            let mut csv = String::from("run,tonnes\n");
            for (run, tonnes) in block.per_run_t.iter().enumerate() {
                csv.push_str(&format!("{run},{tonnes}\n"));
            }
            w.write(&format!("abatement_distribution_{}.csv", block.scenario), &csv)?;
            let (report, table) = match &block.economics {
                Some(e) => (serde_json::to_string_pretty(e)?, e.to_text_table()),
                None => (
                    serde_json::to_string_pretty(&serde_json::json!({
                        "skipped": "no abatement; unit costs undefined"
                    }))?,
                    "skipped: no abatement; unit costs undefined\n".to_string(),
                ),
            };
            w.write(&format!("abatement_report_{}.json", block.scenario), &report)?;
            w.write(&format!("abatement_report_{}.txt", block.scenario), &table)?;
        }

        match &self.convergence_subsidy {
            Some(report) => {
                let mut convergence_csv = String::from("iteration,running_mean_t\n");
                for (i, m) in report.running_mean.iter().enumerate() {
                    convergence_csv.push_str(&format!("{},{}\n", i + 1, m));
                }
                w.write("convergence_subsidy.csv", &convergence_csv)?;
                w.write(
                    "convergence_subsidy.json",
                    &serde_json::to_string_pretty(&serde_json::json!({
                        "final_mean_t": report.final_mean,
                        "cv": report.cv,
                        "running_mean_cv": report.running_mean_cv,
                    }))?,
                )?;
            }
            None => {
                w.write("convergence_subsidy.csv", "iteration,running_mean_t\n")?;
                w.write(
                    "convergence_subsidy.json",
                    &serde_json::to_string_pretty(&serde_json::json!({
                        "skipped": "no abatement; convergence undefined"
                    }))?,
                )?;
            }
        }

        let diffusion = serde_json::json!({
            "baseline": self.baseline.diffusion,
            "tax": self.tax.diffusion,
            "subsidy": self.subsidy.diffusion,
        });
        w.write("diffusion_metrics.json", &serde_json::to_string_pretty(&diffusion)?)?;

        let fits = serde_json::json!({
            "baseline": self.baseline.logistic_fit,
            "tax": self.tax.logistic_fit,
            "subsidy": self.subsidy.logistic_fit,
        });
        w.write("logistic_fits.json", &serde_json::to_string_pretty(&fits)?)?;

        let mut intensity = String::from("farm,ci_base,ci_post_tax,ci_post_subsidy\n");
        for i in 0..self.ci_base.len() {
            intensity.push_str(&format!(
                "{},{},{},{}\n",
                i, self.ci_base[i], self.intensity_tax.ci_post[i], self.intensity_subsidy.ci_post[i]
            ));
        }
        w.write("intensity.csv", &intensity)?;
        w.write("kde_intensity_base.csv", &kde_csv(&self.kde_base))?;
        w.write("kde_intensity_tax.csv", &kde_csv(&self.intensity_tax.kde_post))?;
        w.write(
            "kde_intensity_subsidy.csv",
            &kde_csv(&self.intensity_subsidy.kde_post),
        )?;

        let ks = serde_json::json!({
            "baseline_vs_tax": {
                "d": self.intensity_tax.ks_vs_base.d_statistic,
                "p": self.intensity_tax.ks_vs_base.p_value,
                "delta_mu": self.intensity_tax.delta_mu,
            },
            "baseline_vs_subsidy": {
                "d": self.intensity_subsidy.ks_vs_base.d_statistic,
                "p": self.intensity_subsidy.ks_vs_base.p_value,
                "delta_mu": self.intensity_subsidy.delta_mu,
            },
        });
        w.write("ks_table.json", &serde_json::to_string_pretty(&ks)?)?;

        let mut summaries = BTreeMap::new();
        summaries.insert("baseline_t0", self.ci_base_summary);
        summaries.insert("tax_t_final", self.intensity_tax.post_summary);
        summaries.insert("subsidy_t_final", self.intensity_subsidy.post_summary);
        w.write(
            "intensity_summary.json",
            &serde_json::to_string_pretty(&summaries)?,
        )?;

        for snap in &self.snapshots {
            let mut csv = String::from("node,adopted,degree,size_norm\n");
            for row in &snap.rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    row.node, row.adopted, row.degree, row.size_norm
                ));
            }
            w.write(&format!("snapshot_year{}.csv", snap.year), &csv)?;
        }

        let mut edges = String::from("i,j\n");
        for (i, j) in net.edges() {
            edges.push_str(&format!("{i},{j}\n"));
        }
        w.write("network_edges.csv", &edges)?;

        w.finish()
    }
}

impl QuartileStudy {
    /// One curve file per quartile plus a combined summary.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for curve in &self.curves {
            let mut csv = String::from("year,adoption_mean,adoption_std\n");
            for (i, (m, s)) in curve
                .mean_adoption
                .iter()
                .zip(&curve.std_adoption)
                .enumerate()
            {
                csv.push_str(&format!("{},{},{}\n", i + 1, m, s));
            }
            std::fs::write(
                dir.join(format!("quartile_q{}.csv", curve.quartile + 1)),
                csv,
            )?;
        }
        std::fs::write(
            dir.join("quartile_study.json"),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}
