//! The annual adoption state machine: probabilities, stochastic transitions,
//! and full scenario runs producing per-year trajectories.
//!
//! Update order within a year is synchronous with a one-year-lagged peer
//! signal, so adoption decisions in year t only see year t-1 states. Each
//! year consumes exactly one uniform draw per farm in id order whether or not
//! the farm can still adopt; holding the draws aligned farm-by-farm is what
//! makes comparative statics under common random numbers pathwise monotone.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::economics::PriceTable;
use crate::emissions::{sector_emissions_gg, FertilizerTable};
use crate::error::{Error, Result};
use crate::network::SocialNetwork;
use crate::policy::{policy_cashflow, PolicyInstrument, PolicyKind};
use crate::population::Population;

/// Coefficients of the linear adoption probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdoptionParams {
    /// Baseline inclination to innovate.
    pub beta0: f64,
    /// Social-influence weight on the lagged peer signal.
    pub omega: f64,
    pub beta_size: f64,
    pub beta_milk: f64,
    /// Exogenous policy shift (0 baseline, +0.08 tax, +0.15 subsidy).
    pub policy_delta: f64,
}

impl AdoptionParams {
    /// The calibrated coefficient set.
    pub fn calibrated() -> Self {
        AdoptionParams {
            beta0: 0.005,
            omega: 0.85,
            beta_size: 0.04,
            beta_milk: 0.04,
            policy_delta: 0.0,
        }
    }

    /// The a-priori theoretical coefficient set.
    pub fn theoretical() -> Self {
        AdoptionParams {
            beta0: 0.02,
            omega: 0.4,
            beta_size: 0.2,
            beta_milk: 0.2,
            policy_delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta0", self.beta0),
            ("omega", self.omega),
            ("beta_size", self.beta_size),
            ("beta_milk", self.beta_milk),
            ("policy_delta", self.policy_delta),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!(
                    "dynamics.{name} must be finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for AdoptionParams {
    fn default() -> Self {
        AdoptionParams::calibrated()
    }
}

/// Yearly adoption probability for a non-adopter, clamped into [0, 1].
pub fn adoption_probability(
    peer: f64,
    size_norm: f64,
    milk_norm: f64,
    params: &AdoptionParams,
) -> Result<f64> {
    if !(peer.is_finite() && size_norm.is_finite() && milk_norm.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "adoption probability inputs must be finite (peer={peer}, size={size_norm}, milk={milk_norm})"
        )));
    }
    params.validate()?;
    let raw = params.beta0
        + params.omega * peer
        + params.beta_size * size_norm
        + params.beta_milk * milk_norm
        + params.policy_delta;
    Ok(raw.clamp(0.0, 1.0))
}

/// Structural-resistance block. A `fraction` of farms hold out against the
/// social process; a holdout participates only when the active policy shift
/// is at least its resistance draw (uniform on [0, resistance_max]), which is
/// what leaves the residual non-adopting margin at saturation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaggardParams {
    pub fraction: f64,
    pub resistance_max: f64,
}

impl Default for LaggardParams {
    fn default() -> Self {
        LaggardParams {
            fraction: 0.20,
            resistance_max: 0.40,
        }
    }
}

impl LaggardParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.fraction) {
            return Err(Error::Config(format!(
                "dynamics.laggard_fraction must be in [0, 1), got {}",
                self.fraction
            )));
        }
        if !(self.resistance_max >= 0.0 && self.resistance_max.is_finite()) {
            return Err(Error::Config(
                "dynamics.laggard_resistance_max must be finite and >= 0".to_string(),
            ));
        }
        Ok(())
    }
}

/// Everything one scenario run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub horizon: u32,
    pub policy: PolicyInstrument,
    pub initial_adopter_fraction: f64,
    pub adoption: AdoptionParams,
    pub laggards: LaggardParams,
    pub fertilizers: FertilizerTable,
    pub prices: PriceTable,
    pub base_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            horizon: 15,
            policy: PolicyInstrument::default(),
            initial_adopter_fraction: 0.01,
            adoption: AdoptionParams::calibrated(),
            laggards: LaggardParams::default(),
            fertilizers: FertilizerTable::reference(),
            prices: PriceTable::default(),
            base_seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn with_policy(kind: PolicyKind) -> Self {
        ScenarioConfig {
            policy: PolicyInstrument::with_kind(kind),
            ..ScenarioConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("dynamics.horizon must be >= 1".to_string()));
        }
        if !(0.0..1.0).contains(&self.initial_adopter_fraction) {
            return Err(Error::Config(format!(
                "dynamics.initial_adopter_fraction must be in [0, 1), got {}",
                self.initial_adopter_fraction
            )));
        }
        self.adoption.validate()?;
        self.laggards.validate()?;
        self.policy.validate()?;
        self.fertilizers.validate()?;
        self.prices.validate()
    }

    /// Adoption parameters with the policy shift resolved from the active
    /// instrument and price table.
    pub fn effective_params(&self) -> Result<AdoptionParams> {
        let mut params = self.adoption;
        params.policy_delta = self.policy.adoption_delta(&self.fertilizers)?;
        Ok(params)
    }
}

/// Mutable per-run simulation state. Adoption is absorbing: once true, a
/// farm never reverts.
#[derive(Debug, Clone)]
pub struct SimState {
    pub year: u32,
    pub adopted: Vec<bool>,
    /// Per-farm resistance threshold; 0 for ordinary farms.
    pub resistance: Vec<f64>,
    rng: ChaCha8Rng,
}

impl SimState {
    /// Seeds initial adopters and draws the structural-resistance block from
    /// the run stream. The same run seed always reproduces the same state.
    pub fn initialise(pop: &Population, config: &ScenarioConfig, run_seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
        let n = pop.len();
        let adopted = seed_initial_adopters(n, config.initial_adopter_fraction, &mut rng)?;

        let mut resistance = vec![0.0; n];
        let holdouts = (n as f64 * config.laggards.fraction).round() as usize;
        // Initial adopters cannot be holdouts; sample among the rest.
        let pool: Vec<usize> = (0..n).filter(|&i| !adopted[i]).collect();
        let holdouts = holdouts.min(pool.len());
        if holdouts > 0 {
            let chosen = rand::seq::index::sample(&mut rng, pool.len(), holdouts);
            for idx in chosen.iter() {
                resistance[pool[idx]] = rng.random::<f64>() * config.laggards.resistance_max;
            }
        }
        Ok(SimState {
            year: 0,
            adopted,
            resistance,
            rng,
        })
    }

    pub fn adoption_fraction(&self) -> f64 {
        if self.adopted.is_empty() {
            return 0.0;
        }
        self.adopted.iter().filter(|&&a| a).count() as f64 / self.adopted.len() as f64
    }

    #[cfg(test)]
    pub(crate) fn replace_rng(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }
}

/// Marks `round(n * fraction)` distinct farms, chosen uniformly, as adopted.
pub fn seed_initial_adopters(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "initial adopter fraction must be in [0, 1), got {fraction}"
        )));
    }
    let count = (n as f64 * fraction).round() as usize;
    let mut adopted = vec![false; n];
    if count > 0 {
        for idx in rand::seq::index::sample(rng, n, count).iter() {
            adopted[idx] = true;
        }
    }
    Ok(adopted)
}

/// Advances the state by one year. Peer signals come from the previous
/// year's adoption vector; draws are consumed in farm-id order, one per farm.
pub fn step_year(
    state: &mut SimState,
    pop: &Population,
    net: &SocialNetwork,
    params: &AdoptionParams,
) {
    let previous = state.adopted.clone();
    for i in 0..pop.len() {
        let u: f64 = state.rng.random();
        if state.adopted[i] {
            continue;
        }
        if params.policy_delta < state.resistance[i] {
            continue; // holdout: incentive below its resistance threshold
        }
        let peer = net.peer_signal_unchecked(i, &previous);
        let p = params.beta0
            + params.omega * peer
            + params.beta_size * pop.size_norm[i]
            + params.beta_milk * pop.milk_norm[i]
            + params.policy_delta;
        if u < p.clamp(0.0, 1.0) {
            state.adopted[i] = true;
        }
    }
    state.year += 1;
}

/// One recorded simulation year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRecord {
    pub year: u32,
    pub adoption_fraction: f64,
    pub emissions_gg: f64,
    pub tax_eur: f64,
    pub subsidy_eur: f64,
}

/// The per-year outputs of a single run. Year 0 is the seeded initial state
/// (no policy cash flows yet); years 1..=T follow the annual updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub scenario: String,
    pub run_seed: u64,
    pub records: Vec<YearRecord>,
}

impl Trajectory {
    /// Adoption fractions for years 1..=T (the year-0 seed state dropped),
    /// which is the series the timing metrics are defined on.
    pub fn adoption_series(&self) -> Vec<f64> {
        self.records[1..]
            .iter()
            .map(|r| r.adoption_fraction)
            .collect()
    }

    /// Emission totals for years 1..=T in Gg.
    pub fn emissions_series(&self) -> Vec<f64> {
        self.records[1..].iter().map(|r| r.emissions_gg).collect()
    }

    pub fn final_adoption(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.adoption_fraction)
    }

    /// Total subsidy outlays over the simulated years.
    pub fn total_subsidy_eur(&self) -> f64 {
        self.records.iter().map(|r| r.subsidy_eur).sum()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("year,adoption_fraction,emissions_gg,tax_eur,subsidy_eur\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.year, r.adoption_fraction, r.emissions_gg, r.tax_eur, r.subsidy_eur
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Executes one full scenario run.
pub fn run_scenario(
    config: &ScenarioConfig,
    pop: &Population,
    net: &SocialNetwork,
    run_seed: u64,
) -> Result<Trajectory> {
    run_scenario_observed(config, pop, net, run_seed, |_, _| {})
}

/// As [`run_scenario`], invoking `observer(year, adopted)` after every
/// recorded year (including year 0) so callers can capture state snapshots.
pub fn run_scenario_observed(
    config: &ScenarioConfig,
    pop: &Population,
    net: &SocialNetwork,
    run_seed: u64,
    mut observer: impl FnMut(u32, &[bool]),
) -> Result<Trajectory> {
    config.validate()?;
    if pop.len() != net.n() {
        return Err(Error::LengthMismatch(format!(
            "population size {} does not match network size {}",
            pop.len(),
            net.n()
        )));
    }
    let params = config.effective_params()?;
    let mut state = SimState::initialise(pop, config, run_seed)?;
    let mut records = Vec::with_capacity(config.horizon as usize + 1);

    // Year 0: the seeded initial condition, before any policy flows.
    records.push(YearRecord {
        year: 0,
        adoption_fraction: state.adoption_fraction(),
        emissions_gg: sector_emissions_gg(pop, &state.adopted, &config.fertilizers),
        tax_eur: 0.0,
        subsidy_eur: 0.0,
    });
    observer(0, &state.adopted);

    for year in 1..=config.horizon {
        step_year(&mut state, pop, net, &params);
        let flow = policy_cashflow(pop, &state.adopted, &config.policy, &config.fertilizers)?;
        records.push(YearRecord {
            year,
            adoption_fraction: state.adoption_fraction(),
            emissions_gg: sector_emissions_gg(pop, &state.adopted, &config.fertilizers),
            tax_eur: flow.tax_eur,
            subsidy_eur: flow.subsidy_eur,
        });
        observer(year, &state.adopted);
    }

    Ok(Trajectory {
        scenario: config.policy.kind.as_str().to_string(),
        run_seed,
        records,
    })
}
