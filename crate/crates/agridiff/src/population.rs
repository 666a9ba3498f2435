//! Farm population: CSV ingestion, validation, synthesis, normalization,
//! and quartile stratification.
//!
//! A `Population` is immutable after construction and is shared read-only
//! across simulation runs.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expected CSV header, in order.
pub const POPULATION_COLUMNS: [&str; 15] = [
    "id",
    "land_area_ha",
    "milk_production_kg",
    "livestock_units",
    "nitrogen_kg",
    "can_kg",
    "urea_kg",
    "pu_kg",
    "p_kg",
    "k_kg",
    "lime_t",
    "total_emissions_kg",
    "fpcm_kg",
    "protein_pct",
    "fat_pct",
];

/// One farm agent. Mass and area fields are per year; `total_emissions_kg`
/// is the exogenous whole-farm GHG total used for intensity analytics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Farm {
    pub id: u32,
    pub land_area_ha: f64,
    pub milk_production_kg: f64,
    pub livestock_units: f64,
    pub nitrogen_kg: f64,
    pub can_kg: f64,
    pub urea_kg: f64,
    pub pu_kg: f64,
    pub p_kg: f64,
    pub k_kg: f64,
    pub lime_t: f64,
    pub total_emissions_kg: f64,
    pub fpcm_kg: f64,
    pub protein_pct: f64,
    pub fat_pct: f64,
}

impl Farm {
    fn validate(&self, row: usize) -> Result<()> {
        let checks: [(&str, f64, bool); 14] = [
            ("land_area_ha", self.land_area_ha, self.land_area_ha > 0.0),
            (
                "milk_production_kg",
                self.milk_production_kg,
                self.milk_production_kg >= 0.0,
            ),
            (
                "livestock_units",
                self.livestock_units,
                self.livestock_units >= 0.0,
            ),
            ("nitrogen_kg", self.nitrogen_kg, self.nitrogen_kg >= 0.0),
            ("can_kg", self.can_kg, self.can_kg >= 0.0),
            ("urea_kg", self.urea_kg, self.urea_kg >= 0.0),
            ("pu_kg", self.pu_kg, self.pu_kg >= 0.0),
            ("p_kg", self.p_kg, self.p_kg >= 0.0),
            ("k_kg", self.k_kg, self.k_kg >= 0.0),
            ("lime_t", self.lime_t, self.lime_t >= 0.0),
            (
                "total_emissions_kg",
                self.total_emissions_kg,
                self.total_emissions_kg >= 0.0,
            ),
            ("fpcm_kg", self.fpcm_kg, self.fpcm_kg > 0.0),
            ("protein_pct", self.protein_pct, self.protein_pct >= 0.0),
            ("fat_pct", self.fat_pct, self.fat_pct >= 0.0),
        ];
        for (column, value, ok) in checks {
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: column.to_string(),
                    message: format!("value {value} is not finite"),
                });
            }
            if !ok {
                return Err(Error::Parse {
                    row,
                    column: column.to_string(),
                    message: format!("value {value} is out of range"),
                });
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn test_farm(id: u32, land_area_ha: f64, nitrogen_kg: f64) -> Farm {
        Farm {
            id,
            land_area_ha,
            milk_production_kg: land_area_ha * 8000.0,
            livestock_units: land_area_ha * 2.0,
            nitrogen_kg,
            can_kg: nitrogen_kg / 0.27,
            urea_kg: 0.0,
            pu_kg: 0.0,
            p_kg: 0.0,
            k_kg: 0.0,
            lime_t: 0.0,
            total_emissions_kg: land_area_ha * 8000.0,
            fpcm_kg: land_area_ha * 8000.0,
            protein_pct: 3.5,
            fat_pct: 4.2,
        }
    }
}

/// The farm population plus per-farm structural scores normalized by the
/// population maximum (both vectors attain exactly 1.0 at the maximal farm).
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub farms: Vec<Farm>,
    pub size_norm: Vec<f64>,
    pub milk_norm: Vec<f64>,
}

impl Population {
    /// Builds a population, validating every farm and computing norms.
    /// Row order is preserved.
    pub fn from_farms(farms: Vec<Farm>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (row, farm) in farms.iter().enumerate() {
            farm.validate(row + 1)?;
            if !seen.insert(farm.id) {
                return Err(Error::Parse {
                    row: row + 1,
                    column: "id".to_string(),
                    message: format!("duplicate farm id {}", farm.id),
                });
            }
        }
        let (size_norm, milk_norm) = compute_norms(&farms);
        Ok(Population {
            farms,
            size_norm,
            milk_norm,
        })
    }

    pub fn len(&self) -> usize {
        self.farms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.farms.is_empty()
    }

    /// Loads a population from CSV. The header must match
    /// [`POPULATION_COLUMNS`] exactly.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        for required in POPULATION_COLUMNS {
            if !headers.iter().any(|h| h == required) {
                return Err(Error::Parse {
                    row: 0,
                    column: required.to_string(),
                    message: "missing required column".to_string(),
                });
            }
        }
        let mut farms = Vec::new();
        for (idx, record) in reader.deserialize::<Farm>().enumerate() {
            let farm = record.map_err(|e| {
                let column = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => err
                        .field()
                        .and_then(|f| headers.get(f as usize))
                        .unwrap_or("<unknown>")
                        .to_string(),
                    _ => "<record>".to_string(),
                };
                Error::Parse {
                    row: idx + 1,
                    column,
                    message: e.to_string(),
                }
            })?;
            farms.push(farm);
        }
        Population::from_farms(farms)
    }

    /// Writes the population back out in the canonical schema, suitable for
    /// byte-exact round trips.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for farm in &self.farms {
            writer.serialize(farm)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Deterministic synthetic population standing in for survey data.
    pub fn synthesize(n: usize, seed: u64) -> Result<Self> {
        Self::synthesize_with(n, seed, &SynthesisSpec::default())
    }

    /// Synthesis with explicit generator constants.
    pub fn synthesize_with(n: usize, seed: u64, spec: &SynthesisSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "population size must be at least 2, got {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let area_dist = LogNormal::new(spec.area_median_ha.ln(), spec.area_sigma_log)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let intensity_dist = Normal::new(spec.intensity_mean, spec.intensity_std)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let stocking_dist = Normal::new(spec.stocking_mean, spec.stocking_std)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let uniform = |lo: f64, hi: f64| {
            Uniform::new(lo, hi).map_err(|e| Error::InvalidParameter(e.to_string()))
        };
        let yield_dist = uniform(spec.yield_kg_per_ha.0, spec.yield_kg_per_ha.1)?;
        let n_rate_dist = uniform(spec.n_rate_kg_per_ha.0, spec.n_rate_kg_per_ha.1)?;
        let p_rate_dist = uniform(spec.p_rate_kg_per_ha.0, spec.p_rate_kg_per_ha.1)?;
        let k_rate_dist = uniform(spec.k_rate_kg_per_ha.0, spec.k_rate_kg_per_ha.1)?;
        let lime_dist = uniform(spec.lime_rate_kg_per_ha.0, spec.lime_rate_kg_per_ha.1)?;
        let protein_dist = uniform(spec.protein_pct.0, spec.protein_pct.1)?;
        let fat_dist = uniform(spec.fat_pct.0, spec.fat_pct.1)?;

        let mut farms = Vec::with_capacity(n);
        for id in 0..n {
            // Draw order is part of the determinism contract; do not reorder.
            let area = area_dist
                .sample(&mut rng)
                .clamp(spec.area_bounds.0, spec.area_bounds.1);
            let milk_yield = yield_dist.sample(&mut rng);
            let n_rate = n_rate_dist.sample(&mut rng);
            let stocking = stocking_dist
                .sample(&mut rng)
                .clamp(spec.stocking_bounds.0, spec.stocking_bounds.1);
            let p_rate = p_rate_dist.sample(&mut rng);
            let k_rate = k_rate_dist.sample(&mut rng);
            let lime_rate = lime_dist.sample(&mut rng);
            let protein = protein_dist.sample(&mut rng);
            let fat = fat_dist.sample(&mut rng);
            let intensity = intensity_dist
                .sample(&mut rng)
                .clamp(spec.intensity_bounds.0, spec.intensity_bounds.1);

            let milk = area * milk_yield;
            let nitrogen = area * n_rate;
            // Fat-and-protein correction of raw milk mass.
            let fpcm = milk * (0.1226 * fat + 0.0776 * protein + 0.2534);
            farms.push(Farm {
                id: id as u32,
                land_area_ha: area,
                milk_production_kg: milk,
                livestock_units: area * stocking,
                nitrogen_kg: nitrogen,
                // Baseline product mix is 100% CAN; nitrogen_kg is exactly the
                // N content of that mass.
                can_kg: nitrogen / 0.27,
                urea_kg: 0.0,
                pu_kg: 0.0,
                p_kg: area * p_rate,
                k_kg: area * k_rate,
                lime_t: area * lime_rate / 1000.0,
                total_emissions_kg: fpcm * intensity,
                fpcm_kg: fpcm,
                protein_pct: protein,
                fat_pct: fat,
            });
        }
        Population::from_farms(farms)
    }

    /// Sub-population for quartile experiments. The selected farms keep the
    /// parent population's normalized scores, so scale effects remain
    /// comparable across quartiles.
    pub fn subset_with_parent_norms(&self, indices: &[usize]) -> Result<Population> {
        let mut farms = Vec::with_capacity(indices.len());
        let mut size_norm = Vec::with_capacity(indices.len());
        let mut milk_norm = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.farms.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.farms.len(),
                });
            }
            farms.push(self.farms[i].clone());
            size_norm.push(self.size_norm[i]);
            milk_norm.push(self.milk_norm[i]);
        }
        Ok(Population {
            farms,
            size_norm,
            milk_norm,
        })
    }

    /// Ranks farms by land area (ties by id) and splits the ranked order into
    /// four contiguous groups with sizes as equal as possible.
    pub fn assign_quartiles(&self) -> Result<QuartileAssignment> {
        if self.is_empty() {
            return Err(Error::InvalidParameter(
                "cannot stratify an empty population".to_string(),
            ));
        }
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.farms[a]
                .land_area_ha
                .partial_cmp(&self.farms[b].land_area_ha)
                .unwrap()
                .then(self.farms[a].id.cmp(&self.farms[b].id))
        });
        let base = n / 4;
        let remainder = n % 4;
        let mut labels = vec![0u8; n];
        let mut cursor = 0usize;
        for group in 0u8..4 {
            let size = base + usize::from((group as usize) < remainder);
            for &farm_idx in &order[cursor..cursor + size] {
                labels[farm_idx] = group;
            }
            cursor += size;
        }
        Ok(QuartileAssignment { labels })
    }
}

fn compute_norms(farms: &[Farm]) -> (Vec<f64>, Vec<f64>) {
    let max_area = farms
        .iter()
        .map(|f| f.land_area_ha)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_milk = farms
        .iter()
        .map(|f| f.milk_production_kg)
        .fold(f64::NEG_INFINITY, f64::max);
    let size_norm = farms
        .iter()
        .map(|f| if max_area > 0.0 { f.land_area_ha / max_area } else { 0.0 })
        .collect();
    let milk_norm = farms
        .iter()
        .map(|f| {
            if max_milk > 0.0 {
                f.milk_production_kg / max_milk
            } else {
                0.0
            }
        })
        .collect();
    (size_norm, milk_norm)
}

/// Constants behind [`Population::synthesize`]. Values are stand-ins chosen
/// to land the sectoral mean carbon intensity near 1.0 kg CO₂-eq/kg FPCM with
/// a laggard tail; none of them come from survey data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub area_median_ha: f64,
    pub area_sigma_log: f64,
    pub area_bounds: (f64, f64),
    pub yield_kg_per_ha: (f64, f64),
    pub n_rate_kg_per_ha: (f64, f64),
    pub stocking_mean: f64,
    pub stocking_std: f64,
    pub stocking_bounds: (f64, f64),
    pub p_rate_kg_per_ha: (f64, f64),
    pub k_rate_kg_per_ha: (f64, f64),
    pub lime_rate_kg_per_ha: (f64, f64),
    pub protein_pct: (f64, f64),
    pub fat_pct: (f64, f64),
    pub intensity_mean: f64,
    pub intensity_std: f64,
    pub intensity_bounds: (f64, f64),
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        SynthesisSpec {
            area_median_ha: 55.0,
            area_sigma_log: 0.45,
            area_bounds: (10.0, 300.0),
            yield_kg_per_ha: (5500.0, 11500.0),
            n_rate_kg_per_ha: (150.0, 250.0),
            stocking_mean: 2.15,
            stocking_std: 0.6,
            stocking_bounds: (0.8, 4.8),
            p_rate_kg_per_ha: (10.0, 25.0),
            k_rate_kg_per_ha: (15.0, 35.0),
            lime_rate_kg_per_ha: (0.0, 50.0),
            protein_pct: (3.2, 3.8),
            fat_pct: (3.8, 4.6),
            intensity_mean: 1.0,
            intensity_std: 0.2,
            intensity_bounds: (0.6, 1.8),
        }
    }
}

/// Per-farm quartile labels, 0 (smallest farms) through 3 (largest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuartileAssignment {
    pub labels: Vec<u8>,
}

impl QuartileAssignment {
    pub fn group_sizes(&self) -> [usize; 4] {
        let mut sizes = [0usize; 4];
        for &label in &self.labels {
            sizes[label as usize] += 1;
        }
        sizes
    }

    /// Farm indices belonging to quartile `q`, in population order.
    pub fn indices_of(&self, q: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &label)| (label == q).then_some(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn norms_divide_by_the_maximum() {
        let farms = vec![
            Farm::test_farm(0, 10.0, 100.0),
            Farm::test_farm(1, 20.0, 100.0),
            Farm::test_farm(2, 40.0, 100.0),
        ];
        let pop = Population::from_farms(farms).unwrap();
        assert_eq!(pop.size_norm, vec![0.25, 0.5, 1.0]);
        assert_relative_eq!(pop.milk_norm[2], 1.0);
    }

    #[test]
    fn negative_values_are_rejected_with_row_and_column() {
        let mut farm = Farm::test_farm(0, 10.0, 100.0);
        farm.nitrogen_kg = -1.0;
        let err = Population::from_farms(vec![farm]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1"), "{msg}");
        assert!(msg.contains("nitrogen_kg"), "{msg}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let farms = vec![Farm::test_farm(7, 10.0, 1.0), Farm::test_farm(7, 11.0, 1.0)];
        assert!(Population::from_farms(farms).is_err());
    }

    #[test]
    fn synthesis_is_deterministic_and_seed_sensitive() {
        let a = Population::synthesize(295, 1).unwrap();
        let b = Population::synthesize(295, 1).unwrap();
        let c = Population::synthesize(295, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(Population::synthesize(1, 1).is_err());
    }

    #[test]
    fn synthesis_hits_the_intensity_target() {
        let pop = Population::synthesize(295, 1).unwrap();
        let mean_ci: f64 = pop
            .farms
            .iter()
            .map(|f| f.total_emissions_kg / f.fpcm_kg)
            .sum::<f64>()
            / pop.len() as f64;
        assert!((0.8..=1.2).contains(&mean_ci), "mean CI {mean_ci}");
    }

    #[test]
    fn synthesis_keeps_nitrogen_consistent_with_product_mix() {
        let pop = Population::synthesize(50, 3).unwrap();
        for farm in &pop.farms {
            assert_relative_eq!(farm.can_kg * 0.27, farm.nitrogen_kg, epsilon = 1e-9);
            assert_eq!(farm.urea_kg, 0.0);
            assert_eq!(farm.pu_kg, 0.0);
        }
    }

    #[test]
    fn quartile_split_examples() {
        let farms: Vec<Farm> = (0..8)
            .map(|i| Farm::test_farm(i, f64::from(i) + 1.0, 1.0))
            .collect();
        let pop = Population::from_farms(farms).unwrap();
        let q = pop.assign_quartiles().unwrap();
        assert_eq!(q.labels, vec![0, 0, 1, 1, 2, 2, 3, 3]);

        let equal: Vec<Farm> = (0..8).map(|i| Farm::test_farm(i, 10.0, 1.0)).collect();
        let pop = Population::from_farms(equal).unwrap();
        let q = pop.assign_quartiles().unwrap();
        assert_eq!(q.labels, vec![0, 0, 1, 1, 2, 2, 3, 3]);
        assert_eq!(q.group_sizes(), [2, 2, 2, 2]);

        let pop = Population::synthesize(295, 1).unwrap();
        let mut sizes = pop.assign_quartiles().unwrap().group_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, [73, 74, 74, 74]);
    }

    #[test]
    fn renormalizing_is_idempotent() {
        let pop = Population::synthesize(40, 5).unwrap();
        let again = Population::from_farms(pop.farms.clone()).unwrap();
        assert_eq!(pop.size_norm, again.size_norm);
        assert_eq!(pop.milk_norm, again.milk_norm);
        let max_size = pop.size_norm.iter().cloned().fold(f64::MIN, f64::max);
        let max_milk = pop.milk_norm.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(max_size, 1.0);
        assert_eq!(max_milk, 1.0);
    }

    proptest! {
        // Shuffling farms and re-sorting labels by id gives identical labels.
        #[test]
        fn quartiles_are_permutation_equivariant(mut areas in proptest::collection::vec(1.0f64..500.0, 8..40)) {
            let farms: Vec<Farm> = areas
                .iter()
                .enumerate()
                .map(|(i, &a)| Farm::test_farm(i as u32, a, 1.0))
                .collect();
            let pop = Population::from_farms(farms.clone()).unwrap();
            let labels_by_id: Vec<u8> = pop.assign_quartiles().unwrap().labels;

            let mut shuffled = farms;
            shuffled.reverse();
            areas.reverse();
            let pop2 = Population::from_farms(shuffled.clone()).unwrap();
            let labels2 = pop2.assign_quartiles().unwrap().labels;
            let mut by_id: Vec<(u32, u8)> = shuffled
                .iter()
                .map(|f| f.id)
                .zip(labels2)
                .collect();
            by_id.sort_by_key(|&(id, _)| id);
            let resorted: Vec<u8> = by_id.into_iter().map(|(_, l)| l).collect();
            prop_assert_eq!(labels_by_id, resorted);
        }
    }
}
