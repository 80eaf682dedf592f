//! Simulated subject pools drawn from a mixture of bias profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::experiment::{build_plan, simulate_subject, BiasProfile, ExperimentError, PlanConfig, SubjectData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureEntry {
    pub name: String,
    pub weight: f64,
    pub profile: BiasProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMixture {
    pub entries: Vec<MixtureEntry>,
}

impl ProfileMixture {
    pub fn single(name: &str, profile: BiasProfile) -> Self {
        ProfileMixture {
            entries: vec![MixtureEntry {
                name: name.into(),
                weight: 1.0,
                profile,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.entries.is_empty() {
            return Err(ExperimentError::Config("profile mixture is empty".into()));
        }
        let total: f64 = self.entries.iter().map(|e| e.weight).sum();
        if self.entries.iter().any(|e| e.weight.is_nan() || e.weight < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(ExperimentError::Config(format!(
                "mixture weights must be non-negative and sum to 1, got {total}"
            )));
        }
        for e in &self.entries {
            e.profile
                .validate()
                .map_err(|err| ExperimentError::Profile(format!("{}: {err}", e.name)))?;
        }
        Ok(())
    }

    /// Subject counts per entry by largest remainder, summing to `n`.
    pub fn allocate(&self, n: usize) -> Vec<usize> {
        let raw: Vec<f64> = self.entries.iter().map(|e| e.weight * n as f64).collect();
        let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&i, &j| (raw[j] - raw[j].floor()).total_cmp(&(raw[i] - raw[i].floor())).then(i.cmp(&j)));
        let mut left = n - counts.iter().sum::<usize>();
        for i in order.into_iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub seed: u64,
    pub n_subjects: usize,
    /// Every subject sees the same urns and sequences, in their own order.
    pub fixed_plan: bool,
    pub plan: PlanConfig,
    pub mixture: ProfileMixture,
}

impl PopulationConfig {
    pub fn new(seed: u64, n_subjects: usize, mixture: ProfileMixture) -> Self {
        PopulationConfig {
            seed,
            n_subjects,
            fixed_plan: false,
            plan: PlanConfig::default(),
            mixture,
        }
    }
}

/// A simulated subject and the mixture entry that generated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedSubject {
    pub data: SubjectData,
    pub profile_name: String,
    pub profile: BiasProfile,
}

pub fn subject_id(i: usize) -> String {
    format!("sim-{:03}", i + 1)
}

/// Simulates `n_subjects` subjects. Subjects are assigned to mixture
/// entries in contiguous blocks sized by [`ProfileMixture::allocate`].
pub fn simulate_population(config: &PopulationConfig) -> Result<Vec<SimulatedSubject>, ExperimentError> {
    if config.n_subjects == 0 {
        return Err(ExperimentError::Config("need at least one subject".into()));
    }
    config.mixture.validate()?;
    config.plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shared = if config.fixed_plan {
        Some(build_plan(rng.random(), &config.plan)?)
    } else {
        None
    };
    let counts = config.mixture.allocate(config.n_subjects);
    let mut out = Vec::with_capacity(config.n_subjects);
    for (entry, &count) in config.mixture.entries.iter().zip(&counts) {
        for _ in 0..count {
            let plan_seed: u64 = rng.random();
            let sim_seed: u64 = rng.random();
            let plan = match &shared {
                Some(p) => p.shuffled(plan_seed),
                None => build_plan(plan_seed, &config.plan)?,
            };
            let data = simulate_subject(subject_id(out.len()), &plan, &entry.profile, sim_seed)?;
            out.push(SimulatedSubject {
                data,
                profile_name: entry.name.clone(),
                profile: entry.profile,
            });
        }
    }
    Ok(out)
}
