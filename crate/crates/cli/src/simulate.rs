use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use belief_core::experiment::{BiasProfile, Origin, PlanConfig};
use belief_core::population::{simulate_population, PopulationConfig, ProfileMixture};
use belief_core::session::SessionDocument;
use serde::{Deserialize, Serialize};

use crate::io::{write_file, write_json};

/// Noise used when no profile file is given.
pub const DEFAULT_NOISE_SD: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub seed: u64,
    pub subjects: usize,
    pub mixture: ProfileMixture,
    pub fixed_plan: bool,
    pub out: PathBuf,
}

/// Ground truth for a simulated batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub n_subjects: usize,
    pub fixed_plan: bool,
    pub mixture: ProfileMixture,
    pub subjects: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub profile_name: String,
    pub profile: BiasProfile,
    pub plan_seed: u64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub subject_id: String,
    pub origin: Origin,
    pub file: String,
}

pub fn default_mixture() -> ProfileMixture {
    ProfileMixture::single("bayesian", BiasProfile::BAYESIAN.with_noise(DEFAULT_NOISE_SD))
}

/// Reads a profile mixture: `{"entries": [{"name", "weight", "profile"}]}`.
pub fn load_mixture(path: &Path) -> Result<ProfileMixture> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mixture: ProfileMixture =
        serde_json::from_str(&text).with_context(|| format!("parsing profile mixture {}", path.display()))?;
    mixture.validate()?;
    Ok(mixture)
}

/// Writes `sessions/<id>.json` per subject plus `manifest.json` and
/// `index.json` under `out`.
pub fn run(opts: &SimulateOptions) -> Result<Manifest> {
    let config = PopulationConfig {
        seed: opts.seed,
        n_subjects: opts.subjects,
        fixed_plan: opts.fixed_plan,
        plan: PlanConfig::default(),
        mixture: opts.mixture.clone(),
    };
    let subjects = simulate_population(&config)?;

    let mut entries = Vec::with_capacity(subjects.len());
    let mut index = Vec::with_capacity(subjects.len());
    for s in &subjects {
        let file = format!("sessions/{}.json", s.data.subject_id);
        let doc = SessionDocument::from_subject_data(&s.data);
        write_file(&opts.out.join(&file), doc.to_json() + "\n")?;
        entries.push(ManifestEntry {
            subject_id: s.data.subject_id.clone(),
            profile_name: s.profile_name.clone(),
            profile: s.profile,
            plan_seed: s.data.plan_seed,
            file: file.clone(),
        });
        index.push(IndexEntry {
            subject_id: s.data.subject_id.clone(),
            origin: s.data.origin,
            file,
        });
    }
    let manifest = Manifest {
        seed: opts.seed,
        n_subjects: opts.subjects,
        fixed_plan: opts.fixed_plan,
        mixture: opts.mixture.clone(),
        subjects: entries,
    };
    write_json(&opts.out.join("manifest.json"), &manifest)?;
    write_json(&opts.out.join("index.json"), &index)?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}
