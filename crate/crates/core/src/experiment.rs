//! Urn experiment plans and synthetic subjects.
//!
//! A plan has 30 tasks. Each task picks one of 99 urns (1..=99 red balls out
//! of 100) uniformly with replacement, shows a first sequence of 1, 2 or 3
//! draws, asks for a prior, shows a second sequence of 3, 5 or 7 draws and
//! asks for a posterior. Half the tasks are "dollar" tasks that pay the urn's
//! red count in cents.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beta::{
    confirmation_measure, distort_variance, distorted_update, raw_shapes_from_moments, BetaBelief,
    BetaError, Clamped, DistortionParams, Signal, CONFIRMATION_EPS,
};

pub const N_TASKS: usize = 30;
pub const DOLLAR_TASKS: usize = 15;
pub const N_URNS: u32 = 99;
pub const SEQ1_LENGTHS: [usize; 3] = [1, 2, 3];
pub const SEQ2_LENGTHS: [usize; 3] = [3, 5, 7];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("plan config: {0}")]
    Config(String),
    #[error("streak flags need at least 3 draws, got {0}")]
    SequenceTooShort(usize),
    #[error("invalid bias profile: {0}")]
    Profile(String),
    #[error(transparent)]
    Beta(#[from] BetaError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// 1-based position in the subject's task order.
    pub task_index: usize,
    pub urn_red_count: u32,
    pub seq1: Signal,
    pub seq2: Signal,
    pub is_dollar: bool,
}

impl TaskSpec {
    pub fn urn_red_share(&self) -> f64 {
        self.urn_red_count as f64 / 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub seed: u64,
    pub tasks: Vec<TaskSpec>,
}

impl ExperimentPlan {
    /// Same tasks in a seeded random order, renumbered 1..=n.
    pub fn shuffled(&self, seed: u64) -> ExperimentPlan {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tasks = self.tasks.clone();
        tasks.shuffle(&mut rng);
        for (i, t) in tasks.iter_mut().enumerate() {
            t.task_index = i + 1;
        }
        ExperimentPlan {
            seed: self.seed,
            tasks,
        }
    }

    pub fn dollar_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.is_dollar).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub n_tasks: usize,
    pub dollar_count: usize,
    /// Permit a dollar count other than 15.
    pub allow_nonstandard_dollar_count: bool,
    /// Pin every first sequence to this length instead of sampling it.
    pub seq1_length: Option<usize>,
    /// Pin every second sequence to this length instead of sampling it.
    pub seq2_length: Option<usize>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            n_tasks: N_TASKS,
            dollar_count: DOLLAR_TASKS,
            allow_nonstandard_dollar_count: false,
            seq1_length: None,
            seq2_length: None,
        }
    }
}

impl PlanConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.dollar_count != DOLLAR_TASKS && !self.allow_nonstandard_dollar_count {
            return Err(ExperimentError::Config(format!(
                "{} dollar tasks requested; the protocol uses {DOLLAR_TASKS} (set the override flag to change it)",
                self.dollar_count
            )));
        }
        if self.dollar_count > self.n_tasks {
            return Err(ExperimentError::Config(format!(
                "{} dollar tasks exceed {} tasks",
                self.dollar_count, self.n_tasks
            )));
        }
        if self.n_tasks == 0 {
            return Err(ExperimentError::Config("plan needs at least one task".into()));
        }
        if let Some(n) = self.seq1_length {
            if !SEQ1_LENGTHS.contains(&n) {
                return Err(ExperimentError::Config(format!("first sequence length {n} not in {SEQ1_LENGTHS:?}")));
            }
        }
        if let Some(n) = self.seq2_length {
            if !SEQ2_LENGTHS.contains(&n) {
                return Err(ExperimentError::Config(format!("second sequence length {n} not in {SEQ2_LENGTHS:?}")));
            }
        }
        Ok(())
    }
}

fn draw_signal<R: Rng>(rng: &mut R, n: usize, p: f64) -> Signal {
    Signal::new((0..n).map(|_| rng.random::<f64>() < p).collect())
}

/// Builds a plan deterministically from `seed`.
pub fn build_plan(seed: u64, config: &PlanConfig) -> Result<ExperimentPlan, ExperimentError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dollar_slots = rand::seq::index::sample(&mut rng, config.n_tasks, config.dollar_count);
    let mut is_dollar = vec![false; config.n_tasks];
    for i in dollar_slots.iter() {
        is_dollar[i] = true;
    }
    let tasks = (0..config.n_tasks)
        .map(|i| {
            let urn_red_count = rng.random_range(1..=N_URNS);
            let p = urn_red_count as f64 / 100.0;
            let n1 = config
                .seq1_length
                .unwrap_or_else(|| *SEQ1_LENGTHS.choose(&mut rng).expect("non-empty"));
            let n2 = config
                .seq2_length
                .unwrap_or_else(|| *SEQ2_LENGTHS.choose(&mut rng).expect("non-empty"));
            let seq1 = draw_signal(&mut rng, n1, p);
            let seq2 = draw_signal(&mut rng, n2, p);
            TaskSpec {
                task_index: i + 1,
                urn_red_count,
                seq1,
                seq2,
                is_dollar: is_dollar[i],
            }
        })
        .collect();
    Ok(ExperimentPlan { seed, tasks })
}

/// Streak indicators for the last three draws of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeqFlags {
    /// Last three draws were red.
    pub success: bool,
    /// Last three draws were blue.
    pub failure: bool,
}

pub fn seq_flags(seq2: &Signal) -> Result<SeqFlags, ExperimentError> {
    let o = seq2.outcomes();
    if o.len() < 3 {
        return Err(ExperimentError::SequenceTooShort(o.len()));
    }
    let tail = &o[o.len() - 3..];
    Ok(SeqFlags {
        success: tail.iter().all(|&r| r),
        failure: tail.iter().all(|&r| !r),
    })
}

/// Distortion parameters of a synthetic agent.
///
/// The success weight in a task is `alpha0 + alpha_pref * dollar +
/// alpha_seq * red_streak`; the failure weight is built the same way from
/// the `beta*` fields with the blue streak. `nu`/`eta` distort the posterior
/// variance; `noise_sd` is the scale of additive Gaussian noise on the
/// reported shape parameters. Fields missing from JSON take their Bayesian
/// values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasProfile {
    pub alpha0: f64,
    pub alpha_pref: f64,
    pub alpha_seq: f64,
    pub beta0: f64,
    pub beta_pref: f64,
    pub beta_seq: f64,
    pub rho_s: f64,
    pub rho_f: f64,
    pub delta_s: f64,
    pub delta_f: f64,
    pub nu: f64,
    pub eta: f64,
    pub noise_sd: f64,
}

impl BiasProfile {
    pub const BAYESIAN: BiasProfile = BiasProfile {
        alpha0: 1.0,
        alpha_pref: 0.0,
        alpha_seq: 0.0,
        beta0: 1.0,
        beta_pref: 0.0,
        beta_seq: 0.0,
        rho_s: 0.0,
        rho_f: 0.0,
        delta_s: 1.0,
        delta_f: 1.0,
        nu: 1.0,
        eta: 0.0,
        noise_sd: 0.0,
    };

    pub fn with_noise(self, noise_sd: f64) -> Self {
        BiasProfile { noise_sd, ..self }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let all = [
            self.alpha0,
            self.alpha_pref,
            self.alpha_seq,
            self.beta0,
            self.beta_pref,
            self.beta_seq,
            self.rho_s,
            self.rho_f,
            self.delta_s,
            self.delta_f,
            self.nu,
            self.eta,
            self.noise_sd,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ExperimentError::Profile("all parameters must be finite".into()));
        }
        if self.nu <= 0.0 {
            return Err(ExperimentError::Profile(format!("nu must be positive, got {}", self.nu)));
        }
        if self.noise_sd < 0.0 {
            return Err(ExperimentError::Profile(format!(
                "noise_sd must be non-negative, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }

    /// Effective distortion for one update.
    pub fn distortion(&self, is_dollar: bool, flags: SeqFlags) -> DistortionParams {
        let pref = if is_dollar { 1.0 } else { 0.0 };
        let streak_s = if flags.success { 1.0 } else { 0.0 };
        let streak_f = if flags.failure { 1.0 } else { 0.0 };
        DistortionParams {
            alpha: self.alpha0 + self.alpha_pref * pref + self.alpha_seq * streak_s,
            beta: self.beta0 + self.beta_pref * pref + self.beta_seq * streak_f,
            rho_s: self.rho_s,
            rho_f: self.rho_f,
            delta_s: self.delta_s,
            delta_f: self.delta_f,
        }
    }

    fn distorts_variance(&self) -> bool {
        self.nu != 1.0 || self.eta != 0.0
    }
}

impl Default for BiasProfile {
    fn default() -> Self {
        Self::BAYESIAN
    }
}

/// A reported belief as raw shape parameters. Unlike [`BetaBelief`] the
/// shapes are not checked: reports converted from percent sliders can come
/// out non-positive and must survive until the exclusion rule drops them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportedBelief {
    pub a: f64,
    pub b: f64,
}

impl ReportedBelief {
    pub fn from_moments(mean: f64, sd: f64) -> Self {
        let (a, b) = raw_shapes_from_moments(mean, sd);
        ReportedBelief { a, b }
    }

    pub fn belief(&self) -> Result<BetaBelief, BetaError> {
        BetaBelief::new(self.a, self.b)
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }
}

impl From<BetaBelief> for ReportedBelief {
    fn from(b: BetaBelief) -> Self {
        ReportedBelief { a: b.a(), b: b.b() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Simulated,
    Human,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: TaskSpec,
    /// Reported after the first sequence.
    pub prior: ReportedBelief,
    /// Reported after the second sequence.
    pub posterior: ReportedBelief,
    /// A shape or variance floor was hit while simulating this task.
    #[serde(default)]
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectData {
    pub subject_id: String,
    pub plan_seed: u64,
    pub origin: Origin,
    pub records: Vec<TaskRecord>,
}

impl SubjectData {
    pub fn clamp_count(&self) -> usize {
        self.records.iter().filter(|r| r.clamped).count()
    }
}

struct Noise {
    dist: Option<Normal<f64>>,
}

impl Noise {
    fn new(sd: f64) -> Result<Self, ExperimentError> {
        let dist = if sd > 0.0 {
            Some(Normal::new(0.0, sd).map_err(|e| ExperimentError::Profile(e.to_string()))?)
        } else {
            None
        };
        Ok(Noise { dist })
    }

    /// Adds noise to `(a - 1)` and `(b - 1)`, flooring the result.
    fn apply<R: Rng>(&self, rng: &mut R, belief: BetaBelief) -> Clamped<BetaBelief> {
        match &self.dist {
            None => Clamped {
                value: belief,
                clamped: false,
            },
            Some(normal) => {
                let a = 1.0 + (belief.a() - 1.0) + normal.sample(rng);
                let b = 1.0 + (belief.b() - 1.0) + normal.sample(rng);
                BetaBelief::floored(a, b)
            }
        }
    }
}

/// Replaces the belief's variance with `eta + nu * variance`, keeping its
/// mean.
pub fn apply_confidence(belief: BetaBelief, nu: f64, eta: f64) -> Clamped<BetaBelief> {
    let (mean, var) = belief.moments();
    let target = distort_variance(var, nu, eta);
    // A beta with this mean needs variance below mean(1 - mean).
    let cap = mean * (1.0 - mean);
    let (var, capped) = if target.value < cap {
        (target.value, false)
    } else {
        (cap * (1.0 - 1e-9), true)
    };
    let (a, b) = raw_shapes_from_moments(mean, var.sqrt());
    let out = BetaBelief::floored(a, b);
    Clamped {
        value: out.value,
        clamped: out.clamped || target.clamped || capped,
    }
}

/// Simulates one subject working through `plan`.
///
/// The prior report distorts the uniform belief with the first sequence. The
/// posterior report distorts the subject's own noisy prior with the second
/// sequence, using streak and dollar-dependent weights, then applies the
/// `nu`/`eta` variance distortion at fixed mean. Noise goes on the shifted
/// shapes of each report last.
pub fn simulate_subject(
    subject_id: impl Into<String>,
    plan: &ExperimentPlan,
    profile: &BiasProfile,
    seed: u64,
) -> Result<SubjectData, ExperimentError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Noise::new(profile.noise_sd)?;
    let mut records = Vec::with_capacity(plan.tasks.len());

    for task in &plan.tasks {
        let uniform = BetaBelief::UNIFORM;
        let d1 = profile.distortion(task.is_dollar, SeqFlags::default());
        let c1 = confirmation_measure(&uniform, &task.seq1, CONFIRMATION_EPS)?;
        let prior_model = distorted_update(&uniform, &task.seq1, &d1, c1);
        let prior = noise.apply(&mut rng, prior_model.value);

        let flags = seq_flags(&task.seq2)?;
        let d2 = profile.distortion(task.is_dollar, flags);
        let c2 = confirmation_measure(&prior.value, &task.seq2, CONFIRMATION_EPS)?;
        let mut post = distorted_update(&prior.value, &task.seq2, &d2, c2);
        if profile.distorts_variance() {
            let conf = apply_confidence(post.value, profile.nu, profile.eta);
            post = Clamped {
                value: conf.value,
                clamped: post.clamped || conf.clamped,
            };
        }
        let posterior = noise.apply(&mut rng, post.value);

        records.push(TaskRecord {
            task: task.clone(),
            prior: prior.value.into(),
            posterior: posterior.value.into(),
            clamped: prior_model.clamped || prior.clamped || post.clamped || posterior.clamped,
        });
    }

    Ok(SubjectData {
        subject_id: subject_id.into(),
        plan_seed: plan.seed,
        origin: Origin::Simulated,
        records,
    })
}
