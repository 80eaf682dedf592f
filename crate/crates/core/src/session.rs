//! Session documents: one subject's plan and percent-scale reports, as
//! exchanged with the elicitation service and stored on disk.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beta::{max_sd_for_mean, Signal};
use crate::experiment::{Origin, ReportedBelief, SubjectData, TaskRecord, TaskSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Slack on the slider cap, in percent units, for values rounded by clients.
const CAP_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("task {task_index}: {message}")]
    Task { task_index: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("session incomplete; missing {}", format_missing(.0))]
    Incomplete(Vec<MissingReport>),
}

fn format_missing(m: &[MissingReport]) -> String {
    m.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Prior,
    Posterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingReport {
    pub task_index: usize,
    pub kind: ReportKind,
}

impl fmt::Display for MissingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ReportKind::Prior => "prior",
            ReportKind::Posterior => "posterior",
        };
        write!(f, "task {} {k}", self.task_index)
    }
}

/// Draw sequence as a string of `R` (red) and `B` (blue).
pub fn signal_to_string(s: &Signal) -> String {
    s.outcomes().iter().map(|&r| if r { 'R' } else { 'B' }).collect()
}

pub fn signal_from_str(s: &str) -> Result<Signal, String> {
    s.chars()
        .map(|c| match c {
            'R' => Ok(true),
            'B' => Ok(false),
            other => Err(format!("unexpected draw {other:?}; use R or B")),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Signal::new)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTask {
    pub task_index: usize,
    pub urn_red_count: u32,
    pub seq1: String,
    pub seq2: String,
    pub is_dollar: bool,
}

/// A belief on the percent scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentReport {
    pub mean_percent: f64,
    pub sd_percent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submitted_ms: Option<u64>,
}

impl PercentReport {
    pub fn from_belief(b: &ReportedBelief) -> Self {
        PercentReport {
            mean_percent: 100.0 * b.mean(),
            sd_percent: 100.0 * b.variance().sqrt(),
            submitted_ms: None,
        }
    }

    pub fn to_belief(&self) -> ReportedBelief {
        ReportedBelief::from_moments(self.mean_percent / 100.0, self.sd_percent / 100.0)
    }

    /// Checks the report. Human reports must sit on the slider grid range
    /// (mean in [1, 99], sd up to the unimodality cap); simulated ones only
    /// need to describe some beta distribution.
    pub fn validate(&self, origin: Origin) -> Result<(), String> {
        let (m, sd) = (self.mean_percent, self.sd_percent);
        if !m.is_finite() || !sd.is_finite() {
            return Err("mean and sd must be finite".into());
        }
        if sd <= 0.0 {
            return Err(format!("sd_percent must be positive, got {sd}"));
        }
        match origin {
            Origin::Human => {
                if !(1.0..=99.0).contains(&m) {
                    return Err(format!("mean_percent must be in [1, 99], got {m}"));
                }
                let cap = 100.0 * max_sd_for_mean(m / 100.0).map_err(|e| e.to_string())?;
                if sd > cap + CAP_SLACK {
                    return Err(format!(
                        "sd_percent {sd} exceeds the cap {cap:.4} for mean {m}; beliefs must be unimodal"
                    ));
                }
            }
            Origin::Simulated => {
                if !(m > 0.0 && m < 100.0) {
                    return Err(format!("mean_percent must be in (0, 100), got {m}"));
                }
                let p = m / 100.0;
                let limit = 100.0 * (p * (1.0 - p)).sqrt();
                if sd >= limit {
                    return Err(format!("sd_percent {sd} is infeasible for mean {m}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReports {
    pub task_index: usize,
    #[serde(default)]
    pub prior: Option<PercentReport>,
    #[serde(default)]
    pub posterior: Option<PercentReport>,
    /// Set on simulated tasks where a floor was hit.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub clamped: bool,
}

impl TaskReports {
    pub fn get(&self, kind: ReportKind) -> Option<&PercentReport> {
        match kind {
            ReportKind::Prior => self.prior.as_ref(),
            ReportKind::Posterior => self.posterior.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finalized_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDocument {
    pub schema_version: u32,
    pub subject_id: String,
    pub origin: Origin,
    pub plan_seed: u64,
    pub plan: Vec<SessionTask>,
    pub reports: Vec<TaskReports>,
    #[serde(default)]
    pub timestamps: Timestamps,
}

impl SessionDocument {
    /// An empty document for `plan`, with no reports yet.
    pub fn new(subject_id: impl Into<String>, origin: Origin, plan_seed: u64, tasks: &[TaskSpec]) -> Self {
        SessionDocument {
            schema_version: SCHEMA_VERSION,
            subject_id: subject_id.into(),
            origin,
            plan_seed,
            plan: tasks
                .iter()
                .map(|t| SessionTask {
                    task_index: t.task_index,
                    urn_red_count: t.urn_red_count,
                    seq1: signal_to_string(&t.seq1),
                    seq2: signal_to_string(&t.seq2),
                    is_dollar: t.is_dollar,
                })
                .collect(),
            reports: tasks
                .iter()
                .map(|t| TaskReports {
                    task_index: t.task_index,
                    prior: None,
                    posterior: None,
                    clamped: false,
                })
                .collect(),
            timestamps: Timestamps::default(),
        }
    }

    pub fn from_subject_data(data: &SubjectData) -> Self {
        let tasks: Vec<TaskSpec> = data.records.iter().map(|r| r.task.clone()).collect();
        let mut doc = SessionDocument::new(data.subject_id.clone(), data.origin, data.plan_seed, &tasks);
        for (rep, rec) in doc.reports.iter_mut().zip(&data.records) {
            rep.prior = Some(PercentReport::from_belief(&rec.prior));
            rep.posterior = Some(PercentReport::from_belief(&rec.posterior));
            rep.clamped = rec.clamped;
        }
        doc
    }

    pub fn task_specs(&self) -> Result<Vec<TaskSpec>, SessionError> {
        self.plan
            .iter()
            .map(|t| {
                let err = |message: String| SessionError::Task {
                    task_index: t.task_index,
                    message,
                };
                Ok(TaskSpec {
                    task_index: t.task_index,
                    urn_red_count: t.urn_red_count,
                    seq1: signal_from_str(&t.seq1).map_err(|m| err(format!("seq1: {m}")))?,
                    seq2: signal_from_str(&t.seq2).map_err(|m| err(format!("seq2: {m}")))?,
                    is_dollar: t.is_dollar,
                })
            })
            .collect()
    }

    pub fn reports_for(&self, task_index: usize) -> Option<&TaskReports> {
        self.reports.iter().find(|r| r.task_index == task_index)
    }

    pub fn reports_for_mut(&mut self, task_index: usize) -> Option<&mut TaskReports> {
        self.reports.iter_mut().find(|r| r.task_index == task_index)
    }

    /// Reports not yet submitted, in task order.
    pub fn missing_reports(&self) -> Vec<MissingReport> {
        let mut out = Vec::new();
        for t in &self.plan {
            let r = self.reports_for(t.task_index);
            for kind in [ReportKind::Prior, ReportKind::Posterior] {
                if r.and_then(|r| r.get(kind)).is_none() {
                    out.push(MissingReport {
                        task_index: t.task_index,
                        kind,
                    });
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing_reports().is_empty()
    }

    /// Structural and value checks; missing reports are allowed.
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SessionError::SchemaVersion(self.schema_version));
        }
        if self.subject_id.is_empty() {
            return Err(SessionError::Invalid("subject_id is empty".into()));
        }
        if self.plan.is_empty() {
            return Err(SessionError::Invalid("plan has no tasks".into()));
        }
        let mut seen = vec![false; self.plan.len()];
        for t in &self.plan {
            let err = |message: String| SessionError::Task {
                task_index: t.task_index,
                message,
            };
            if t.task_index == 0 || t.task_index > self.plan.len() || seen[t.task_index - 1] {
                return Err(err("task indices must be unique and run from 1".into()));
            }
            seen[t.task_index - 1] = true;
            if !(1..=99).contains(&t.urn_red_count) {
                return Err(err(format!("urn_red_count must be in 1..=99, got {}", t.urn_red_count)));
            }
            let s1 = signal_from_str(&t.seq1).map_err(|m| err(format!("seq1: {m}")))?;
            let s2 = signal_from_str(&t.seq2).map_err(|m| err(format!("seq2: {m}")))?;
            if s1.n() == 0 {
                return Err(err("seq1 is empty".into()));
            }
            if s2.n() < 3 {
                return Err(err(format!("seq2 needs at least 3 draws, got {}", s2.n())));
            }
        }
        for r in &self.reports {
            if !self.plan.iter().any(|t| t.task_index == r.task_index) {
                return Err(SessionError::Invalid(format!("reports for unknown task {}", r.task_index)));
            }
            for kind in [ReportKind::Prior, ReportKind::Posterior] {
                if let Some(p) = r.get(kind) {
                    p.validate(self.origin).map_err(|message| SessionError::Task {
                        task_index: r.task_index,
                        message: format!("{}: {message}", MissingReport { task_index: r.task_index, kind }),
                    })?;
                }
            }
        }
        if self.reports.len() != self.reports.iter().map(|r| r.task_index).collect::<std::collections::BTreeSet<_>>().len() {
            return Err(SessionError::Invalid("duplicate report entries".into()));
        }
        Ok(())
    }

    /// Converts a complete, valid document for estimation.
    pub fn to_subject_data(&self) -> Result<SubjectData, SessionError> {
        self.validate()?;
        let missing = self.missing_reports();
        if !missing.is_empty() {
            return Err(SessionError::Incomplete(missing));
        }
        let records = self
            .task_specs()?
            .into_iter()
            .map(|task| {
                let r = self.reports_for(task.task_index).expect("complete");
                TaskRecord {
                    prior: r.prior.expect("complete").to_belief(),
                    posterior: r.posterior.expect("complete").to_belief(),
                    clamped: r.clamped,
                    task,
                }
            })
            .collect();
        Ok(SubjectData {
            subject_id: self.subject_id.clone(),
            plan_seed: self.plan_seed,
            origin: self.origin,
            records,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session documents serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, SessionError> {
        let doc: SessionDocument =
            serde_json::from_str(s).map_err(|e| SessionError::Invalid(format!("malformed session JSON: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }
}
