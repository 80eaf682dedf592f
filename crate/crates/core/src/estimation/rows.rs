use serde::{Deserialize, Serialize};

use crate::beta::{bayes_update, confirmation_measure, CONFIRMATION_EPS};
use crate::experiment::{seq_flags, SubjectData};

use super::EstimationError;

/// One (subject, task) observation of the regressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub subject_id: String,
    pub task_index: usize,
    /// Red draws in the second sequence.
    pub k: f64,
    pub n_minus_k: f64,
    pub a0_minus_1: f64,
    pub b0_minus_1: f64,
    /// Confirmation measure of the second sequence under the reported prior.
    pub c: f64,
    pub i_pref: f64,
    pub iseq_s: f64,
    pub iseq_f: f64,
    pub a_post_minus_1: f64,
    pub b_post_minus_1: f64,
    /// Variance of the conjugate posterior from the reported prior.
    pub bayes_var: f64,
    /// Variance of the reported posterior.
    pub post_var: f64,
}

impl RegressionRow {
    pub fn a0(&self) -> f64 {
        self.a0_minus_1 + 1.0
    }

    pub fn b0(&self) -> f64 {
        self.b0_minus_1 + 1.0
    }

    /// Conjugate posterior shapes `(a0 + k, b0 + n - k)`.
    pub fn bayes_shapes(&self) -> (f64, f64) {
        (self.a0() + self.k, self.b0() + self.n_minus_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// Reported prior has a non-positive shape parameter.
    NonPositivePrior,
    /// Reported posterior has a non-positive shape parameter.
    NonPositivePosterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub subject_id: String,
    pub task_index: usize,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RowSet {
    pub rows: Vec<RegressionRow>,
    pub exclusions: Vec<Exclusion>,
}

impl RowSet {
    /// Rows grouped by subject, in first-seen order.
    pub fn by_subject(&self) -> Vec<(&str, Vec<&RegressionRow>)> {
        group_by_subject(&self.rows)
    }
}

pub(crate) fn group_by_subject(rows: &[RegressionRow]) -> Vec<(&str, Vec<&RegressionRow>)> {
    let mut out: Vec<(&str, Vec<&RegressionRow>)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(id, _)| *id == r.subject_id) {
            Some((_, v)) => v.push(r),
            None => out.push((&r.subject_id, vec![r])),
        }
    }
    out
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Builds regression rows, recomputing the confirmation measure from each
/// reported prior. Tasks whose reported prior (or posterior) has a
/// non-positive shape are dropped and listed in `exclusions`.
pub fn build_rows(subjects: &[SubjectData]) -> Result<RowSet, EstimationError> {
    let mut set = RowSet::default();
    for s in subjects {
        for rec in &s.records {
            let schema = |message: String| EstimationError::Schema {
                subject: s.subject_id.clone(),
                message,
            };
            let exclude = |reason| Exclusion {
                subject_id: s.subject_id.clone(),
                task_index: rec.task.task_index,
                reason,
            };
            let prior = match rec.prior.belief() {
                Ok(b) => b,
                Err(_) => {
                    set.exclusions.push(exclude(ExclusionReason::NonPositivePrior));
                    continue;
                }
            };
            let posterior = match rec.posterior.belief() {
                Ok(b) => b,
                Err(_) => {
                    set.exclusions.push(exclude(ExclusionReason::NonPositivePosterior));
                    continue;
                }
            };
            let seq2 = &rec.task.seq2;
            let flags = seq_flags(seq2).map_err(|e| schema(format!("task {}: {e}", rec.task.task_index)))?;
            let c = confirmation_measure(&prior, seq2, CONFIRMATION_EPS)
                .map_err(|e| schema(format!("task {}: {e}", rec.task.task_index)))?;
            let bayes = bayes_update(&prior, seq2);
            set.rows.push(RegressionRow {
                subject_id: s.subject_id.clone(),
                task_index: rec.task.task_index,
                k: seq2.k() as f64,
                n_minus_k: seq2.failures() as f64,
                a0_minus_1: prior.a() - 1.0,
                b0_minus_1: prior.b() - 1.0,
                c,
                i_pref: indicator(rec.task.is_dollar),
                iseq_s: indicator(flags.success),
                iseq_f: indicator(flags.failure),
                a_post_minus_1: posterior.a() - 1.0,
                b_post_minus_1: posterior.b() - 1.0,
                bayes_var: bayes.variance(),
                post_var: posterior.variance(),
            });
        }
    }
    Ok(set)
}
