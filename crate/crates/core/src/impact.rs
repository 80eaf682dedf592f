//! Bias-specific counterfactual posteriors and their distance from Bayes.
//!
//! For one detected bias, every updating channel is held at its Bayesian
//! value except the one the bias acts on, which takes the estimated value.
//! The impact of the bias on a task is the absolute gap between the mean
//! (and variance) of that counterfactual posterior and the Bayesian one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beta::{BetaBelief, Clamped, SHAPE_FLOOR};
use crate::estimation::{
    BiasKind, BiasReport, CompleteFits, EstimationError, ModelFit, RegressionRow, RowSet, Side,
    SubjectFit,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImpactError {
    #[error("{kind:?} does not apply to task {task_index}: {reason}")]
    NotApplicable {
        kind: BiasKind,
        task_index: usize,
        reason: &'static str,
    },
    #[error("{kind:?} needs a side")]
    MissingSide { kind: BiasKind },
    #[error("no fitted coefficient among {0:?}")]
    MissingCoefficient(Vec<&'static str>),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

fn coef(fits: &[&ModelFit], candidates: &[&'static str]) -> Result<f64, ImpactError> {
    for name in candidates {
        for f in fits {
            if let Ok(v) = f.coef(name) {
                return Ok(v);
            }
        }
    }
    Err(ImpactError::MissingCoefficient(candidates.to_vec()))
}

/// Whether the bias's trigger holds on this task.
pub fn applies(row: &RegressionRow, kind: BiasKind, side: Option<Side>) -> bool {
    match kind {
        BiasKind::Optimism | BiasKind::Pessimism | BiasKind::GoodNews | BiasKind::BadNews => row.i_pref == 1.0,
        BiasKind::HotHand | BiasKind::GamblersFallacy => match side {
            Some(Side::Success) => row.iseq_s == 1.0,
            Some(Side::Failure) => row.iseq_f == 1.0,
            _ => row.iseq_s == 1.0 || row.iseq_f == 1.0,
        },
        _ => true,
    }
}

fn floor_shape(v: f64, clamped: &mut bool) -> f64 {
    if v <= 0.0 {
        *clamped = true;
        SHAPE_FLOOR
    } else {
        v
    }
}

/// Counterfactual posterior shapes `(a_bias, b_bias)` with only `kind`
/// acting on `side`. Non-positive results are floored at a small epsilon.
///
/// Confidence biases act on the variance only and return the Bayesian
/// shapes.
pub fn bias_specific_shape(
    row: &RegressionRow,
    fits: &[&ModelFit],
    kind: BiasKind,
    side: Option<Side>,
) -> Result<Clamped<(f64, f64)>, ImpactError> {
    if !applies(row, kind, side) {
        let reason = match kind {
            BiasKind::HotHand | BiasKind::GamblersFallacy => "no streak of three",
            _ => "not a dollar urn",
        };
        return Err(ImpactError::NotApplicable {
            kind,
            task_index: row.task_index,
            reason,
        });
    }
    let (a0, b0) = (row.a0(), row.b0());
    let (k, f, c) = (row.k, row.n_minus_k, row.c);
    let (a_n, b_n) = row.bayes_shapes();

    let success = |w: f64| (w * k + a0, b_n);
    let failure = |w: f64| (a_n, w * f + b0);
    let sided = |side: Option<Side>| match side {
        Some(Side::Success) => Ok(true),
        Some(Side::Failure) => Ok(false),
        _ => Err(ImpactError::MissingSide { kind }),
    };

    let (a, b) = match kind {
        BiasKind::Overinference | BiasKind::Underinference | BiasKind::Against => {
            if sided(side)? {
                success(coef(fits, &["alpha0", "gamma_s"])?)
            } else {
                failure(coef(fits, &["beta0", "gamma_f"])?)
            }
        }
        BiasKind::BaseRateOveruse | BiasKind::BaseRateNeglect => {
            if sided(side)? {
                (k + coef(fits, &["delta_s"])? * (a0 - 1.0) + 1.0, b_n)
            } else {
                (a_n, f + coef(fits, &["delta_f"])? * (b0 - 1.0) + 1.0)
            }
        }
        BiasKind::Confirmation | BiasKind::Disconfirmation => {
            if sided(side)? {
                (k + coef(fits, &["rho_s"])? * c + a0, b_n)
            } else {
                (a_n, f + coef(fits, &["rho_f"])? * c + b0)
            }
        }
        BiasKind::Optimism | BiasKind::Pessimism => {
            if sided(side)? {
                success(coef(fits, &["alpha0"])? + coef(fits, &["alpha_pref"])?)
            } else {
                failure(coef(fits, &["beta0"])? + coef(fits, &["beta_pref"])?)
            }
        }
        BiasKind::HotHand | BiasKind::GamblersFallacy => {
            if sided(side)? {
                success(coef(fits, &["alpha0"])? + coef(fits, &["alpha_seq"])?)
            } else {
                failure(coef(fits, &["beta0"])? + coef(fits, &["beta_seq"])?)
            }
        }
        BiasKind::GoodNews | BiasKind::BadNews => (
            (1.0 + coef(fits, &["alpha_pref"])?) * k + a0,
            (1.0 + coef(fits, &["beta_pref"])?) * f + b0,
        ),
        BiasKind::Overconfidence | BiasKind::Underconfidence => (a_n, b_n),
    };
    let mut clamped = false;
    let a = floor_shape(a, &mut clamped);
    let b = floor_shape(b, &mut clamped);
    Ok(Clamped {
        value: (a, b),
        clamped,
    })
}

/// Impact of one bias on one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskImpact {
    pub task_index: usize,
    pub a_bias: f64,
    pub b_bias: f64,
    pub e_bayes: f64,
    pub var_bayes: f64,
    pub e_bias: f64,
    pub var_bias: f64,
    pub delta_e: f64,
    pub delta_var: f64,
    pub clamped: bool,
}

/// `(|E_n - E_bias|, |Var_n - Var_bias|)` for one task.
pub fn delta_measures(
    row: &RegressionRow,
    fits: &[&ModelFit],
    kind: BiasKind,
    side: Option<Side>,
) -> Result<TaskImpact, ImpactError> {
    let shapes = bias_specific_shape(row, fits, kind, side)?;
    let (a_n, b_n) = row.bayes_shapes();
    let bayes = BetaBelief::new(a_n, b_n).map_err(|_| ImpactError::NotApplicable {
        kind,
        task_index: row.task_index,
        reason: "non-positive Bayesian posterior",
    })?;
    let (e_bayes, var_bayes) = bayes.moments();
    let (a_bias, b_bias) = shapes.value;
    let (e_bias, var_bias) = match kind {
        BiasKind::Overconfidence | BiasKind::Underconfidence => {
            let eta = coef(fits, &["eta"])?;
            let nu = coef(fits, &["nu"])?;
            (e_bayes, eta + nu * var_bayes)
        }
        _ => BetaBelief::new(a_bias, b_bias)
            .expect("floored shapes are positive")
            .moments(),
    };
    Ok(TaskImpact {
        task_index: row.task_index,
        a_bias,
        b_bias,
        e_bayes,
        var_bayes,
        e_bias,
        var_bias,
        delta_e: (e_bayes - e_bias).abs(),
        delta_var: (var_bayes - var_bias).abs(),
        clamped: shapes.clamped,
    })
}

/// All task impacts of one detected bias for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasImpact {
    pub subject_id: String,
    pub kind: BiasKind,
    pub side: Option<Side>,
    pub tasks: Vec<TaskImpact>,
}

impl BiasImpact {
    pub fn clamped_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.clamped).count()
    }

    /// Mean `(delta_e, delta_var)` over tasks, optionally skipping clamped
    /// ones. `None` when nothing is left to average.
    pub fn gross(&self, include_clamped: bool) -> Option<(f64, f64)> {
        let used: Vec<_> = self.tasks.iter().filter(|t| include_clamped || !t.clamped).collect();
        if used.is_empty() {
            return None;
        }
        let n = used.len() as f64;
        Some((
            used.iter().map(|t| t.delta_e).sum::<f64>() / n,
            used.iter().map(|t| t.delta_var).sum::<f64>() / n,
        ))
    }
}

fn sides_of(side: Option<Side>) -> Vec<Option<Side>> {
    match side {
        Some(Side::Both) => vec![Some(Side::Success), Some(Side::Failure)],
        other => vec![other],
    }
}

/// Impacts of every bias detected in `report`, over the tasks where each
/// bias applies. Subjects without a successful fit are skipped.
pub fn compute_impacts(rows: &RowSet, fits: &[SubjectFit<CompleteFits>], report: &BiasReport) -> Vec<BiasImpact> {
    let by_subject = rows.by_subject();
    let mut out = Vec::new();
    for class in &report.subjects {
        let Some(Ok(cf)) = fits
            .iter()
            .find(|f| f.subject_id == class.subject_id)
            .map(|f| f.result.as_ref())
        else {
            continue;
        };
        let Some((_, subject_rows)) = by_subject.iter().find(|(id, _)| *id == class.subject_id) else {
            continue;
        };
        let set = [&cf.success, &cf.failure, &cf.variance];
        for bias in &class.biases {
            for side in sides_of(bias.side) {
                let tasks = subject_rows
                    .iter()
                    .filter(|r| applies(r, bias.kind, side))
                    .filter_map(|r| delta_measures(r, &set, bias.kind, side).ok())
                    .collect();
                out.push(BiasImpact {
                    subject_id: class.subject_id.clone(),
                    kind: bias.kind,
                    side,
                    tasks,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateOptions {
    pub include_clamped: bool,
}

/// One bias row of the gross and net tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactRow {
    pub kind: BiasKind,
    /// Subjects in which the bias was significant.
    pub significance_count: usize,
    /// (subject, task) pairs averaged.
    pub pairs: usize,
    pub clamped: usize,
    pub gross_delta_e: f64,
    pub gross_delta_var: f64,
    pub net_delta_e: f64,
    pub net_delta_var: f64,
    /// Net values divided by the largest net value across biases.
    pub normalized_net_delta_e: f64,
    pub normalized_net_delta_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactTable {
    pub rows: Vec<ImpactRow>,
}

impl ImpactTable {
    pub fn get(&self, kind: BiasKind) -> &ImpactRow {
        self.rows.iter().find(|r| r.kind == kind).expect("every kind has a row")
    }

    /// Kinds ordered by gross mean impact, largest first.
    pub fn ranking_by_gross_e(&self) -> Vec<BiasKind> {
        let mut rows: Vec<_> = self.rows.iter().filter(|r| r.pairs > 0).collect();
        rows.sort_by(|a, b| b.gross_delta_e.total_cmp(&a.gross_delta_e));
        rows.into_iter().map(|r| r.kind).collect()
    }
}

/// Gross means over all applicable (subject, task) pairs per bias, and net
/// values weighted by the number of subjects where the bias was significant.
/// Every bias kind gets a row, with zeros when it never occurred.
pub fn aggregate(impacts: &[BiasImpact], report: &BiasReport, options: AggregateOptions) -> ImpactTable {
    #[derive(Default)]
    struct Acc {
        pairs: usize,
        clamped: usize,
        sum_e: f64,
        sum_var: f64,
    }
    let mut acc: BTreeMap<BiasKind, Acc> = BTreeMap::new();
    for imp in impacts {
        let a = acc.entry(imp.kind).or_default();
        for t in &imp.tasks {
            if t.clamped {
                a.clamped += 1;
                if !options.include_clamped {
                    continue;
                }
            }
            a.pairs += 1;
            a.sum_e += t.delta_e;
            a.sum_var += t.delta_var;
        }
    }
    let mut rows: Vec<ImpactRow> = BiasKind::ALL
        .iter()
        .map(|&kind| {
            let a = acc.remove(&kind).unwrap_or_default();
            let (ge, gv) = if a.pairs > 0 {
                (a.sum_e / a.pairs as f64, a.sum_var / a.pairs as f64)
            } else {
                (0.0, 0.0)
            };
            let count = report.count(kind);
            ImpactRow {
                kind,
                significance_count: count,
                pairs: a.pairs,
                clamped: a.clamped,
                gross_delta_e: ge,
                gross_delta_var: gv,
                net_delta_e: ge * count as f64,
                net_delta_var: gv * count as f64,
                normalized_net_delta_e: 0.0,
                normalized_net_delta_var: 0.0,
            }
        })
        .collect();
    let max_e = rows.iter().map(|r| r.net_delta_e).fold(0.0, f64::max);
    let max_var = rows.iter().map(|r| r.net_delta_var).fold(0.0, f64::max);
    for r in &mut rows {
        if max_e > 0.0 {
            r.normalized_net_delta_e = r.net_delta_e / max_e;
        }
        if max_var > 0.0 {
            r.normalized_net_delta_var = r.net_delta_var / max_var;
        }
    }
    ImpactTable { rows }
}
