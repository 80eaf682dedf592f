use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::covariance::cluster_robust_cov;
use super::ols::fit_ols;
use super::rows::{group_by_subject, RegressionRow, RowSet};
use super::EstimationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    BaselineSuccess,
    BaselineFailure,
    CompleteSuccess,
    CompleteFailure,
    Variance,
}

impl ModelId {
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            ModelId::BaselineSuccess => &["gamma_s", "delta_s"],
            ModelId::BaselineFailure => &["gamma_f", "delta_f"],
            ModelId::CompleteSuccess => &["alpha0", "alpha_pref", "alpha_seq", "rho_s", "delta_s"],
            ModelId::CompleteFailure => &["beta0", "beta_pref", "beta_seq", "rho_f", "delta_f"],
            ModelId::Variance => &["eta", "nu"],
        }
    }

    /// Row labels used in coefficient tables.
    pub fn row_labels(self) -> &'static [&'static str] {
        match self {
            ModelId::BaselineSuccess => &["Successes", "a prior"],
            ModelId::BaselineFailure => &["Failures", "b prior"],
            ModelId::CompleteSuccess => {
                &["Successes", "Success:preference", "Success:Seq_pos", "Confirmation", "a prior"]
            }
            ModelId::CompleteFailure => {
                &["Failures", "Failures:preference", "Failures:Seq_neg", "Confirmation", "b prior"]
            }
            ModelId::Variance => &["Constant", "Bayesian variance"],
        }
    }

    /// Coefficient values of a Bayesian updater.
    pub fn bayes_values(self) -> &'static [f64] {
        match self {
            ModelId::BaselineSuccess | ModelId::BaselineFailure => &[1.0, 1.0],
            ModelId::CompleteSuccess | ModelId::CompleteFailure => &[1.0, 0.0, 0.0, 0.0, 1.0],
            ModelId::Variance => &[0.0, 1.0],
        }
    }

    pub fn response_label(self) -> &'static str {
        match self {
            ModelId::BaselineSuccess | ModelId::CompleteSuccess => "a posterior",
            ModelId::BaselineFailure | ModelId::CompleteFailure => "b posterior",
            ModelId::Variance => "Posterior variance",
        }
    }

    pub fn has_intercept(self) -> bool {
        matches!(self, ModelId::Variance)
    }

    fn regressors(self, r: &RegressionRow) -> Vec<f64> {
        match self {
            ModelId::BaselineSuccess => vec![r.k, r.a0_minus_1],
            ModelId::BaselineFailure => vec![r.n_minus_k, r.b0_minus_1],
            ModelId::CompleteSuccess => vec![r.k, r.k * r.i_pref, r.k * r.iseq_s, r.c, r.a0_minus_1],
            ModelId::CompleteFailure => {
                vec![r.n_minus_k, r.n_minus_k * r.i_pref, r.n_minus_k * r.iseq_f, r.c, r.b0_minus_1]
            }
            ModelId::Variance => vec![1.0, r.bayes_var],
        }
    }

    fn response(self, r: &RegressionRow) -> f64 {
        match self {
            ModelId::BaselineSuccess | ModelId::CompleteSuccess => r.a_post_minus_1,
            ModelId::BaselineFailure | ModelId::CompleteFailure => r.b_post_minus_1,
            ModelId::Variance => r.post_var,
        }
    }

    /// Design matrix and response for `rows`.
    pub fn design(self, rows: &[&RegressionRow]) -> (DMatrix<f64>, DVector<f64>) {
        let k = self.parameter_names().len();
        let mut x = DMatrix::zeros(rows.len(), k);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in self.regressors(r).into_iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| self.response(r)));
        (x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Population,
    Individual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    Classical,
    ClusterRobust { clusters: usize },
}

/// A fitted regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: ModelId,
    /// `None` for population fits.
    pub subject_id: Option<String>,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub covariance_kind: CovarianceKind,
    pub n_obs: usize,
    /// Degrees of freedom of the t reference distribution.
    pub df: f64,
    pub rss: f64,
    /// Total sum of squares: centered if the model has an intercept,
    /// uncentered otherwise.
    pub tss: f64,
}

impl ModelFit {
    pub fn n_coefficients(&self) -> usize {
        self.coefficients.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, EstimationError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| EstimationError::UnknownName(name.to_string()))
    }

    pub fn coef(&self, name: &str) -> Result<f64, EstimationError> {
        Ok(self.coefficients[self.index_of(name)?])
    }

    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.coefficients.len())
            .map(|i| self.covariance[i][i].max(0.0).sqrt())
            .collect()
    }
}

pub(crate) fn fit_model(
    model: ModelId,
    rows: &[&RegressionRow],
    level: Level,
) -> Result<ModelFit, EstimationError> {
    if rows.is_empty() {
        return Err(EstimationError::NoRows);
    }
    let names = model.parameter_names();
    let (x, y) = model.design(rows);
    let ols = fit_ols(&x, &y, names)?;
    let n = rows.len();
    let k = names.len();

    let (cov, kind, df) = match level {
        Level::Individual => (ols.classical_covariance(), CovarianceKind::Classical, (n - k) as f64),
        Level::Population => {
            let mut labels: Vec<&str> = Vec::new();
            let ids: Vec<usize> = rows
                .iter()
                .map(|r| match labels.iter().position(|l| *l == r.subject_id) {
                    Some(i) => i,
                    None => {
                        labels.push(&r.subject_id);
                        labels.len() - 1
                    }
                })
                .collect();
            let g = labels.len();
            let cov = cluster_robust_cov(&x, &ols.residuals, &ids)?;
            (cov, CovarianceKind::ClusterRobust { clusters: g }, (g - 1) as f64)
        }
    };

    let tss = if model.has_intercept() {
        let mean = y.mean();
        y.iter().map(|v| (v - mean).powi(2)).sum()
    } else {
        y.norm_squared()
    };
    let subject_id = match level {
        Level::Individual => Some(rows[0].subject_id.clone()),
        Level::Population => None,
    };
    Ok(ModelFit {
        model,
        subject_id,
        names: names.iter().map(|s| s.to_string()).collect(),
        coefficients: ols.coefficients.iter().copied().collect(),
        covariance: (0..k).map(|i| (0..k).map(|j| cov[(i, j)]).collect()).collect(),
        covariance_kind: kind,
        n_obs: n,
        df,
        rss: ols.rss,
        tss,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFits {
    pub success: ModelFit,
    pub failure: ModelFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteFits {
    pub success: ModelFit,
    pub failure: ModelFit,
    pub variance: ModelFit,
}

/// One subject's fits; a failure here does not abort the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectFit<T> {
    pub subject_id: String,
    pub result: Result<T, EstimationError>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevelFits<T> {
    Population(Result<T, EstimationError>),
    Individual(Vec<SubjectFit<T>>),
}

fn all_rows(rows: &RowSet) -> Vec<&RegressionRow> {
    rows.rows.iter().collect()
}

fn baseline_on(rows: &[&RegressionRow], level: Level) -> Result<BaselineFits, EstimationError> {
    Ok(BaselineFits {
        success: fit_model(ModelId::BaselineSuccess, rows, level)?,
        failure: fit_model(ModelId::BaselineFailure, rows, level)?,
    })
}

fn complete_on(rows: &[&RegressionRow], level: Level) -> Result<CompleteFits, EstimationError> {
    Ok(CompleteFits {
        success: fit_model(ModelId::CompleteSuccess, rows, level)?,
        failure: fit_model(ModelId::CompleteFailure, rows, level)?,
        variance: fit_model(ModelId::Variance, rows, level)?,
    })
}

fn per_subject<T>(
    rows: &RowSet,
    fit: impl Fn(&[&RegressionRow]) -> Result<T, EstimationError>,
) -> Vec<SubjectFit<T>> {
    group_by_subject(&rows.rows)
        .into_iter()
        .map(|(id, subject_rows)| SubjectFit {
            subject_id: id.to_string(),
            result: fit(&subject_rows),
        })
        .collect()
}

pub fn fit_baseline_population(rows: &RowSet) -> Result<BaselineFits, EstimationError> {
    baseline_on(&all_rows(rows), Level::Population)
}

pub fn fit_baseline_individual(rows: &RowSet) -> Vec<SubjectFit<BaselineFits>> {
    per_subject(rows, |r| baseline_on(r, Level::Individual))
}

pub fn fit_complete_population(rows: &RowSet) -> Result<CompleteFits, EstimationError> {
    complete_on(&all_rows(rows), Level::Population)
}

pub fn fit_complete_individual(rows: &RowSet) -> Vec<SubjectFit<CompleteFits>> {
    per_subject(rows, |r| complete_on(r, Level::Individual))
}

pub fn fit_baseline(rows: &RowSet, level: Level) -> LevelFits<BaselineFits> {
    match level {
        Level::Population => LevelFits::Population(fit_baseline_population(rows)),
        Level::Individual => LevelFits::Individual(fit_baseline_individual(rows)),
    }
}

pub fn fit_complete(rows: &RowSet, level: Level) -> LevelFits<CompleteFits> {
    match level {
        Level::Population => LevelFits::Population(fit_complete_population(rows)),
        Level::Individual => LevelFits::Individual(fit_complete_individual(rows)),
    }
}
