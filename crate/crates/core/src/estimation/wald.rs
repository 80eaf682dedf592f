use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::models::ModelFit;
use super::EstimationError;

/// Standard errors this small relative to the estimate mean the fit is exact.
const DEGENERATE_SE: f64 = 1e-10;
/// Distance from the null that still counts as equal in an exact fit.
const DEGENERATE_EQ: f64 = 1e-8;

/// `sum_i w_i * beta[name_i]`, tested against `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCombination {
    pub label: String,
    pub terms: Vec<(String, f64)>,
    pub null: f64,
}

impl LinearCombination {
    pub fn single(name: &str, null: f64) -> Self {
        LinearCombination {
            label: format!("{name} = {null}"),
            terms: vec![(name.to_string(), 1.0)],
            null,
        }
    }

    pub fn sum(names: &[&str], null: f64) -> Self {
        LinearCombination {
            label: format!("{} = {null}", names.join(" + ")),
            terms: names.iter().map(|n| (n.to_string(), 1.0)).collect(),
            null,
        }
    }

    pub fn difference(lhs: &str, rhs: &str) -> Self {
        LinearCombination {
            label: format!("{lhs} - {rhs} = 0"),
            terms: vec![(lhs.to_string(), 1.0), (rhs.to_string(), -1.0)],
            null: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub label: String,
    pub estimate: f64,
    pub null: f64,
    pub std_error: f64,
    /// Infinite for exact fits; written as `"inf"` / `"-inf"` in JSON.
    #[serde(with = "extended_f64")]
    pub t_stat: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
    /// Thresholds from the standard set that this test passes.
    pub significant_at: Vec<f64>,
}

impl TestResult {
    pub fn is_significant(&self, threshold: f64) -> bool {
        self.p_value < threshold
    }

    /// Sign of `estimate - null`.
    pub fn direction(&self) -> f64 {
        (self.estimate - self.null).signum()
    }
}

/// Wald t-test of a linear combination of coefficients.
///
/// An exact fit (zero standard error) yields `p = 1` when the estimate equals
/// the null and `p = 0` otherwise.
pub fn wald_test(fit: &ModelFit, combo: &LinearCombination) -> Result<TestResult, EstimationError> {
    let k = fit.coefficients.len();
    let mut r = vec![0.0; k];
    for (name, w) in &combo.terms {
        r[fit.index_of(name)?] += w;
    }
    let estimate: f64 = r.iter().zip(&fit.coefficients).map(|(a, b)| a * b).sum();
    let mut var = 0.0;
    for i in 0..k {
        for j in 0..k {
            var += r[i] * fit.covariance[i][j] * r[j];
        }
    }
    let se = var.max(0.0).sqrt();
    let diff = estimate - combo.null;

    let (t_stat, p_value) = if se <= DEGENERATE_SE * estimate.abs().max(1.0) {
        if diff.abs() <= DEGENERATE_EQ * combo.null.abs().max(1.0) {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(diff), 0.0)
        }
    } else {
        let t = diff / se;
        let dist = StudentsT::new(0.0, 1.0, fit.df).map_err(|e| EstimationError::Dimension(e.to_string()))?;
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };

    let significant_at = super::classify::standard_thresholds()
        .into_iter()
        .filter(|&th| p_value < th)
        .collect();
    Ok(TestResult {
        label: combo.label.clone(),
        estimate,
        null: combo.null,
        std_error: se,
        t_stat,
        df: fit.df,
        p_value,
        significant_at,
    })
}

/// JSON has no infinities, so non-finite values travel as strings.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("expected a number, got {t:?}"))),
            },
        }
    }
}
