use serde::{Deserialize, Serialize};

use super::models::ModelFit;

/// Goodness of fit. Information criteria use the Gaussian likelihood with
/// the error variance counted as a parameter; they are `None` for an exact
/// fit, where `ln(rss)` diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub r2: f64,
    pub adj_r2: f64,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
}

/// `None` when `n <= K`.
pub fn fit_metrics(fit: &ModelFit) -> Option<FitMetrics> {
    let n = fit.n_obs as f64;
    let k = fit.n_coefficients() as f64;
    if fit.n_obs <= fit.n_coefficients() {
        return None;
    }
    let r2 = if fit.tss > 0.0 { 1.0 - fit.rss / fit.tss } else { 1.0 };
    let dof_total = if fit.model.has_intercept() { n - 1.0 } else { n };
    let adj_r2 = 1.0 - (1.0 - r2) * dof_total / (n - k);
    let (aic, bic) = if fit.rss > 0.0 {
        let ll = n * (fit.rss / n).ln();
        (Some(ll + 2.0 * (k + 1.0)), Some(ll + (k + 1.0) * n.ln()))
    } else {
        (None, None)
    };
    Some(FitMetrics { r2, adj_r2, aic, bic })
}
