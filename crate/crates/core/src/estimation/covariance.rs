use nalgebra::{DMatrix, DVector};

use super::EstimationError;

/// `s^2 (X'X)^-1` with `s^2 = rss / (n - k)`.
pub fn classical_cov(x: &DMatrix<f64>, residuals: &DVector<f64>) -> Result<DMatrix<f64>, EstimationError> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(EstimationError::TooFewObservations { n, k });
    }
    let xtx_inv = (x.transpose() * x)
        .try_inverse()
        .ok_or_else(|| EstimationError::RankDeficient { columns: vec![] })?;
    Ok(xtx_inv * (residuals.norm_squared() / (n - k) as f64))
}

/// CR1 cluster-robust sandwich
///
/// ```text
/// V = G/(G-1) * (N-1)/(N-K) * (X'X)^-1 [sum_g X_g' u_g u_g' X_g] (X'X)^-1
/// ```
///
/// `cluster_ids` holds a label in `0..G` per row; every label must occur.
pub fn cluster_robust_cov(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    cluster_ids: &[usize],
) -> Result<DMatrix<f64>, EstimationError> {
    let (n, k) = x.shape();
    if residuals.len() != n || cluster_ids.len() != n {
        return Err(EstimationError::Dimension(format!(
            "x has {n} rows, {} residuals, {} cluster ids",
            residuals.len(),
            cluster_ids.len()
        )));
    }
    if n <= k {
        return Err(EstimationError::TooFewObservations { n, k });
    }
    let g = cluster_ids.iter().max().map_or(0, |m| m + 1);
    if g < 2 {
        return Err(EstimationError::TooFewClusters(g));
    }
    let mut scores = DMatrix::<f64>::zeros(g, k);
    let mut sizes = vec![0usize; g];
    for (i, &cl) in cluster_ids.iter().enumerate() {
        sizes[cl] += 1;
        let u = residuals[i];
        for j in 0..k {
            scores[(cl, j)] += x[(i, j)] * u;
        }
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(EstimationError::EmptyCluster(empty));
    }
    let meat = scores.transpose() * &scores;
    let bread = (x.transpose() * x)
        .try_inverse()
        .ok_or_else(|| EstimationError::RankDeficient { columns: vec![] })?;
    let factor = (g as f64 / (g - 1) as f64) * ((n - 1) as f64 / (n - k) as f64);
    Ok(&bread * meat * &bread * factor)
}
