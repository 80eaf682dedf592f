use nalgebra::{DMatrix, DVector};

use super::EstimationError;

/// Relative size below which a triangular pivot counts as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    /// `(X'X)^-1`.
    pub xtx_inv: DMatrix<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
}

impl OlsFit {
    /// `rss / (n - k) * (X'X)^-1`.
    pub fn classical_covariance(&self) -> DMatrix<f64> {
        let n = self.residuals.len();
        let k = self.coefficients.len();
        &self.xtx_inv * (self.rss / (n - k) as f64)
    }
}

/// Least squares on `x` as given, without adding a constant column.
pub fn fit_no_intercept_ols(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[&str],
) -> Result<OlsFit, EstimationError> {
    fit_ols(x, y, names)
}

/// Least squares through a Householder QR of `x`.
///
/// Any constant column must already be part of `x`. `names` label the
/// columns in rank-deficiency errors.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[&str]) -> Result<OlsFit, EstimationError> {
    let (n, k) = x.shape();
    if y.len() != n || names.len() != k {
        return Err(EstimationError::Dimension(format!(
            "x is {n}x{k}, y has {} rows, {} names",
            y.len(),
            names.len()
        )));
    }
    if n <= k {
        return Err(EstimationError::TooFewObservations { n, k });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let collinear: Vec<String> = (0..k)
        .filter(|&j| {
            let norm = x.column(j).norm();
            norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm
        })
        .map(|j| names[j].to_string())
        .collect();
    if !collinear.is_empty() {
        return Err(EstimationError::RankDeficient { columns: collinear });
    }

    let qty = qr.q().transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| EstimationError::RankDeficient {
            columns: names.iter().map(|s| s.to_string()).collect(),
        })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| EstimationError::RankDeficient {
            columns: names.iter().map(|s| s.to_string()).collect(),
        })?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let residuals = y - x * &coefficients;
    let rss = residuals.norm_squared();
    Ok(OlsFit {
        coefficients,
        xtx_inv,
        residuals,
        rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_fit() {
        // y = 1*k + 1*(a0 - 1)
        let k = [1.0, 3.0, 0.0, 2.0, 5.0];
        let a0m1 = [0.5, 1.0, 2.0, 0.0, 3.5];
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { k[i] } else { a0m1[i] });
        let y = DVector::from_fn(5, |i, _| k[i] + a0m1[i]);
        let fit = fit_no_intercept_ols(&x, &y, &["k", "a0_minus_1"]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-24);
    }

    #[test]
    fn ones_column_recovers_mean() {
        let y = DVector::from_vec(vec![2.0, 7.0, -1.0, 4.5]);
        let x = DMatrix::from_element(4, 1, 1.0);
        let fit = fit_ols(&x, &y, &["one"]).unwrap();
        assert!((fit.coefficients[0] - y.mean()).abs() < 1e-14);
    }

    #[test]
    fn matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (n, k) = (200, 4);
        let x = DMatrix::from_fn(n, k, |_, _| rng.random_range(-2.0..2.0));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
        let fit = fit_ols(&x, &y, &["a", "b", "c", "d"]).unwrap();
        let xtx = x.transpose() * &x;
        let beta = xtx.clone().cholesky().unwrap().solve(&(x.transpose() * &y));
        assert!((fit.coefficients - beta).amax() < 1e-8);
        assert!((&fit.xtx_inv - xtx.try_inverse().unwrap()).amax() < 1e-8);
    }

    proptest::proptest! {
        #[test]
        fn row_order_does_not_matter(seed in 0u64..10_000, n in 8usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = DMatrix::from_fn(n, 3, |_, _| rng.random_range(-2.0..2.0));
            let y = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            let xp = x.select_rows(&order);
            let yp = DVector::from_fn(n, |i, _| y[order[i]]);
            let a = fit_ols(&x, &y, &["a", "b", "c"]).unwrap();
            let b = fit_ols(&xp, &yp, &["a", "b", "c"]).unwrap();
            proptest::prop_assert!((a.coefficients - b.coefficients).amax() < 1e-9);
            proptest::prop_assert!((a.rss - b.rss).abs() < 1e-9 * (1.0 + a.rss));
        }
    }

    #[test]
    fn names_collinear_columns() {
        // a subject who never saw a dollar urn: the k*I_pref column is zero
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 2.0, 2.0, 0.0, 1.0, 3.0, 0.0, 0.5, 1.0, 0.0, 0.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        match fit_ols(&x, &y, &["k", "k_pref", "a0_minus_1"]) {
            Err(EstimationError::RankDeficient { columns }) => assert_eq!(columns, vec!["k_pref"]),
            other => panic!("expected rank error, got {other:?}"),
        }
        // duplicated column
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0]);
        assert!(matches!(fit_ols(&x, &y, &["a", "b"]), Err(EstimationError::RankDeficient { .. })));
    }

    #[test]
    fn too_few_rows() {
        let x = DMatrix::from_element(2, 2, 1.0);
        let y = DVector::from_element(2, 1.0);
        assert!(matches!(
            fit_ols(&x, &y, &["a", "b"]),
            Err(EstimationError::TooFewObservations { n: 2, k: 2 })
        ));
    }
}
