//! Quasi-likelihood objective and scores on dataset views.
//!
//! All quantities are normalized by the number of clusters `n`, for full data
//! and for resampled views alike, so resampled and pooled objectives live on
//! the same scale.

use crate::data::{DatasetView, LongitudinalDataset};
use crate::error::{Error, Result};
use crate::family::ModelFamily;

fn check_dim(p: usize, beta: &[f64]) -> Result<()> {
    if beta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: beta.len(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(x: &[f64], beta: &[f64]) -> f64 {
    x.iter().zip(beta).map(|(a, b)| a * b).sum()
}

/// Average quasi-likelihood `n^{-1} sum_visible Q(y, x' beta)`.
pub fn quasi_loglik(view: &DatasetView<'_>, beta: &[f64], family: ModelFamily) -> Result<f64> {
    check_dim(view.p(), beta)?;
    let n = view.n_clusters() as f64;
    let mut total = 0.0;
    for (_, y, x) in view.visible() {
        total += family.quasi_loglik_term(y, dot(x, beta));
    }
    Ok(total / n)
}

/// Gradient of [`quasi_loglik`]; for the canonical families this is
/// `n^{-1} sum_visible x (y - mu(x' beta))`.
pub fn quasi_score(view: &DatasetView<'_>, beta: &[f64], family: ModelFamily) -> Result<Vec<f64>> {
    check_dim(view.p(), beta)?;
    let n = view.n_clusters() as f64;
    let mut score = vec![0.0; view.p()];
    for (_, y, x) in view.visible() {
        let resid = y - family.mean(dot(x, beta));
        for (s, &xd) in score.iter_mut().zip(x) {
            *s += xd * resid;
        }
    }
    for s in &mut score {
        *s /= n;
    }
    Ok(score)
}

/// Working-independence estimating-function value over the full dataset,
/// `n^{-1} sum_i sum_j x_ij mu'(eta_ij) g(mu_ij)^{-1} (y_ij - mu_ij)`.
///
/// Used as a bias diagnostic: when the response distribution depends on
/// cluster size, this sum has nonzero expectation at the marginal-model
/// coefficients even though the per-cluster-resampled score is centered.
pub fn full_gee_score(
    dataset: &LongitudinalDataset,
    beta: &[f64],
    family: ModelFamily,
) -> Result<Vec<f64>> {
    check_dim(dataset.num_covariates(), beta)?;
    let n = dataset.n_clusters() as f64;
    let mut score = vec![0.0; dataset.num_covariates()];
    for (_, y, x) in dataset.full_view().visible() {
        let eta = dot(x, beta);
        let mu = family.mean(eta);
        let w = family.mean_derivative(eta) / family.variance(mu);
        let scaled = w * (y - mu);
        for (s, &xd) in score.iter_mut().zip(x) {
            *s += xd * scaled;
        }
    }
    for s in &mut score {
        *s /= n;
    }
    Ok(score)
}
