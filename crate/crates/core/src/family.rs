//! Marginal moment families: link and variance pairs for the quasi-likelihood.
//!
//! Both supported families are canonical, so the mean derivative equals the
//! variance function evaluated at the mean, `mu'(eta) = g(mu(eta))`. The
//! dispersion is fixed at 1.

use crate::error::{Error, Result};

/// Range clamp for the logistic linear predictor. Beyond this the probability
/// is constant at representable resolution and `exp` would overflow the score
/// weights.
pub const LOGIT_ETA_CLAMP: f64 = 30.0;

/// A link/variance pair defining the first two marginal moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ModelFamily {
    /// Identity link, constant unit variance.
    GaussianIdentity,
    /// Logit link, variance `mu (1 - mu)`.
    BinomialLogit,
}

impl ModelFamily {
    /// Inverse link: the mean as a function of the linear predictor.
    #[inline]
    pub fn mean(self, eta: f64) -> f64 {
        match self {
            ModelFamily::GaussianIdentity => eta,
            ModelFamily::BinomialLogit => logistic(eta.clamp(-LOGIT_ETA_CLAMP, LOGIT_ETA_CLAMP)),
        }
    }

    /// Variance function `g(mu)`.
    #[inline]
    pub fn variance(self, mu: f64) -> f64 {
        match self {
            ModelFamily::GaussianIdentity => 1.0,
            ModelFamily::BinomialLogit => mu * (1.0 - mu),
        }
    }

    /// Derivative of the mean with respect to the linear predictor.
    #[inline]
    pub fn mean_derivative(self, eta: f64) -> f64 {
        match self {
            ModelFamily::GaussianIdentity => 1.0,
            ModelFamily::BinomialLogit => {
                let mu = self.mean(eta);
                mu * (1.0 - mu)
            }
        }
    }

    /// Per-observation quasi-likelihood contribution
    /// `Q(y, eta) = integral from mu(eta) to y of (s - y) / g(s) ds`,
    /// in closed form.
    #[inline]
    pub fn quasi_loglik_term(self, y: f64, eta: f64) -> f64 {
        match self {
            ModelFamily::GaussianIdentity => {
                let r = y - eta;
                -0.5 * r * r
            }
            ModelFamily::BinomialLogit => {
                let eta = eta.clamp(-LOGIT_ETA_CLAMP, LOGIT_ETA_CLAMP);
                y * eta - log1p_exp(eta)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::GaussianIdentity => "gaussian",
            ModelFamily::BinomialLogit => "binomial",
        }
    }
}

/// Numerically stable logistic function.
#[inline]
pub(crate) fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow for large `x`.
#[inline]
fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Evaluate the mean link `mu(eta)`.
///
/// Fails on a non-finite linear predictor.
pub fn mean_link(family: ModelFamily, eta: f64) -> Result<f64> {
    if !eta.is_finite() {
        return Err(Error::domain(format!("non-finite linear predictor {eta}")));
    }
    Ok(family.mean(eta))
}

/// Evaluate the variance function `g(mu)`.
///
/// For the binomial family the mean must be strictly inside (0, 1).
pub fn variance_fn(family: ModelFamily, mu: f64) -> Result<f64> {
    if !mu.is_finite() {
        return Err(Error::domain(format!("non-finite mean {mu}")));
    }
    if family == ModelFamily::BinomialLogit && !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain(format!(
            "binomial variance requires mean in (0, 1), got {mu}"
        )));
    }
    Ok(family.variance(mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_link_is_identity() {
        assert_eq!(mean_link(ModelFamily::GaussianIdentity, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn logistic_link_values() {
        assert_eq!(mean_link(ModelFamily::BinomialLogit, 0.0).unwrap(), 0.5);
        // mu(ln 3) = 3 / (1 + 3) = 0.75
        let mu = mean_link(ModelFamily::BinomialLogit, 3.0_f64.ln()).unwrap();
        assert!((mu - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mean_link_rejects_non_finite() {
        assert!(mean_link(ModelFamily::GaussianIdentity, f64::NAN).is_err());
        assert!(mean_link(ModelFamily::BinomialLogit, f64::INFINITY).is_err());
    }

    #[test]
    fn variance_values() {
        assert_eq!(
            variance_fn(ModelFamily::GaussianIdentity, 7.0).unwrap(),
            1.0
        );
        assert_eq!(variance_fn(ModelFamily::BinomialLogit, 0.5).unwrap(), 0.25);
        assert_eq!(
            variance_fn(ModelFamily::BinomialLogit, 0.25).unwrap(),
            0.1875
        );
    }

    #[test]
    fn binomial_variance_domain() {
        assert!(variance_fn(ModelFamily::BinomialLogit, 0.0).is_err());
        assert!(variance_fn(ModelFamily::BinomialLogit, 1.0).is_err());
        assert!(variance_fn(ModelFamily::BinomialLogit, -0.1).is_err());
    }

    #[test]
    fn canonical_identity_on_grid() {
        // mu'(eta) = g(mu(eta)) for canonical families
        for family in [ModelFamily::GaussianIdentity, ModelFamily::BinomialLogit] {
            let mut eta = -8.0;
            while eta <= 8.0 {
                let lhs = family.mean_derivative(eta);
                let rhs = family.variance(family.mean(eta));
                assert!(
                    (lhs - rhs).abs() <= 1e-15,
                    "canonical identity failed at eta={eta}: {lhs} vs {rhs}"
                );
                eta += 0.125;
            }
        }
    }

    #[test]
    fn quasi_term_closed_forms() {
        // Gaussian: -(y - eta)^2 / 2
        let q = ModelFamily::GaussianIdentity.quasi_loglik_term(1.0, 0.0);
        assert!((q - (-0.5)).abs() < 1e-15);
        // Binomial, y = 1, eta = 0: -ln 2
        let q = ModelFamily::BinomialLogit.quasi_loglik_term(1.0, 0.0);
        assert!((q + std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn logit_clamp_keeps_values_finite() {
        let mu = ModelFamily::BinomialLogit.mean(1e6);
        assert!(mu.is_finite() && mu < 1.0);
        let q = ModelFamily::BinomialLogit.quasi_loglik_term(0.0, 1e6);
        assert!(q.is_finite());
    }
}
