//! Folded-concave and L1 penalties, plus the scalar soft-threshold primitive.

use crate::error::{Error, Result};

/// Default concavity parameter for the folded-concave penalty.
pub const DEFAULT_SCAD_A: f64 = 3.7;

/// Penalty shape. The folded-concave variant requires `a > 2`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum PenaltyKind {
    /// Three-piece folded-concave penalty: linear near zero, quadratic blend,
    /// constant beyond `a * lambda`.
    Scad { a: f64 },
    /// Plain L1 penalty `lambda * t`.
    L1,
}

/// A penalty shape at a concrete regularization level.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn scad(lambda: f64, a: f64) -> Result<Self> {
        if !(a > 2.0) {
            return Err(Error::invalid(format!(
                "scad parameter a must exceed 2, got {a}"
            )));
        }
        Self::new(PenaltyKind::Scad { a }, lambda)
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        Self::new(PenaltyKind::L1, lambda)
    }

    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        if let PenaltyKind::Scad { a } = kind {
            if !(a > 2.0) {
                return Err(Error::invalid(format!(
                    "scad parameter a must exceed 2, got {a}"
                )));
            }
        }
        Ok(Self { kind, lambda })
    }

    /// Right derivative at zero; the coordinate dead-zone threshold.
    pub fn derivative_at_zero(&self) -> f64 {
        self.lambda
    }
}

/// Penalty derivative `p'_lambda(t)` for `t >= 0`.
pub fn penalty_derivative(spec: &PenaltySpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!(
            "penalty derivative needs t >= 0, got {t}"
        )));
    }
    let lambda = spec.lambda;
    Ok(match spec.kind {
        PenaltyKind::L1 => lambda,
        PenaltyKind::Scad { a } => {
            if lambda == 0.0 || t <= lambda {
                if lambda == 0.0 {
                    0.0
                } else {
                    lambda
                }
            } else {
                (a * lambda - t).max(0.0) / (a - 1.0)
            }
        }
    })
}

/// Penalty value `p_lambda(t) = integral of the derivative on [0, t]`,
/// in closed form.
pub fn penalty_value(spec: &PenaltySpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!(
            "penalty value needs t >= 0, got {t}"
        )));
    }
    let lambda = spec.lambda;
    Ok(match spec.kind {
        PenaltyKind::L1 => lambda * t,
        PenaltyKind::Scad { a } => {
            if lambda == 0.0 {
                0.0
            } else if t <= lambda {
                lambda * t
            } else if t < a * lambda {
                // lambda^2 + integral of (a lambda - s)/(a - 1) on (lambda, t]
                let quad = a * lambda * (t - lambda) - 0.5 * (t * t - lambda * lambda);
                lambda * lambda + quad / (a - 1.0)
            } else {
                0.5 * (a + 1.0) * lambda * lambda
            }
        }
    })
}

/// `sign(z) * max(|z| - t, 0)`: the minimizer of `(z - b)^2 / 2 + t |b|`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}
