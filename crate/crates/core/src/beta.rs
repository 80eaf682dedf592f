//! Beta beliefs over an urn's red share and their (distorted) updates.
//!
//! Everything here works on the probability scale `(0, 1)`; percent values
//! only appear at I/O boundaries (see [`crate::session`]).

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use thiserror::Error;

use crate::special::regularized_incomplete_beta;

/// Boundary offset for the signal mean in [`confirmation_measure`] when the
/// signal is all-failure or all-success.
pub const CONFIRMATION_EPS: f64 = 1e-6;
/// Floor applied to non-positive shape parameters.
pub const SHAPE_FLOOR: f64 = 1e-4;
/// Floor applied to non-positive distorted variances.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetaError {
    #[error("shape parameters must be positive and finite, got a={a}, b={b}")]
    InvalidShape { a: f64, b: f64 },
    #[error("{what}={value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("no beta distribution has mean {mean} and sd {sd} (need sd^2 < mean(1-mean))")]
    InfeasibleMoments { mean: f64, sd: f64 },
    #[error("signal has {k} successes out of {n} draws")]
    InvalidSignal { n: usize, k: usize },
    #[error("confirmation measure needs at least one draw")]
    EmptySignal,
}

/// A value together with whether a floor had to be applied to produce it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped<T> {
    pub value: T,
    pub clamped: bool,
}

/// Beta belief over the red share, stored as its two shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapePair", into = "ShapePair")]
pub struct BetaBelief {
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct ShapePair {
    a: f64,
    b: f64,
}

impl TryFrom<ShapePair> for BetaBelief {
    type Error = BetaError;

    fn try_from(s: ShapePair) -> Result<Self, Self::Error> {
        BetaBelief::new(s.a, s.b)
    }
}

impl From<BetaBelief> for ShapePair {
    fn from(b: BetaBelief) -> Self {
        ShapePair { a: b.a, b: b.b }
    }
}

impl BetaBelief {
    /// The uniform belief, beta(1, 1).
    pub const UNIFORM: BetaBelief = BetaBelief { a: 1.0, b: 1.0 };

    pub fn new(a: f64, b: f64) -> Result<Self, BetaError> {
        if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
            Ok(BetaBelief { a, b })
        } else {
            Err(BetaError::InvalidShape { a, b })
        }
    }

    /// Builds a belief, flooring each shape at [`SHAPE_FLOOR`] when it is not
    /// positive.
    pub fn floored(a: f64, b: f64) -> Clamped<BetaBelief> {
        let fa = floor_shape(a);
        let fb = floor_shape(b);
        Clamped {
            value: BetaBelief {
                a: fa.value,
                b: fb.value,
            },
            clamped: fa.clamped || fb.clamped,
        }
    }

    pub fn from_moments(mean: f64, sd: f64) -> Result<Self, BetaError> {
        shape_from_moments(mean, sd)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `(mean, variance)`.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean(), self.variance())
    }

    /// True when the density has no U-shape, i.e. `min(a, b) >= 1`.
    pub fn is_unimodal(&self) -> bool {
        self.a.min(self.b) >= 1.0
    }

    /// The belief with the roles of red and blue swapped.
    pub fn mirrored(&self) -> BetaBelief {
        BetaBelief {
            a: self.b,
            b: self.a,
        }
    }

    pub fn pdf(&self, p: f64) -> Result<f64, BetaError> {
        beta_pdf(p, self)
    }

    pub fn cdf(&self, x: f64) -> Result<f64, BetaError> {
        beta_cdf(x, self)
    }
}

fn floor_shape(v: f64) -> Clamped<f64> {
    if v > 0.0 && v.is_finite() {
        Clamped {
            value: v.max(SHAPE_FLOOR),
            clamped: v < SHAPE_FLOOR,
        }
    } else {
        Clamped {
            value: SHAPE_FLOOR,
            clamped: true,
        }
    }
}

/// An ordered sequence of draws; `true` is a red ball (a success).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signal {
    outcomes: Vec<bool>,
}

impl Signal {
    pub fn new(outcomes: Vec<bool>) -> Self {
        Signal { outcomes }
    }

    /// `k` reds followed by `n - k` blues. Only counts matter for the
    /// updates, so tests use this when order is irrelevant.
    pub fn from_counts(n: usize, k: usize) -> Result<Self, BetaError> {
        if k > n {
            return Err(BetaError::InvalidSignal { n, k });
        }
        let mut outcomes = vec![true; k];
        outcomes.resize(n, false);
        Ok(Signal { outcomes })
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn n(&self) -> usize {
        self.outcomes.len()
    }

    pub fn k(&self) -> usize {
        self.outcomes.iter().filter(|&&red| red).count()
    }

    pub fn failures(&self) -> usize {
        self.n() - self.k()
    }
}

/// Weights distorting the likelihood and prior.
///
/// `alpha`/`beta` weight successes/failures, `rho_*` weight the confirmation
/// measure on each side and `delta_*` weight the prior on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho_s: f64,
    pub rho_f: f64,
    pub delta_s: f64,
    pub delta_f: f64,
}

impl DistortionParams {
    pub const BAYESIAN: DistortionParams = DistortionParams {
        alpha: 1.0,
        beta: 1.0,
        rho_s: 0.0,
        rho_f: 0.0,
        delta_s: 1.0,
        delta_f: 1.0,
    };

    /// Likelihood exponent `gamma` on both sides and prior exponent `delta`.
    pub fn symmetric(gamma: f64, delta: f64) -> Self {
        DistortionParams {
            alpha: gamma,
            beta: gamma,
            delta_s: delta,
            delta_f: delta,
            ..Self::BAYESIAN
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.alpha,
            self.beta,
            self.rho_s,
            self.rho_f,
            self.delta_s,
            self.delta_f,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

impl Default for DistortionParams {
    fn default() -> Self {
        Self::BAYESIAN
    }
}

pub fn beta_pdf(p: f64, belief: &BetaBelief) -> Result<f64, BetaError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BetaError::Domain {
            what: "p",
            value: p,
            domain: "(0, 1)",
        });
    }
    let (a, b) = (belief.a, belief.b);
    let ln = (a - 1.0) * p.ln() + (b - 1.0) * (-p).ln_1p() - ln_beta(a, b);
    Ok(ln.exp())
}

pub fn beta_cdf(x: f64, belief: &BetaBelief) -> Result<f64, BetaError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(BetaError::Domain {
            what: "x",
            value: x,
            domain: "[0, 1]",
        });
    }
    Ok(regularized_incomplete_beta(x, belief.a, belief.b))
}

pub fn moments(belief: &BetaBelief) -> (f64, f64) {
    belief.moments()
}

/// Method-of-moments shapes without feasibility checks. The concentration
/// `a + b` comes out non-positive when `sd^2 >= mean(1 - mean)`.
pub fn raw_shapes_from_moments(mean: f64, sd: f64) -> (f64, f64) {
    let concentration = mean * (1.0 - mean) / (sd * sd) - 1.0;
    (mean * concentration, (1.0 - mean) * concentration)
}

pub fn shape_from_moments(mean: f64, sd: f64) -> Result<BetaBelief, BetaError> {
    if !(mean > 0.0 && mean < 1.0) {
        return Err(BetaError::Domain {
            what: "mean",
            value: mean,
            domain: "(0, 1)",
        });
    }
    if !(sd > 0.0 && sd.is_finite()) || sd * sd >= mean * (1.0 - mean) {
        return Err(BetaError::InfeasibleMoments { mean, sd });
    }
    let (a, b) = raw_shapes_from_moments(mean, sd);
    BetaBelief::new(a, b)
}

/// Conjugate update: `(a0 + k, b0 + n - k)`.
pub fn bayes_update(prior: &BetaBelief, sig: &Signal) -> BetaBelief {
    BetaBelief {
        a: prior.a + sig.k() as f64,
        b: prior.b + sig.failures() as f64,
    }
}

/// Distorted posterior shapes
///
/// ```text
/// a~ = alpha k       + rho_s c + delta_s (a0 - 1) + 1
/// b~ = beta  (n - k) + rho_f c + delta_f (b0 - 1) + 1
/// ```
///
/// Non-positive shapes are floored at [`SHAPE_FLOOR`] and reported.
pub fn distorted_update(
    prior: &BetaBelief,
    sig: &Signal,
    d: &DistortionParams,
    c: f64,
) -> Clamped<BetaBelief> {
    let k = sig.k() as f64;
    let f = sig.failures() as f64;
    // delta (x - 1) + 1 written as delta x + (1 - delta) so Bayesian weights
    // reproduce the conjugate update bit for bit.
    let a = d.alpha * k + d.rho_s * c + d.delta_s * prior.a + (1.0 - d.delta_s);
    let b = d.beta * f + d.rho_f * c + d.delta_f * prior.b + (1.0 - d.delta_f);
    BetaBelief::floored(a, b)
}

/// Prior mass between the prior mean and the signal mean `k/n`.
///
/// For all-blue or all-red signals the signal mean is pulled inside the unit
/// interval by `eps / n`.
pub fn confirmation_measure(prior: &BetaBelief, sig: &Signal, eps: f64) -> Result<f64, BetaError> {
    let n = sig.n();
    if n == 0 {
        return Err(BetaError::EmptySignal);
    }
    let k = sig.k();
    let signal_mean = if k == 0 {
        eps / n as f64
    } else if k == n {
        (k as f64 - eps) / n as f64
    } else {
        k as f64 / n as f64
    };
    let at_prior = regularized_incomplete_beta(prior.mean(), prior.a, prior.b);
    let at_signal = regularized_incomplete_beta(signal_mean, prior.a, prior.b);
    Ok((at_prior - at_signal).abs())
}

/// `eta + nu * bayes_var`, floored at [`VARIANCE_FLOOR`].
pub fn distort_variance(bayes_var: f64, nu: f64, eta: f64) -> Clamped<f64> {
    let v = eta + nu * bayes_var;
    if v >= VARIANCE_FLOOR {
        Clamped {
            value: v,
            clamped: false,
        }
    } else {
        Clamped {
            value: VARIANCE_FLOOR,
            clamped: true,
        }
    }
}

/// Largest sd whose beta has both shapes at least 1 for the given mean.
///
/// `min(a, b) >= 1` is equivalent to `a + b >= max(1/mean, 1/(1-mean))`.
pub fn max_sd_for_mean(mean: f64) -> Result<f64, BetaError> {
    if !(mean > 0.0 && mean < 1.0) {
        return Err(BetaError::Domain {
            what: "mean",
            value: mean,
            domain: "(0, 1)",
        });
    }
    let concentration = (1.0 / mean).max(1.0 / (1.0 - mean));
    Ok((mean * (1.0 - mean) / (concentration + 1.0)).sqrt())
}

#[cfg(test)]
#[path = "../tests/support/oracle.rs"]
mod oracle;
