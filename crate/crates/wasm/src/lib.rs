//! Browser bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust twin returning `Result<_, String>` so the
//! logic can be tested natively; the exports only convert errors.

use belief_core::beta::{
    bayes_update, confirmation_measure, distorted_update, max_sd_for_mean, BetaBelief, DistortionParams, Signal,
    CONFIRMATION_EPS,
};
use belief_core::experiment::Origin;
use belief_core::session::PercentReport;
use wasm_bindgen::prelude::*;

/// Density of a reported belief at the midpoints of `points` equal bins.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    a: f64,
    b: f64,
    cap: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn a(&self) -> f64 {
        self.a
    }
    #[wasm_bindgen(getter)]
    pub fn b(&self) -> f64 {
        self.b
    }
    /// Largest sd (percent) allowed at this mean.
    #[wasm_bindgen(getter)]
    pub fn cap(&self) -> f64 {
        self.cap
    }
    #[wasm_bindgen(getter)]
    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn ys(&self) -> Vec<f64> {
        self.ys.clone()
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    prior: Curve,
    bayes: Curve,
    distorted: Curve,
    confirmation: f64,
    clamped: bool,
}

#[wasm_bindgen]
impl Update {
    #[wasm_bindgen(getter)]
    pub fn prior(&self) -> Curve {
        self.prior.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn bayes(&self) -> Curve {
        self.bayes.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn distorted(&self) -> Curve {
        self.distorted.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn confirmation(&self) -> f64 {
        self.confirmation
    }
    /// A shape had to be floored.
    #[wasm_bindgen(getter)]
    pub fn clamped(&self) -> bool {
        self.clamped
    }
    #[wasm_bindgen(getter, js_name = bayesMean)]
    pub fn bayes_mean(&self) -> f64 {
        self.bayes.mean()
    }
    #[wasm_bindgen(getter, js_name = distortedMean)]
    pub fn distorted_mean(&self) -> f64 {
        self.distorted.mean()
    }
}

impl Curve {
    fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn curve_of(belief: &BetaBelief, points: usize) -> Result<Curve, String> {
    if points == 0 {
        return Err("points must be positive".into());
    }
    let xs: Vec<f64> = (0..points).map(|i| (i as f64 + 0.5) / points as f64).collect();
    let ys = xs.iter().map(|&x| belief.pdf(x).map_err(err)).collect::<Result<_, _>>()?;
    let cap = max_sd_for_mean(belief.mean()).map_err(err)? * 100.0;
    Ok(Curve {
        a: belief.a(),
        b: belief.b(),
        cap,
        xs,
        ys,
    })
}

fn reported(mean_percent: f64, sd_percent: f64) -> Result<BetaBelief, String> {
    let report = PercentReport {
        mean_percent,
        sd_percent,
        submitted_ms: None,
    };
    report.validate(Origin::Human)?;
    BetaBelief::from_moments(mean_percent / 100.0, sd_percent / 100.0).map_err(err)
}

fn signal(reds: usize, draws: usize) -> Result<Signal, String> {
    if draws == 0 {
        return Err("draws must be positive".into());
    }
    Signal::from_counts(draws, reds).map_err(err)
}

pub fn sd_cap_native(mean_percent: f64) -> Result<f64, String> {
    max_sd_for_mean(mean_percent / 100.0).map(|s| s * 100.0).map_err(err)
}

pub fn belief_curve_native(mean_percent: f64, sd_percent: f64, points: usize) -> Result<Curve, String> {
    curve_of(&reported(mean_percent, sd_percent)?, points)
}

pub fn confirmation_native(mean_percent: f64, sd_percent: f64, reds: usize, draws: usize) -> Result<f64, String> {
    let prior = reported(mean_percent, sd_percent)?;
    confirmation_measure(&prior, &signal(reds, draws)?, CONFIRMATION_EPS).map_err(err)
}

#[allow(clippy::too_many_arguments)]
pub fn update_native(
    mean_percent: f64,
    sd_percent: f64,
    reds: usize,
    draws: usize,
    alpha: f64,
    beta: f64,
    rho_s: f64,
    rho_f: f64,
    delta_s: f64,
    delta_f: f64,
    points: usize,
) -> Result<Update, String> {
    let prior = reported(mean_percent, sd_percent)?;
    let sig = signal(reds, draws)?;
    let d = DistortionParams {
        alpha,
        beta,
        rho_s,
        rho_f,
        delta_s,
        delta_f,
    };
    if !d.is_finite() {
        return Err("weights must be finite".into());
    }
    let c = confirmation_measure(&prior, &sig, CONFIRMATION_EPS).map_err(err)?;
    let distorted = distorted_update(&prior, &sig, &d, c);
    Ok(Update {
        prior: curve_of(&prior, points)?,
        bayes: curve_of(&bayes_update(&prior, &sig), points)?,
        distorted: curve_of(&distorted.value, points)?,
        confirmation: c,
        clamped: distorted.clamped,
    })
}

/// Largest admissible sd (percent) for a mean (percent).
#[wasm_bindgen(js_name = sdCap)]
pub fn sd_cap(mean_percent: f64) -> Result<f64, JsError> {
    sd_cap_native(mean_percent).map_err(|e| JsError::new(&e))
}

/// Density of a reported belief; rejects reports the experiment would.
#[wasm_bindgen(js_name = beliefCurve)]
pub fn belief_curve(mean_percent: f64, sd_percent: f64, points: usize) -> Result<Curve, JsError> {
    belief_curve_native(mean_percent, sd_percent, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn confirmation(mean_percent: f64, sd_percent: f64, reds: usize, draws: usize) -> Result<f64, JsError> {
    confirmation_native(mean_percent, sd_percent, reds, draws).map_err(|e| JsError::new(&e))
}

/// Bayesian and distorted posteriors after `reds` of `draws`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn update(
    mean_percent: f64,
    sd_percent: f64,
    reds: usize,
    draws: usize,
    alpha: f64,
    beta: f64,
    rho_s: f64,
    rho_f: f64,
    delta_s: f64,
    delta_f: f64,
    points: usize,
) -> Result<Update, JsError> {
    update_native(
        mean_percent,
        sd_percent,
        reds,
        draws,
        alpha,
        beta,
        rho_s,
        rho_f,
        delta_s,
        delta_f,
        points,
    )
    .map_err(|e| JsError::new(&e))
}
