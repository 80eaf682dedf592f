use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::models::{BaselineFits, CompleteFits, ModelFit, ModelId, SubjectFit};
use super::wald::{wald_test, LinearCombination, TestResult};
use super::EstimationError;

/// `1 - (1 - alpha)^(1/m)`.
pub fn sidak_threshold(alpha: f64, m: usize) -> f64 {
    1.0 - (1.0 - alpha).powf(1.0 / m as f64)
}

/// The 5% level and its Sidak correction over the complete-model family.
pub(crate) fn standard_thresholds() -> Vec<f64> {
    vec![0.05, sidak_threshold(0.05, COMPLETE_HYPOTHESES.len())]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Success,
    Failure,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasKind {
    Overinference,
    Underinference,
    /// Total inference weight significantly below zero.
    Against,
    BaseRateOveruse,
    BaseRateNeglect,
    Confirmation,
    Disconfirmation,
    Optimism,
    Pessimism,
    GoodNews,
    BadNews,
    HotHand,
    GamblersFallacy,
    Overconfidence,
    Underconfidence,
}

impl BiasKind {
    pub const ALL: [BiasKind; 15] = [
        BiasKind::Overinference,
        BiasKind::Underinference,
        BiasKind::Against,
        BiasKind::BaseRateOveruse,
        BiasKind::BaseRateNeglect,
        BiasKind::Confirmation,
        BiasKind::Disconfirmation,
        BiasKind::Optimism,
        BiasKind::Pessimism,
        BiasKind::GoodNews,
        BiasKind::BadNews,
        BiasKind::HotHand,
        BiasKind::GamblersFallacy,
        BiasKind::Overconfidence,
        BiasKind::Underconfidence,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BiasKind::Overinference => "Overinference",
            BiasKind::Underinference => "Underinference",
            BiasKind::Against => "Against",
            BiasKind::BaseRateOveruse => "Base Rate Overuse",
            BiasKind::BaseRateNeglect => "Base Rate Neglect",
            BiasKind::Confirmation => "Confirmation Bias",
            BiasKind::Disconfirmation => "Disconfirmation Bias",
            BiasKind::Optimism => "Optimism",
            BiasKind::Pessimism => "Pessimism",
            BiasKind::GoodNews => "Good News Effect",
            BiasKind::BadNews => "Bad News Effect",
            BiasKind::HotHand => "Hot Hand Fallacy",
            BiasKind::GamblersFallacy => "Gambler's Fallacy",
            BiasKind::Overconfidence => "Overconfidence",
            BiasKind::Underconfidence => "Underconfidence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectedBias {
    pub kind: BiasKind,
    /// `None` for confidence and news effects, which have no side.
    pub side: Option<Side>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    None,
    Sidak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub alpha: f64,
    pub correction: Correction,
    /// Also test `alpha_pref = beta_pref` (good/bad news). Not part of the
    /// corrected family.
    pub include_news: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            alpha: 0.05,
            correction: Correction::None,
            include_news: false,
        }
    }
}

impl ClassifyOptions {
    pub fn threshold(&self, family_size: usize) -> f64 {
        match self.correction {
            Correction::None => self.alpha,
            Correction::Sidak => sidak_threshold(self.alpha, family_size),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Inference,
    BaseRate,
    Confirmation,
    Preference,
    Streak,
    Confidence,
}

/// One per-subject hypothesis of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hypothesis {
    pub name: &'static str,
    pub model: ModelId,
    pub terms: &'static [&'static str],
    pub side: Option<Side>,
    rule: Rule,
}

const fn h(
    name: &'static str,
    model: ModelId,
    terms: &'static [&'static str],
    side: Option<Side>,
    rule: Rule,
) -> Hypothesis {
    Hypothesis {
        name,
        model,
        terms,
        side,
        rule,
    }
}

impl Hypothesis {
    /// The Bayesian value the hypothesis is tested against.
    pub fn null(&self) -> f64 {
        match self.rule {
            Rule::Confirmation => 0.0,
            _ => 1.0,
        }
    }

    /// The two-sided test against [`Hypothesis::null`].
    pub fn primary_test(&self, fit: &ModelFit) -> Result<TestResult, EstimationError> {
        let mut combo = LinearCombination::sum(self.terms, self.null());
        if self.rule == Rule::Streak {
            combo.label = format!("{} = 1", self.name);
        }
        wald_test(fit, &combo)
    }
}

const S: Option<Side> = Some(Side::Success);
const F: Option<Side> = Some(Side::Failure);

pub const BASELINE_HYPOTHESES: [Hypothesis; 4] = [
    h("gamma_s = 1", ModelId::BaselineSuccess, &["gamma_s"], S, Rule::Inference),
    h("gamma_f = 1", ModelId::BaselineFailure, &["gamma_f"], F, Rule::Inference),
    h("delta_s = 1", ModelId::BaselineSuccess, &["delta_s"], S, Rule::BaseRate),
    h("delta_f = 1", ModelId::BaselineFailure, &["delta_f"], F, Rule::BaseRate),
];

pub const COMPLETE_HYPOTHESES: [Hypothesis; 11] = [
    h("alpha0 = 1", ModelId::CompleteSuccess, &["alpha0"], S, Rule::Inference),
    h("beta0 = 1", ModelId::CompleteFailure, &["beta0"], F, Rule::Inference),
    h("delta_s = 1", ModelId::CompleteSuccess, &["delta_s"], S, Rule::BaseRate),
    h("delta_f = 1", ModelId::CompleteFailure, &["delta_f"], F, Rule::BaseRate),
    h("rho_s = 0", ModelId::CompleteSuccess, &["rho_s"], S, Rule::Confirmation),
    h("rho_f = 0", ModelId::CompleteFailure, &["rho_f"], F, Rule::Confirmation),
    h("alpha0 + alpha_pref = 1", ModelId::CompleteSuccess, &["alpha0", "alpha_pref"], S, Rule::Preference),
    h("beta0 + beta_pref = 1", ModelId::CompleteFailure, &["beta0", "beta_pref"], F, Rule::Preference),
    h("alpha0 + alpha_seq", ModelId::CompleteSuccess, &["alpha0", "alpha_seq"], S, Rule::Streak),
    h("beta0 + beta_seq", ModelId::CompleteFailure, &["beta0", "beta_seq"], F, Rule::Streak),
    h("nu = 1", ModelId::Variance, &["nu"], None, Rule::Confidence),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Baseline,
    Complete,
}

impl ModelFamily {
    pub fn hypotheses(self) -> &'static [Hypothesis] {
        match self {
            ModelFamily::Baseline => &BASELINE_HYPOTHESES,
            ModelFamily::Complete => &COMPLETE_HYPOTHESES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectClassification {
    pub subject_id: String,
    pub tests: Vec<TestResult>,
    pub biases: Vec<DetectedBias>,
    /// Set when fits or tests were missing; `biases` then covers only what
    /// could be tested.
    pub partial: Option<String>,
}

impl SubjectClassification {
    pub fn no_bias(&self) -> bool {
        self.partial.is_none() && self.biases.is_empty()
    }

    pub fn has(&self, kind: BiasKind) -> Option<Side> {
        self.biases
            .iter()
            .find(|b| b.kind == kind)
            .map(|b| b.side.unwrap_or(Side::Both))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideCounts {
    pub success: usize,
    pub failure: usize,
    pub both: usize,
    /// Biases without a side.
    pub unsided: usize,
}

impl SideCounts {
    pub fn total(&self) -> usize {
        self.success + self.failure + self.both + self.unsided
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasTally {
    pub subjects: usize,
    pub no_bias: usize,
    pub partial: usize,
    pub by_kind: BTreeMap<BiasKind, SideCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub family: ModelFamily,
    pub options: ClassifyOptions,
    pub threshold: f64,
    pub subjects: Vec<SubjectClassification>,
}

impl BiasReport {
    pub fn tallies(&self) -> BiasTally {
        let mut t = BiasTally {
            subjects: self.subjects.len(),
            ..Default::default()
        };
        for k in BiasKind::ALL {
            t.by_kind.insert(k, SideCounts::default());
        }
        for s in &self.subjects {
            if s.no_bias() {
                t.no_bias += 1;
            }
            if s.partial.is_some() {
                t.partial += 1;
            }
            for b in &s.biases {
                let c = t.by_kind.entry(b.kind).or_default();
                match b.side {
                    Some(Side::Success) => c.success += 1,
                    Some(Side::Failure) => c.failure += 1,
                    Some(Side::Both) => c.both += 1,
                    None => c.unsided += 1,
                }
            }
        }
        t
    }

    pub fn count(&self, kind: BiasKind) -> usize {
        self.subjects.iter().filter(|s| s.has(kind).is_some()).count()
    }
}

fn fit_for<'a>(model: ModelId, fits: &[&'a ModelFit]) -> Option<&'a ModelFit> {
    fits.iter().copied().find(|f| f.model == model)
}

fn evaluate(
    hyp: &Hypothesis,
    fit: &ModelFit,
    threshold: f64,
    tests: &mut Vec<TestResult>,
    found: &mut Vec<(BiasKind, Option<Side>)>,
) -> Result<(), EstimationError> {
    let t = hyp.primary_test(fit)?;
    let sig = t.is_significant(threshold);
    let up = t.estimate > t.null;
    let side = hyp.side;
    let kind = match hyp.rule {
        Rule::Inference => Some(if up { BiasKind::Overinference } else { BiasKind::Underinference }),
        Rule::BaseRate => Some(if up { BiasKind::BaseRateOveruse } else { BiasKind::BaseRateNeglect }),
        Rule::Confirmation => Some(if up { BiasKind::Disconfirmation } else { BiasKind::Confirmation }),
        Rule::Preference => {
            let optimistic = (side == S) == up;
            Some(if optimistic { BiasKind::Optimism } else { BiasKind::Pessimism })
        }
        Rule::Streak => up.then_some(BiasKind::HotHand),
        Rule::Confidence => Some(if up { BiasKind::Overconfidence } else { BiasKind::Underconfidence }),
    };
    if sig {
        if let Some(kind) = kind {
            found.push((kind, side));
        }
    }
    tests.push(t);

    // a second, one-directional check against zero
    if matches!(hyp.rule, Rule::Inference | Rule::Streak) {
        let mut zero = LinearCombination::sum(hyp.terms, 0.0);
        if hyp.rule == Rule::Streak {
            zero.label = format!("{} = 0", hyp.name);
        }
        let t0 = wald_test(fit, &zero)?;
        if t0.is_significant(threshold) && t0.estimate < 0.0 {
            let kind = match hyp.rule {
                Rule::Inference => BiasKind::Against,
                _ => BiasKind::GamblersFallacy,
            };
            found.push((kind, side));
        }
        tests.push(t0);
    }
    Ok(())
}

/// `alpha_pref - beta_pref = 0` across the two shape equations, treating
/// them as independent.
fn news_test(success: &ModelFit, failure: &ModelFit) -> Result<TestResult, EstimationError> {
    let a = wald_test(success, &LinearCombination::single("alpha_pref", 0.0))?;
    let b = wald_test(failure, &LinearCombination::single("beta_pref", 0.0))?;
    let estimate = a.estimate - b.estimate;
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    let df = a.df.min(b.df);
    let (t_stat, p_value) = if se <= 1e-10 * estimate.abs().max(1.0) {
        if estimate.abs() <= 1e-8 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(estimate), 0.0)
        }
    } else {
        let t = estimate / se;
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| EstimationError::Dimension(e.to_string()))?;
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    Ok(TestResult {
        label: "alpha_pref - beta_pref = 0".into(),
        estimate,
        null: 0.0,
        std_error: se,
        t_stat,
        df,
        p_value,
        significant_at: standard_thresholds().into_iter().filter(|&th| p_value < th).collect(),
    })
}

fn merge_sides(found: Vec<(BiasKind, Option<Side>)>) -> Vec<DetectedBias> {
    let mut out: Vec<DetectedBias> = Vec::new();
    for (kind, side) in found {
        match out.iter_mut().find(|b| b.kind == kind) {
            Some(existing) => {
                if existing.side != side {
                    existing.side = Some(Side::Both);
                }
            }
            None => out.push(DetectedBias { kind, side }),
        }
    }
    out.sort_by_key(|b| b.kind);
    out
}

fn classify_subject(
    subject_id: &str,
    fits: Result<Vec<&ModelFit>, &EstimationError>,
    family: ModelFamily,
    options: &ClassifyOptions,
    threshold: f64,
) -> SubjectClassification {
    let fits = match fits {
        Ok(f) => f,
        Err(e) => {
            return SubjectClassification {
                subject_id: subject_id.to_string(),
                tests: vec![],
                biases: vec![],
                partial: Some(e.to_string()),
            }
        }
    };
    let mut tests = Vec::new();
    let mut found = Vec::new();
    let mut problems = Vec::new();
    for hyp in family.hypotheses() {
        match fit_for(hyp.model, &fits) {
            Some(fit) => {
                if let Err(e) = evaluate(hyp, fit, threshold, &mut tests, &mut found) {
                    problems.push(format!("{}: {e}", hyp.name));
                }
            }
            None => problems.push(format!("{}: no fit", hyp.name)),
        }
    }
    if options.include_news && family == ModelFamily::Complete {
        if let (Some(s), Some(f)) = (
            fit_for(ModelId::CompleteSuccess, &fits),
            fit_for(ModelId::CompleteFailure, &fits),
        ) {
            match news_test(s, f) {
                Ok(t) => {
                    if t.is_significant(options.alpha) {
                        let kind = if t.estimate > 0.0 { BiasKind::GoodNews } else { BiasKind::BadNews };
                        found.push((kind, None));
                    }
                    tests.push(t);
                }
                Err(e) => problems.push(format!("news: {e}")),
            }
        }
    }
    SubjectClassification {
        subject_id: subject_id.to_string(),
        tests,
        biases: merge_sides(found),
        partial: (!problems.is_empty()).then(|| problems.join("; ")),
    }
}

/// Classifies every subject from baseline fits.
pub fn classify_baseline(fits: &[SubjectFit<BaselineFits>], options: ClassifyOptions) -> BiasReport {
    let family = ModelFamily::Baseline;
    let threshold = options.threshold(family.hypotheses().len());
    let subjects = fits
        .iter()
        .map(|sf| {
            let models = sf.result.as_ref().map(|b| vec![&b.success, &b.failure]);
            classify_subject(&sf.subject_id, models, family, &options, threshold)
        })
        .collect();
    BiasReport {
        family,
        options,
        threshold,
        subjects,
    }
}

/// Classifies every subject from complete-model fits.
pub fn classify_complete(fits: &[SubjectFit<CompleteFits>], options: ClassifyOptions) -> BiasReport {
    let family = ModelFamily::Complete;
    let threshold = options.threshold(family.hypotheses().len());
    let subjects = fits
        .iter()
        .map(|sf| {
            let models = sf
                .result
                .as_ref()
                .map(|c| vec![&c.success, &c.failure, &c.variance]);
            classify_subject(&sf.subject_id, models, family, &options, threshold)
        })
        .collect();
    BiasReport {
        family,
        options,
        threshold,
        subjects,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::CovarianceKind;

    fn fit(model: ModelId, coefficients: &[f64], se: &[f64]) -> ModelFit {
        let k = coefficients.len();
        ModelFit {
            model,
            subject_id: Some("s".into()),
            names: model.parameter_names().iter().map(|s| s.to_string()).collect(),
            coefficients: coefficients.to_vec(),
            covariance: (0..k)
                .map(|i| (0..k).map(|j| if i == j { se[i] * se[i] } else { 0.0 }).collect())
                .collect(),
            covariance_kind: CovarianceKind::Classical,
            n_obs: 30,
            df: 25.0,
            rss: 1.0,
            tss: 10.0,
        }
    }

    fn complete(success: &[f64], failure: &[f64], variance: &[f64]) -> SubjectFit<CompleteFits> {
        SubjectFit {
            subject_id: "s".into(),
            result: Ok(CompleteFits {
                success: fit(ModelId::CompleteSuccess, success, &[0.05; 5]),
                failure: fit(ModelId::CompleteFailure, failure, &[0.05; 5]),
                variance: fit(ModelId::Variance, variance, &[0.001, 0.05]),
            }),
        }
    }

    const BAYES5: [f64; 5] = [1.0, 0.0, 0.0, 0.0, 1.0];

    #[test]
    fn sidak_value() {
        assert!((sidak_threshold(0.05, 11) - 0.004652).abs() < 5e-7);
        assert!((sidak_threshold(0.05, 11) - 0.0047).abs() < 5e-5);
        assert!((sidak_threshold(0.05, 1) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn bayesian_subject_has_no_bias() {
        let r = classify_complete(&[complete(&BAYES5, &BAYES5, &[0.0, 1.0])], ClassifyOptions::default());
        assert!(r.subjects[0].no_bias());
        assert_eq!(r.subjects[0].tests.len(), 11 + 4);
    }

    #[test]
    fn base_rate_neglect_success_side() {
        // delta_s = 0.2 with se 0.05: t = -16
        let r = classify_complete(
            &[complete(&[1.0, 0.0, 0.0, 0.0, 0.2], &BAYES5, &[0.0, 1.0])],
            ClassifyOptions::default(),
        );
        assert_eq!(
            r.subjects[0].biases,
            vec![DetectedBias {
                kind: BiasKind::BaseRateNeglect,
                side: Some(Side::Success)
            }]
        );
    }

    #[test]
    fn sides_merge_into_both() {
        let r = classify_complete(
            &[complete(&[1.5, 0.0, 0.0, 0.0, 1.0], &[1.5, 0.0, 0.0, 0.0, 1.0], &[0.0, 1.0])],
            ClassifyOptions::default(),
        );
        assert_eq!(r.subjects[0].has(BiasKind::Overinference), Some(Side::Both));
        // the preference sums inherit alpha0 > 1: optimism on success, pessimism on failure
        assert_eq!(r.subjects[0].has(BiasKind::Optimism), Some(Side::Success));
        assert_eq!(r.subjects[0].has(BiasKind::Pessimism), Some(Side::Failure));
    }

    #[test]
    fn streaks_and_against() {
        // success: alpha0 + alpha_seq = 1.8 -> hot hand; failure: beta0 + beta_seq = -0.6 -> gambler's
        let r = classify_complete(
            &[complete(&[1.0, 0.0, 0.8, 0.0, 1.0], &[1.0, 0.0, -1.6, 0.0, 1.0], &[0.0, 1.0])],
            ClassifyOptions::default(),
        );
        let s = &r.subjects[0];
        assert_eq!(s.has(BiasKind::HotHand), Some(Side::Success));
        assert_eq!(s.has(BiasKind::GamblersFallacy), Some(Side::Failure));
        assert_eq!(s.has(BiasKind::Against), None);

        let r = classify_complete(
            &[complete(&[-0.5, 0.0, 0.0, 0.0, 1.0], &BAYES5, &[0.0, 1.0])],
            ClassifyOptions::default(),
        );
        let s = &r.subjects[0];
        assert_eq!(s.has(BiasKind::Underinference), Some(Side::Success));
        assert_eq!(s.has(BiasKind::Against), Some(Side::Success));
    }

    #[test]
    fn confidence_and_confirmation() {
        let r = classify_complete(
            &[complete(&[1.0, 0.0, 0.0, -0.5, 1.0], &[1.0, 0.0, 0.0, 0.4, 1.0], &[0.0, 0.5])],
            ClassifyOptions::default(),
        );
        let s = &r.subjects[0];
        assert_eq!(s.has(BiasKind::Confirmation), Some(Side::Success));
        assert_eq!(s.has(BiasKind::Disconfirmation), Some(Side::Failure));
        assert!(s.biases.contains(&DetectedBias {
            kind: BiasKind::Underconfidence,
            side: None
        }));
    }

    #[test]
    fn news_effect_is_opt_in() {
        let subject = complete(&[1.0, 0.4, 0.0, 0.0, 1.0], &[1.0, -0.1, 0.0, 0.0, 1.0], &[0.0, 1.0]);
        let plain = classify_complete(std::slice::from_ref(&subject), ClassifyOptions::default());
        assert_eq!(plain.subjects[0].has(BiasKind::GoodNews), None);
        let with = classify_complete(
            &[subject],
            ClassifyOptions {
                include_news: true,
                ..Default::default()
            },
        );
        assert_eq!(with.subjects[0].has(BiasKind::GoodNews), Some(Side::Both));
    }

    #[test]
    fn sidak_drops_marginal_findings() {
        // delta_s = 0.85, se 0.05: t = -3, p ~ 0.006 with 25 df
        let subject = complete(&[1.0, 0.0, 0.0, 0.0, 0.85], &BAYES5, &[0.0, 1.0]);
        let none = classify_complete(std::slice::from_ref(&subject), ClassifyOptions::default());
        let sidak = classify_complete(
            &[subject],
            ClassifyOptions {
                correction: Correction::Sidak,
                ..Default::default()
            },
        );
        assert_eq!(none.count(BiasKind::BaseRateNeglect), 1);
        assert_eq!(sidak.count(BiasKind::BaseRateNeglect), 0);
        assert!((sidak.threshold - 0.004652).abs() < 5e-7);
    }

    #[test]
    fn failed_fit_is_partial() {
        let failed: SubjectFit<CompleteFits> = SubjectFit {
            subject_id: "x".into(),
            result: Err(EstimationError::RankDeficient {
                columns: vec!["k_seq".into()],
            }),
        };
        let r = classify_complete(&[failed], ClassifyOptions::default());
        assert!(!r.subjects[0].no_bias());
        assert!(r.subjects[0].partial.as_ref().unwrap().contains("k_seq"));
        let t = r.tallies();
        assert_eq!((t.partial, t.no_bias), (1, 0));
    }

    #[test]
    fn baseline_family() {
        let fits = vec![SubjectFit {
            subject_id: "s".into(),
            result: Ok(BaselineFits {
                success: fit(ModelId::BaselineSuccess, &[0.6, 1.0], &[0.05, 0.05]),
                failure: fit(ModelId::BaselineFailure, &[1.0, 1.0], &[0.05, 0.05]),
            }),
        }];
        let r = classify_baseline(&fits, ClassifyOptions::default());
        assert_eq!(r.subjects[0].has(BiasKind::Underinference), Some(Side::Success));
        assert_eq!(r.tallies().by_kind[&BiasKind::Underinference].success, 1);
    }
}
