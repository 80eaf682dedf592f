//! Binarized quadratic scoring of mean and variance reports, and session
//! payment settlement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beta::{bayes_update, BetaBelief, Signal};
use crate::session::{MissingReport, ReportKind, SessionDocument, SessionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid scoring config: {0}")]
    Config(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// Prize per winning lottery, in cents, as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prize {
    pub numerator: u64,
    pub denominator: u64,
}

impl Prize {
    pub fn cents(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `wins * prize`, dividing once so that whole totals stay exact.
    pub fn times(self, wins: usize) -> f64 {
        (wins as u64 * self.numerator) as f64 / self.denominator as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    /// Lower end of the report scale.
    pub a: f64,
    /// Upper end of the report scale.
    pub b: f64,
    pub prize: Prize,
    pub show_up_cents: u64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            a: 1.0,
            b: 99.0,
            prize: Prize {
                numerator: 25,
                denominator: 3,
            },
            show_up_cents: 500,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ScoringError> {
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return Err(ScoringError::Config(format!("need A < B, got A={} B={}", self.a, self.b)));
        }
        if self.prize.numerator == 0 || self.prize.denominator == 0 {
            return Err(ScoringError::Config("prize must be positive".into()));
        }
        Ok(())
    }

    /// Largest admissible variance report, `(B - A)^2 / 4`.
    pub fn max_variance(&self) -> f64 {
        0.25 * (self.b - self.a).powi(2)
    }

    /// Most that scoring can pay for `n_tasks` tasks (two reports with two
    /// questions each).
    pub fn max_scoring_cents(&self, n_tasks: usize) -> f64 {
        self.prize.times(n_tasks * 4)
    }

    fn check(&self, what: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), ScoringError> {
        if value.is_finite() && (lo..=hi).contains(&value) {
            Ok(())
        } else {
            Err(ScoringError::Domain { what, value, lo, hi })
        }
    }
}

/// Winning probability of the mean lottery: `1 - (m - d)^2 / (B - A)^2`.
pub fn mean_lottery_prob(report_mean: f64, d: f64, cfg: &ScoringConfig) -> Result<f64, ScoringError> {
    cfg.check("report_mean", report_mean, cfg.a, cfg.b)?;
    cfg.check("d", d, cfg.a, cfg.b)?;
    Ok(1.0 - (report_mean - d).powi(2) / (cfg.b - cfg.a).powi(2))
}

/// Winning probability of the variance lottery:
/// `1 - (v - (d1 - d2)^2 / 2)^2 / ((B - A)^4 / 4)`.
pub fn var_lottery_prob(report_var: f64, d1: f64, d2: f64, cfg: &ScoringConfig) -> Result<f64, ScoringError> {
    cfg.check("report_var", report_var, 0.0, cfg.max_variance())?;
    cfg.check("d1", d1, cfg.a, cfg.b)?;
    cfg.check("d2", d2, cfg.a, cfg.b)?;
    let target = 0.5 * (d1 - d2).powi(2);
    Ok(1.0 - (report_var - target).powi(2) / (0.25 * (cfg.b - cfg.a).powi(4)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Question {
    Mean,
    Variance,
}

/// One played lottery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotteryRecord {
    pub task_index: usize,
    pub report: ReportKind,
    pub question: Question,
    /// `m~` on the percent scale, or `v~` on the percent-squared scale,
    /// after clamping into the lottery domain.
    pub reported: f64,
    /// `d`, or `d1` and `d2`.
    pub draws: Vec<f64>,
    pub probability: f64,
    pub won: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentBreakdown {
    pub subject_id: String,
    pub seed: u64,
    pub show_up_cents: u64,
    pub lotteries: Vec<LotteryRecord>,
    pub wins: usize,
    pub scoring_cents: f64,
    /// Red balls in each dollar urn, one cent each.
    pub dollar_earnings_cents: u64,
    /// Posterior draws that fell outside [A, B] and were truncated.
    pub truncated_draws: usize,
    /// Reports moved into the lottery domain before scoring.
    pub clamped_reports: usize,
    pub total_cents: f64,
}

struct Drawer<'a> {
    rng: ChaCha8Rng,
    cfg: &'a ScoringConfig,
    truncated: usize,
}

impl Drawer<'_> {
    /// `100 p` for `p` drawn from the belief, truncated into [A, B].
    fn draw(&mut self, belief: &BetaBelief) -> f64 {
        let p = Beta::new(belief.a(), belief.b())
            .expect("posterior shapes are positive")
            .sample(&mut self.rng);
        let d = 100.0 * p;
        if d < self.cfg.a || d > self.cfg.b {
            self.truncated += 1;
        }
        d.clamp(self.cfg.a, self.cfg.b)
    }
}

/// The Bayesian posterior from a uniform prior after `draws`.
fn objective_posterior(draws: &[&Signal]) -> BetaBelief {
    draws
        .iter()
        .fold(BetaBelief::UNIFORM, |b, s| bayes_update(&b, s))
}

/// Settles a complete session: plays both lotteries for every report
/// against draws from the Bayesian posterior given the sequences seen so
/// far, and adds the dollar-urn earnings. Deterministic in `seed`.
pub fn settle(doc: &SessionDocument, cfg: &ScoringConfig, seed: u64) -> Result<PaymentBreakdown, ScoringError> {
    cfg.validate()?;
    doc.validate()?;
    let missing: Vec<MissingReport> = doc.missing_reports();
    if !missing.is_empty() {
        return Err(SessionError::Incomplete(missing).into());
    }
    let mut drawer = Drawer {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
        truncated: 0,
    };
    let mut lotteries = Vec::new();
    let mut clamped_reports = 0;
    let mut dollar = 0u64;

    for task in doc.task_specs()? {
        if task.is_dollar {
            dollar += task.urn_red_count as u64;
        }
        let reports = doc.reports_for(task.task_index).expect("complete");
        for kind in [ReportKind::Prior, ReportKind::Posterior] {
            let report = reports.get(kind).expect("complete");
            let posterior = match kind {
                ReportKind::Prior => objective_posterior(&[&task.seq1]),
                ReportKind::Posterior => objective_posterior(&[&task.seq1, &task.seq2]),
            };

            let m = report.mean_percent.clamp(cfg.a, cfg.b);
            let v_raw = report.sd_percent.powi(2);
            let v = v_raw.clamp(0.0, cfg.max_variance());
            if m != report.mean_percent || v != v_raw {
                clamped_reports += 1;
            }

            let d = drawer.draw(&posterior);
            let p_mean = mean_lottery_prob(m, d, cfg)?;
            let u: f64 = drawer.rng.random();
            lotteries.push(LotteryRecord {
                task_index: task.task_index,
                report: kind,
                question: Question::Mean,
                reported: m,
                draws: vec![d],
                probability: p_mean,
                won: u < p_mean,
            });

            let d1 = drawer.draw(&posterior);
            let d2 = drawer.draw(&posterior);
            let p_var = var_lottery_prob(v, d1, d2, cfg)?;
            let u: f64 = drawer.rng.random();
            lotteries.push(LotteryRecord {
                task_index: task.task_index,
                report: kind,
                question: Question::Variance,
                reported: v,
                draws: vec![d1, d2],
                probability: p_var,
                won: u < p_var,
            });
        }
    }

    let wins = lotteries.iter().filter(|l| l.won).count();
    let scoring_cents = cfg.prize.times(wins);
    Ok(PaymentBreakdown {
        subject_id: doc.subject_id.clone(),
        seed,
        show_up_cents: cfg.show_up_cents,
        wins,
        scoring_cents,
        dollar_earnings_cents: dollar,
        truncated_draws: drawer.truncated,
        clamped_reports,
        total_cents: cfg.show_up_cents as f64 + scoring_cents + dollar as f64,
        lotteries,
    })
}
