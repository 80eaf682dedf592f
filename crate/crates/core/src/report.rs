//! CSV tables for fits, fit metrics, classification tallies and impacts.

use crate::estimation::{
    fit_metrics, wald_test, BaselineFits, BiasKind, BiasReport, CompleteFits, LinearCombination, ModelFit, ModelId,
    SubjectFit,
};
use crate::impact::ImpactTable;

fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}

fn equation(model: ModelId) -> &'static str {
    match model {
        ModelId::BaselineSuccess | ModelId::CompleteSuccess => "a",
        ModelId::BaselineFailure | ModelId::CompleteFailure => "b",
        ModelId::Variance => "variance",
    }
}

/// Long-format coefficient table: one line per coefficient, with the
/// t-test against the Bayesian value.
pub fn coefficients_csv(fits: &[&ModelFit]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "subject_id",
        "model",
        "equation",
        "row",
        "parameter",
        "estimate",
        "std_error",
        "bayes_value",
        "t_stat",
        "p_value",
        "stars",
    ])
    .expect("write header");
    for fit in fits {
        let labels = fit.model.row_labels();
        let nulls = fit.model.bayes_values();
        for (i, name) in fit.names.iter().enumerate() {
            let t = wald_test(fit, &LinearCombination::single(name, nulls[i])).expect("own coefficient");
            w.write_record([
                fit.subject_id.clone().unwrap_or_else(|| "population".into()),
                format!("{:?}", fit.model),
                equation(fit.model).into(),
                labels[i].into(),
                name.clone(),
                fmt(fit.coefficients[i]),
                fmt(t.std_error),
                fmt(nulls[i]),
                fmt(t.t_stat),
                fmt(t.p_value),
                stars(t.p_value).into(),
            ])
            .expect("write row");
        }
    }
    finish(w)
}

/// Side-by-side baseline and complete population estimates, one row per
/// coefficient label. Cells are empty where a model has no such term. Significance stars are against the Bayesian value.
pub fn table2_csv(baseline: &BaselineFits, complete: &CompleteFits) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "equation",
        "row",
        "baseline",
        "baseline_se",
        "baseline_stars",
        "complete",
        "complete_se",
        "complete_stars",
    ])
    .expect("write header");

    let cell = |fit: &ModelFit, label: &str| -> [String; 3] {
        let labels = fit.model.row_labels();
        match labels.iter().position(|l| *l == label) {
            Some(i) => {
                let t = wald_test(
                    fit,
                    &LinearCombination::single(&fit.names[i], fit.model.bayes_values()[i]),
                )
                .expect("own coefficient");
                [fmt(fit.coefficients[i]), fmt(t.std_error), stars(t.p_value).into()]
            }
            None => Default::default(),
        }
    };

    let blocks: [(&str, Option<&ModelFit>, &ModelFit); 3] = [
        ("a", Some(&baseline.success), &complete.success),
        ("b", Some(&baseline.failure), &complete.failure),
        ("variance", None, &complete.variance),
    ];
    for (eq, base, comp) in blocks {
        for label in comp.model.row_labels() {
            let b = base.map(|f| cell(f, label)).unwrap_or_default();
            let c = cell(comp, label);
            let mut rec = vec![eq.to_string(), label.to_string()];
            rec.extend(b);
            rec.extend(c);
            w.write_record(&rec).expect("write row");
        }
        let b_metrics = base.and_then(fit_metrics);
        let c_metrics = fit_metrics(comp);
        let obs = |f: Option<&ModelFit>| f.map(|f| f.n_obs.to_string()).unwrap_or_default();
        w.write_record([
            eq.into(),
            "Observations".into(),
            obs(base),
            String::new(),
            String::new(),
            obs(Some(comp)),
            String::new(),
            String::new(),
        ])
        .expect("write row");
        w.write_record([
            eq.into(),
            "R2".into(),
            opt(b_metrics.map(|m| m.r2)),
            String::new(),
            String::new(),
            opt(c_metrics.map(|m| m.r2)),
            String::new(),
            String::new(),
        ])
        .expect("write row");
    }
    finish(w)
}

/// One line per fit with R², adjusted R², AIC and BIC.
pub fn metrics_csv(fits: &[&ModelFit]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subject_id", "model", "n_obs", "r2", "adj_r2", "aic", "bic"])
        .expect("write header");
    for fit in fits {
        let m = fit_metrics(fit);
        w.write_record([
            fit.subject_id.clone().unwrap_or_else(|| "population".into()),
            format!("{:?}", fit.model),
            fit.n_obs.to_string(),
            opt(m.map(|m| m.r2)),
            opt(m.map(|m| m.adj_r2)),
            opt(m.and_then(|m| m.aic)),
            opt(m.and_then(|m| m.bic)),
        ])
        .expect("write row");
    }
    finish(w)
}

/// Population fit against the mean of individual fits, per equation.
pub fn metrics_comparison_csv(population: &[&ModelFit], individual: &[&ModelFit]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "model",
        "population_r2",
        "mean_individual_r2",
        "population_aic",
        "mean_individual_aic",
        "population_bic",
        "mean_individual_bic",
        "individual_fits",
    ])
    .expect("write header");
    for pop in population {
        let ind: Vec<_> = individual
            .iter()
            .filter(|f| f.model == pop.model)
            .filter_map(|f| fit_metrics(f))
            .collect();
        let mean = |xs: Vec<f64>| {
            if xs.is_empty() {
                None
            } else {
                Some(xs.iter().sum::<f64>() / xs.len() as f64)
            }
        };
        let p = fit_metrics(pop);
        w.write_record([
            format!("{:?}", pop.model),
            opt(p.map(|m| m.r2)),
            opt(mean(ind.iter().map(|m| m.r2).collect())),
            opt(p.and_then(|m| m.aic)),
            opt(mean(ind.iter().filter_map(|m| m.aic).collect())),
            opt(p.and_then(|m| m.bic)),
            opt(mean(ind.iter().filter_map(|m| m.bic).collect())),
            ind.len().to_string(),
        ])
        .expect("write row");
    }
    finish(w)
}

/// Bias counts by side, as in a per-bias bar chart of subjects.
pub fn tallies_csv(report: &BiasReport) -> String {
    let t = report.tallies();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bias", "success", "failure", "both", "unsided", "total"])
        .expect("write header");
    for kind in BiasKind::ALL {
        let c = t.by_kind[&kind];
        w.write_record([
            kind.label().to_string(),
            c.success.to_string(),
            c.failure.to_string(),
            c.both.to_string(),
            c.unsided.to_string(),
            c.total().to_string(),
        ])
        .expect("write row");
    }
    for (label, n) in [("No bias", t.no_bias), ("Partial", t.partial)] {
        w.write_record([label, "", "", "", "", &n.to_string()]).expect("write row");
    }
    finish(w)
}

/// Gross and net impact per bias.
pub fn impact_csv(table: &ImpactTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "bias",
        "significance_count",
        "pairs",
        "clamped",
        "gross_delta_e",
        "gross_delta_var",
        "net_delta_e",
        "net_delta_var",
        "normalized_net_delta_e",
        "normalized_net_delta_var",
    ])
    .expect("write header");
    for r in &table.rows {
        w.write_record([
            r.kind.label().to_string(),
            r.significance_count.to_string(),
            r.pairs.to_string(),
            r.clamped.to_string(),
            fmt(r.gross_delta_e),
            fmt(r.gross_delta_var),
            fmt(r.net_delta_e),
            fmt(r.net_delta_var),
            fmt(r.normalized_net_delta_e),
            fmt(r.normalized_net_delta_var),
        ])
        .expect("write row");
    }
    finish(w)
}

/// Fits of every subject that fitted, flattened.
pub fn individual_baseline_fits(fits: &[SubjectFit<BaselineFits>]) -> Vec<&ModelFit> {
    fits.iter()
        .filter_map(|f| f.result.as_ref().ok())
        .flat_map(|b| [&b.success, &b.failure])
        .collect()
}

pub fn individual_complete_fits(fits: &[SubjectFit<CompleteFits>]) -> Vec<&ModelFit> {
    fits.iter()
        .filter_map(|f| f.result.as_ref().ok())
        .flat_map(|c| [&c.success, &c.failure, &c.variance])
        .collect()
}
