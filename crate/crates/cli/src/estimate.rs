use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use belief_core::estimation::*;
use belief_core::experiment::BiasProfile;
use belief_core::report;
use serde::{Deserialize, Serialize};

use crate::io::{load_sessions, write_file, write_json, FileError};
use crate::simulate::{load_manifest, Manifest};

pub const FITS_FILE: &str = "fits.json";
pub const CLASSIFICATION_FILE: &str = "classification.json";

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub sessions: PathBuf,
    /// Ground truth for a recovery report. Defaults to `manifest.json` next
    /// to the sessions when present.
    pub manifest: Option<PathBuf>,
    pub classify: ClassifyOptions,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsFile {
    pub population_baseline: Result<BaselineFits, EstimationError>,
    pub population_complete: Result<CompleteFits, EstimationError>,
    pub individual_baseline: Vec<SubjectFit<BaselineFits>>,
    pub individual_complete: Vec<SubjectFit<CompleteFits>>,
}

/// Per-subject classifications, plus the population fit classified as if it
/// were one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationFile {
    pub options: ClassifyOptions,
    pub baseline: BiasReport,
    pub complete: BiasReport,
    pub population_baseline: Option<BiasReport>,
    pub population_complete: Option<BiasReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub sessions: usize,
    pub file_errors: Vec<FileError>,
    pub rows: usize,
    pub exclusions: usize,
    pub threshold: f64,
    pub complete_tally: BiasTally,
    pub population_error: Option<String>,
    pub recovery_rows: Option<usize>,
}

fn population_report<T: Clone>(
    fit: &Result<T, EstimationError>,
    classify: impl Fn(&[SubjectFit<T>]) -> BiasReport,
) -> Option<BiasReport> {
    fit.as_ref().ok().map(|f| {
        classify(&[SubjectFit {
            subject_id: "population".into(),
            result: Ok(f.clone()),
        }])
    })
}

fn exclusions_csv(rows: &RowSet) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subject_id", "task_index", "reason"]).expect("header");
    for e in &rows.exclusions {
        let reason = serde_json::to_value(e.reason).expect("reason");
        w.write_record([e.subject_id.clone(), e.task_index.to_string(), reason.as_str().unwrap_or_default().into()])
            .expect("row");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Runs the estimation pipeline and writes its tables to `opts.out`.
pub fn run(opts: &EstimateOptions) -> Result<EstimateSummary> {
    let (docs, file_errors) = load_sessions(&opts.sessions)?;
    for e in &file_errors {
        eprintln!("skipping {}: {}", e.path.display(), e.message);
    }
    let mut data = Vec::with_capacity(docs.len());
    let mut file_errors = file_errors;
    for (path, doc) in docs {
        match doc.to_subject_data() {
            Ok(d) => data.push(d),
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                file_errors.push(FileError {
                    path,
                    message: e.to_string(),
                });
            }
        }
    }
    if data.is_empty() {
        bail!("no usable sessions in {}", opts.sessions.display());
    }
    let rows = build_rows(&data)?;

    let fits = FitsFile {
        population_baseline: fit_baseline_population(&rows),
        population_complete: fit_complete_population(&rows),
        individual_baseline: fit_baseline_individual(&rows),
        individual_complete: fit_complete_individual(&rows),
    };
    let options = opts.classify;
    let classification = ClassificationFile {
        options,
        baseline: classify_baseline(&fits.individual_baseline, options),
        complete: classify_complete(&fits.individual_complete, options),
        population_baseline: population_report(&fits.population_baseline, |f| classify_baseline(f, options)),
        population_complete: population_report(&fits.population_complete, |f| classify_complete(f, options)),
    };

    let out = &opts.out;
    let ind_base = report::individual_baseline_fits(&fits.individual_baseline);
    let ind_comp = report::individual_complete_fits(&fits.individual_complete);
    let mut pop_fits: Vec<&ModelFit> = Vec::new();
    if let Ok(b) = &fits.population_baseline {
        pop_fits.extend([&b.success, &b.failure]);
    }
    if let Ok(c) = &fits.population_complete {
        pop_fits.extend([&c.success, &c.failure, &c.variance]);
    }
    if let (Ok(b), Ok(c)) = (&fits.population_baseline, &fits.population_complete) {
        write_file(&out.join("table2.csv"), report::table2_csv(b, c))?;
    }
    let all: Vec<&ModelFit> = pop_fits.iter().chain(&ind_base).chain(&ind_comp).copied().collect();
    write_file(&out.join("coefficients.csv"), report::coefficients_csv(&all))?;
    write_file(&out.join("metrics.csv"), report::metrics_csv(&all))?;
    let individual: Vec<&ModelFit> = ind_base.iter().chain(&ind_comp).copied().collect();
    write_file(
        &out.join("metrics_comparison.csv"),
        report::metrics_comparison_csv(&pop_fits, &individual),
    )?;
    write_file(&out.join("tallies_baseline.csv"), report::tallies_csv(&classification.baseline))?;
    write_file(&out.join("tallies_complete.csv"), report::tallies_csv(&classification.complete))?;
    write_file(&out.join("exclusions.csv"), exclusions_csv(&rows))?;
    write_json(&out.join(FITS_FILE), &fits)?;
    write_json(&out.join(CLASSIFICATION_FILE), &classification)?;
    write_json(&out.join("file_errors.json"), &file_errors)?;

    let manifest_path = opts.manifest.clone().or_else(|| {
        let p = opts.sessions.join("manifest.json");
        p.is_file().then_some(p)
    });
    let recovery_rows = match manifest_path {
        Some(p) => {
            let manifest = load_manifest(&p)?;
            let (detail, summary, n) = recovery_tables(&manifest, &fits.individual_complete);
            write_file(&out.join("recovery.csv"), detail)?;
            write_file(&out.join("recovery_summary.csv"), summary)?;
            Some(n)
        }
        None => None,
    };

    let population_error = match (&fits.population_baseline, &fits.population_complete) {
        (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
        _ => None,
    };
    Ok(EstimateSummary {
        sessions: data.len(),
        file_errors,
        rows: rows.rows.len(),
        exclusions: rows.exclusions.len(),
        threshold: classification.complete.threshold,
        complete_tally: classification.complete.tallies(),
        population_error,
        recovery_rows,
    })
}

/// Generating value of a complete-model coefficient.
pub fn profile_parameter(p: &BiasProfile, name: &str) -> Option<f64> {
    Some(match name {
        "alpha0" => p.alpha0,
        "alpha_pref" => p.alpha_pref,
        "alpha_seq" => p.alpha_seq,
        "beta0" => p.beta0,
        "beta_pref" => p.beta_pref,
        "beta_seq" => p.beta_seq,
        "rho_s" => p.rho_s,
        "rho_f" => p.rho_f,
        "delta_s" => p.delta_s,
        "delta_f" => p.delta_f,
        "eta" => p.eta,
        "nu" => p.nu,
        _ => return None,
    })
}

#[derive(Default)]
struct Group {
    truth: f64,
    sum: f64,
    covered: usize,
    n: usize,
}

/// Individual complete-model estimates against the manifest: one line per
/// subject and coefficient, and a per-profile summary.
fn recovery_tables(manifest: &Manifest, fits: &[SubjectFit<CompleteFits>]) -> (String, String, usize) {
    let truth: HashMap<&str, (&str, &BiasProfile)> = manifest
        .subjects
        .iter()
        .map(|s| (s.subject_id.as_str(), (s.profile_name.as_str(), &s.profile)))
        .collect();
    let mut detail = csv::Writer::from_writer(Vec::new());
    detail
        .write_record([
            "subject_id",
            "profile",
            "model",
            "parameter",
            "truth",
            "estimate",
            "std_error",
            "p_value",
            "covered",
        ])
        .expect("header");
    let mut groups: BTreeMap<(String, String), Group> = BTreeMap::new();
    let mut n = 0;
    for sf in fits {
        let (Some(&(profile_name, profile)), Ok(c)) = (truth.get(sf.subject_id.as_str()), &sf.result) else {
            continue;
        };
        for fit in [&c.success, &c.failure, &c.variance] {
            for name in &fit.names {
                let Some(t) = profile_parameter(profile, name) else { continue };
                let test = wald_test(fit, &LinearCombination::single(name, t)).expect("own coefficient");
                let covered = test.p_value >= 0.05;
                detail
                    .write_record([
                        sf.subject_id.clone(),
                        profile_name.to_string(),
                        format!("{:?}", fit.model),
                        name.clone(),
                        format!("{t:.6}"),
                        format!("{:.6}", test.estimate),
                        format!("{:.6}", test.std_error),
                        format!("{:.6}", test.p_value),
                        covered.to_string(),
                    ])
                    .expect("row");
                let g = groups.entry((profile_name.to_string(), name.clone())).or_default();
                g.truth = t;
                g.sum += test.estimate;
                g.covered += covered as usize;
                g.n += 1;
                n += 1;
            }
        }
    }
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary
        .write_record(["profile", "parameter", "truth", "mean_estimate", "coverage", "subjects"])
        .expect("header");
    for ((profile, name), g) in &groups {
        summary
            .write_record([
                profile.clone(),
                name.clone(),
                format!("{:.6}", g.truth),
                format!("{:.6}", g.sum / g.n as f64),
                format!("{:.4}", g.covered as f64 / g.n as f64),
                g.n.to_string(),
            ])
            .expect("row");
    }
    let text = |w: csv::Writer<Vec<u8>>| String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    (text(detail), text(summary), n)
}

pub fn load_fits(dir: &Path) -> Result<(FitsFile, ClassificationFile)> {
    let read = |name: &str| -> Result<String> {
        let p = dir.join(name);
        fs::read_to_string(&p).with_context(|| {
            format!("missing fits: cannot read {}; run `belief estimate` first", p.display())
        })
    };
    let fits: FitsFile = serde_json::from_str(&read(FITS_FILE)?).context("parsing fits.json")?;
    let classification: ClassificationFile =
        serde_json::from_str(&read(CLASSIFICATION_FILE)?).context("parsing classification.json")?;
    Ok((fits, classification))
}
