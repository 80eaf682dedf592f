use std::path::PathBuf;

use anyhow::{bail, Result};
use belief_core::estimation::build_rows;
use belief_core::impact::{aggregate, compute_impacts, AggregateOptions, BiasImpact, ImpactTable};
use belief_core::report;

use crate::estimate::load_fits;
use crate::io::{load_sessions, write_file};

#[derive(Debug, Clone)]
pub struct ImpactOptions {
    pub sessions: PathBuf,
    /// Output directory of `belief estimate`.
    pub fits: PathBuf,
    pub include_clamped: bool,
    pub out: PathBuf,
}

fn subjects_csv(impacts: &[BiasImpact], include_clamped: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "subject_id",
        "bias",
        "side",
        "tasks",
        "clamped",
        "gross_delta_e",
        "gross_delta_var",
    ])
    .expect("header");
    for imp in impacts {
        let side = imp.side.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default();
        let (e, v) = imp
            .gross(include_clamped)
            .map(|(e, v)| (format!("{e:.6}"), format!("{v:.6}")))
            .unwrap_or_default();
        w.write_record([
            imp.subject_id.clone(),
            imp.kind.label().to_string(),
            side,
            imp.tasks.len().to_string(),
            imp.clamped_count().to_string(),
            e,
            v,
        ])
        .expect("row");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Gross and net impact of every detected complete-model bias.
pub fn run(opts: &ImpactOptions) -> Result<ImpactTable> {
    let (fits, classification) = load_fits(&opts.fits)?;
    let (docs, errors) = load_sessions(&opts.sessions)?;
    for e in &errors {
        eprintln!("skipping {}: {}", e.path.display(), e.message);
    }
    let data: Vec<_> = docs
        .iter()
        .filter_map(|(path, doc)| match doc.to_subject_data() {
            Ok(d) => Some(d),
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                None
            }
        })
        .collect();
    if data.is_empty() {
        bail!("no usable sessions in {}", opts.sessions.display());
    }
    let rows = build_rows(&data)?;
    let missing: Vec<&str> = classification
        .complete
        .subjects
        .iter()
        .filter(|s| !s.biases.is_empty())
        .filter(|s| !fits.individual_complete.iter().any(|f| f.subject_id == s.subject_id))
        .map(|s| s.subject_id.as_str())
        .collect();
    if !missing.is_empty() {
        bail!("missing fits for classified subjects: {}", missing.join(", "));
    }

    let impacts = compute_impacts(&rows, &fits.individual_complete, &classification.complete);
    let table = aggregate(
        &impacts,
        &classification.complete,
        AggregateOptions {
            include_clamped: opts.include_clamped,
        },
    );
    write_file(&opts.out.join("impact.csv"), report::impact_csv(&table))?;
    write_file(
        &opts.out.join("impact_subjects.csv"),
        subjects_csv(&impacts, opts.include_clamped),
    )?;
    Ok(table)
}
