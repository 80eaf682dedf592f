use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use belief_cli::estimate::{self, ClassificationFile, EstimateOptions};
use belief_cli::impact::{self, ImpactOptions};
use belief_cli::{pay, simulate};
use belief_core::estimation::{BiasKind, ClassifyOptions, Correction};
use belief_core::experiment::BiasProfile;
use belief_core::population::{MixtureEntry, ProfileMixture};
use belief_core::session::SessionDocument;
use tempfile::TempDir;

fn sim(dir: &Path, seed: u64, subjects: usize, mixture: ProfileMixture) -> simulate::Manifest {
    simulate::run(&simulate::SimulateOptions {
        seed,
        subjects,
        mixture,
        fixed_plan: false,
        out: dir.to_path_buf(),
    })
    .unwrap()
}

fn estimate_opts(sessions: &Path, out: &Path, correction: Correction) -> EstimateOptions {
    EstimateOptions {
        sessions: sessions.to_path_buf(),
        manifest: None,
        classify: ClassifyOptions {
            correction,
            ..ClassifyOptions::default()
        },
        out: out.to_path_buf(),
    }
}

fn classification(dir: &Path) -> ClassificationFile {
    serde_json::from_str(&fs::read_to_string(dir.join("classification.json")).unwrap()).unwrap()
}

fn half_optimists() -> ProfileMixture {
    ProfileMixture {
        entries: vec![
            MixtureEntry {
                name: "bayesian".into(),
                weight: 0.5,
                profile: BiasProfile::BAYESIAN.with_noise(0.3),
            },
            MixtureEntry {
                name: "optimist".into(),
                weight: 0.5,
                profile: BiasProfile {
                    alpha_pref: 0.8,
                    ..BiasProfile::BAYESIAN
                }
                .with_noise(0.3),
            },
        ],
    }
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn default_simulation_writes_88_sessions_of_30_tasks() {
    let tmp = TempDir::new().unwrap();
    sim(tmp.path(), 1, 88, simulate::default_mixture());
    let sessions: Vec<_> = fs::read_dir(tmp.path().join("sessions")).unwrap().collect();
    assert_eq!(sessions.len(), 88);
    for e in sessions {
        let doc = SessionDocument::from_json(&fs::read_to_string(e.unwrap().path()).unwrap()).unwrap();
        assert_eq!(doc.plan.len(), 30);
        assert!(doc.is_complete());
    }
    let index: Vec<simulate::IndexEntry> =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("index.json")).unwrap()).unwrap();
    assert_eq!(index.len(), 88);
    assert!(index.iter().all(|e| tmp.path().join(&e.file).is_file()));
}

#[test]
fn simulation_is_byte_identical_for_a_seed() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    sim(a.path(), 7, 12, half_optimists());
    sim(b.path(), 7, 12, half_optimists());
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.strip_prefix(a.path()).unwrap(), y.strip_prefix(b.path()).unwrap());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn manifest_records_true_profiles() {
    let tmp = TempDir::new().unwrap();
    let m = sim(tmp.path(), 2, 10, half_optimists());
    let optimists: Vec<_> = m.subjects.iter().filter(|s| s.profile_name == "optimist").collect();
    assert_eq!(optimists.len(), 5);
    assert!(optimists.iter().all(|s| s.profile.alpha_pref == 0.8));
    let loaded = simulate::load_manifest(&tmp.path().join("manifest.json")).unwrap();
    assert_eq!(loaded, m);
}

#[test]
fn exact_bayesian_batch_has_no_biases() {
    let tmp = TempDir::new().unwrap();
    sim(tmp.path(), 3, 20, ProfileMixture::single("bayes", BiasProfile::BAYESIAN));
    let out = tmp.path().join("out");
    let summary = estimate::run(&estimate_opts(tmp.path(), &out, Correction::None)).unwrap();
    assert_eq!(summary.sessions, 20);
    assert_eq!(summary.complete_tally.no_bias, 20);
    let c = classification(&out);
    assert!(c.baseline.subjects.iter().all(|s| s.biases.is_empty()));
    assert!(c.complete.subjects.iter().all(|s| s.biases.is_empty()));
    assert!(c.population_complete.unwrap().subjects[0].biases.is_empty());
    for f in ["table2.csv", "coefficients.csv", "metrics.csv", "metrics_comparison.csv", "tallies_complete.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn sidak_correction_recomputes_tallies() {
    let tmp = TempDir::new().unwrap();
    sim(tmp.path(), 4, 40, half_optimists());
    let (plain, corrected) = (tmp.path().join("plain"), tmp.path().join("sidak"));
    estimate::run(&estimate_opts(tmp.path(), &plain, Correction::None)).unwrap();
    estimate::run(&estimate_opts(tmp.path(), &corrected, Correction::Sidak)).unwrap();
    let (p, s) = (classification(&plain), classification(&corrected));
    assert_eq!(p.complete.threshold, 0.05);
    assert!((s.complete.threshold - 0.004652).abs() < 5e-7);
    let total = |c: &ClassificationFile| BiasKind::ALL.iter().map(|&k| c.complete.count(k)).sum::<usize>();
    assert!(total(&s) < total(&p));
    let tallies = fs::read_to_string(corrected.join("tallies_complete.csv")).unwrap();
    let optimism = tallies.lines().find(|l| l.starts_with("Optimism,")).unwrap();
    assert_eq!(optimism.rsplit(',').next().unwrap(), s.complete.count(BiasKind::Optimism).to_string());
}

#[test]
fn bad_files_are_reported_and_skipped() {
    let tmp = TempDir::new().unwrap();
    sim(tmp.path(), 5, 6, simulate::default_mixture());
    let sessions = tmp.path().join("sessions");
    fs::write(sessions.join("broken.json"), "{ not json").unwrap();
    let mut doc = SessionDocument::from_json(&fs::read_to_string(sessions.join("sim-001.json")).unwrap()).unwrap();
    doc.reports[0].posterior = None;
    fs::write(sessions.join("partial.json"), doc.to_json()).unwrap();

    let out = tmp.path().join("out");
    let summary = estimate::run(&estimate_opts(tmp.path(), &out, Correction::None)).unwrap();
    assert_eq!(summary.sessions, 6);
    assert_eq!(summary.file_errors.len(), 2);
    let listed = fs::read_to_string(out.join("file_errors.json")).unwrap();
    assert!(listed.contains("broken.json") && listed.contains("partial.json"));
    assert!(listed.contains("task 1 posterior"));
}

#[test]
fn recovery_report_compares_to_manifest() {
    let tmp = TempDir::new().unwrap();
    sim(tmp.path(), 6, 88, half_optimists());
    let out = tmp.path().join("out");
    let summary = estimate::run(&estimate_opts(tmp.path(), &out, Correction::None)).unwrap();
    assert_eq!(summary.recovery_rows, Some(88 * 12));
    let text = fs::read_to_string(out.join("recovery_summary.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let truth: f64 = rec[2].parse().unwrap();
        let mean: f64 = rec[3].parse().unwrap();
        let coverage: f64 = rec[4].parse().unwrap();
        assert_eq!(&rec[5], "44");
        if &rec[1] != "eta" {
            assert!((mean - truth).abs() < 0.1, "{:?}", rec);
            assert!(coverage > 0.75, "{:?}", rec);
        }
    }
    assert!(text.contains("optimist,alpha_pref,0.800000"));
}

#[test]
fn impact_needs_fits_then_ranks_optimism() {
    let tmp = TempDir::new().unwrap();
    sim(tmp.path(), 8, 40, half_optimists());
    let out = tmp.path().join("out");
    let opts = ImpactOptions {
        sessions: tmp.path().to_path_buf(),
        fits: out.clone(),
        include_clamped: false,
        out: out.clone(),
    };
    let err = impact::run(&opts).unwrap_err();
    assert!(format!("{err:#}").contains("missing fits"), "{err:#}");

    estimate::run(&estimate_opts(tmp.path(), &out, Correction::None)).unwrap();
    let table = impact::run(&opts).unwrap();
    assert_eq!(table.ranking_by_gross_e()[0], BiasKind::Optimism);
    let csv = fs::read_to_string(out.join("impact.csv")).unwrap();
    assert!(csv.starts_with("bias,significance_count,pairs,clamped,gross_delta_e"));
    assert!(out.join("impact_subjects.csv").is_file());
}

#[test]
fn pay_settles_complete_sessions_only() {
    let tmp = TempDir::new().unwrap();
    sim(tmp.path(), 9, 1, simulate::default_mixture());
    let path = tmp.path().join("sessions/sim-001.json");
    let p = pay::run(&path, 3).unwrap();
    assert_eq!(p.lotteries.len(), 120);
    assert_eq!(p, pay::run(&path, 3).unwrap());
    assert_eq!(p.total_cents, 500.0 + p.scoring_cents + p.dollar_earnings_cents as f64);

    let mut doc = SessionDocument::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    doc.reports[4].prior = None;
    let partial = tmp.path().join("partial.json");
    fs::write(&partial, doc.to_json()).unwrap();
    let err = format!("{:#}", pay::run(&partial, 3).unwrap_err());
    assert!(err.contains("incomplete") && err.contains("task 5 prior"), "{err}");
}

#[test]
fn binary_runs_the_pipeline() {
    let tmp = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_belief");
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).current_dir(tmp.path()).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let s = run(&["simulate", "--seed", "2", "--subjects", "12", "--fixed-plan", "--out", "sim"]);
    assert!(s.contains("wrote 12 sessions"));
    let s = run(&["estimate", "sim", "--correction", "sidak", "--out", "res"]);
    assert!(s.contains("threshold p < 0.004652"), "{s}");
    run(&["impact", "sim", "--fits", "res", "--out", "res"]);
    let s = run(&["pay", "sim/sessions/sim-003.json", "--seed", "5"]);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["subject_id"], "sim-003");

    let bad = Command::new(bin).args(["estimate", "sim", "--alpha", "2"]).current_dir(tmp.path()).output().unwrap();
    assert!(!bad.status.success());
}
