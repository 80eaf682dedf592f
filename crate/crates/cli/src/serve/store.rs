//! Session persistence for the elicitation service.
//!
//! Every session has an append-only event log `logs/<id>.jsonl`; state is
//! rebuilt by replaying it. `index.jsonl` records session creation and
//! finalization. Finalized sessions are also written as ordinary session
//! documents (`sessions/<id>.json`) with their payment
//! (`payments/<id>.json`). All writes for one session happen under that
//! session's lock.

use std::collections::{HashMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use belief_core::experiment::{build_plan, Origin, PlanConfig};
use belief_core::scoring::{settle, PaymentBreakdown, ScoringConfig};
use belief_core::session::{MissingReport, PercentReport, ReportKind, SessionDocument};
use rand::Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

#[derive(Debug, Clone, PartialEq)]
pub enum StoreError {
    NotFound,
    Unauthorized,
    Invalid(String),
    Conflict(String),
    Incomplete(Vec<MissingReport>),
    Io(String),
}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::Io(e.to_string())
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    Created {
        session_id: String,
        token: String,
        doc: SessionDocument,
    },
    Report {
        task_index: usize,
        kind: ReportKind,
        report: PercentReport,
        idempotency_key: String,
    },
    Finalized {
        seed: u64,
        finalized_ms: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum IndexLine<'a> {
    Created {
        session_id: &'a str,
        subject_id: &'a str,
        created_ms: u64,
        log: String,
    },
    Finalized {
        session_id: &'a str,
        finalized_ms: u64,
        session_file: String,
        payment_file: String,
    },
}

/// A task as shown before finalization: the urn is withheld.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicTask {
    pub task_index: usize,
    pub seq1: String,
    pub seq2: String,
    pub is_dollar: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicReports {
    pub task_index: usize,
    pub prior: Option<PercentReport>,
    pub posterior: Option<PercentReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicSession {
    pub session_id: String,
    pub subject_id: String,
    pub tasks: Vec<PublicTask>,
    pub reports: Vec<PublicReports>,
    pub missing: Vec<String>,
    pub finalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finalized {
    pub session: SessionDocument,
    pub payment: PaymentBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub task_index: usize,
    pub kind: ReportKind,
    pub mean_percent: f64,
    pub sd_percent: f64,
    pub idempotency_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    pub task_index: usize,
    pub kind: ReportKind,
    /// True when this request repeated an earlier one with the same key.
    pub replay: bool,
    pub remaining: usize,
}

struct SessionState {
    id: String,
    token: String,
    doc: SessionDocument,
    keys: HashMap<String, (usize, ReportKind, PercentReport)>,
    finalized: Option<Finalized>,
}

impl SessionState {
    fn public(&self) -> PublicSession {
        PublicSession {
            session_id: self.id.clone(),
            subject_id: self.doc.subject_id.clone(),
            tasks: self
                .doc
                .plan
                .iter()
                .map(|t| PublicTask {
                    task_index: t.task_index,
                    seq1: t.seq1.clone(),
                    seq2: t.seq2.clone(),
                    is_dollar: t.is_dollar,
                })
                .collect(),
            reports: self
                .doc
                .reports
                .iter()
                .map(|r| PublicReports {
                    task_index: r.task_index,
                    prior: r.prior,
                    posterior: r.posterior,
                })
                .collect(),
            missing: self.doc.missing_reports().iter().map(|m| m.to_string()).collect(),
            finalized: self.finalized.is_some(),
        }
    }

    fn record(&mut self, task_index: usize, kind: ReportKind, report: PercentReport, key: String) {
        let slot = self.doc.reports_for_mut(task_index).expect("validated task");
        match kind {
            ReportKind::Prior => slot.prior = Some(report),
            ReportKind::Posterior => slot.posterior = Some(report),
        }
        self.keys.insert(key, (task_index, kind, report));
    }

    fn finalize(&mut self, seed: u64, finalized_ms: u64, scoring: &ScoringConfig) -> Result<(), StoreError> {
        self.doc.timestamps.finalized_ms = Some(finalized_ms);
        let payment = settle(&self.doc, scoring, seed).map_err(|e| StoreError::Invalid(e.to_string()))?;
        self.finalized = Some(Finalized {
            session: self.doc.clone(),
            payment,
        });
        Ok(())
    }
}

pub struct SessionStore {
    root: PathBuf,
    scoring: ScoringConfig,
    sessions: StdMutex<HashMap<String, Arc<Mutex<SessionState>>>>,
    subjects: StdMutex<HashSet<String>>,
    index: StdMutex<()>,
}

fn append_line(path: &Path, line: &str) -> std::io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(line.as_bytes())?;
    f.write_all(b"\n")?;
    f.sync_data()
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}

impl SessionStore {
    /// Opens (or creates) a data directory and replays every session log.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for sub in ["logs", "sessions", "payments"] {
            fs::create_dir_all(root.join(sub)).with_context(|| format!("creating {}", root.join(sub).display()))?;
        }
        let store = SessionStore {
            root,
            scoring: ScoringConfig::default(),
            sessions: StdMutex::new(HashMap::new()),
            subjects: StdMutex::new(HashSet::new()),
            index: StdMutex::new(()),
        };
        let mut logs: Vec<PathBuf> = fs::read_dir(store.root.join("logs"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        logs.sort();
        for path in logs {
            let state = store.replay(&path).with_context(|| format!("replaying {}", path.display()))?;
            store.subjects.lock().unwrap().insert(state.doc.subject_id.clone());
            store
                .sessions
                .lock()
                .unwrap()
                .insert(state.id.clone(), Arc::new(Mutex::new(state)));
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.root.join("logs").join(format!("{id}.jsonl"))
    }

    fn replay(&self, path: &Path) -> Result<SessionState> {
        let file = fs::File::open(path)?;
        let mut state: Option<SessionState> = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = match serde_json::from_str(&line) {
                Ok(e) => e,
                // a torn final write; everything before it stands
                Err(e) => {
                    eprintln!("{}: ignoring unreadable line {}: {e}", path.display(), i + 1);
                    continue;
                }
            };
            match (event, state.as_mut()) {
                (Event::Created { session_id, token, doc }, None) => {
                    state = Some(SessionState {
                        id: session_id,
                        token,
                        doc,
                        keys: HashMap::new(),
                        finalized: None,
                    })
                }
                (
                    Event::Report {
                        task_index,
                        kind,
                        report,
                        idempotency_key,
                    },
                    Some(s),
                ) => s.record(task_index, kind, report, idempotency_key),
                (Event::Finalized { seed, finalized_ms }, Some(s)) => s
                    .finalize(seed, finalized_ms, &self.scoring)
                    .map_err(|e| anyhow::anyhow!("{e:?}"))?,
                (e, _) => anyhow::bail!("line {}: unexpected event {e:?}", i + 1),
            }
        }
        state.context("empty session log")
    }

    fn append_index(&self, line: &IndexLine) -> Result<(), StoreError> {
        let _guard = self.index.lock().unwrap();
        let text = serde_json::to_string(line).expect("index line");
        Ok(append_line(&self.root.join("index.jsonl"), &text)?)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<SessionState>>, StoreError> {
        self.sessions.lock().unwrap().get(id).cloned().ok_or(StoreError::NotFound)
    }

    async fn authorized(&self, id: &str, token: &str) -> Result<Arc<Mutex<SessionState>>, StoreError> {
        let s = self.session(id)?;
        if s.lock().await.token != token {
            return Err(StoreError::Unauthorized);
        }
        Ok(s)
    }

    /// Starts a session on a fresh plan. Returns the public view and the
    /// session token.
    pub async fn create(
        &self,
        subject_id: Option<String>,
        plan_seed: Option<u64>,
    ) -> Result<(PublicSession, String), StoreError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let token = uuid::Uuid::new_v4().simple().to_string();
        let subject_id = subject_id.unwrap_or_else(|| format!("human-{}", &id[..12]));
        if subject_id.is_empty() || !subject_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(StoreError::Invalid(
                "subject_id must be non-empty and use only letters, digits, '-' and '_'".into(),
            ));
        }
        if !self.subjects.lock().unwrap().insert(subject_id.clone()) {
            return Err(StoreError::Conflict(format!("subject {subject_id} already has a session")));
        }
        let seed = plan_seed.unwrap_or_else(|| rand::rng().random());
        let plan = build_plan(seed, &PlanConfig::default()).map_err(|e| StoreError::Invalid(e.to_string()))?;
        let mut doc = SessionDocument::new(subject_id, Origin::Human, seed, &plan.tasks);
        let created_ms = now_ms();
        doc.timestamps.created_ms = Some(created_ms);

        let state = SessionState {
            id: id.clone(),
            token: token.clone(),
            doc,
            keys: HashMap::new(),
            finalized: None,
        };
        let event = Event::Created {
            session_id: id.clone(),
            token: token.clone(),
            doc: state.doc.clone(),
        };
        append_line(&self.log_path(&id), &serde_json::to_string(&event).expect("event"))?;
        self.append_index(&IndexLine::Created {
            session_id: &id,
            subject_id: &state.doc.subject_id,
            created_ms,
            log: format!("logs/{id}.jsonl"),
        })?;
        let public = state.public();
        self.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(state)));
        Ok((public, token))
    }

    pub async fn status(&self, id: &str, token: &str) -> Result<PublicSession, StoreError> {
        let s = self.authorized(id, token).await?;
        let guard = s.lock().await;
        Ok(guard.public())
    }

    pub async fn submit(&self, id: &str, token: &str, req: SubmitRequest) -> Result<SubmitOutcome, StoreError> {
        let s = self.authorized(id, token).await?;
        let mut state = s.lock().await;
        let report = PercentReport {
            mean_percent: req.mean_percent,
            sd_percent: req.sd_percent,
            submitted_ms: None,
        };
        let outcome = |state: &SessionState, replay| SubmitOutcome {
            task_index: req.task_index,
            kind: req.kind,
            replay,
            remaining: state.doc.missing_reports().len(),
        };

        if req.idempotency_key.is_empty() {
            return Err(StoreError::Invalid("idempotency_key is required".into()));
        }
        if let Some(&(task, kind, prev)) = state.keys.get(&req.idempotency_key) {
            let same = task == req.task_index
                && kind == req.kind
                && prev.mean_percent == report.mean_percent
                && prev.sd_percent == report.sd_percent;
            return if same {
                Ok(outcome(&state, true))
            } else {
                Err(StoreError::Conflict(
                    "idempotency_key was already used for a different report".into(),
                ))
            };
        }
        if state.finalized.is_some() {
            return Err(StoreError::Conflict("session is already finalized".into()));
        }
        let Some(slot) = state.doc.reports_for(req.task_index) else {
            return Err(StoreError::Invalid(format!("no task {}", req.task_index)));
        };
        report.validate(Origin::Human).map_err(StoreError::Invalid)?;
        let label = MissingReport {
            task_index: req.task_index,
            kind: req.kind,
        };
        if slot.get(req.kind).is_some() {
            return Err(StoreError::Conflict(format!("duplicate submission: {label} is already recorded")));
        }
        if req.kind == ReportKind::Posterior && slot.prior.is_none() {
            return Err(StoreError::Conflict(format!(
                "task {} prior must be submitted before its posterior",
                req.task_index
            )));
        }

        let report = PercentReport {
            submitted_ms: Some(now_ms()),
            ..report
        };
        let event = Event::Report {
            task_index: req.task_index,
            kind: req.kind,
            report,
            idempotency_key: req.idempotency_key.clone(),
        };
        append_line(&self.log_path(&state.id), &serde_json::to_string(&event).expect("event"))?;
        state.record(req.task_index, req.kind, report, req.idempotency_key.clone());
        Ok(outcome(&state, false))
    }

    /// Reveals the urns and settles the session. Repeated calls return the
    /// first result.
    pub async fn finalize(&self, id: &str, token: &str, seed: Option<u64>) -> Result<Finalized, StoreError> {
        let s = self.authorized(id, token).await?;
        let mut state = s.lock().await;
        if let Some(done) = &state.finalized {
            return Ok(done.clone());
        }
        let missing = state.doc.missing_reports();
        if !missing.is_empty() {
            return Err(StoreError::Incomplete(missing));
        }
        let seed = seed.unwrap_or_else(|| rand::rng().random());
        let finalized_ms = now_ms();
        let event = Event::Finalized { seed, finalized_ms };
        // settle first so a failure leaves the log untouched
        let mut trial = SessionState {
            id: state.id.clone(),
            token: String::new(),
            doc: state.doc.clone(),
            keys: HashMap::new(),
            finalized: None,
        };
        trial.finalize(seed, finalized_ms, &self.scoring)?;
        append_line(&self.log_path(&state.id), &serde_json::to_string(&event).expect("event"))?;
        let done = trial.finalized.expect("just finalized");
        state.doc = done.session.clone();
        state.finalized = Some(done.clone());

        let subject = done.session.subject_id.clone();
        let session_file = format!("sessions/{subject}.json");
        let payment_file = format!("payments/{subject}.json");
        write_atomic(&self.root.join(&session_file), &(done.session.to_json() + "\n"))?;
        write_atomic(
            &self.root.join(&payment_file),
            &(serde_json::to_string_pretty(&done.payment).expect("payment") + "\n"),
        )?;
        self.append_index(&IndexLine::Finalized {
            session_id: &state.id,
            finalized_ms,
            session_file,
            payment_file,
        })?;
        Ok(done)
    }
}
