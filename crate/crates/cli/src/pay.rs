use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use belief_core::scoring::{settle, PaymentBreakdown, ScoringConfig};
use belief_core::session::SessionDocument;

/// Settles one session file.
pub fn run(session: &Path, seed: u64) -> Result<PaymentBreakdown> {
    let text = fs::read_to_string(session).with_context(|| format!("reading {}", session.display()))?;
    let doc = SessionDocument::from_json(&text).with_context(|| format!("loading {}", session.display()))?;
    settle(&doc, &ScoringConfig::default(), seed).with_context(|| format!("settling {}", session.display()))
}
