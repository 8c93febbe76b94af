//! Run reports in text and JSON form.
//!
//! The JSON object always carries every key; absent parts are `null`.

use std::fmt::Write as _;
use std::path::Path;

use ltpdr_core::engine::{Rule, RunStats, Verdict};
use serde::Serialize;

use crate::run::{Engine, Kind, EXIT_FALSE, EXIT_MISMATCH, EXIT_OPEN, EXIT_TRUE};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// A conclusive KT sequence; `frames[conclusive_index]` is the invariant.
    Invariant {
        conclusive_index: usize,
        frames: Vec<serde_json::Value>,
        #[serde(skip)]
        text: Vec<String>,
    },
    /// A conclusive Kleene sequence, head first.
    Counterexample {
        start: usize,
        obligations: Vec<serde_json::Value>,
        #[serde(skip)]
        text: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub steps: u64,
    pub valid: u64,
    pub unfold: u64,
    pub induction: u64,
    pub candidate: u64,
    pub model: u64,
    pub decide: u64,
    pub conflict: u64,
    pub idle: u64,
    pub frames: usize,
    pub elapsed_ms: f64,
}

impl From<&RunStats> for Stats {
    fn from(s: &RunStats) -> Self {
        Self {
            steps: s.steps(),
            valid: s.count(Rule::Valid),
            unfold: s.count(Rule::Unfold),
            induction: s.count(Rule::Induction),
            candidate: s.count(Rule::Candidate),
            model: s.count(Rule::Model),
            decide: s.count(Rule::Decide),
            conflict: s.count(Rule::Conflict),
            idle: s.idle,
            frames: s.frames,
            elapsed_ms: s.elapsed.map_or(0.0, |d| d.as_secs_f64() * 1e3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    /// The verdict the oracle implies; `null` if it failed.
    pub expected: Option<bool>,
    /// Probability or expected reward at the initial state when finite.
    pub value: Option<f64>,
    pub diverged: bool,
    pub iterations: u64,
    /// `null` when the engine gave no verdict or the oracle failed.
    pub agrees: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub path: String,
    pub kind: &'static str,
    pub engine: &'static str,
    pub verdict: String,
    pub witness: Option<Witness>,
    /// Whether the witness passed the validators; `null` unless requested.
    pub validated: Option<bool>,
    pub stats: Stats,
    pub oracle: Option<OracleReport>,
    #[serde(skip)]
    raw_verdict: Verdict,
}

impl Report {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        path: &Path,
        kind: Kind,
        engine: Engine,
        verdict: Verdict,
        witness: Option<Witness>,
        validated: Option<bool>,
        stats: &RunStats,
        oracle: Option<OracleReport>,
    ) -> Self {
        Self {
            path: path.display().to_string(),
            kind: kind.name(),
            engine: engine.name(),
            verdict: verdict.to_string(),
            witness,
            validated,
            stats: stats.into(),
            oracle,
            raw_verdict: verdict,
        }
    }

    pub fn verdict(&self) -> Verdict {
        self.raw_verdict
    }

    /// A failed validation or oracle disagreement outranks the verdict.
    pub fn exit_code(&self) -> i32 {
        let disagrees = self.oracle.as_ref().and_then(|o| o.agrees) == Some(false);
        if self.validated == Some(false) || disagrees {
            return EXIT_MISMATCH;
        }
        match self.raw_verdict {
            Verdict::True => EXIT_TRUE,
            Verdict::False => EXIT_FALSE,
            Verdict::BudgetExhausted | Verdict::Stuck => EXIT_OPEN,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report is serialisable")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "RESULT: {}", self.verdict).unwrap();
        match &self.witness {
            Some(Witness::Invariant { conclusive_index, text, .. }) => {
                writeln!(out, "witness: KT sequence, X_{conclusive_index} is an inductive invariant").unwrap();
                for (i, x) in text.iter().enumerate() {
                    writeln!(out, "  X_{i} = {x}").unwrap();
                }
            }
            Some(Witness::Counterexample { start, text, .. }) => {
                writeln!(out, "witness: Kleene sequence from index {start}").unwrap();
                for (i, c) in text.iter().enumerate() {
                    writeln!(out, "  C_{} = {c}", start + i).unwrap();
                }
            }
            None => out.push_str("witness: none\n"),
        }
        if let Some(ok) = self.validated {
            writeln!(out, "validated: {}", if ok { "yes" } else { "NO" }).unwrap();
        }
        let s = &self.stats;
        writeln!(
            out,
            "stats: steps={} valid={} unfold={} induction={} candidate={} model={} decide={} conflict={} idle={} frames={} elapsed={:.3}ms",
            s.steps, s.valid, s.unfold, s.induction, s.candidate, s.model, s.decide, s.conflict, s.idle, s.frames, s.elapsed_ms
        )
        .unwrap();
        if let Some(o) = &self.oracle {
            let expected = o.expected.map_or("unknown", |e| if e { "True" } else { "False" });
            let value = match (o.value, o.diverged) {
                (_, true) => "inf".to_string(),
                (Some(v), _) => v.to_string(),
                (None, _) => "-".to_string(),
            };
            let agrees = match o.agrees {
                Some(true) => "yes",
                Some(false) => "NO",
                None => "n/a",
            };
            write!(out, "oracle: expected={expected} value={value} iterations={} agrees={agrees}", o.iterations).unwrap();
            if let Some(e) = &o.error {
                write!(out, " error={e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}
