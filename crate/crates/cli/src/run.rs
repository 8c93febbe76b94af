//! Running one engine on one model file and collecting the report.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use clap::ValueEnum;
use ltpdr_core::engine::{PdrAnswer, PushForwardProposer, RunOptions, Schedule, Solver, TraceEvent, TraceSink, Verdict};
use ltpdr_core::eps::EpsFrame;
use ltpdr_core::kripke::{pdr_fkr, pdr_ibkr, pdr_opdual, KripkeHeuristics, KripkeSearch, KripkeStructure, StateSet};
use ltpdr_core::lattice::{check_kleene_witness, check_kt_witness, is_conclusive_kt, is_kt_sequence, CompleteLattice, Problem, Transformer};
use ltpdr_core::mdp::{self, MdpModel};
use ltpdr_core::mrm::{self, MrmModel};
use ltpdr_core::oracles::{self, OracleError, OracleResult, OracleVerdict};
use ltpdr_core::{EngineError, Heuristics};

use crate::format::{self, FormatError};
use crate::report::{OracleReport, Report, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    KripkeForward,
    KripkeIbackward,
    Mdp,
    Mrm,
}

impl Kind {
    /// `.kr` files default to the forward transformer.
    pub fn from_path(path: &Path) -> Option<Kind> {
        match path.extension()?.to_str()? {
            "kr" => Some(Kind::KripkeForward),
            "mdp" => Some(Kind::Mdp),
            "mrm" => Some(Kind::Mrm),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::KripkeForward => "kripke-forward",
            Kind::KripkeIbackward => "kripke-ibackward",
            Kind::Mdp => "mdp",
            Kind::Mrm => "mrm",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    #[default]
    Combined,
    Positive,
    Negative,
    Opdual,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Combined => "combined",
            Engine::Positive => "positive",
            Engine::Negative => "negative",
            Engine::Opdual => "opdual",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRequest {
    pub path: PathBuf,
    /// Inferred from the file extension when absent.
    pub kind: Option<Kind>,
    pub engine: Engine,
    pub options: RunOptions,
    /// Replaces the threshold given in an `.mdp` or `.mrm` file.
    pub lambda: Option<f64>,
    pub trace: bool,
    pub validate_witness: bool,
    pub oracle: bool,
}

impl RunRequest {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            kind: None,
            engine: Engine::Combined,
            options: RunOptions::default(),
            lambda: None,
            trace: false,
            validate_witness: false,
            oracle: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Engine { path: PathBuf, source: EngineError },
}

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_OPEN: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_FALSE: i32 = 10;

/// Serialised trace output shared by parallel runs.
static TRACE_LOCK: Mutex<()> = Mutex::new(());

struct StderrTrace<'p> {
    prefix: Option<&'p str>,
}

impl TraceSink for StderrTrace<'_> {
    fn record(&mut self, event: &TraceEvent) {
        let _guard = TRACE_LOCK.lock().unwrap_or_else(|e| e.into_inner());
        let mut err = std::io::stderr().lock();
        let _ = match self.prefix {
            Some(p) => writeln!(err, "{p}: {event}"),
            None => writeln!(err, "{event}"),
        };
    }
}

/// How a lattice element is shown in reports.
pub trait Render {
    fn to_json(&self) -> serde_json::Value;
    fn to_text(&self) -> String;
}

impl Render for StateSet {
    fn to_json(&self) -> serde_json::Value {
        self.iter().collect::<Vec<_>>().into()
    }

    fn to_text(&self) -> String {
        self.to_string()
    }
}

/// Values as strings, since JSON has no `∞` and `ε` is symbolic.
impl Render for EpsFrame {
    fn to_json(&self) -> serde_json::Value {
        self.values().iter().map(|v| v.to_string()).collect::<Vec<_>>().into()
    }

    fn to_text(&self) -> String {
        self.to_string()
    }
}

fn engine_run<L, F, H, N>(
    problem: &Problem<L, F>,
    engine: Engine,
    heuristics: &mut H,
    negative: &mut N,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
) -> Result<PdrAnswer<L::Elem>, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L>,
    N: Heuristics<L>,
{
    let mut proposer = PushForwardProposer::default();
    let mut solver = Solver::new(problem).options(options.clone());
    if let Some(trace) = trace {
        solver = solver.trace(trace);
    }
    match engine {
        Engine::Positive => solver.induction(&mut proposer).run_positive(),
        Engine::Negative => solver.run_negative(negative),
        Engine::Combined | Engine::Opdual => {
            if matches!(options.schedule, Schedule::Fuzz { .. }) {
                solver = solver.induction(&mut proposer);
            }
            solver.run_combined(heuristics)
        }
    }
}

/// Witness in report form, and whether it passed the lattice validators.
fn witness<L, F>(problem: &Problem<L, F>, answer: &PdrAnswer<L::Elem>) -> (Option<Witness>, Option<bool>)
where
    L: CompleteLattice,
    L::Elem: Render,
    F: Transformer<L::Elem>,
{
    if let (Some(frames), Some(j)) = (&answer.kt_witness, answer.conclusive_index) {
        let ok = is_kt_sequence(problem, frames)
            && is_conclusive_kt(&problem.lattice, frames).is_some()
            && check_kt_witness(problem, &frames[j]);
        let w = Witness::Invariant {
            conclusive_index: j,
            frames: frames.frames().iter().map(Render::to_json).collect(),
            text: frames.frames().iter().map(Render::to_text).collect(),
        };
        return (Some(w), Some(ok));
    }
    if let Some(chain) = &answer.kleene_witness {
        let ok = check_kleene_witness(problem, chain);
        let w = Witness::Counterexample {
            start: chain.start_index(),
            obligations: chain.elems().iter().map(Render::to_json).collect(),
            text: chain.elems().iter().map(Render::to_text).collect(),
        };
        return (Some(w), Some(ok));
    }
    (None, None)
}

fn oracle_report(result: Result<OracleResult, OracleError>, lambda: f64) -> OracleReport {
    match result {
        Ok(r) => OracleReport {
            expected: Some(match r.verdict {
                OracleVerdict::Holds(b) => b,
                OracleVerdict::Diverged => lambda.is_infinite(),
            }),
            value: r.value.filter(|v| v.is_finite()),
            diverged: r.verdict == OracleVerdict::Diverged,
            iterations: r.iterations,
            agrees: None,
            error: None,
        },
        Err(e) => OracleReport {
            expected: None,
            value: None,
            diverged: false,
            iterations: 0,
            agrees: None,
            error: Some(e.to_string()),
        },
    }
}

struct Outcome {
    verdict: Verdict,
    witness: Option<Witness>,
    validated: Option<bool>,
    stats: ltpdr_core::RunStats,
}

fn finish<L, F>(problem: &Problem<L, F>, answer: PdrAnswer<L::Elem>, validate: bool) -> Outcome
where
    L: CompleteLattice,
    L::Elem: Render,
    F: Transformer<L::Elem>,
{
    let (witness, ok) = witness(problem, &answer);
    Outcome {
        verdict: answer.verdict,
        witness,
        validated: if validate { ok } else { None },
        stats: answer.stats,
    }
}

fn read(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses, solves and (optionally) cross-checks one model.
pub fn run(request: &RunRequest, trace_prefix: Option<&str>) -> Result<Report, RunError> {
    let path = &request.path;
    let kind = match request.kind.or_else(|| Kind::from_path(path)) {
        Some(k) => k,
        None => {
            return Err(RunError::Usage(format!(
                "{}: cannot infer the model kind from the extension; pass --kind",
                path.display()
            )))
        }
    };
    let kripke = matches!(kind, Kind::KripkeForward | Kind::KripkeIbackward);
    if request.engine == Engine::Opdual && !kripke {
        return Err(RunError::Usage("--engine opdual is only available for Kripke structures".into()));
    }
    if request.lambda.is_some() && kripke {
        return Err(RunError::Usage("--lambda applies only to .mdp and .mrm models".into()));
    }
    let text = read(path)?;
    let bad_format = |source| RunError::Format {
        path: path.clone(),
        source,
    };
    let bad_engine = |source| RunError::Engine {
        path: path.clone(),
        source,
    };
    let mut sink = StderrTrace { prefix: trace_prefix };
    let trace: Option<&mut dyn TraceSink> = if request.trace { Some(&mut sink) } else { None };
    let options = &request.options;
    let validate = request.validate_witness;
    let started = Instant::now();

    let (outcome, oracle) = match kind {
        Kind::KripkeForward | Kind::KripkeIbackward => {
            let model = format::parse_kripke(&text).map_err(bad_format)?;
            let outcome = kripke_run(&model, kind, request.engine, options, trace, validate).map_err(bad_engine)?;
            let oracle = request.oracle.then(|| oracle_report(Ok(oracles::bfs_safe(&model)), 0.0));
            (outcome, oracle)
        }
        Kind::Mdp => {
            let mut model = format::parse_mdp(&text).map_err(bad_format)?;
            if let Some(l) = request.lambda {
                if !(0.0..=1.0).contains(&l) {
                    return Err(RunError::Usage(format!("--lambda {l} is not in [0, 1]")));
                }
                model = model.with_lambda(l);
            }
            let outcome = mdp_run(&model, request.engine, options, trace, validate).map_err(bad_engine)?;
            let oracle = request.oracle.then(|| {
                let r = oracles::vi_max_reach(&model, oracles::DEFAULT_TOLERANCE, oracles::DEFAULT_CAP);
                oracle_report(r, model.lambda())
            });
            (outcome, oracle)
        }
        Kind::Mrm => {
            let mut model = format::parse_mrm(&text).map_err(bad_format)?;
            if let Some(l) = request.lambda {
                if l.is_nan() || l < 0.0 {
                    return Err(RunError::Usage(format!("--lambda {l} is negative")));
                }
                model = model.with_lambda(l);
            }
            let outcome = mrm_run(&model, request.engine, options, trace, validate).map_err(bad_engine)?;
            let oracle = request.oracle.then(|| {
                let r = oracles::vi_expected_reward(&model, oracles::DEFAULT_TOLERANCE, oracles::DEFAULT_CAP);
                oracle_report(r, model.lambda())
            });
            (outcome, oracle)
        }
    };
    let mut stats = outcome.stats;
    stats.elapsed = Some(started.elapsed());
    let oracle = oracle.map(|mut o| {
        o.agrees = match (outcome.verdict, o.expected) {
            (Verdict::True, Some(e)) => Some(e),
            (Verdict::False, Some(e)) => Some(!e),
            _ => None,
        };
        o
    });
    Ok(Report::new(path, kind, request.engine, outcome.verdict, outcome.witness, outcome.validated, &stats, oracle))
}

fn kripke_run(
    model: &KripkeStructure,
    kind: Kind,
    engine: Engine,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
    validate: bool,
) -> Result<Outcome, EngineError> {
    if engine == Engine::Opdual {
        let answer = pdr_opdual(model, options, trace)?;
        return Ok(finish(&model.opdual_problem(), answer, validate));
    }
    match (kind, engine) {
        (Kind::KripkeForward, Engine::Combined) => {
            let answer = pdr_fkr(model, options, trace)?;
            Ok(finish(&model.forward_problem(), answer, validate))
        }
        (Kind::KripkeForward, _) => {
            let p = model.forward_problem();
            let mut h = KripkeHeuristics::forward(model);
            let mut search = KripkeSearch::forward(model);
            let answer = engine_run(&p, engine, &mut h, &mut search, options, trace)?;
            Ok(finish(&p, answer, validate))
        }
        (_, Engine::Combined) => {
            let answer = pdr_ibkr(model, options, trace)?;
            Ok(finish(&model.inverse_backward_problem(), answer, validate))
        }
        _ => {
            let p = model.inverse_backward_problem();
            let mut h = KripkeHeuristics::inverse_backward(model);
            let mut search = KripkeSearch::inverse_backward(model);
            let answer = engine_run(&p, engine, &mut h, &mut search, options, trace)?;
            Ok(finish(&p, answer, validate))
        }
    }
}

fn mdp_run(
    model: &MdpModel,
    engine: Engine,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
    validate: bool,
) -> Result<Outcome, EngineError> {
    let system = model.system();
    let p = mdp::problem(&system);
    let answer = match engine {
        Engine::Combined => mdp::pdr_ibmdp(model, options, trace)?,
        _ => {
            let mut h = mdp::heuristics(&system);
            let mut n = mdp::heuristics(&system);
            engine_run(&p, engine, &mut h, &mut n, options, trace)?
        }
    };
    Ok(finish(&p, answer, validate))
}

fn mrm_run(
    model: &MrmModel,
    engine: Engine,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
    validate: bool,
) -> Result<Outcome, EngineError> {
    let system = model.system();
    let p = mrm::problem(&system);
    let answer = match engine {
        Engine::Combined => mrm::pdr_mrm(model, options, trace)?,
        _ => {
            let mut h = mrm::mrm_heuristics(&system);
            let mut n = mrm::mrm_heuristics(&system);
            engine_run(&p, engine, &mut h, &mut n, options, trace)?
        }
    };
    Ok(finish(&p, answer, validate))
}

/// Expands directories into the model files they contain, sorted by name.
pub fn collect_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, RunError> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = std::fs::read_dir(input).map_err(|source| RunError::Io {
                path: input.clone(),
                source,
            })?;
            let mut found = Vec::new();
            for entry in entries {
                let entry = entry.map_err(|source| RunError::Io {
                    path: input.clone(),
                    source,
                })?;
                let p = entry.path();
                if p.is_file() && Kind::from_path(&p).is_some() {
                    found.push(p);
                }
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}
