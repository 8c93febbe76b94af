//! The LT-PDR engines.
//!
//! An engine state is a pair `(X; C)` of a KT sequence of frames and a Kleene
//! sequence of obligations. Seven rules rewrite it:
//!
//! | rule      | guard                         | effect                                   |
//! |-----------|-------------------------------|------------------------------------------|
//! | Valid     | `X_{j+1} ≤ X_j`, `j < n−1`    | answer True                              |
//! | Unfold    | `X_{n−1} ≤ α`                 | append `⊤`, clear `C`                    |
//! | Induction | `X_k ≰ x`, `F(X_{k−1}∧x) ≤ x` | `X_j := X_j ∧ x` for `2 ≤ j ≤ k`         |
//! | Candidate | `C = ()`, `X_{n−1} ≰ α`       | `C := (x)` with `x ≤ X_{n−1}`, `x ≰ α`   |
//! | Model     | `C₁` defined                  | answer False with `(⊥, C₁, …)`           |
//! | Decide    | `C_i ≤ F X_{i−1}`             | prepend `x ≤ X_{i−1}` with `C_i ≤ F x`   |
//! | Conflict  | `C_i ≰ F X_{i−1}`             | pop `C_i`, strengthen `X_2..X_i` by `x`  |
//!
//! The choices of `x` come from a [`Heuristics`] implementation (and an
//! optional [`InductionProposer`]); the engine re-checks every returned
//! element against the rule's contract and fails with
//! [`EngineError::HeuristicViolation`] if it does not hold.

mod canonical;
mod dual;
mod rules;
mod solver;

pub use canonical::{CanonicalHeuristics, FixedInvariantProposer, PushForwardProposer};
pub use dual::{dualize, involution_reduce, Opposite, ReducedProblem};
pub use rules::{
    rule_candidate, rule_conflict, rule_decide, rule_induction, rule_model, rule_unfold,
    rule_valid,
};
pub use solver::Solver;

use alloc::string::String;
use core::fmt;
use core::time::Duration;

use crate::lattice::{CompleteLattice, KleeneSequence, KtSequence, Transformer};

/// Default budget, in rule applications.
pub const DEFAULT_BUDGET: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Valid,
    Unfold,
    Induction,
    Candidate,
    Model,
    Decide,
    Conflict,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::Valid,
        Rule::Unfold,
        Rule::Induction,
        Rule::Candidate,
        Rule::Model,
        Rule::Decide,
        Rule::Conflict,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Valid => "valid",
            Rule::Unfold => "unfold",
            Rule::Induction => "induction",
            Rule::Candidate => "candidate",
            Rule::Model => "model",
            Rule::Decide => "decide",
            Rule::Conflict => "conflict",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
    BudgetExhausted,
    Stuck,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "True",
            Verdict::False => "False",
            Verdict::BudgetExhausted => "BudgetExhausted",
            Verdict::Stuck => "Stuck",
        })
    }
}

/// How the engine picks among enabled rules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    /// Valid, Model, then Unfold/Candidate when there are no obligations and
    /// Decide/Conflict otherwise.
    #[default]
    Default,
    /// Uniformly random among enabled rules; Valid and Model still pre-empt.
    Fuzz { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Maximum number of steps (rule applications, plus failed Induction
    /// attempts in the positive engine).
    pub budget: u64,
    pub schedule: Schedule,
    /// Re-validate the sequences after every step.
    pub check_invariants: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            schedule: Schedule::Default,
            check_invariants: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    applications: [u64; 7],
    /// Positive-engine steps in which the proposed Induction did not apply.
    pub idle: u64,
    /// Number of frames at the end of the run.
    pub frames: usize,
    /// Filled in by callers that have a clock.
    pub elapsed: Option<Duration>,
}

impl RunStats {
    pub fn count(&self, rule: Rule) -> u64 {
        self.applications[rule.index()]
    }

    pub fn steps(&self) -> u64 {
        self.applications.iter().sum::<u64>() + self.idle
    }

    pub(crate) fn record(&mut self, rule: Rule) {
        self.applications[rule.index()] += 1;
    }
}

/// The engine state `(X; C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdrConfig<E> {
    pub frames: KtSequence<E>,
    pub obligations: KleeneSequence<E>,
}

impl<E: Clone> PdrConfig<E> {
    /// `(⊥ ≤ F⊥; ())`.
    pub fn initial<L, F>(problem: &crate::lattice::Problem<L, F>) -> Self
    where
        L: CompleteLattice<Elem = E>,
        F: Transformer<E>,
    {
        let bot = problem.lattice.bot();
        let first = problem.apply(&bot);
        Self {
            frames: KtSequence::new(alloc::vec![bot, first]),
            obligations: KleeneSequence::empty(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PdrAnswer<E> {
    pub verdict: Verdict,
    /// The conclusive KT sequence of a True answer.
    pub kt_witness: Option<KtSequence<E>>,
    /// Smallest `j` with `X_{j+1} ≤ X_j` in `kt_witness`.
    pub conclusive_index: Option<usize>,
    /// The conclusive Kleene sequence of a False answer.
    pub kleene_witness: Option<KleeneSequence<E>>,
    pub stats: RunStats,
}

impl<E> PdrAnswer<E> {
    /// The prefixed point `X_j` certified by a True answer.
    pub fn invariant(&self) -> Option<&E> {
        let frames = self.kt_witness.as_ref()?;
        Some(&frames[self.conclusive_index?])
    }

    pub(crate) fn open(verdict: Verdict, stats: RunStats) -> Self {
        Self {
            verdict,
            kt_witness: None,
            conclusive_index: None,
            kleene_witness: None,
            stats,
        }
    }
}

/// Failure reported by a heuristic that could not honour its preconditions.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct HeuristicError(pub String);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("heuristic for {rule} returned an element violating its contract at step {step}: {reason}")]
    HeuristicViolation {
        rule: Rule,
        step: u64,
        reason: &'static str,
    },
    #[error("heuristic for {rule} failed at step {step}: {source}")]
    HeuristicFailed {
        rule: Rule,
        step: u64,
        source: HeuristicError,
    },
    #[error("invariant broken after {rule} at step {step}: {detail}")]
    InvariantViolation {
        rule: Rule,
        step: u64,
        detail: &'static str,
    },
    #[error("lattice supplies no join, cannot form the opposite lattice")]
    UnsupportedDual,
    #[error("negation is not an involution on a sampled element")]
    InvolutionViolation,
}

/// Read-only view of the problem handed to heuristics.
pub struct Query<'a, L: CompleteLattice> {
    pub lattice: &'a L,
    pub transformer: &'a dyn Transformer<L::Elem>,
    pub alpha: &'a L::Elem,
}

impl<L: CompleteLattice> Query<'_, L> {
    pub fn apply(&self, x: &L::Elem) -> L::Elem {
        self.transformer.apply(x)
    }
}

/// Choice functions for the Candidate, Decide and Conflict rules.
///
/// Each method returns `Ok(None)` when it has no element to offer; the engine
/// then reports [`Verdict::Stuck`] (or, in the negative engine, restarts).
pub trait Heuristics<L: CompleteLattice> {
    /// Some `x ≤ last` with `x ≰ α`. `info` is the counterexample to
    /// `last ≤ α`, when the lattice provides one.
    fn candidate(
        &mut self,
        query: &Query<'_, L>,
        last: &L::Elem,
        info: Option<&L::Info>,
    ) -> Result<Option<L::Elem>, HeuristicError>;

    /// Some `x ≤ prev` with `obligation ≤ F(x)`.
    fn decide(
        &mut self,
        query: &Query<'_, L>,
        prev: &L::Elem,
        obligation: &L::Elem,
    ) -> Result<Option<L::Elem>, HeuristicError>;

    /// Some `x` with `obligation ≰ x` and `F(prev ∧ x) ≤ x`. `info` is the
    /// counterexample to `obligation ≤ F(prev)`.
    fn conflict(
        &mut self,
        query: &Query<'_, L>,
        prev: &L::Elem,
        obligation: &L::Elem,
        info: Option<&L::Info>,
    ) -> Result<Option<L::Elem>, HeuristicError>;
}

/// Source of `(k, x)` pairs for the Induction rule.
pub trait InductionProposer<L: CompleteLattice> {
    /// A proposal, or `None` when the proposer has nothing left to try.
    fn propose(
        &mut self,
        query: &Query<'_, L>,
        frames: &KtSequence<L::Elem>,
    ) -> Option<(usize, L::Elem)>;
}

/// One line of the optional execution trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub rule: Rule,
    pub frames: usize,
    pub obligations: usize,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step={} rule={} frames={} obligations={}",
            self.step, self.rule, self.frames, self.obligations
        )
    }
}

pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent);
}

impl<T: FnMut(&TraceEvent)> TraceSink for T {
    fn record(&mut self, event: &TraceEvent) {
        self(event)
    }
}

impl<L, F> crate::lattice::Problem<L, F>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    pub fn query(&self) -> Query<'_, L> {
        Query {
            lattice: &self.lattice,
            transformer: &self.transformer,
            alpha: &self.alpha,
        }
    }
}
