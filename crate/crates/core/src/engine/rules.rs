//! The individual rewrite rules, in place (used by the solver) and as pure
//! functions on configurations.

use super::{EngineError, Heuristics, PdrAnswer, PdrConfig, Rule, RunStats, Verdict};
use crate::lattice::{is_conclusive_kt, CompleteLattice, KleeneSequence, KtSequence, Problem, Transformer};

use alloc::vec::Vec;

/// Result of trying a rule that needs a heuristic choice.
#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Applied,
    NotEnabled,
    /// Guard holds but the heuristic offered nothing.
    Exhausted,
}

fn violation(rule: Rule, step: u64, reason: &'static str) -> EngineError {
    EngineError::HeuristicViolation { rule, step, reason }
}

fn failed(rule: Rule, step: u64, source: super::HeuristicError) -> EngineError {
    EngineError::HeuristicFailed { rule, step, source }
}

/// Smallest `j` in `[lo, hi]` (clamped to `j < n−1`) with `X_{j+1} ≤ X_j`.
pub(crate) fn conclusive_between<L: CompleteLattice>(
    lattice: &L,
    frames: &KtSequence<L::Elem>,
    lo: usize,
    hi: usize,
) -> Option<usize> {
    let xs = frames.frames();
    let hi = hi.min(xs.len().saturating_sub(2));
    (lo..=hi).find(|&j| lattice.leq(&xs[j + 1], &xs[j]))
}

/// `X_j := X_j ∧ x` for `2 ≤ j ≤ upto`.
pub(crate) fn strengthen<L: CompleteLattice>(
    lattice: &L,
    frames: &mut KtSequence<L::Elem>,
    upto: usize,
    x: &L::Elem,
) {
    for frame in frames.frames_mut().iter_mut().take(upto + 1).skip(2) {
        *frame = lattice.meet(frame, x);
    }
}

pub(crate) fn unfold<L, F>(problem: &Problem<L, F>, cfg: &mut PdrConfig<L::Elem>) -> bool
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    if !problem.lattice.leq(cfg.frames.last(), &problem.alpha) {
        return false;
    }
    cfg.frames.frames_mut().push(problem.lattice.top());
    cfg.obligations.clear();
    true
}

/// Whether Induction's guard holds for `(k, x)`. `Err` when `k` is outside
/// `2 ≤ k ≤ n−1`.
pub(crate) fn induction_guard<L, F>(
    problem: &Problem<L, F>,
    frames: &KtSequence<L::Elem>,
    k: usize,
    x: &L::Elem,
) -> Result<bool, &'static str>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    if k < 2 || k >= frames.len() {
        return Err("induction index outside 2..=n-1");
    }
    let lat = &problem.lattice;
    Ok(!lat.leq(&frames[k], x) && lat.leq(&problem.apply(&lat.meet(&frames[k - 1], x)), x))
}

pub(crate) fn candidate<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &mut PdrConfig<L::Elem>,
    heuristics: &mut H,
    step: u64,
) -> Result<Outcome, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    if !cfg.obligations.is_empty() {
        return Ok(Outcome::NotEnabled);
    }
    let lat = &problem.lattice;
    let last = cfg.frames.last();
    let Err(info) = lat.check_leq(last, &problem.alpha) else {
        return Ok(Outcome::NotEnabled);
    };
    let chosen = heuristics
        .candidate(&problem.query(), last, Some(&info))
        .map_err(|e| failed(Rule::Candidate, step, e))?;
    let Some(x) = chosen else {
        return Ok(Outcome::Exhausted);
    };
    if !lat.leq(&x, last) {
        return Err(violation(Rule::Candidate, step, "x is not below the last frame"));
    }
    if lat.leq(&x, &problem.alpha) {
        return Err(violation(Rule::Candidate, step, "x does not violate alpha"));
    }
    let n = cfg.frames.len();
    cfg.obligations = KleeneSequence::new(n - 1, alloc::vec![x]);
    Ok(Outcome::Applied)
}

/// Head index `i` and the Decide/Conflict guard `C_i ≤ F(X_{i−1})`.
pub(crate) fn obligation_guard<L, F>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
) -> Option<(usize, Result<(), L::Info>)>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let head = cfg.obligations.head()?;
    let i = cfg.obligations.start_index();
    debug_assert!(i >= 1, "Model pre-empts obligations at index 1");
    let image = problem.apply(&cfg.frames[i - 1]);
    Some((i, problem.lattice.check_leq(head, &image)))
}

pub(crate) fn decide<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &mut PdrConfig<L::Elem>,
    heuristics: &mut H,
    step: u64,
) -> Result<Outcome, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    let Some((i, Ok(()))) = obligation_guard(problem, cfg) else {
        return Ok(Outcome::NotEnabled);
    };
    if i < 2 {
        return Ok(Outcome::NotEnabled);
    }
    let lat = &problem.lattice;
    let prev = &cfg.frames[i - 1];
    let head = cfg.obligations.head().expect("guard implies a head");
    let chosen = heuristics
        .decide(&problem.query(), prev, head)
        .map_err(|e| failed(Rule::Decide, step, e))?;
    let Some(x) = chosen else {
        return Ok(Outcome::Exhausted);
    };
    if !lat.leq(&x, prev) {
        return Err(violation(Rule::Decide, step, "x is not below the previous frame"));
    }
    if !lat.leq(head, &problem.apply(&x)) {
        return Err(violation(Rule::Decide, step, "obligation is not below F(x)"));
    }
    cfg.obligations.push_front(x);
    Ok(Outcome::Applied)
}

pub(crate) fn conflict<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &mut PdrConfig<L::Elem>,
    heuristics: &mut H,
    step: u64,
) -> Result<Outcome, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    let Some((i, Err(info))) = obligation_guard(problem, cfg) else {
        return Ok(Outcome::NotEnabled);
    };
    let lat = &problem.lattice;
    let prev = &cfg.frames[i - 1];
    let head = cfg.obligations.head().expect("guard implies a head");
    let chosen = heuristics
        .conflict(&problem.query(), prev, head, Some(&info))
        .map_err(|e| failed(Rule::Conflict, step, e))?;
    let Some(x) = chosen else {
        return Ok(Outcome::Exhausted);
    };
    if lat.leq(head, &x) {
        return Err(violation(Rule::Conflict, step, "obligation is below x"));
    }
    if !lat.leq(&problem.apply(&lat.meet(prev, &x)), &x) {
        return Err(violation(Rule::Conflict, step, "F(prev meet x) is not below x"));
    }
    cfg.obligations.pop_front();
    strengthen(lat, &mut cfg.frames, i, &x);
    Ok(Outcome::Applied)
}

/// `(⊥, C₁, …, C_{n−1})` when the obligations reach index 1.
pub(crate) fn model_witness<L: CompleteLattice>(
    lattice: &L,
    cfg: &PdrConfig<L::Elem>,
) -> Option<KleeneSequence<L::Elem>> {
    if cfg.obligations.is_empty() || cfg.obligations.start_index() != 1 {
        return None;
    }
    let mut elems = Vec::with_capacity(cfg.obligations.len() + 1);
    elems.push(lattice.bot());
    elems.extend(cfg.obligations.elems().iter().cloned());
    Some(KleeneSequence::new(0, elems))
}

/// Valid: answers True when some `X_{j+1} ≤ X_j` with `j < n−1`.
pub fn rule_valid<L, F>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
) -> Option<PdrAnswer<L::Elem>>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let j = is_conclusive_kt(&problem.lattice, &cfg.frames)?;
    Some(PdrAnswer {
        verdict: Verdict::True,
        kt_witness: Some(cfg.frames.clone()),
        conclusive_index: Some(j),
        kleene_witness: None,
        stats: RunStats::default(),
    })
}

/// Unfold: appends `⊤` and resets the obligations when `X_{n−1} ≤ α`.
pub fn rule_unfold<L, F>(problem: &Problem<L, F>, cfg: &PdrConfig<L::Elem>) -> Option<PdrConfig<L::Elem>>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let mut next = cfg.clone();
    unfold(problem, &mut next).then_some(next)
}

/// Induction with an explicit `(k, x)`. `None` if `k` is out of range or a
/// guard fails.
pub fn rule_induction<L, F>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
    k: usize,
    x: &L::Elem,
) -> Option<PdrConfig<L::Elem>>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    if !induction_guard(problem, &cfg.frames, k, x).ok()? {
        return None;
    }
    let mut next = cfg.clone();
    strengthen(&problem.lattice, &mut next.frames, k, x);
    Some(next)
}

/// Candidate. `Ok(None)` when the guard fails or the heuristic has no choice.
pub fn rule_candidate<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
    heuristics: &mut H,
) -> Result<Option<PdrConfig<L::Elem>>, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    let mut next = cfg.clone();
    let applied = candidate(problem, &mut next, heuristics, 0)? == Outcome::Applied;
    Ok(applied.then_some(next))
}

/// Model: answers False once the obligations reach index 1.
pub fn rule_model<L, F>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
) -> Option<PdrAnswer<L::Elem>>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let witness = model_witness(&problem.lattice, cfg)?;
    Some(PdrAnswer {
        verdict: Verdict::False,
        kt_witness: None,
        conclusive_index: None,
        kleene_witness: Some(witness),
        stats: RunStats::default(),
    })
}

/// Decide. `Ok(None)` when the guard fails or the heuristic has no choice.
pub fn rule_decide<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
    heuristics: &mut H,
) -> Result<Option<PdrConfig<L::Elem>>, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    let mut next = cfg.clone();
    let applied = decide(problem, &mut next, heuristics, 0)? == Outcome::Applied;
    Ok(applied.then_some(next))
}

/// Conflict. `Ok(None)` when the guard fails or the heuristic has no choice.
pub fn rule_conflict<L, F, H>(
    problem: &Problem<L, F>,
    cfg: &PdrConfig<L::Elem>,
    heuristics: &mut H,
) -> Result<Option<PdrConfig<L::Elem>>, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L> + ?Sized,
{
    let mut next = cfg.clone();
    let applied = conflict(problem, &mut next, heuristics, 0)? == Outcome::Applied;
    Ok(applied.then_some(next))
}
