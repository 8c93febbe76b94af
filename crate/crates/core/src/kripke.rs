//! Explicit-state Kripke structures over the powerset lattice.
//!
//! Three transformers are provided: the forward one (`ι ∪ post(A)`), the
//! universal-predecessor one (`{s | δ(s) ⊆ A}`) and the inverse backward one
//! (`¬α ∪ pre∃(A)`). The forward and inverse backward transformers give the
//! two PDR instances [`pdr_fkr`] and [`pdr_ibkr`]; the backward one is solved
//! through the opposite lattice by [`pdr_opdual`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use fixedbitset::FixedBitSet;

use crate::engine::{
    dualize, CanonicalHeuristics, EngineError, HeuristicError, Heuristics, Opposite, PdrAnswer,
    PushForwardProposer, Query, RunOptions, Schedule, Solver, TraceSink,
};
use crate::lattice::{CompleteLattice, Problem, Transformer};

/// A subset of `{0, …, n−1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(n: usize) -> Self {
        Self(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        Self(bits)
    }

    pub fn singleton(n: usize, s: usize) -> Self {
        let mut set = Self::empty(n);
        set.insert(s);
        set
    }

    /// Panics if a state is `≥ n`.
    pub fn from_states(n: usize, states: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(n);
        for s in states {
            set.insert(s);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.0.contains(s)
    }

    pub fn insert(&mut self, s: usize) {
        self.0.insert(s);
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.minimum()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn complement(&self) -> Self {
        let mut bits = self.0.clone();
        bits.toggle_range(..);
        Self(bits)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut bits = self.0.clone();
        bits.union_with(&other.0);
        Self(bits)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut bits = self.0.clone();
        bits.intersect_with(&other.0);
        Self(bits)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut bits = self.0.clone();
        bits.difference_with(&other.0);
        Self(bits)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// The powerset lattice `𝒫S` ordered by inclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowersetLattice {
    size: usize,
}

impl PowersetLattice {
    pub fn new(size: usize) -> Self {
        Self { size }
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

impl CompleteLattice for PowersetLattice {
    type Elem = StateSet;
    /// Lowest state in `a ∖ b`.
    type Info = usize;

    fn check_leq(&self, a: &StateSet, b: &StateSet) -> Result<(), usize> {
        match a.0.difference(&b.0).next() {
            Some(s) => Err(s),
            None => Ok(()),
        }
    }

    fn meet(&self, a: &StateSet, b: &StateSet) -> StateSet {
        a.intersection(b)
    }

    fn bot(&self) -> StateSet {
        StateSet::empty(self.size)
    }

    fn top(&self) -> StateSet {
        StateSet::full(self.size)
    }

    fn join(&self, a: &StateSet, b: &StateSet) -> Option<StateSet> {
        Some(a.union(b))
    }

    fn equiv(&self, a: &StateSet, b: &StateSet) -> bool {
        a == b
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("a model needs at least one state")]
    NoStates,
    #[error("state {state} out of range (model has {count} states)")]
    StateOutOfRange { state: usize, count: usize },
}

/// `(S, δ, ι, α)` with both successor and predecessor adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeStructure {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    initial: StateSet,
    safe: StateSet,
}

impl KripkeStructure {
    /// Duplicate transitions are dropped; adjacency lists are sorted.
    pub fn new(
        states: usize,
        transitions: &[(usize, usize)],
        initial: &[usize],
        safe: &[usize],
    ) -> Result<Self, ModelError> {
        if states == 0 {
            return Err(ModelError::NoStates);
        }
        let check = |state: usize| {
            if state < states {
                Ok(state)
            } else {
                Err(ModelError::StateOutOfRange { state, count: states })
            }
        };
        let mut succ = vec![Vec::new(); states];
        let mut pred = vec![Vec::new(); states];
        for &(a, b) in transitions {
            succ[check(a)?].push(check(b)?);
            pred[b].push(a);
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let mut init = StateSet::empty(states);
        for &s in initial {
            init.insert(check(s)?);
        }
        let mut ok = StateSet::empty(states);
        for &s in safe {
            ok.insert(check(s)?);
        }
        Ok(Self {
            succ,
            pred,
            initial: init,
            safe: ok,
        })
    }

    pub fn state_count(&self) -> usize {
        self.succ.len()
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn safe(&self) -> &StateSet {
        &self.safe
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    pub fn predecessors(&self, s: usize) -> &[usize] {
        &self.pred[s]
    }

    /// All transitions in lexicographic order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().map(move |&b| (a, b)))
    }

    pub fn transition_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// The same structure with a different safe set.
    pub fn with_safe(&self, safe: StateSet) -> Self {
        assert_eq!(safe.universe(), self.state_count());
        Self {
            safe,
            ..self.clone()
        }
    }

    pub fn post(&self, a: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.state_count());
        for s in a.iter() {
            for &t in &self.succ[s] {
                out.insert(t);
            }
        }
        out
    }

    pub fn pre_exists(&self, a: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.state_count());
        for t in a.iter() {
            for &s in &self.pred[t] {
                out.insert(s);
            }
        }
        out
    }

    /// `ι ∪ post(A)`.
    pub fn forward(&self, a: &StateSet) -> StateSet {
        self.initial.union(&self.post(a))
    }

    /// `{s | ∀s′. (s,s′) ∈ δ ⇒ s′ ∈ A}`.
    pub fn backward(&self, a: &StateSet) -> StateSet {
        let n = self.state_count();
        StateSet::from_states(
            n,
            (0..n).filter(|&s| self.succ[s].iter().all(|&t| a.contains(t))),
        )
    }

    /// `(S ∖ α) ∪ pre∃(A)`.
    pub fn inverse_backward(&self, a: &StateSet) -> StateSet {
        self.safe.complement().union(&self.pre_exists(a))
    }

    pub fn lattice(&self) -> PowersetLattice {
        PowersetLattice::new(self.state_count())
    }

    /// `μx. ι ∪ post(x) ≤? α`.
    pub fn forward_problem(&self) -> Problem<PowersetLattice, impl Fn(&StateSet) -> StateSet + '_> {
        Problem::new(self.lattice(), move |a: &StateSet| self.forward(a), self.safe.clone())
    }

    /// `μx. ¬α ∪ pre∃(x) ≤? ¬ι`.
    pub fn inverse_backward_problem(
        &self,
    ) -> Problem<PowersetLattice, impl Fn(&StateSet) -> StateSet + '_> {
        Problem::new(
            self.lattice(),
            move |a: &StateSet| self.inverse_backward(a),
            self.initial.complement(),
        )
    }

    /// `ι ≤? νx. α ∩ F′(x)`, posed over the opposite lattice.
    pub fn opdual_problem(
        &self,
    ) -> Problem<Opposite<PowersetLattice>, impl Fn(&StateSet) -> StateSet + '_> {
        let g = move |a: &StateSet| self.safe.intersection(&self.backward(a));
        dualize(self.lattice(), g, self.initial.clone()).expect("powerset lattice has joins")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    /// `F(A) = base ∪ post(A)`: obligations are justified by predecessors.
    Forward,
    /// `F(A) = base ∪ pre∃(A)`: obligations are justified by successors.
    Backward,
}

/// Singleton-based heuristics for the forward and inverse backward
/// transformers, with lowest-index tie-breaking.
///
/// - Candidate: the lowest state of `X_{n−1} ∖ α`.
/// - Decide: for each state of the obligation outside the transformer's
///   constant part, its lowest justifying neighbour inside `X_{i−1}`.
/// - Conflict: `S ∖ (C_i ∖ F X_{i−1})`.
#[derive(Clone, Debug)]
pub struct KripkeHeuristics<'k> {
    model: &'k KripkeStructure,
    base: StateSet,
    direction: Direction,
    /// Use `x := X_{i−1}` in Decide instead of the singleton choice.
    pub canonical_decide: bool,
}

impl<'k> KripkeHeuristics<'k> {
    pub fn forward(model: &'k KripkeStructure) -> Self {
        Self {
            model,
            base: model.initial.clone(),
            direction: Direction::Forward,
            canonical_decide: false,
        }
    }

    pub fn inverse_backward(model: &'k KripkeStructure) -> Self {
        Self {
            model,
            base: model.safe.complement(),
            direction: Direction::Backward,
            canonical_decide: false,
        }
    }

    fn neighbours(&self, t: usize) -> &'k [usize] {
        match self.direction {
            Direction::Forward => &self.model.pred[t],
            Direction::Backward => &self.model.succ[t],
        }
    }
}

impl Heuristics<PowersetLattice> for KripkeHeuristics<'_> {
    fn candidate(
        &mut self,
        query: &Query<'_, PowersetLattice>,
        last: &StateSet,
        info: Option<&usize>,
    ) -> Result<Option<StateSet>, HeuristicError> {
        let s = match info {
            Some(&s) => Some(s),
            None => last.difference(query.alpha).first(),
        };
        Ok(s.map(|s| StateSet::singleton(last.universe(), s)))
    }

    fn decide(
        &mut self,
        _query: &Query<'_, PowersetLattice>,
        prev: &StateSet,
        obligation: &StateSet,
    ) -> Result<Option<StateSet>, HeuristicError> {
        if self.canonical_decide {
            return Ok(Some(prev.clone()));
        }
        let mut x = StateSet::empty(prev.universe());
        for t in obligation.difference(&self.base).iter() {
            match self.neighbours(t).iter().find(|&&s| prev.contains(s)) {
                Some(&s) => x.insert(s),
                None => return Ok(None),
            }
        }
        Ok(Some(x))
    }

    fn conflict(
        &mut self,
        query: &Query<'_, PowersetLattice>,
        prev: &StateSet,
        obligation: &StateSet,
        _info: Option<&usize>,
    ) -> Result<Option<StateSet>, HeuristicError> {
        Ok(Some(obligation.difference(&query.apply(prev)).complement()))
    }
}

/// Exhaustive backtracking search for the negative engine.
///
/// Enumerates chains of singletons `{t₀}, {t₁}, …` where `t₀ ∉ α` and each
/// `t_{j+1}` justifies `t_j`, by iterative deepening. A chain ends with `∅`
/// once it reaches the constant part of the transformer. On a safe model it
/// never terminates on its own, so the engine stops at its budget; it
/// reports no candidate only when `α` is everything.
#[derive(Clone, Debug)]
pub struct KripkeSearch<'k> {
    inner: KripkeHeuristics<'k>,
    roots: Vec<usize>,
    /// Choice index at each level of the current chain; level 0 indexes `roots`.
    choices: Vec<usize>,
    /// States of the current chain, parallel to `choices`.
    states: Vec<usize>,
    /// How many chain elements have been handed out since the last Candidate.
    emitted: usize,
    depth: usize,
}

impl<'k> KripkeSearch<'k> {
    pub fn forward(model: &'k KripkeStructure) -> Self {
        Self::with(KripkeHeuristics::forward(model), model.safe.complement())
    }

    pub fn inverse_backward(model: &'k KripkeStructure) -> Self {
        Self::with(KripkeHeuristics::inverse_backward(model), model.initial.clone())
    }

    fn with(inner: KripkeHeuristics<'k>, violating: StateSet) -> Self {
        Self {
            inner,
            roots: violating.iter().collect(),
            choices: Vec::new(),
            states: Vec::new(),
            emitted: 0,
            depth: 0,
        }
    }

    fn options_at(&self, level: usize) -> &[usize] {
        if level == 0 {
            &self.roots
        } else {
            self.inner.neighbours(self.states[level - 1])
        }
    }

    /// Moves to the next chain prefix in depth-first order.
    fn advance(&mut self) {
        while let Some(c) = self.choices.pop() {
            self.states.pop();
            let level = self.choices.len();
            if let Some(&s) = self.options_at(level).get(c + 1) {
                self.choices.push(c + 1);
                self.states.push(s);
                return;
            }
        }
        self.depth += 1;
        self.choices.push(0);
        self.states.push(self.roots[0]);
    }
}

impl Heuristics<PowersetLattice> for KripkeSearch<'_> {
    fn candidate(
        &mut self,
        _query: &Query<'_, PowersetLattice>,
        _last: &StateSet,
        _info: Option<&usize>,
    ) -> Result<Option<StateSet>, HeuristicError> {
        if self.roots.is_empty() {
            return Ok(None);
        }
        self.advance();
        self.emitted = 1;
        let n = self.inner.model.state_count();
        Ok(Some(StateSet::singleton(n, self.states[0])))
    }

    fn decide(
        &mut self,
        _query: &Query<'_, PowersetLattice>,
        _prev: &StateSet,
        obligation: &StateSet,
    ) -> Result<Option<StateSet>, HeuristicError> {
        let n = self.inner.model.state_count();
        if obligation.difference(&self.inner.base).is_empty() {
            return Ok(Some(StateSet::empty(n)));
        }
        if self.emitted < self.states.len() {
            self.emitted += 1;
            return Ok(Some(StateSet::singleton(n, self.states[self.emitted - 1])));
        }
        if self.states.len() >= self.depth {
            return Ok(None);
        }
        let level = self.states.len();
        let Some(&s) = self.options_at(level).first() else {
            return Ok(None);
        };
        self.choices.push(0);
        self.states.push(s);
        self.emitted += 1;
        Ok(Some(StateSet::singleton(n, s)))
    }

    fn conflict(
        &mut self,
        query: &Query<'_, PowersetLattice>,
        prev: &StateSet,
        obligation: &StateSet,
        info: Option<&usize>,
    ) -> Result<Option<StateSet>, HeuristicError> {
        self.inner.conflict(query, prev, obligation, info)
    }
}

fn run_with<L, F, H>(
    problem: &Problem<L, F>,
    heuristics: &mut H,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
) -> Result<PdrAnswer<L::Elem>, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
    H: Heuristics<L>,
{
    let mut proposer = PushForwardProposer::default();
    let mut solver = Solver::new(problem).options(options.clone());
    if let Some(trace) = trace {
        solver = solver.trace(trace);
    }
    if matches!(options.schedule, Schedule::Fuzz { .. }) {
        solver = solver.induction(&mut proposer);
    }
    solver.run_combined(heuristics)
}

/// PDR over the forward transformer: True iff every reachable state is safe.
///
/// Under a fuzz schedule, Induction is enabled with [`PushForwardProposer`]
/// so that all seven rules take part.
pub fn pdr_fkr(
    model: &KripkeStructure,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
) -> Result<PdrAnswer<StateSet>, EngineError> {
    let problem = model.forward_problem();
    run_with(&problem, &mut KripkeHeuristics::forward(model), options, trace)
}

/// PDR over the inverse backward transformer with bound `¬ι` (reverse PDR).
/// The verdict has the same meaning as for [`pdr_fkr`].
pub fn pdr_ibkr(
    model: &KripkeStructure,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
) -> Result<PdrAnswer<StateSet>, EngineError> {
    let problem = model.inverse_backward_problem();
    run_with(&problem, &mut KripkeHeuristics::inverse_backward(model), options, trace)
}

/// LT-OpPDR on `ι ≤? νx. α ∩ F′(x)` with lattice-agnostic heuristics. The
/// verdict has the same meaning as for [`pdr_fkr`].
pub fn pdr_opdual(
    model: &KripkeStructure,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
) -> Result<PdrAnswer<StateSet>, EngineError> {
    let problem = model.opdual_problem();
    run_with(&problem, &mut CanonicalHeuristics, options, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{
        rule_candidate, rule_conflict, rule_decide, rule_induction, rule_model, rule_unfold,
        rule_valid, FixedInvariantProposer, PdrConfig, Rule, Verdict,
    };
    use crate::lattice::{
        check_kleene_witness, check_kt_witness, KleeneSequence, KtSequence,
    };
    use proptest::prelude::*;

    fn k1(safe: &[usize]) -> KripkeStructure {
        KripkeStructure::new(3, &[(0, 1), (1, 1), (2, 2)], &[0], safe).unwrap()
    }

    fn set(xs: &[usize]) -> StateSet {
        StateSet::from_states(3, xs.iter().copied())
    }

    fn cfg(frames: &[&[usize]], start: usize, obligations: &[&[usize]]) -> PdrConfig<StateSet> {
        PdrConfig {
            frames: KtSequence::new(frames.iter().map(|x| set(x)).collect()),
            obligations: KleeneSequence::new(start, obligations.iter().map(|x| set(x)).collect()),
        }
    }

    #[test]
    fn rejects_out_of_range_states() {
        let err = KripkeStructure::new(2, &[(0, 3)], &[0], &[0]).unwrap_err();
        assert_eq!(err, ModelError::StateOutOfRange { state: 3, count: 2 });
        assert_eq!(KripkeStructure::new(0, &[], &[], &[]).unwrap_err(), ModelError::NoStates);
    }

    #[test]
    fn duplicate_transitions_are_dropped() {
        let k = KripkeStructure::new(2, &[(0, 1), (0, 1), (1, 0)], &[0], &[0, 1]).unwrap();
        assert_eq!(k.transition_count(), 2);
        assert_eq!(k.transitions().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn forward_transformer_examples() {
        let k = k1(&[0, 1]);
        assert_eq!(k.forward(&set(&[])), set(&[0]));
        assert_eq!(k.forward(&set(&[0])), set(&[0, 1]));
        assert_eq!(k.forward(&set(&[0, 1, 2])), set(&[0, 1, 2]));
    }

    #[test]
    fn backward_transformer_examples() {
        let k = k1(&[0, 1]);
        assert_eq!(k.backward(&set(&[0, 1, 2])), set(&[0, 1, 2]));
        assert_eq!(k.backward(&set(&[1])), set(&[0, 1]));
        assert_eq!(k.backward(&set(&[])), set(&[]));
    }

    #[test]
    fn inverse_backward_transformer_examples() {
        let k = k1(&[0, 1]);
        assert_eq!(k.inverse_backward(&set(&[])), set(&[2]));
        assert_eq!(k.inverse_backward(&set(&[1])), set(&[0, 1, 2]));
        for bits in 0u8..8 {
            let a = StateSet::from_states(3, (0..3).filter(|s| bits >> s & 1 == 1));
            let dual = k.safe().intersection(&k.backward(&a.complement())).complement();
            assert_eq!(k.inverse_backward(&a), dual);
        }
    }

    #[test]
    fn state_set_display_and_complement() {
        assert_eq!(set(&[0, 2]).to_string(), "{0, 2}");
        assert_eq!(set(&[0, 2]).complement().complement(), set(&[0, 2]));
        assert_eq!(StateSet::full(3).complement(), StateSet::empty(3));
    }

    #[test]
    fn rule_valid_examples() {
        let k = k1(&[0, 1]);
        let p = k.forward_problem();
        let answer = rule_valid(&p, &cfg(&[&[], &[0], &[0, 1], &[0, 1]], 0, &[])).unwrap();
        assert_eq!(answer.verdict, Verdict::True);
        assert_eq!(answer.invariant(), Some(&set(&[0, 1])));
        assert!(rule_valid(&p, &cfg(&[&[], &[0], &[0, 1]], 0, &[])).is_none());

        let k = KripkeStructure::new(3, &[(0, 1), (1, 1), (2, 2)], &[], &[0]).unwrap();
        let answer = rule_valid(&k.forward_problem(), &cfg(&[&[], &[]], 0, &[])).unwrap();
        assert_eq!(answer.verdict, Verdict::True);
    }

    #[test]
    fn rule_unfold_examples() {
        let k = k1(&[0, 1]);
        let p = k.forward_problem();
        let next = rule_unfold(&p, &cfg(&[&[], &[0]], 0, &[])).unwrap();
        assert_eq!(next, cfg(&[&[], &[0], &[0, 1, 2]], 0, &[]));
        assert!(rule_unfold(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 0, &[])).is_none());

        let k = k1(&[0]);
        let next = rule_unfold(&k.forward_problem(), &cfg(&[&[], &[0]], 0, &[])).unwrap();
        assert_eq!(next.frames, cfg(&[&[], &[0], &[0, 1, 2]], 0, &[]).frames);
    }

    #[test]
    fn rule_induction_examples() {
        let k = k1(&[0, 1]);
        let p = k.forward_problem();
        let next = rule_induction(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 0, &[]), 2, &set(&[0, 1])).unwrap();
        assert_eq!(next, cfg(&[&[], &[0], &[0, 1]], 0, &[]));
        assert!(rule_induction(&p, &cfg(&[&[], &[0], &[0, 1]], 0, &[]), 2, &set(&[0, 1])).is_none());
        assert!(rule_induction(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 0, &[]), 2, &StateSet::full(3)).is_none());
    }

    #[test]
    fn rule_candidate_examples() {
        let k = k1(&[0, 1]);
        let mut h = KripkeHeuristics::forward(&k);
        let next = rule_candidate(&k.forward_problem(), &cfg(&[&[], &[0], &[0, 1, 2]], 0, &[]), &mut h)
            .unwrap()
            .unwrap();
        assert_eq!(next.obligations, KleeneSequence::new(2, vec![set(&[2])]));
        let none = rule_candidate(&k.forward_problem(), &cfg(&[&[], &[0]], 0, &[]), &mut h).unwrap();
        assert!(none.is_none());

        let k = k1(&[0]);
        let mut h = KripkeHeuristics::forward(&k);
        let next = rule_candidate(&k.forward_problem(), &cfg(&[&[], &[0], &[0, 1, 2]], 0, &[]), &mut h)
            .unwrap()
            .unwrap();
        assert_eq!(next.obligations, KleeneSequence::new(2, vec![set(&[1])]));
    }

    #[test]
    fn rule_model_examples() {
        let k = k1(&[0]);
        let p = k.forward_problem();
        let answer = rule_model(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 1, &[&[0], &[1]])).unwrap();
        assert_eq!(answer.verdict, Verdict::False);
        let witness = answer.kleene_witness.unwrap();
        assert_eq!(witness, KleeneSequence::new(0, vec![set(&[]), set(&[0]), set(&[1])]));
        assert!(check_kleene_witness(&p, &witness));
        assert!(rule_model(&p, &cfg(&[&[], &[0]], 0, &[])).is_none());
        assert!(rule_model(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 2, &[&[2]])).is_none());
    }

    #[test]
    fn rule_decide_examples() {
        let k = k1(&[0]);
        let mut h = KripkeHeuristics::forward(&k);
        let next = rule_decide(&k.forward_problem(), &cfg(&[&[], &[0], &[0, 1, 2]], 2, &[&[1]]), &mut h)
            .unwrap()
            .unwrap();
        assert_eq!(next.obligations, KleeneSequence::new(1, vec![set(&[0]), set(&[1])]));

        let k = k1(&[0, 1]);
        let mut h = KripkeHeuristics::forward(&k);
        let p = k.forward_problem();
        assert!(rule_decide(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 2, &[&[2]]), &mut h).unwrap().is_none());
        assert!(rule_decide(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 0, &[]), &mut h).unwrap().is_none());
    }

    #[test]
    fn rule_conflict_examples() {
        let k = k1(&[0, 1]);
        let mut h = KripkeHeuristics::forward(&k);
        let p = k.forward_problem();
        let next = rule_conflict(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 2, &[&[2]]), &mut h).unwrap().unwrap();
        assert_eq!(next, cfg(&[&[], &[0], &[0, 1]], 0, &[]));

        let next = rule_conflict(&p, &cfg(&[&[], &[0], &[0, 1], &[0, 1, 2]], 3, &[&[2]]), &mut h)
            .unwrap()
            .unwrap();
        assert_eq!(next, cfg(&[&[], &[0], &[0, 1], &[0, 1]], 0, &[]));
        assert!(rule_valid(&p, &next).is_some());

        let k = k1(&[0]);
        let mut h = KripkeHeuristics::forward(&k);
        let p = k.forward_problem();
        assert!(rule_conflict(&p, &cfg(&[&[], &[0], &[0, 1, 2]], 2, &[&[1]]), &mut h).unwrap().is_none());
    }

    #[test]
    fn combined_trace_on_safe_k1() {
        let k = k1(&[0, 1]);
        let mut rules = Vec::new();
        let mut sink = |e: &crate::engine::TraceEvent| rules.push(e.rule);
        let answer = pdr_fkr(&k, &RunOptions::default(), Some(&mut sink)).unwrap();
        assert_eq!(answer.verdict, Verdict::True);
        use Rule::*;
        assert_eq!(rules, vec![Unfold, Candidate, Conflict, Unfold, Candidate, Conflict, Valid]);
        let p = k.forward_problem();
        assert!(check_kt_witness(&p, answer.invariant().unwrap()));
    }

    #[test]
    fn combined_examples() {
        let k = k1(&[0]);
        let answer = pdr_fkr(&k, &RunOptions::default(), None).unwrap();
        assert_eq!(answer.verdict, Verdict::False);
        assert_eq!(
            answer.kleene_witness.unwrap(),
            KleeneSequence::new(0, vec![set(&[]), set(&[0]), set(&[1])])
        );

        let k = KripkeStructure::new(3, &[(0, 1), (1, 1), (2, 2)], &[], &[0]).unwrap();
        let answer = pdr_fkr(&k, &RunOptions::default(), None).unwrap();
        assert_eq!(answer.verdict, Verdict::True);
        assert_eq!(answer.stats.steps(), 1);
    }

    #[test]
    fn ibkr_and_opdual_examples() {
        for (safe, expected) in [(&[0, 1][..], Verdict::True), (&[0][..], Verdict::False), (&[0, 1, 2][..], Verdict::True)] {
            let k = k1(safe);
            let options = RunOptions { check_invariants: true, ..RunOptions::default() };
            assert_eq!(pdr_ibkr(&k, &options, None).unwrap().verdict, expected);
            assert_eq!(pdr_opdual(&k, &options, None).unwrap().verdict, expected);
        }
    }

    #[test]
    fn positive_engine_examples() {
        let k = k1(&[0, 1]);
        let p = k.forward_problem();
        let mut proposer = FixedInvariantProposer { invariant: set(&[0, 1]) };
        let answer = Solver::new(&p).induction(&mut proposer).run_positive().unwrap();
        assert_eq!(answer.verdict, Verdict::True);
        assert!(check_kt_witness(&p, answer.invariant().unwrap()));

        let k = k1(&[0]);
        let p = k.forward_problem();
        let mut proposer = PushForwardProposer::default();
        let answer = Solver::new(&p).budget(1000).induction(&mut proposer).run_positive().unwrap();
        assert_eq!(answer.verdict, Verdict::BudgetExhausted);

        let k = KripkeStructure::new(3, &[(0, 1)], &[], &[0]).unwrap();
        let p = k.forward_problem();
        assert_eq!(Solver::new(&p).run_positive().unwrap().verdict, Verdict::True);
    }

    #[test]
    fn negative_engine_examples() {
        let k = k1(&[0]);
        let p = k.forward_problem();
        let answer = Solver::new(&p)
            .check_invariants(true)
            .run_negative(&mut KripkeSearch::forward(&k))
            .unwrap();
        assert_eq!(answer.verdict, Verdict::False);
        assert_eq!(
            answer.kleene_witness.unwrap(),
            KleeneSequence::new(0, vec![set(&[]), set(&[0]), set(&[1])])
        );

        let k = k1(&[0, 1, 2]);
        let p = k.forward_problem();
        let answer = Solver::new(&p).run_negative(&mut KripkeSearch::forward(&k)).unwrap();
        assert_eq!(answer.verdict, Verdict::Stuck);

        let k = k1(&[0, 1]);
        let p = k.forward_problem();
        let answer = Solver::new(&p).budget(100).run_negative(&mut KripkeSearch::forward(&k)).unwrap();
        assert_eq!(answer.verdict, Verdict::BudgetExhausted);
    }

    #[test]
    fn singleton_decide_falls_back_to_canonical_on_request() {
        let k = k1(&[0]);
        let mut h = KripkeHeuristics::forward(&k);
        h.canonical_decide = true;
        let p = k.forward_problem();
        let answer = Solver::new(&p).check_invariants(true).run_combined(&mut h).unwrap();
        assert_eq!(answer.verdict, Verdict::False);
        assert!(check_kleene_witness(&p, answer.kleene_witness.as_ref().unwrap()));
    }

    fn arb_model(max_states: usize) -> impl Strategy<Value = KripkeStructure> {
        (1..=max_states).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), n * n),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(|(n, edges, init, safe)| {
                    let trans: Vec<_> = (0..n * n).filter(|&i| edges[i]).map(|i| (i / n, i % n)).collect();
                    let pick = |bits: &[bool]| (0..n).filter(|&s| bits[s]).collect::<Vec<_>>();
                    KripkeStructure::new(n, &trans, &pick(&init), &pick(&safe)).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn transformer_duality_exhaustive(k in arb_model(5)) {
            let n = k.state_count();
            for bits in 0u32..(1 << n) {
                let a = StateSet::from_states(n, (0..n).filter(|s| bits >> s & 1 == 1));
                let dual = k.safe().intersection(&k.backward(&a.complement())).complement();
                prop_assert_eq!(k.inverse_backward(&a), dual);
            }
        }

        #[test]
        fn transformers_are_monotone(k in arb_model(6), a in any::<u8>(), b in any::<u8>()) {
            let n = k.state_count();
            let lo = StateSet::from_states(n, (0..n).filter(|s| (a & b) >> s & 1 == 1));
            let hi = StateSet::from_states(n, (0..n).filter(|s| a >> s & 1 == 1));
            prop_assert!(k.forward(&lo).is_subset(&k.forward(&hi)));
            prop_assert!(k.backward(&lo).is_subset(&k.backward(&hi)));
            prop_assert!(k.inverse_backward(&lo).is_subset(&k.inverse_backward(&hi)));
        }

        #[test]
        fn powerset_lattice_laws(a in any::<u8>(), b in any::<u8>(), c in any::<u8>()) {
            let lat = PowersetLattice::new(8);
            let s = |x: u8| StateSet::from_states(8, (0..8).filter(|i| x >> i & 1 == 1));
            let (a, b, c) = (s(a), s(b), s(c));
            let m = lat.meet(&a, &b);
            prop_assert!(lat.leq(&m, &a) && lat.leq(&m, &b));
            if lat.leq(&c, &a) && lat.leq(&c, &b) {
                prop_assert!(lat.leq(&c, &m));
            }
            prop_assert!(lat.leq(&lat.bot(), &a) && lat.leq(&a, &lat.top()));
            if lat.leq(&a, &b) && lat.leq(&b, &c) {
                prop_assert!(lat.leq(&a, &c));
            }
            if lat.leq(&a, &b) && lat.leq(&b, &a) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn canonical_conflict_satisfies_its_contract(k in arb_model(6)) {
            let p = k.forward_problem();
            let mut h = KripkeHeuristics::forward(&k);
            let options = RunOptions { check_invariants: true, ..RunOptions::default() };
            // every Conflict output is re-verified by the engine
            let answer = Solver::new(&p).options(options).run_combined(&mut h);
            prop_assert!(answer.is_ok());
        }
    }
}
