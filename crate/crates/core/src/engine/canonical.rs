//! Lattice-agnostic heuristics and Induction proposers.

use super::{HeuristicError, Heuristics, InductionProposer, Query};
use crate::lattice::{CompleteLattice, KtSequence};

/// Choices that need nothing beyond the lattice operations: Candidate takes
/// the whole last frame, Decide the whole previous frame, Conflict `F(X_{i−1})`.
///
/// They satisfy their contracts whenever the rule's guard holds, but are the
/// coarsest possible choices; the instances ship sharper ones.
#[derive(Clone, Copy, Debug, Default)]
pub struct CanonicalHeuristics;

impl<L: CompleteLattice> Heuristics<L> for CanonicalHeuristics {
    fn candidate(
        &mut self,
        query: &Query<'_, L>,
        last: &L::Elem,
        _info: Option<&L::Info>,
    ) -> Result<Option<L::Elem>, HeuristicError> {
        Ok((!query.lattice.leq(last, query.alpha)).then(|| last.clone()))
    }

    fn decide(
        &mut self,
        query: &Query<'_, L>,
        prev: &L::Elem,
        obligation: &L::Elem,
    ) -> Result<Option<L::Elem>, HeuristicError> {
        Ok(query
            .lattice
            .leq(obligation, &query.apply(prev))
            .then(|| prev.clone()))
    }

    fn conflict(
        &mut self,
        query: &Query<'_, L>,
        prev: &L::Elem,
        obligation: &L::Elem,
        _info: Option<&L::Info>,
    ) -> Result<Option<L::Elem>, HeuristicError> {
        // F(X ∧ FX) ≤ F(X) by monotonicity, and C ≰ F(X) is the guard.
        let image = query.apply(prev);
        Ok((!query.lattice.leq(obligation, &image)).then_some(image))
    }
}

/// Proposes `x = F(X_{k−1})` at the highest `k` where it would strengthen the
/// frame, falling back to `k = n−1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PushForwardProposer {
    /// Propose at this index instead of searching (clamped to `2..=n−1`).
    pub fixed_k: Option<usize>,
}

impl<L: CompleteLattice> InductionProposer<L> for PushForwardProposer {
    fn propose(
        &mut self,
        query: &Query<'_, L>,
        frames: &KtSequence<L::Elem>,
    ) -> Option<(usize, L::Elem)> {
        let n = frames.len();
        if n < 3 {
            return None;
        }
        let k = match self.fixed_k {
            Some(k) => k.clamp(2, n - 1),
            None => (2..n)
                .rev()
                .find(|&k| !query.lattice.leq(&frames[k], &query.apply(&frames[k - 1])))
                .unwrap_or(n - 1),
        };
        Some((k, query.apply(&frames[k - 1])))
    }
}

/// Always proposes the same element at the last index; useful when an
/// inductive invariant is already known.
#[derive(Clone, Debug)]
pub struct FixedInvariantProposer<E> {
    pub invariant: E,
}

impl<L: CompleteLattice> InductionProposer<L> for FixedInvariantProposer<L::Elem> {
    fn propose(
        &mut self,
        _query: &Query<'_, L>,
        frames: &KtSequence<L::Elem>,
    ) -> Option<(usize, L::Elem)> {
        (frames.len() >= 3).then(|| (frames.len() - 1, self.invariant.clone()))
    }
}
