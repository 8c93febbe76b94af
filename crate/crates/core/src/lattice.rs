//! The complete-lattice contract, frame and obligation sequences, and the
//! structural validators used to certify engine answers.

use alloc::vec::Vec;
use core::fmt::Debug;

/// A complete lattice, given as a context object that knows how to compare,
/// meet and bound its elements.
///
/// Elements are values of [`CompleteLattice::Elem`]; the lattice itself
/// usually carries the shape (number of states and the like) so that `bot`
/// and `top` need no dummy argument.
///
/// Only the order, binary meet and the two bounds are required by the
/// engine. `join` is optional and only used by the order-dual wrapper.
pub trait CompleteLattice {
    type Elem: Clone + Debug;
    /// Counterexample descriptor produced by a failed order test, e.g. a
    /// state at which `a ≰ b`. Heuristics may use it as a seed.
    type Info: Clone + Debug;

    /// `Ok(())` iff `a ≤ b`, otherwise a counterexample.
    fn check_leq(&self, a: &Self::Elem, b: &Self::Elem) -> Result<(), Self::Info>;

    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn bot(&self) -> Self::Elem;

    fn top(&self) -> Self::Elem;

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.check_leq(a, b).is_ok()
    }

    /// Semantic equality: `a ≤ b` and `b ≤ a`.
    fn equiv(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.leq(a, b) && self.leq(b, a)
    }

    fn join(&self, _a: &Self::Elem, _b: &Self::Elem) -> Option<Self::Elem> {
        None
    }
}

/// A monotone map on lattice elements.
///
/// Implementors must make `apply` monotone and ω-continuous (it must preserve
/// suprema of ascending chains). The second property cannot be tested in
/// general and is an obligation on whoever writes the instance.
pub trait Transformer<E> {
    fn apply(&self, x: &E) -> E;
}

impl<E, F> Transformer<E> for F
where
    F: Fn(&E) -> E,
{
    fn apply(&self, x: &E) -> E {
        self(x)
    }
}

/// An lfp over-approximation problem `μF ≤? α`.
#[derive(Clone, Debug)]
pub struct Problem<L: CompleteLattice, F> {
    pub lattice: L,
    pub transformer: F,
    pub alpha: L::Elem,
}

impl<L, F> Problem<L, F>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    pub fn new(lattice: L, transformer: F, alpha: L::Elem) -> Self {
        Self {
            lattice,
            transformer,
            alpha,
        }
    }

    pub fn apply(&self, x: &L::Elem) -> L::Elem {
        self.transformer.apply(x)
    }
}

/// An ascending chain of frames `X₀ ≤ X₁ ≤ … ≤ X_{n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KtSequence<E>(Vec<E>);

impl<E> KtSequence<E> {
    pub fn new(frames: Vec<E>) -> Self {
        Self(frames)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn frames(&self) -> &[E] {
        &self.0
    }

    pub fn last(&self) -> &E {
        self.0.last().expect("KT sequences have at least two frames")
    }

    pub fn into_frames(self) -> Vec<E> {
        self.0
    }

    pub(crate) fn frames_mut(&mut self) -> &mut Vec<E> {
        &mut self.0
    }
}

impl<E> core::ops::Index<usize> for KtSequence<E> {
    type Output = E;

    fn index(&self, index: usize) -> &E {
        &self.0[index]
    }
}

/// A suffix `(C_i, …, C_{n−1})` of proof obligations.
///
/// `start` is the index `i` of the first element; the sequence is empty when
/// it holds no elements, in which case `start` is meaningless (and ignored
/// by `==`).
#[derive(Clone, Debug)]
pub struct KleeneSequence<E> {
    start: usize,
    elems: Vec<E>,
}

impl<E: PartialEq> PartialEq for KleeneSequence<E> {
    fn eq(&self, other: &Self) -> bool {
        self.elems == other.elems && (self.elems.is_empty() || self.start == other.start)
    }
}

impl<E> KleeneSequence<E> {
    pub fn empty() -> Self {
        Self {
            start: 0,
            elems: Vec::new(),
        }
    }

    pub fn new(start: usize, elems: Vec<E>) -> Self {
        Self { start, elems }
    }

    pub fn start_index(&self) -> usize {
        self.start
    }

    /// One past the index of the last obligation.
    pub fn end_index(&self) -> usize {
        self.start + self.elems.len()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn head(&self) -> Option<&E> {
        self.elems.first()
    }

    pub fn elems(&self) -> &[E] {
        &self.elems
    }

    /// Obligation at absolute index `j`, if present.
    pub fn get(&self, j: usize) -> Option<&E> {
        j.checked_sub(self.start).and_then(|k| self.elems.get(k))
    }

    pub(crate) fn push_front(&mut self, x: E) {
        debug_assert!(self.elems.is_empty() || self.start > 0);
        if self.elems.is_empty() {
            self.elems.push(x);
        } else {
            self.start -= 1;
            self.elems.insert(0, x);
        }
    }

    pub(crate) fn pop_front(&mut self) -> Option<E> {
        if self.elems.is_empty() {
            return None;
        }
        self.start += 1;
        Some(self.elems.remove(0))
    }

    pub(crate) fn clear(&mut self) {
        self.elems.clear();
        self.start = 0;
    }
}

/// Checks that `frames` is a KT sequence for `problem`: at least two frames,
/// `X₀ = ⊥`, ascending, `F(X_i) ≤ X_{i+1}` and `X_{n−2} ≤ α`.
pub fn is_kt_sequence<L, F>(problem: &Problem<L, F>, frames: &KtSequence<L::Elem>) -> bool
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let lat = &problem.lattice;
    let xs = frames.frames();
    let n = xs.len();
    if n < 2 || !lat.equiv(&xs[0], &lat.bot()) {
        return false;
    }
    let linked = xs
        .windows(2)
        .all(|w| lat.leq(&w[0], &w[1]) && lat.leq(&problem.apply(&w[0]), &w[1]));
    linked && lat.leq(&xs[n - 2], &problem.alpha)
}

/// Checks the Kleene-sequence conditions: consecutive obligations are linked
/// by `C_j ≤ F(C_{j−1})` and the last one violates `α`. The empty sequence
/// is vacuously valid.
pub fn is_kleene_sequence<L, F>(
    problem: &Problem<L, F>,
    obligations: &KleeneSequence<L::Elem>,
) -> bool
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let lat = &problem.lattice;
    let cs = obligations.elems();
    let Some(last) = cs.last() else {
        return true;
    };
    !lat.leq(last, &problem.alpha)
        && cs
            .windows(2)
            .all(|w| lat.leq(&w[1], &problem.apply(&w[0])))
}

/// Smallest `j < n−1` with `X_{j+1} ≤ X_j`, if any.
pub fn is_conclusive_kt<L: CompleteLattice>(
    lattice: &L,
    frames: &KtSequence<L::Elem>,
) -> Option<usize> {
    frames
        .frames()
        .windows(2)
        .position(|w| lattice.leq(&w[1], &w[0]))
}

/// A Kleene sequence is conclusive when it starts at index 0 with `⊥`.
pub fn is_conclusive_kleene<L: CompleteLattice>(
    lattice: &L,
    obligations: &KleeneSequence<L::Elem>,
) -> bool {
    obligations.start_index() == 0
        && obligations
            .head()
            .is_some_and(|c| lattice.equiv(c, &lattice.bot()))
}

/// The progress order on KT sequences: `X ≼ Y` iff `X` is no longer than
/// `Y` and pointwise above it on the shared prefix.
pub fn kt_order_leq<L: CompleteLattice>(
    lattice: &L,
    x: &KtSequence<L::Elem>,
    y: &KtSequence<L::Elem>,
) -> bool {
    x.len() <= y.len()
        && x
            .frames()
            .iter()
            .zip(y.frames())
            .all(|(a, b)| lattice.leq(b, a))
}

/// Semantic equality of KT sequences (order both ways, frame by frame).
pub fn kt_equiv<L: CompleteLattice>(
    lattice: &L,
    x: &KtSequence<L::Elem>,
    y: &KtSequence<L::Elem>,
) -> bool {
    x.len() == y.len()
        && x
            .frames()
            .iter()
            .zip(y.frames())
            .all(|(a, b)| lattice.equiv(a, b))
}

/// Knaster–Tarski certificate: `F(x) ≤ x ≤ α` implies `μF ≤ α`.
pub fn check_kt_witness<L, F>(problem: &Problem<L, F>, x: &L::Elem) -> bool
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let lat = &problem.lattice;
    lat.leq(&problem.apply(x), x) && lat.leq(x, &problem.alpha)
}

/// Kleene certificate: a conclusive Kleene sequence implies
/// `C_{n−1} ≤ F^{n−1}(⊥)` with `C_{n−1} ≰ α`, hence `μF ≰ α`.
pub fn check_kleene_witness<L, F>(
    problem: &Problem<L, F>,
    obligations: &KleeneSequence<L::Elem>,
) -> bool
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    is_conclusive_kleene(&problem.lattice, obligations) && is_kleene_sequence(problem, obligations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{KripkeStructure, PowersetLattice, StateSet};

    // S = {0,1,2}, ι = {0}, 0→1, 1→1, 2→2.
    fn k1(safe: &[usize]) -> KripkeStructure {
        KripkeStructure::new(3, &[(0, 1), (1, 1), (2, 2)], &[0], safe).unwrap()
    }

    fn set(xs: &[usize]) -> StateSet {
        StateSet::from_states(3, xs.iter().copied())
    }

    fn seq(xs: &[&[usize]]) -> KtSequence<StateSet> {
        KtSequence::new(xs.iter().map(|x| set(x)).collect())
    }

    fn forward(k: &KripkeStructure) -> Problem<PowersetLattice, impl Fn(&StateSet) -> StateSet + '_> {
        Problem::new(PowersetLattice::new(3), move |a: &StateSet| k.forward(a), k.safe().clone())
    }

    #[test]
    fn kt_sequence_examples() {
        let k = k1(&[0, 1]);
        let p = forward(&k);
        assert!(is_kt_sequence(&p, &seq(&[&[], &[0]])));
        assert!(is_kt_sequence(&p, &seq(&[&[], &[0], &[0, 1]])));
        assert!(!is_kt_sequence(&p, &seq(&[&[], &[0], &[0]])));
        assert!(!is_kt_sequence(&p, &seq(&[&[]])));
        assert!(!is_kt_sequence(&p, &seq(&[&[0], &[0]])));
    }

    #[test]
    fn kleene_sequence_examples() {
        let k = k1(&[0]);
        let p = forward(&k);
        assert!(is_kleene_sequence(&p, &KleeneSequence::empty()));
        assert!(is_kleene_sequence(&p, &KleeneSequence::new(1, vec![set(&[0]), set(&[1])])));
        assert!(!is_kleene_sequence(&p, &KleeneSequence::new(1, vec![set(&[2]), set(&[1])])));
        // tail inside α
        assert!(!is_kleene_sequence(&p, &KleeneSequence::new(1, vec![set(&[0])])));
    }

    #[test]
    fn conclusive_kt_examples() {
        let lat = PowersetLattice::new(3);
        assert_eq!(is_conclusive_kt(&lat, &seq(&[&[], &[]])), Some(0));
        assert_eq!(
            is_conclusive_kt(&lat, &seq(&[&[], &[0], &[0, 1], &[0, 1]])),
            Some(2)
        );
        assert_eq!(is_conclusive_kt(&lat, &seq(&[&[], &[0], &[0, 1]])), None);
    }

    #[test]
    fn conclusive_kleene_examples() {
        let lat = PowersetLattice::new(3);
        assert!(is_conclusive_kleene(&lat, &KleeneSequence::new(0, vec![set(&[])])));
        assert!(is_conclusive_kleene(
            &lat,
            &KleeneSequence::new(0, vec![set(&[]), set(&[0]), set(&[1])])
        ));
        assert!(!is_conclusive_kleene(&lat, &KleeneSequence::new(1, vec![set(&[0]), set(&[1])])));
        assert!(!is_conclusive_kleene(&lat, &KleeneSequence::empty()));
    }

    #[test]
    fn kt_order_examples() {
        let lat = PowersetLattice::new(3);
        let x = seq(&[&[], &[0, 1, 2]]);
        let y = seq(&[&[], &[0, 1], &[0, 1, 2]]);
        assert!(kt_order_leq(&lat, &x, &y));
        assert!(kt_order_leq(&lat, &x, &x));
        assert!(!kt_order_leq(&lat, &seq(&[&[], &[0]]), &seq(&[&[], &[0, 1]])));
        assert!(!kt_order_leq(&lat, &y, &x));
    }

    #[test]
    fn kt_witness_examples() {
        let k = k1(&[0, 1]);
        let p = forward(&k);
        assert!(check_kt_witness(&p, &set(&[0, 1])));
        assert!(!check_kt_witness(&p, &set(&[0, 1, 2])));
        assert!(!check_kt_witness(&p, &set(&[0])));

        let empty_init = KripkeStructure::new(3, &[(0, 1), (1, 1), (2, 2)], &[], &[0]).unwrap();
        let p = forward(&empty_init);
        assert!(check_kt_witness(&p, &set(&[])));
    }

    #[test]
    fn kleene_witness_examples() {
        let k = k1(&[0]);
        let p = forward(&k);
        assert!(check_kleene_witness(
            &p,
            &KleeneSequence::new(0, vec![set(&[]), set(&[0]), set(&[1])])
        ));
        assert!(!check_kleene_witness(&p, &KleeneSequence::empty()));
        assert!(!check_kleene_witness(&p, &KleeneSequence::new(1, vec![set(&[0]), set(&[1])])));
    }

    #[test]
    fn kleene_push_pop_tracks_start_index() {
        let mut c = KleeneSequence::new(3, vec![1u8]);
        c.push_front(0);
        assert_eq!(c.start_index(), 2);
        assert_eq!(c.get(3), Some(&1));
        assert_eq!(c.pop_front(), Some(0));
        assert_eq!(c.start_index(), 3);
        assert_eq!(c.end_index(), 4);
    }
}
