//! Order duality: the opposite lattice (for LT-OpPDR) and the reduction of a
//! greatest-fixed-point problem to a least one through an involution.

use super::EngineError;
use crate::lattice::{CompleteLattice, Problem, Transformer};

/// `L` with the order reversed. Meet is the join of `L`, so the underlying
/// lattice must supply one.
#[derive(Clone, Debug)]
pub struct Opposite<L>(pub L);

impl<L: CompleteLattice> CompleteLattice for Opposite<L> {
    type Elem = L::Elem;
    type Info = L::Info;

    fn check_leq(&self, a: &L::Elem, b: &L::Elem) -> Result<(), L::Info> {
        self.0.check_leq(b, a)
    }

    fn meet(&self, a: &L::Elem, b: &L::Elem) -> L::Elem {
        self.0
            .join(a, b)
            .expect("Opposite is only constructed over lattices with a join")
    }

    fn bot(&self) -> L::Elem {
        self.0.top()
    }

    fn top(&self) -> L::Elem {
        self.0.bot()
    }

    fn join(&self, a: &L::Elem, b: &L::Elem) -> Option<L::Elem> {
        Some(self.0.meet(a, b))
    }
}

/// Turns the GFP-UA problem `alpha ≤? νF` over `lattice` into the LFP-OA
/// problem `μF ≤? alpha` over its opposite.
pub fn dualize<L, F>(lattice: L, transformer: F, alpha: L::Elem) -> Result<Problem<Opposite<L>, F>, EngineError>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    if lattice.join(&lattice.bot(), &lattice.top()).is_none() {
        return Err(EngineError::UnsupportedDual);
    }
    Ok(Problem::new(Opposite(lattice), transformer, alpha))
}

/// The transformer `x ↦ ¬(α ∧ G(¬x))`.
#[derive(Clone, Debug)]
pub struct Reduced<L: CompleteLattice, G, N> {
    lattice: L,
    gfp: G,
    alpha: L::Elem,
    neg: N,
}

impl<L, G, N> Transformer<L::Elem> for Reduced<L, G, N>
where
    L: CompleteLattice,
    G: Transformer<L::Elem>,
    N: Fn(&L::Elem) -> L::Elem,
{
    fn apply(&self, x: &L::Elem) -> L::Elem {
        let inner = self.gfp.apply(&(self.neg)(x));
        (self.neg)(&self.lattice.meet(&self.alpha, &inner))
    }
}

pub type ReducedProblem<L, G, N> = Problem<L, Reduced<L, G, N>>;

/// Reduces `ι ≤? νx. α ∧ G(x)` to `μx. ¬(α ∧ G(¬x)) ≤? ¬ι`.
///
/// `neg` must be a monotone order-reversing involution; it is checked to be
/// self-inverse on `⊥`, `⊤`, `ι`, `α` and every element of `samples`.
pub fn involution_reduce<L, G, N>(
    lattice: L,
    gfp: G,
    iota: &L::Elem,
    alpha: L::Elem,
    neg: N,
    samples: &[L::Elem],
) -> Result<ReducedProblem<L, G, N>, EngineError>
where
    L: CompleteLattice + Clone,
    G: Transformer<L::Elem>,
    N: Fn(&L::Elem) -> L::Elem,
{
    let fixed = [lattice.bot(), lattice.top(), iota.clone(), alpha.clone()];
    for x in fixed.iter().chain(samples) {
        if !lattice.equiv(&neg(&neg(x)), x) {
            return Err(EngineError::InvolutionViolation);
        }
    }
    let bound = neg(iota);
    let transformer = Reduced {
        lattice: lattice.clone(),
        gfp,
        alpha,
        neg,
    };
    Ok(Problem::new(lattice, transformer, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{CanonicalHeuristics, Solver, Verdict};

    /// Subsets of {0,1,2} as bitmasks.
    #[derive(Clone, Copy)]
    struct Bits;

    impl CompleteLattice for Bits {
        type Elem = u8;
        type Info = u8;
        fn check_leq(&self, a: &u8, b: &u8) -> Result<(), u8> {
            match a & !b {
                0 => Ok(()),
                d => Err(d),
            }
        }
        fn meet(&self, a: &u8, b: &u8) -> u8 {
            a & b
        }
        fn bot(&self) -> u8 {
            0
        }
        fn top(&self) -> u8 {
            0b111
        }
        fn join(&self, a: &u8, b: &u8) -> Option<u8> {
            Some(a | b)
        }
    }

    struct NoJoin;

    impl CompleteLattice for NoJoin {
        type Elem = u8;
        type Info = ();
        fn check_leq(&self, a: &u8, b: &u8) -> Result<(), ()> {
            if a <= b {
                Ok(())
            } else {
                Err(())
            }
        }
        fn meet(&self, a: &u8, b: &u8) -> u8 {
            *a.min(b)
        }
        fn bot(&self) -> u8 {
            0
        }
        fn top(&self) -> u8 {
            9
        }
    }

    // 0→1, 1→1, 2→2: universal predecessors.
    fn box_pre(a: &u8) -> u8 {
        let succ = [0b010u8, 0b010, 0b100];
        (0..3).filter(|&s| succ[s] & !a == 0).fold(0, |acc, s| acc | 1 << s)
    }

    #[test]
    fn opposite_reverses_order_and_bounds() {
        let op = Opposite(Bits);
        assert!(op.leq(&0b011, &0b001));
        assert_eq!(op.bot(), 0b111);
        assert_eq!(op.meet(&0b001, &0b010), 0b011);
        assert_eq!(op.join(&0b011, &0b110), Some(0b010));
    }

    #[test]
    fn dualize_requires_join() {
        let err = dualize(NoJoin, |x: &u8| *x, 0).err().expect("rejected");
        assert_eq!(err, EngineError::UnsupportedDual);
    }

    #[test]
    fn opdual_solves_gfp_problems() {
        let iota = 0b001;
        for (alpha, expected) in [(0b011u8, Verdict::True), (0b001, Verdict::False), (0b111, Verdict::True)] {
            let g = move |x: &u8| alpha & box_pre(x);
            let p = dualize(Bits, g, iota).unwrap();
            let answer = Solver::new(&p).run_combined(&mut CanonicalHeuristics).unwrap();
            assert_eq!(answer.verdict, expected, "alpha={alpha:03b}");
        }
    }

    #[test]
    fn involution_reduce_matches_gfp_answer() {
        let neg = |x: &u8| !x & 0b111;
        let p = involution_reduce(Bits, box_pre, &0b001, 0b011, neg, &[0b101]).unwrap();
        assert_eq!(p.alpha, 0b110);
        // ¬α ∪ pre∃(∅)
        assert_eq!(p.apply(&0), 0b100);
        let answer = Solver::new(&p).run_combined(&mut CanonicalHeuristics).unwrap();
        assert_eq!(answer.verdict, Verdict::True);
        assert_eq!(neg(&neg(&0b101)), 0b101);
    }

    #[test]
    fn involution_reduce_rejects_non_involution() {
        let not_neg = |x: &u8| if *x == 0 { 0b111 } else { 0 };
        let err = involution_reduce(Bits, box_pre, &0b001, 0b011, not_neg, &[0b010]).err().expect("rejected");
        assert_eq!(err, EngineError::InvolutionViolation);
    }
}
