//! Real-valued predicates extended with a symbolic infinitesimal `ε`.
//!
//! A value `v+ε` stands for "the smallest value strictly above `v`". The
//! order is lexicographic on `(base, eps)`, which gives exactly
//! `a+ε ≤ b ⟺ a < b` and `a ≤ b+ε ⟺ a ≤ b`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsValue {
    pub base: f64,
    pub eps: bool,
}

impl EpsValue {
    pub const ZERO: EpsValue = EpsValue::plain(0.0);

    pub const fn plain(base: f64) -> Self {
        Self { base, eps: false }
    }

    /// `base + ε`. At infinity the infinitesimal is absorbed.
    pub fn above(base: f64) -> Self {
        Self {
            base,
            eps: base != f64::INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.base == 0.0 && !self.eps
    }

    pub fn cmp_eps(&self, other: &Self) -> Ordering {
        self.base
            .partial_cmp(&other.base)
            .expect("values are never NaN")
            .then(self.eps.cmp(&other.eps))
    }

    pub fn le(&self, other: &Self) -> bool {
        self.cmp_eps(other) != Ordering::Greater
    }

    pub fn min(self, other: Self) -> Self {
        if self.le(&other) {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.le(&other) {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for EpsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base == f64::INFINITY {
            f.write_str("inf")
        } else if self.eps {
            write!(f, "{}+eps", self.base)
        } else {
            write!(f, "{}", self.base)
        }
    }
}

/// A function `S → [0, top]` with optional `ε` marks, indexed by state.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsFrame(Vec<EpsValue>);

impl EpsFrame {
    pub fn new(values: Vec<EpsValue>) -> Self {
        Self(values)
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(alloc::vec![EpsValue::plain(value); len])
    }

    /// A frame without `ε` marks.
    pub fn from_plain(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| EpsValue::plain(v)).collect())
    }

    pub fn values(&self) -> &[EpsValue] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when no entry carries an `ε` mark.
    pub fn is_plain(&self) -> bool {
        self.0.iter().all(|v| !v.eps)
    }

    pub fn bases(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.base).collect()
    }
}

impl core::ops::Index<usize> for EpsFrame {
    type Output = EpsValue;

    fn index(&self, index: usize) -> &EpsValue {
        &self.0[index]
    }
}

impl fmt::Display for EpsFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// The pointwise lattice `[0, top]^S` (with `ε` marks). `top` is `1.0` for
/// probabilities and `f64::INFINITY` for accumulated rewards.
#[derive(Clone, Copy, Debug)]
pub struct EpsLattice {
    size: usize,
    top: f64,
}

impl EpsLattice {
    pub fn new(size: usize, top: f64) -> Self {
        Self { size, top }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn top_value(&self) -> f64 {
        self.top
    }
}

impl crate::lattice::CompleteLattice for EpsLattice {
    type Elem = EpsFrame;
    /// First state where the order fails.
    type Info = usize;

    fn check_leq(&self, a: &EpsFrame, b: &EpsFrame) -> Result<(), usize> {
        match a.0.iter().zip(&b.0).position(|(x, y)| !x.le(y)) {
            Some(s) => Err(s),
            None => Ok(()),
        }
    }

    fn meet(&self, a: &EpsFrame, b: &EpsFrame) -> EpsFrame {
        EpsFrame(a.0.iter().zip(&b.0).map(|(x, y)| x.min(*y)).collect())
    }

    fn bot(&self) -> EpsFrame {
        EpsFrame::constant(self.size, 0.0)
    }

    fn top(&self) -> EpsFrame {
        EpsFrame::constant(self.size, self.top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CompleteLattice;
    use proptest::prelude::*;

    fn v(base: f64, eps: bool) -> EpsValue {
        EpsValue { base, eps }
    }

    #[test]
    fn order_matches_infinitesimal_semantics() {
        // a+ε ≤ b iff a < b
        assert!(v(0.3, true).le(&v(0.4, false)));
        assert!(!v(0.4, true).le(&v(0.4, false)));
        // a ≤ b+ε iff a ≤ b
        assert!(v(0.4, false).le(&v(0.4, true)));
        assert!(!v(0.5, false).le(&v(0.4, true)));
        // a+ε ≤ b+ε iff a ≤ b
        assert!(v(0.4, true).le(&v(0.4, true)));
        assert!(!v(0.5, true).le(&v(0.4, true)));
    }

    #[test]
    fn meet_prefers_plain_value_at_equal_base() {
        assert_eq!(v(0.4, true).min(v(0.4, false)), v(0.4, false));
        assert_eq!(v(0.4, false).min(v(0.4, true)), v(0.4, false));
    }

    #[test]
    fn epsilon_absorbed_at_infinity() {
        assert_eq!(EpsValue::above(f64::INFINITY), EpsValue::plain(f64::INFINITY));
        assert!(EpsValue::above(1e300).le(&EpsValue::plain(f64::INFINITY)));
    }

    fn arb_value() -> impl Strategy<Value = EpsValue> {
        (0u8..5, any::<bool>()).prop_map(|(b, e)| v(b as f64 / 4.0, e && b < 4))
    }

    proptest! {
        #[test]
        fn order_is_total_and_transitive(a in arb_value(), b in arb_value(), c in arb_value()) {
            prop_assert!(a.le(&b) || b.le(&a));
            if a.le(&b) && b.le(&c) {
                prop_assert!(a.le(&c));
            }
            if a.le(&b) && b.le(&a) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn frame_lattice_laws(
            a in proptest::collection::vec(arb_value(), 4),
            b in proptest::collection::vec(arb_value(), 4),
            c in proptest::collection::vec(arb_value(), 4),
        ) {
            let lat = EpsLattice::new(4, 1.0);
            let (a, b, c) = (EpsFrame::new(a), EpsFrame::new(b), EpsFrame::new(c));
            let m = lat.meet(&a, &b);
            prop_assert!(lat.leq(&m, &a) && lat.leq(&m, &b));
            if lat.leq(&c, &a) && lat.leq(&c, &b) {
                prop_assert!(lat.leq(&c, &m));
            }
            prop_assert!(lat.leq(&lat.bot(), &a));
            prop_assert!(lat.leq(&a, &lat.top()));
            prop_assert!(lat.leq(&a, &a));
        }
    }
}
