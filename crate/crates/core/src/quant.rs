//! Shared machinery for the quantitative instances: max-of-affine Bellman
//! operators on `ε`-marked frames, model validation, and the Candidate /
//! Decide / Conflict heuristics that both the MDP and the MRM instance use.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{HeuristicError, Heuristics, Query};
use crate::eps::{EpsFrame, EpsLattice, EpsValue};
use crate::lattice::CompleteLattice;
use crate::simplex::{simplex_min, LinearProgram};

/// Tolerance for distribution sums.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Box bound used by Decide in place of an infinite frame value.
pub const FINITE_CAP: f64 = 1e9;

/// LP values this close to a bound are snapped onto it.
const SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("a model needs at least one state")]
    NoStates,
    #[error("a model needs at least one action")]
    NoActions,
    #[error("state {state} out of range (model has {count} states)")]
    StateOutOfRange { state: usize, count: usize },
    #[error("action {action} out of range (model has {count} actions)")]
    ActionOutOfRange { action: usize, count: usize },
    #[error("state {state} has no outgoing distribution")]
    NoDistribution { state: usize },
    #[error("state {state} action {action} is defined twice")]
    Duplicate { state: usize, action: usize },
    #[error("probability {p} at state {state} is not in [0, 1]")]
    BadProbability { state: usize, p: f64 },
    #[error("distribution at state {state}{} sums to {sum}", action.map(|a| format!(" action {a}")).unwrap_or_default())]
    Distribution {
        state: usize,
        action: Option<usize>,
        sum: f64,
    },
    #[error("threshold {0} out of range")]
    BadThreshold(f64),
}

/// Checks a distribution and merges entries with the same target.
pub(crate) fn normalize(
    state: usize,
    action: Option<usize>,
    count: usize,
    entries: &[(usize, f64)],
) -> Result<Vec<(usize, f64)>, ValidationError> {
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    let mut sum = 0.0;
    for &(t, p) in entries {
        if t >= count {
            return Err(ValidationError::StateOutOfRange { state: t, count });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(ValidationError::BadProbability { state, p });
        }
        sum += p;
        match merged.iter_mut().find(|(u, _)| *u == t) {
            Some(e) => e.1 += p,
            None => merged.push((t, p)),
        }
    }
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(ValidationError::Distribution { state, action, sum });
    }
    merged.sort_by_key(|e| e.0);
    Ok(merged)
}

/// `constant + Σ p·x(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineChoice {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl AffineChoice {
    /// Evaluates on an `ε`-marked frame: the result is marked when some
    /// marked entry has positive weight, and `∞` absorbs.
    pub fn eval(&self, x: &EpsFrame) -> EpsValue {
        let mut base = self.constant;
        let mut eps = false;
        for &(t, p) in &self.terms {
            if p > 0.0 {
                base += p * x[t].base;
                eps |= x[t].eps;
            }
        }
        if eps {
            EpsValue::above(base)
        } else {
            EpsValue::plain(base)
        }
    }

    pub fn eval_plain(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .fold(self.constant, |acc, &(t, p)| acc + p * x[t])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Row {
    /// A state outside the safe region; its value is fixed.
    Exit,
    /// A safe state; its value is the maximum over the choices.
    Choices(Vec<AffineChoice>),
}

/// `F(x)(s) = exit` for exit rows, else `max_a (c_a + Σ p_a·x)`, together
/// with the bound `d(s_ι) = λ`, `d(s) = top` elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSystem {
    pub top: f64,
    pub exit_value: f64,
    pub rows: Vec<Row>,
    pub initial: usize,
    pub threshold: f64,
}

impl AffineSystem {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn lattice(&self) -> EpsLattice {
        EpsLattice::new(self.size(), self.top)
    }

    /// `d_{ι,λ}`.
    pub fn bound(&self) -> EpsFrame {
        let mut values = vec![EpsValue::plain(self.top); self.size()];
        values[self.initial] = EpsValue::plain(self.threshold);
        EpsFrame::new(values)
    }

    pub fn row_value(&self, s: usize, x: &EpsFrame) -> EpsValue {
        match &self.rows[s] {
            Row::Exit => EpsValue::plain(self.exit_value),
            Row::Choices(cs) => cs
                .iter()
                .map(|c| c.eval(x))
                .reduce(EpsValue::max)
                .unwrap_or(EpsValue::plain(self.top)),
        }
    }

    pub fn apply(&self, x: &EpsFrame) -> EpsFrame {
        EpsFrame::new((0..self.size()).map(|s| self.row_value(s, x)).collect())
    }

    pub fn apply_plain(&self, x: &[f64]) -> Vec<f64> {
        (0..self.size())
            .map(|s| match &self.rows[s] {
                Row::Exit => self.exit_value,
                Row::Choices(cs) => cs
                    .iter()
                    .map(|c| c.eval_plain(x))
                    .reduce(f64::max)
                    .unwrap_or(self.top),
            })
            .collect()
    }
}

/// Objective weights of the Decide linear program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecideWeights {
    /// `2 − X_{i−1}(s)`.
    TwoMinusFrame,
    Uniform,
}

/// Candidate: `λ+ε` at `s_ι`, `0` elsewhere. `Ok(None)` when the bound is
/// `⊤` (no element violates it).
pub fn candidate(sys: &AffineSystem, last: &EpsFrame) -> Result<Option<EpsFrame>, HeuristicError> {
    if sys.threshold >= sys.top {
        return Ok(None);
    }
    let at_init = last[sys.initial];
    if at_init.le(&EpsValue::plain(sys.threshold)) {
        return Err(HeuristicError(format!(
            "last frame is {at_init} at the initial state, not above the threshold {}",
            sys.threshold
        )));
    }
    let mut values = vec![EpsValue::ZERO; sys.size()];
    values[sys.initial] = EpsValue::above(sys.threshold);
    Ok(Some(EpsFrame::new(values)))
}

/// Decide: solves the linear program over the successors of the witnessing
/// choices and marks every entry strictly below the previous frame with `ε`.
pub fn decide(
    sys: &AffineSystem,
    prev: &EpsFrame,
    obligation: &EpsFrame,
    weights: DecideWeights,
) -> Result<EpsFrame, HeuristicError> {
    let n = sys.size();
    let mut constraints: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut in_v = vec![false; n];
    for s in (0..n).filter(|&s| !obligation[s].is_zero()) {
        let Row::Choices(choices) = &sys.rows[s] else {
            continue;
        };
        let Some(choice) = choices.iter().find(|c| obligation[s].le(&c.eval(prev))) else {
            return Err(HeuristicError(format!(
                "no choice at state {s} covers the obligation {}",
                obligation[s]
            )));
        };
        for &(t, p) in &choice.terms {
            if p > 0.0 {
                in_v[t] = true;
            }
        }
        let b = obligation[s].base - choice.constant;
        if b > 0.0 {
            constraints.push((choice.terms.clone(), b));
        }
    }
    let vars: Vec<usize> = (0..n).filter(|&t| in_v[t]).collect();
    let column = |t: usize| vars.binary_search(&t).ok();
    let upper: Vec<f64> = vars.iter().map(|&t| prev[t].base.min(FINITE_CAP)).collect();
    let capped = vars.iter().any(|&t| prev[t].base > FINITE_CAP);
    let costs: Vec<f64> = vars
        .iter()
        .map(|&t| match weights {
            DecideWeights::TwoMinusFrame => 2.0 - prev[t].base,
            DecideWeights::Uniform => 1.0,
        })
        .collect();
    let lp = LinearProgram {
        costs,
        constraints: constraints
            .iter()
            .map(|(terms, b)| {
                let mut row = vec![0.0; vars.len()];
                for &(t, p) in terms {
                    if let Some(j) = column(t) {
                        row[j] += p;
                    }
                }
                (row, *b)
            })
            .collect(),
        upper,
    };

    let restricted = || {
        let mut values = vec![EpsValue::ZERO; n];
        for &t in &vars {
            values[t] = EpsValue::plain(prev[t].base);
        }
        EpsFrame::new(values)
    };
    let solution = match simplex_min(&lp) {
        Ok(sol) => sol,
        Err(_) if capped => return Ok(restricted()),
        Err(e) => return Err(HeuristicError(format!("decide program: {e}"))),
    };
    let mut values = vec![EpsValue::ZERO; n];
    for (j, &t) in vars.iter().enumerate() {
        let bound = prev[t].base;
        let mut v = solution.x[j].clamp(0.0, bound);
        if (bound - v).abs() <= SNAP {
            v = bound;
        } else if v <= SNAP {
            v = 0.0;
        }
        values[t] = if v == bound {
            EpsValue::plain(v)
        } else {
            EpsValue::above(v)
        };
    }
    let x = EpsFrame::new(values);
    // rounding can break the contract; the restriction of the previous frame
    // to the successors always satisfies it
    let lat = sys.lattice();
    if lat.leq(&x, prev) && lat.leq(obligation, &sys.apply(&x)) {
        Ok(x)
    } else {
        Ok(restricted())
    }
}

/// Conflict: `⊤` outside `A = {s | C(s) ≰ F(X)(s)}`; on `A`, the base value
/// for `ε`-marked obligations and `F(X)(s)` otherwise.
pub fn conflict(sys: &AffineSystem, prev: &EpsFrame, obligation: &EpsFrame) -> Result<EpsFrame, HeuristicError> {
    let image = sys.apply(prev);
    let mut any = false;
    let values = (0..sys.size())
        .map(|s| {
            let c = obligation[s];
            if c.le(&image[s]) {
                EpsValue::plain(sys.top)
            } else {
                any = true;
                if c.eps {
                    EpsValue::plain(c.base)
                } else {
                    image[s]
                }
            }
        })
        .collect();
    if !any {
        return Err(HeuristicError(String::from(
            "obligation is below F of the previous frame",
        )));
    }
    Ok(EpsFrame::new(values))
}

/// The Candidate/Decide/Conflict choices above, packaged for the engine.
#[derive(Clone, Copy, Debug)]
pub struct QuantHeuristics<'s> {
    pub system: &'s AffineSystem,
    pub weights: DecideWeights,
}

impl Heuristics<EpsLattice> for QuantHeuristics<'_> {
    fn candidate(
        &mut self,
        _query: &Query<'_, EpsLattice>,
        last: &EpsFrame,
        _info: Option<&usize>,
    ) -> Result<Option<EpsFrame>, HeuristicError> {
        candidate(self.system, last)
    }

    fn decide(
        &mut self,
        _query: &Query<'_, EpsLattice>,
        prev: &EpsFrame,
        obligation: &EpsFrame,
    ) -> Result<Option<EpsFrame>, HeuristicError> {
        decide(self.system, prev, obligation, self.weights).map(Some)
    }

    fn conflict(
        &mut self,
        _query: &Query<'_, EpsLattice>,
        prev: &EpsFrame,
        obligation: &EpsFrame,
        _info: Option<&usize>,
    ) -> Result<Option<EpsFrame>, HeuristicError> {
        conflict(self.system, prev, obligation).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(xs: &[f64]) -> EpsFrame {
        EpsFrame::from_plain(xs)
    }

    // s0 → {s1: 1/2, s2: 1/2}, s1, s2 absorbing; s2 is the exit.
    fn m1(threshold: f64) -> AffineSystem {
        let choice = |terms: Vec<(usize, f64)>| Row::Choices(vec![AffineChoice { constant: 0.0, terms }]);
        AffineSystem {
            top: 1.0,
            exit_value: 1.0,
            rows: vec![choice(vec![(1, 0.5), (2, 0.5)]), choice(vec![(1, 1.0)]), Row::Exit],
            initial: 0,
            threshold,
        }
    }

    #[test]
    fn eval_marks_and_absorbs() {
        let c = AffineChoice { constant: 1.0, terms: vec![(0, 0.25), (1, 0.75)] };
        let x = EpsFrame::new(vec![EpsValue::above(1.0), EpsValue::ZERO]);
        assert_eq!(c.eval(&x), EpsValue::above(1.25));
        let x = EpsFrame::new(vec![EpsValue::plain(f64::INFINITY), EpsValue::ZERO]);
        assert_eq!(c.eval(&x), EpsValue::plain(f64::INFINITY));
        let zero_weight = AffineChoice { constant: 0.0, terms: vec![(0, 0.0)] };
        assert_eq!(zero_weight.eval(&x), EpsValue::ZERO);
    }

    #[test]
    fn normalize_merges_and_checks_sum() {
        assert_eq!(normalize(0, None, 3, &[(2, 0.5), (1, 0.25), (2, 0.25)]).unwrap(), vec![(1, 0.25), (2, 0.75)]);
        assert!(matches!(
            normalize(0, Some(1), 3, &[(1, 0.9)]),
            Err(ValidationError::Distribution { state: 0, action: Some(1), .. })
        ));
        assert!(matches!(normalize(0, None, 3, &[(4, 1.0)]), Err(ValidationError::StateOutOfRange { .. })));
    }

    #[test]
    fn candidate_examples() {
        let x = candidate(&m1(0.4), &plain(&[0.5, 0.0, 1.0])).unwrap().unwrap();
        assert_eq!(x, EpsFrame::new(vec![EpsValue::above(0.4), EpsValue::ZERO, EpsValue::ZERO]));
        assert!(candidate(&m1(0.0), &plain(&[0.0, 0.0, 1.0])).is_err());
        let x = candidate(&m1(0.6), &plain(&[0.61, 0.0, 1.0])).unwrap().unwrap();
        assert_eq!(x[0], EpsValue::above(0.6));
        assert_eq!(candidate(&m1(1.0), &plain(&[1.0, 1.0, 1.0])).unwrap(), None);
    }

    #[test]
    fn decide_lp_example() {
        let sys = m1(0.4);
        let c = EpsFrame::new(vec![EpsValue::above(0.4), EpsValue::ZERO, EpsValue::ZERO]);
        let x = decide(&sys, &plain(&[0.0, 0.0, 1.0]), &c, DecideWeights::TwoMinusFrame).unwrap();
        assert_eq!(x[0], EpsValue::ZERO);
        assert_eq!(x[1], EpsValue::ZERO);
        assert!(x[2].eps && (x[2].base - 0.8).abs() < 1e-12, "{x}");
    }

    #[test]
    fn decide_with_zero_obligation_is_zero() {
        let sys = m1(0.4);
        let x = decide(&sys, &plain(&[0.5, 0.0, 1.0]), &plain(&[0.0, 0.0, 0.0]), DecideWeights::TwoMinusFrame).unwrap();
        assert_eq!(x, plain(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn decide_tight_bound_stays_plain() {
        let sys = m1(0.4);
        // 0.5 ≤ 0.5·x1 + 0.5·x2 with x1 ≤ 0, x2 ≤ 1 forces x2 = 1 = X(s2)
        let c = plain(&[0.5, 0.0, 0.0]);
        let x = decide(&sys, &plain(&[0.0, 0.0, 1.0]), &c, DecideWeights::TwoMinusFrame).unwrap();
        assert_eq!(x[2], EpsValue::plain(1.0));
    }

    #[test]
    fn conflict_examples() {
        let sys = m1(0.6);
        let c = EpsFrame::new(vec![EpsValue::above(0.6), EpsValue::ZERO, EpsValue::ZERO]);
        let x = conflict(&sys, &plain(&[0.0, 0.0, 1.0]), &c).unwrap();
        assert_eq!(x, plain(&[0.6, 1.0, 1.0]));
        // plain obligation above F(X) maps to F(X)
        let c = plain(&[0.7, 0.0, 0.0]);
        let x = conflict(&sys, &plain(&[0.0, 0.0, 1.0]), &c).unwrap();
        assert_eq!(x, plain(&[0.5, 1.0, 1.0]));
        assert!(conflict(&sys, &plain(&[0.0, 0.0, 1.0]), &plain(&[0.4, 0.0, 0.0])).is_err());
    }
}
