//! Maximum reachability in Markov decision processes, checked by PDR over
//! the inverse backward Bellman operator on `[0,1]^S`.
//!
//! The problem `μx. F′(x) ≤? d_{ι,λ}` with `F′(d)(s) = 1` for `s ∉ α` and
//! `max_a Σ d(s′)·δ(s)(a)(s′)` otherwise is valid iff the maximum probability
//! of leaving `α` from `s_ι` is at most `λ`.

use alloc::vec::Vec;

use crate::engine::{EngineError, HeuristicError, PdrAnswer, RunOptions, Solver, TraceSink};
use crate::eps::{EpsFrame, EpsLattice};
use crate::kripke::StateSet;
use crate::lattice::Problem;
use crate::quant::{self, normalize, AffineChoice, AffineSystem, DecideWeights, QuantHeuristics, Row, ValidationError};

pub type Distribution = Vec<(usize, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct MdpModel {
    actions: usize,
    /// `delta[s][a]`, `None` when `a` is unavailable at `s`.
    delta: Vec<Vec<Option<Distribution>>>,
    initial: usize,
    lambda: f64,
    safe: StateSet,
}

impl MdpModel {
    /// `transitions` lists `(state, action, distribution)`; entries of a
    /// distribution with the same target are merged.
    pub fn new(
        states: usize,
        actions: usize,
        initial: usize,
        lambda: f64,
        safe: &[usize],
        transitions: &[(usize, usize, Distribution)],
    ) -> Result<Self, ValidationError> {
        if states == 0 {
            return Err(ValidationError::NoStates);
        }
        if actions == 0 {
            return Err(ValidationError::NoActions);
        }
        let state = |s: usize| {
            if s < states {
                Ok(s)
            } else {
                Err(ValidationError::StateOutOfRange { state: s, count: states })
            }
        };
        if !(0.0..=1.0).contains(&lambda) {
            return Err(ValidationError::BadThreshold(lambda));
        }
        let mut delta = alloc::vec![alloc::vec![None; actions]; states];
        for (s, a, dist) in transitions {
            let s = state(*s)?;
            if *a >= actions {
                return Err(ValidationError::ActionOutOfRange { action: *a, count: actions });
            }
            if delta[s][*a].is_some() {
                return Err(ValidationError::Duplicate { state: s, action: *a });
            }
            delta[s][*a] = Some(normalize(s, Some(*a), states, dist)?);
        }
        if let Some(s) = delta.iter().position(|row| row.iter().all(Option::is_none)) {
            return Err(ValidationError::NoDistribution { state: s });
        }
        let mut ok = StateSet::empty(states);
        for &s in safe {
            ok.insert(state(s)?);
        }
        Ok(Self {
            actions,
            delta,
            initial: state(initial)?,
            lambda,
            safe: ok,
        })
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn safe(&self) -> &StateSet {
        &self.safe
    }

    pub fn distribution(&self, s: usize, a: usize) -> Option<&[(usize, f64)]> {
        self.delta[s][a].as_deref()
    }

    /// Available `(state, action, distribution)` triples in order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, &[(usize, f64)])> + '_ {
        self.delta.iter().enumerate().flat_map(|(s, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(a, d)| d.as_deref().map(|d| (s, a, d)))
        })
    }

    /// The same model with another threshold. Panics if `λ ∉ [0,1]`.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        assert!((0.0..=1.0).contains(&lambda), "threshold out of range");
        Self { lambda, ..self.clone() }
    }

    pub fn system(&self) -> AffineSystem {
        let rows = (0..self.state_count())
            .map(|s| {
                if !self.safe.contains(s) {
                    return Row::Exit;
                }
                Row::Choices(
                    self.delta[s]
                        .iter()
                        .flatten()
                        .map(|d| AffineChoice { constant: 0.0, terms: d.clone() })
                        .collect(),
                )
            })
            .collect();
        AffineSystem {
            top: 1.0,
            exit_value: 1.0,
            rows,
            initial: self.initial,
            threshold: self.lambda,
        }
    }

    /// `F′` on plain frames.
    pub fn bellman(&self, d: &[f64]) -> Vec<f64> {
        self.system().apply_plain(d)
    }
}

/// `(F′, d_{ι,λ})` over `[0,1]^S`.
pub fn problem(system: &AffineSystem) -> Problem<EpsLattice, impl Fn(&EpsFrame) -> EpsFrame + '_> {
    Problem::new(system.lattice(), move |x: &EpsFrame| system.apply(x), system.bound())
}

pub fn heuristics(system: &AffineSystem) -> QuantHeuristics<'_> {
    QuantHeuristics {
        system,
        weights: DecideWeights::TwoMinusFrame,
    }
}

/// Combined PDR for `max Pr(reach ¬α from s_ι) ≤? λ`.
pub fn pdr_ibmdp(
    model: &MdpModel,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
) -> Result<PdrAnswer<EpsFrame>, EngineError> {
    let system = model.system();
    let problem = problem(&system);
    let mut solver = Solver::new(&problem).options(options.clone());
    if let Some(trace) = trace {
        solver = solver.trace(trace);
    }
    solver.run_combined(&mut heuristics(&system))
}

/// `λ+ε` at `s_ι`, `0` elsewhere. Fails unless `X_last(s_ι) > λ`.
pub fn heuristic_candidate_mdp(x_last: &EpsFrame, model: &MdpModel) -> Result<EpsFrame, HeuristicError> {
    quant::candidate(&model.system(), x_last)?
        .ok_or_else(|| HeuristicError("threshold is 1, nothing violates the bound".into()))
}

/// The Decide linear program with objective weights `2 − X_prev(s)`.
pub fn solve_decide_lp(x_prev: &EpsFrame, c_head: &EpsFrame, model: &MdpModel) -> Result<EpsFrame, HeuristicError> {
    quant::decide(&model.system(), x_prev, c_head, DecideWeights::TwoMinusFrame)
}

pub fn heuristic_conflict_mdp(x_prev: &EpsFrame, c_head: &EpsFrame, model: &MdpModel) -> Result<EpsFrame, HeuristicError> {
    quant::conflict(&model.system(), x_prev, c_head)
}
