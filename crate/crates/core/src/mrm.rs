//! Expected accumulated reward in Markov reward models, checked by PDR over
//! `[0,∞]^S`.
//!
//! `F′(d)(s) = 0` for `s ∉ α` and `Σ (c + d(s′))·δ(s)(c)(s′)` otherwise; the
//! problem `μF′ ≤? d_{ι,λ}` asks whether the expected reward collected from
//! `s_ι` before leaving `α` is at most `λ`. Unfold appends the constant-`∞`
//! frame.

use alloc::vec::Vec;

use crate::engine::{EngineError, PdrAnswer, RunOptions, Solver, TraceSink};
use crate::eps::{EpsFrame, EpsLattice};
use crate::kripke::StateSet;
use crate::lattice::Problem;
use crate::quant::{
    normalize, AffineChoice, AffineSystem, DecideWeights, QuantHeuristics, Row, ValidationError,
};

/// One outcome `(reward, target, probability)`.
pub type Outcome = (u32, usize, f64);

#[derive(Clone, Debug, PartialEq)]
pub struct MrmModel {
    delta: Vec<Vec<Outcome>>,
    initial: usize,
    lambda: f64,
    safe: StateSet,
}

impl MrmModel {
    /// `transitions` gives each state's outcome distribution exactly once.
    pub fn new(
        states: usize,
        initial: usize,
        lambda: f64,
        safe: &[usize],
        transitions: &[(usize, Vec<Outcome>)],
    ) -> Result<Self, ValidationError> {
        if states == 0 {
            return Err(ValidationError::NoStates);
        }
        let state = |s: usize| {
            if s < states {
                Ok(s)
            } else {
                Err(ValidationError::StateOutOfRange { state: s, count: states })
            }
        };
        if lambda.is_nan() || lambda < 0.0 {
            return Err(ValidationError::BadThreshold(lambda));
        }
        let mut delta: Vec<Option<Vec<Outcome>>> = alloc::vec![None; states];
        for (s, outcomes) in transitions {
            let s = state(*s)?;
            if delta[s].is_some() {
                return Err(ValidationError::Duplicate { state: s, action: 0 });
            }
            let pairs: Vec<(usize, f64)> = outcomes.iter().map(|&(_, t, p)| (t, p)).collect();
            normalize(s, None, states, &pairs)?;
            let mut merged: Vec<Outcome> = Vec::with_capacity(outcomes.len());
            for &(c, t, p) in outcomes {
                match merged.iter_mut().find(|(c2, t2, _)| *c2 == c && *t2 == t) {
                    Some(e) => e.2 += p,
                    None => merged.push((c, t, p)),
                }
            }
            delta[s] = Some(merged);
        }
        let delta = delta
            .into_iter()
            .enumerate()
            .map(|(s, d)| d.ok_or(ValidationError::NoDistribution { state: s }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ok = StateSet::empty(states);
        for &s in safe {
            ok.insert(state(s)?);
        }
        Ok(Self {
            delta,
            initial: state(initial)?,
            lambda,
            safe: ok,
        })
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
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

    pub fn outcomes(&self, s: usize) -> &[Outcome] {
        &self.delta[s]
    }

    /// The same model with another threshold. Panics if `λ < 0`.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        assert!(lambda >= 0.0, "threshold out of range");
        Self { lambda, ..self.clone() }
    }

    pub fn system(&self) -> AffineSystem {
        let rows = (0..self.state_count())
            .map(|s| {
                if !self.safe.contains(s) {
                    return Row::Exit;
                }
                let mut terms: Vec<(usize, f64)> = Vec::new();
                let mut constant = 0.0;
                for &(c, t, p) in &self.delta[s] {
                    constant += f64::from(c) * p;
                    match terms.iter_mut().find(|(u, _)| *u == t) {
                        Some(e) => e.1 += p,
                        None => terms.push((t, p)),
                    }
                }
                Row::Choices(alloc::vec![AffineChoice { constant, terms }])
            })
            .collect();
        AffineSystem {
            top: f64::INFINITY,
            exit_value: 0.0,
            rows,
            initial: self.initial,
            threshold: self.lambda,
        }
    }

    /// `F′` on plain frames.
    pub fn reward_bellman(&self, d: &[f64]) -> Vec<f64> {
        self.system().apply_plain(d)
    }
}

/// `(F′, d_{ι,λ})` over `[0,∞]^S`.
pub fn problem(system: &AffineSystem) -> Problem<EpsLattice, impl Fn(&EpsFrame) -> EpsFrame + '_> {
    Problem::new(system.lattice(), move |x: &EpsFrame| system.apply(x), system.bound())
}

/// Decide uses uniform objective weights and caps infinite box bounds.
pub fn mrm_heuristics(system: &AffineSystem) -> QuantHeuristics<'_> {
    QuantHeuristics {
        system,
        weights: DecideWeights::Uniform,
    }
}

/// Combined PDR for `E[reward until leaving α] ≤? λ`.
pub fn pdr_mrm(
    model: &MrmModel,
    options: &RunOptions,
    trace: Option<&mut dyn TraceSink>,
) -> Result<PdrAnswer<EpsFrame>, EngineError> {
    let system = model.system();
    let problem = problem(&system);
    let mut solver = Solver::new(&problem).options(options.clone());
    if let Some(trace) = trace {
        solver = solver.trace(trace);
    }
    solver.run_combined(&mut mrm_heuristics(&system))
}
