//! Lattice-theoretic property-directed reachability.
//!
//! This crate decides problems of the form `μF ≤? α`: is the least fixed point
//! of a monotone transformer `F` on a complete lattice below a safety bound
//! `α`? The generic engine ([`engine`]) searches simultaneously for a positive
//! certificate (an ascending chain of frames that collapses into a prefixed
//! point below `α`) and a negative one (a chain of obligations rooted at `⊥`
//! that escapes `α`).
//!
//! Three instance families ship with the engine:
//!
//! * [`kripke`]: explicit-state safety of Kripke structures, forward and
//!   inverse-backward (classical IC3 and reverse PDR respectively).
//! * [`mdp`]: maximum reachability probabilities of Markov decision processes.
//! * [`mrm`]: expected accumulated rewards of Markov reward models.
//!
//! The [`oracles`] module contains engine-independent brute-force references
//! used for differential testing, and [`gen`] random model generators.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod engine;
pub mod gen;
pub mod eps;
pub mod kripke;
pub mod lattice;
pub mod mdp;
pub mod mrm;
pub mod oracles;
pub mod quant;
pub mod simplex;

pub use engine::{
    EngineError, Heuristics, InductionProposer, PdrAnswer, PdrConfig, Rule, RunOptions, RunStats,
    Schedule, Solver, TraceEvent, TraceSink, Verdict,
};
pub use lattice::{CompleteLattice, KleeneSequence, KtSequence, Problem, Transformer};
