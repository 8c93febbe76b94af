//! Brute-force reference answers: breadth-first reachability, value
//! iteration for MDPs and MRMs, and the initial chain `⊥, F⊥, F²⊥, …`.
//!
//! Everything here works directly on the model data and never touches the
//! PDR machinery, so it can be used to cross-check it.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::kripke::KripkeStructure;
use crate::lattice::{CompleteLattice, Transformer};
use crate::mdp::MdpModel;
use crate::mrm::MrmModel;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_CAP: u64 = 1_000_000;
/// Iterates above this are taken as divergence of the expected reward.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Holds(bool),
    Diverged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub verdict: OracleVerdict,
    /// Probability or expected reward at the initial state.
    pub value: Option<f64>,
    pub iterations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("value iteration did not converge within {iterations} iterations (last delta {delta})")]
    NoConvergence { iterations: u64, delta: f64 },
}

/// Whether every state reachable from `ι` is safe. `iterations` counts BFS
/// layers.
pub fn bfs_safe(model: &KripkeStructure) -> OracleResult {
    let n = model.state_count();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<(usize, u64)> = VecDeque::new();
    for s in model.initial().iter() {
        seen[s] = true;
        queue.push_back((s, 0));
    }
    let mut layers = 0;
    let mut safe = true;
    while let Some((s, depth)) = queue.pop_front() {
        layers = layers.max(depth + 1);
        if !model.safe().contains(s) {
            safe = false;
        }
        for &t in model.successors(s) {
            if !seen[t] {
                seen[t] = true;
                queue.push_back((t, depth + 1));
            }
        }
    }
    OracleResult {
        verdict: OracleVerdict::Holds(safe),
        value: None,
        iterations: layers,
    }
}

/// Maximum probability of leaving `α` from `s_ι`, by Kleene iteration from
/// `0`. The verdict is `value ≤ λ`.
pub fn vi_max_reach(model: &MdpModel, tol: f64, cap: u64) -> Result<OracleResult, OracleError> {
    let n = model.state_count();
    let step = |d: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|s| {
                if !model.safe().contains(s) {
                    return 1.0;
                }
                (0..model.action_count())
                    .filter_map(|a| model.distribution(s, a))
                    .map(|dist| dist.iter().map(|&(t, p)| p * d[t]).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    };
    let mut d = vec![0.0; n];
    for i in 1..=cap {
        let next = step(&d);
        debug_assert!(next.iter().zip(&d).all(|(a, b)| a >= &(b - 1e-15)), "iteration must not decrease");
        let delta = next.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        d = next;
        if delta < tol {
            let value = d[model.initial()];
            return Ok(OracleResult {
                verdict: OracleVerdict::Holds(value <= model.lambda()),
                value: Some(value),
                iterations: i,
            });
        }
    }
    let delta = step(&d).iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Err(OracleError::NoConvergence { iterations: cap, delta })
}

/// States whose expected reward is infinite: those that can reach, inside
/// `α`, a bottom strongly connected component that never leaves `α` and
/// contains a positive-reward transition.
fn infinite_reward_states(model: &MrmModel) -> Vec<bool> {
    let n = model.state_count();
    let safe = |s: usize| model.safe().contains(s);
    let succ = |s: usize| -> Vec<usize> {
        if !safe(s) {
            return Vec::new();
        }
        model.outcomes(s).iter().filter(|o| o.2 > 0.0).map(|o| o.1).collect()
    };
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                for t in succ(u) {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            seen
        })
        .collect();
    let bottom = |s: usize| safe(s) && (0..n).all(|t| !reach[s][t] || (safe(t) && reach[t][s]));
    let rewarding: Vec<bool> = (0..n)
        .map(|s| bottom(s) && model.outcomes(s).iter().any(|&(c, _, p)| c > 0 && p > 0.0))
        .collect();
    (0..n)
        .map(|s| (0..n).any(|t| reach[s][t] && rewarding[t]))
        .collect()
}

/// Expected reward accumulated from `s_ι` before leaving `α`, by Kleene
/// iteration from `0`. `Diverged` when it is infinite.
pub fn vi_expected_reward(model: &MrmModel, tol: f64, cap: u64) -> Result<OracleResult, OracleError> {
    let n = model.state_count();
    let infinite = infinite_reward_states(model);
    let diverged = |iterations| OracleResult {
        verdict: OracleVerdict::Diverged,
        value: Some(f64::INFINITY),
        iterations,
    };
    if infinite[model.initial()] {
        return Ok(diverged(0));
    }
    let step = |d: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|s| {
                if !model.safe().contains(s) || infinite[s] {
                    return 0.0;
                }
                model
                    .outcomes(s)
                    .iter()
                    .map(|&(c, t, p)| p * (f64::from(c) + d[t]))
                    .sum()
            })
            .collect()
    };
    let mut d = vec![0.0; n];
    for i in 1..=cap {
        let next = step(&d);
        let delta = next.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        d = next;
        if d.iter().any(|&v| v > DIVERGENCE_THRESHOLD) {
            return Ok(diverged(i));
        }
        if delta < tol {
            let value = d[model.initial()];
            return Ok(OracleResult {
                verdict: OracleVerdict::Holds(value <= model.lambda()),
                value: Some(value),
                iterations: i,
            });
        }
    }
    let delta = step(&d).iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Err(OracleError::NoConvergence { iterations: cap, delta })
}

/// `(⊥, F⊥, …, F^{n−1}⊥)`.
pub fn initial_chain<L, F>(lattice: &L, f: &F, n: usize) -> Vec<L::Elem>
where
    L: CompleteLattice,
    F: Transformer<L::Elem>,
{
    let mut chain = Vec::with_capacity(n);
    let mut x = lattice.bot();
    for _ in 0..n {
        let next = f.apply(&x);
        chain.push(x);
        x = next;
    }
    chain
}
