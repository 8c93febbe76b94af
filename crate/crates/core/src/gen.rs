//! Random model generators for differential testing and benchmarking.

use alloc::vec::Vec;

use rand::Rng;

use crate::kripke::KripkeStructure;
use crate::mdp::MdpModel;
use crate::mrm::MrmModel;

/// `n` states, each ordered pair an edge with probability `density`, each
/// state initial with probability `1/n` and safe with probability `0.8`.
pub fn random_kripke<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> KripkeStructure {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_bool(density) {
                edges.push((a, b));
            }
        }
    }
    let init: Vec<usize> = (0..n).filter(|_| rng.random_range(0..n) == 0).collect();
    let safe: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.8)).collect();
    KripkeStructure::new(n, &edges, &init, &safe).expect("indices in range")
}

/// A distribution over `1..=3` targets with weights in `1..=9`.
fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<(usize, f64)> {
    let k = rng.random_range(1..=3.min(n));
    let picks: Vec<(usize, u32)> = (0..k)
        .map(|_| (rng.random_range(0..n), rng.random_range(1..=9)))
        .collect();
    let total: u32 = picks.iter().map(|p| p.1).sum();
    picks
        .into_iter()
        .map(|(t, w)| (t, f64::from(w) / f64::from(total)))
        .collect()
}

/// `n` states, `actions` actions (each available with probability `0.7`,
/// at least one per state), initial state `0`, safe states drawn with
/// probability `0.7`.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, n: usize, actions: usize, lambda: f64) -> MdpModel {
    let mut trans = Vec::new();
    for s in 0..n {
        let forced = rng.random_range(0..actions);
        for a in 0..actions {
            if a == forced || rng.random_bool(0.7) {
                trans.push((s, a, random_distribution(rng, n)));
            }
        }
    }
    let safe: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
    MdpModel::new(n, actions, 0, lambda, &safe, &trans).expect("generated model is valid")
}

/// `n` states with rewards in `0..=3`, initial state `0`, safe states drawn
/// with probability `0.7`.
pub fn random_mrm<R: Rng + ?Sized>(rng: &mut R, n: usize, lambda: f64) -> MrmModel {
    let trans: Vec<_> = (0..n)
        .map(|s| {
            let outcomes = random_distribution(rng, n)
                .into_iter()
                .map(|(t, p)| (rng.random_range(0..=3), t, p))
                .collect();
            (s, outcomes)
        })
        .collect();
    let safe: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
    MrmModel::new(n, 0, lambda, &safe, &trans).expect("generated model is valid")
}
