//! A small dense two-phase simplex solver.
//!
//! Solves `minimize c·x subject to A x ≥ b, 0 ≤ x ≤ u` where an upper bound
//! may be `f64::INFINITY`. Pivoting follows Bland's rule, so the method
//! cannot cycle. Intended for programs with a handful of variables.

use alloc::vec;
use alloc::vec::Vec;

/// Pivot and feasibility tolerance.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub costs: Vec<f64>,
    /// Rows `(a, b)` meaning `a·x ≥ b`.
    pub constraints: Vec<(Vec<f64>, f64)>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.a[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs of `cost` for the current basis.
    fn reduced(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.a[r][j];
                }
            }
        }
        d
    }

    /// Minimizes `cost` over columns `j` with `allowed[j]`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<(), LpError> {
        loop {
            let d = self.reduced(cost);
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && d[j] < -TOLERANCE) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize)> = None;
            for r in 0..self.a.len() {
                let v = self.a[r][c];
                if v > TOLERANCE {
                    let ratio = self.rhs(r) / v;
                    let better = match best {
                        None => true,
                        Some((q, br)) => {
                            ratio < q - TOLERANCE
                                || (ratio <= q + TOLERANCE && self.basis[r] < self.basis[br])
                        }
                    };
                    if better {
                        best = Some((ratio, r));
                    }
                }
            }
            let Some((_, r)) = best else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, c);
        }
    }
}

/// Solves `lp` to optimality within [`TOLERANCE`].
pub fn simplex_min(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.costs.len();
    assert_eq!(lp.upper.len(), n, "one upper bound per variable");
    if lp.upper.iter().any(|&u| u < 0.0) {
        return Err(LpError::Infeasible);
    }
    let bounded: Vec<usize> = (0..n).filter(|&j| lp.upper[j].is_finite()).collect();
    let m = lp.constraints.len();
    let needs_artificial: Vec<bool> = lp.constraints.iter().map(|(_, b)| *b > 0.0).collect();
    let artificial_count = needs_artificial.iter().filter(|&&x| x).count();

    // columns: x | surplus per constraint | slack per bounded variable | artificials
    let surplus0 = n;
    let slack0 = surplus0 + m;
    let art0 = slack0 + bounded.len();
    let cols = art0 + artificial_count;
    let rows = m + bounded.len();

    let mut a = vec![vec![0.0; cols + 1]; rows];
    let mut basis = vec![0; rows];
    let mut next_art = art0;
    for (i, (coef, b)) in lp.constraints.iter().enumerate() {
        assert_eq!(coef.len(), n, "one coefficient per variable");
        let row = &mut a[i];
        if needs_artificial[i] {
            row[..n].copy_from_slice(coef);
            row[surplus0 + i] = -1.0;
            row[next_art] = 1.0;
            row[cols] = *b;
            basis[i] = next_art;
            next_art += 1;
        } else {
            for (r, c) in row.iter_mut().zip(coef) {
                *r = -c;
            }
            row[surplus0 + i] = 1.0;
            row[cols] = -b;
            basis[i] = surplus0 + i;
        }
    }
    for (k, &j) in bounded.iter().enumerate() {
        let row = &mut a[m + k];
        row[j] = 1.0;
        row[slack0 + k] = 1.0;
        row[cols] = lp.upper[j];
        basis[m + k] = slack0 + k;
    }
    let mut t = Tableau { a, basis, cols };

    if artificial_count > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(art0) {
            *c = 1.0;
        }
        let all = vec![true; cols];
        t.optimize(&phase1, &all)?;
        let infeasibility: f64 = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art0)
            .map(|(r, _)| t.rhs(r))
            .sum();
        if infeasibility > TOLERANCE {
            return Err(LpError::Infeasible);
        }
        for r in 0..rows {
            if t.basis[r] >= art0 {
                if let Some(c) = (0..art0).find(|&j| t.a[r][j].abs() > TOLERANCE) {
                    t.pivot(r, c);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.costs);
    let allowed: Vec<bool> = (0..cols).map(|j| j < art0).collect();
    t.optimize(&cost, &allowed)?;

    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).max(0.0);
        }
    }
    let objective = x.iter().zip(&lp.costs).map(|(x, c)| x * c).sum();
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn one_variable() {
        let lp = LinearProgram {
            costs: vec![1.0],
            constraints: vec![(vec![1.0], 0.3)],
            upper: vec![1.0],
        };
        let sol = simplex_min(&lp).unwrap();
        assert!(close(sol.x[0], 0.3));
    }

    #[test]
    fn two_variables_picks_cheaper_vertex() {
        let lp = LinearProgram {
            costs: vec![2.0, 1.0],
            constraints: vec![(vec![0.5, 0.5], 0.4)],
            upper: vec![1.0, 1.0],
        };
        let sol = simplex_min(&lp).unwrap();
        assert!(close(sol.x[0], 0.0) && close(sol.x[1], 0.8), "{:?}", sol.x);
        assert!(close(sol.objective, 0.8));
    }

    #[test]
    fn no_constraints_gives_zero() {
        let lp = LinearProgram {
            costs: vec![1.0, 3.0, 0.5],
            constraints: vec![],
            upper: vec![1.0, f64::INFINITY, 2.0],
        };
        assert_eq!(simplex_min(&lp).unwrap().x, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram {
            costs: vec![1.0],
            constraints: vec![(vec![0.5], 0.6)],
            upper: vec![1.0],
        };
        assert_eq!(simplex_min(&lp), Err(LpError::Infeasible));
        let lp = LinearProgram {
            costs: vec![-1.0],
            constraints: vec![],
            upper: vec![f64::INFINITY],
        };
        assert_eq!(simplex_min(&lp), Err(LpError::Unbounded));
    }

    #[test]
    fn upper_bound_binds() {
        // x ≤ 0 forces y to carry the whole constraint
        let lp = LinearProgram {
            costs: vec![2.0, 1.0],
            constraints: vec![(vec![0.5, 0.5], 0.4)],
            upper: vec![0.0, 1.0],
        };
        let sol = simplex_min(&lp).unwrap();
        assert!(close(sol.x[0], 0.0) && close(sol.x[1], 0.8));
    }

    #[test]
    fn degenerate_and_redundant_rows() {
        let lp = LinearProgram {
            costs: vec![1.0, 1.0],
            constraints: vec![
                (vec![1.0, 1.0], 1.0),
                (vec![2.0, 2.0], 2.0),
                (vec![1.0, 0.0], 0.0),
                (vec![0.0, 1.0], -1.0),
            ],
            upper: vec![1.0, 1.0],
        };
        let sol = simplex_min(&lp).unwrap();
        assert!(close(sol.objective, 1.0));
        assert!(sol.x[0] + sol.x[1] >= 1.0 - 1e-9);
    }
}
