use num_traits::{One, Signed, Zero};

use super::{Rat, RatMatrix};
use crate::error::{Error, Result};

/// Result of an exact linear program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, witness: Vec<Rat> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x /= &p;
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (x, y) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost·x` over the columns in `0..active`, using Bland's rule.
    /// Returns false when the objective is unbounded.
    fn optimize(&mut self, cost: &[Rat], active: usize) -> bool {
        loop {
            let entering = (0..active).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        reduced -= &cost[b] * &row[j];
                    }
                }
                reduced.is_positive()
            });
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, c);
        }
    }

    fn objective(&self, cost: &[Rat]) -> Rat {
        self.basis
            .iter()
            .zip(&self.rhs)
            .fold(Rat::zero(), |acc, (&b, v)| acc + &cost[b] * v)
    }
}

/// Exact two-phase simplex: maximize `objective·λ` subject to
/// `eq_lhs·λ = eq_rhs` and `λ ≥ 0`.
pub fn simplex_max(objective: &[Rat], eq_lhs: &RatMatrix, eq_rhs: &[Rat]) -> Result<LpOutcome> {
    let m = eq_lhs.rows();
    let nv = eq_lhs.cols();
    if objective.len() != nv || eq_rhs.len() != m {
        return Err(Error::Dimension(format!(
            "LP with {m}x{nv} constraints, objective of length {} and right-hand side of length {}",
            objective.len(),
            eq_rhs.len()
        )));
    }

    // Phase one: artificial variables nv..nv+m form the starting basis.
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: (nv..nv + m).collect(),
    };
    for i in 0..m {
        let flip = eq_rhs[i].is_negative();
        let mut row: Vec<Rat> = eq_lhs
            .row(i)
            .iter()
            .map(|x| if flip { -x.clone() } else { x.clone() })
            .collect();
        row.extend((0..m).map(|k| if k == i { Rat::one() } else { Rat::zero() }));
        tab.rows.push(row);
        tab.rhs.push(if flip { -eq_rhs[i].clone() } else { eq_rhs[i].clone() });
    }
    let phase_one_cost: Vec<Rat> = (0..nv + m)
        .map(|j| if j < nv { Rat::zero() } else { -Rat::one() })
        .collect();
    let bounded = tab.optimize(&phase_one_cost, nv + m);
    debug_assert!(bounded, "phase one objective is bounded above by zero");
    if !tab.objective(&phase_one_cost).is_zero() {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive remaining artificial variables (all at level zero) out of the basis.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= nv {
            match (0..nv).find(|&j| !tab.rows[r][j].is_zero()) {
                Some(c) => tab.pivot(r, c),
                None => {
                    // Redundant constraint.
                    tab.rows.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost = objective.to_vec();
    cost.extend((0..m).map(|_| Rat::zero()));
    if !tab.optimize(&cost, nv) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut witness = vec![Rat::zero(); nv];
    for (&b, v) in tab.basis.iter().zip(&tab.rhs) {
        witness[b] = v.clone();
    }
    Ok(LpOutcome::Optimal {
        value: tab.objective(&cost),
        witness,
    })
}
