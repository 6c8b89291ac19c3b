//! Two-phase tableau simplex over an exact field, with Bland's rule.
//!
//! Problems are in standard form: maximize `c·x` subject to `A x = b`,
//! `x ≥ 0`. Bland's rule (smallest improving column enters, smallest
//! basic index leaves on ratio ties) rules out cycling, so every call
//! terminates. Optimal points are basic, hence supported on linearly
//! independent columns of `A`.

use super::scalar::Field;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution<F> {
    pub x: Vec<F>,
    pub objective: F,
    /// Basic column indices (one per surviving constraint row).
    pub basis: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome<F> {
    Optimal(LpSolution<F>),
    Infeasible,
    Unbounded,
}

impl<F> LpOutcome<F> {
    pub fn optimal(self) -> Option<LpSolution<F>> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau<F> {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<F>>,
    /// Reduced costs `c_j - c_B B^{-1} A_j`; last entry is `-objective`.
    costs: Vec<F>,
    basis: Vec<usize>,
}

impl<F: Field> Tableau<F> {
    fn width(&self) -> usize {
        self.costs.len() - 1
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let inv = F::one() / self.rows[r][e].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
        if !self.costs[e].is_zero() {
            let f = self.costs[e].clone();
            for (x, p) in self.costs.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
        self.basis[r] = e;
    }

    fn set_costs(&mut self, c: &[F]) {
        let w = self.width();
        let mut costs: Vec<F> = c.to_vec();
        costs.resize(w, F::zero());
        costs.push(F::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = costs[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (x, a) in costs.iter_mut().zip(row) {
                *x = x.clone() - cb.clone() * a.clone();
            }
        }
        self.costs = costs;
    }

    /// Runs Bland-rule pivots with entering columns restricted to `< limit`.
    /// Returns `false` on unboundedness.
    fn optimize(&mut self, limit: usize) -> bool {
        let rhs = self.width();
        loop {
            let Some(e) = (0..limit).find(|&j| self.costs[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[e].clone();
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, e),
                None => return false,
            }
        }
    }
}

/// Maximize `c·x` subject to `a x = b`, `x ≥ 0`.
pub fn maximize<F: Field>(a: &[Vec<F>], b: &[F], c: &[F]) -> LpOutcome<F> {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "rhs length must match the number of rows");
    assert!(a.iter().all(|r| r.len() == n), "constraint rows must have one entry per variable");

    // Phase one: artificial identity basis on rows with nonnegative rhs.
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut r: Vec<F> = row
            .iter()
            .map(|x| if flip { -x.clone() } else { x.clone() })
            .collect();
        r.extend((0..m).map(|k| if k == i { F::one() } else { F::zero() }));
        r.push(if flip { -bi.clone() } else { bi.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        costs: Vec::new(),
        basis: (n..n + m).collect(),
    };
    t.costs = vec![F::zero(); n + m + 1];
    let mut phase_one = vec![F::zero(); n];
    phase_one.extend((0..m).map(|_| -F::one()));
    t.set_costs(&phase_one);
    let bounded = t.optimize(n + m);
    debug_assert!(bounded, "phase one is bounded by construction");
    if t.costs[n + m].is_positive() {
        // -objective > 0 means some artificial stays positive.
        return LpOutcome::Infeasible;
    }

    // Drive artificials out of the basis; rows where that is impossible
    // are redundant and are dropped.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    for row in t.rows.iter_mut() {
        let rhs = row[n + m].clone();
        row.truncate(n);
        row.push(rhs);
    }
    t.costs = vec![F::zero(); n + 1];
    t.set_costs(c);
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![F::zero(); n];
    for (row, &bcol) in t.rows.iter().zip(&t.basis) {
        x[bcol] = row[n].clone();
    }
    let objective = -t.costs[n].clone();
    LpOutcome::Optimal(LpSolution {
        x,
        objective,
        basis: t.basis,
    })
}

/// A basic feasible solution of `a x = b`, `x ≥ 0`.
pub fn feasible_point<F: Field>(a: &[Vec<F>], b: &[F], nvars: usize) -> Option<LpSolution<F>> {
    maximize(a, b, &vec![F::zero(); nvars]).optimal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::scalar::{int, qvec, ratio, Rational};
    use num_rational::Ratio;

    #[test]
    fn small_max_problem() {
        // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![qvec(&[1, 2, 1, 0]), qvec(&[3, 1, 0, 1])];
        let b = qvec(&[4, 6]);
        let c = qvec(&[1, 1, 0, 0]);
        let sol = maximize(&a, &b, &c).optimal().unwrap();
        assert_eq!(sol.objective, ratio(14, 5));
        assert_eq!(sol.x[0], ratio(8, 5));
        assert_eq!(sol.x[1], ratio(6, 5));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![qvec(&[1, 1])];
        assert_eq!(maximize(&a, &qvec(&[-1]), &qvec(&[0, 0])), LpOutcome::<Rational>::Infeasible);
        let a = vec![qvec(&[1, -1])];
        assert_eq!(maximize(&a, &qvec(&[0]), &qvec(&[1, 0])), LpOutcome::<Rational>::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = vec![qvec(&[1, 1]), qvec(&[2, 2])];
        let sol = maximize(&a, &qvec(&[1, 2]), &qvec(&[1, 0])).optimal().unwrap();
        assert_eq!(sol.x, vec![int(1), int(0)]);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling LP, rewritten in equality form.
        let a = vec![
            vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9), int(1), int(0), int(0)],
            vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3), int(0), int(1), int(0)],
            vec![int(0), int(0), int(1), int(0), int(0), int(0), int(1)],
        ];
        let b = qvec(&[0, 0, 1]);
        let c = vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6), int(0), int(0), int(0)];
        let sol = maximize(&a, &b, &c).optimal().unwrap();
        assert_eq!(sol.objective, ratio(1, 20));
    }

    #[test]
    fn works_over_fixed_width_ratios() {
        let a = vec![vec![Ratio::<i64>::from_integer(1), Ratio::from_integer(1)]];
        let sol = maximize(&a, &[Ratio::new(3, 2)], &[Ratio::from_integer(2), Ratio::from_integer(1)])
            .optimal()
            .unwrap();
        assert_eq!(sol.objective, Ratio::from_integer(3));
    }
}
