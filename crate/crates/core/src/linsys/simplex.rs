//! Dense two-phase primal simplex over exact rationals with Bland's rule.
//!
//! Solves `max cᵀx  s.t.  Ax = b, x ≥ 0`. Everything above this module
//! (free variables, inequality rows) is reduced to that form by
//! [`maximize`].

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone)]
pub(crate) enum Standard {
    Optimal { x: Vec<Rational>, value: Rational },
    Unbounded { x: Vec<Rational>, ray: Vec<Rational> },
    Infeasible,
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries, the last one being the rhs.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs `z_j - c_j`; last entry is the objective value.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on columns accepted by `allowed`. Returns the
    /// entering column that proved unboundedness, if any.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Option<usize> {
        let rhs = self.ncols;
        loop {
            // Bland: lowest-index improving column.
            // None: no improving column, the basis is optimal.
            let e = (0..self.ncols).find(|&j| allowed(j) && self.obj[j].is_negative())?;
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[e].is_positive() {
                    let ratio = &row[rhs] / &row[e];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return Some(e),
                Some((r, _)) => self.pivot(r, e),
            }
        }
    }

    fn primal(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rows[i][self.ncols].clone();
            }
        }
        x
    }
}

pub(crate) fn solve_standard(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Standard {
    let n = c.len();
    let m = a.len();
    let ncols = n + m;

    let mut rows = Vec::with_capacity(m);
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        debug_assert_eq!(ai.len(), n);
        let flip = bi.is_negative();
        let mut row = Vec::with_capacity(ncols + 1);
        for v in ai {
            row.push(if flip { -v } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            });
        }
        row.push(if flip { -bi } else { bi.clone() });
        rows.push(row);
    }

    // Phase 1: maximize -Σ artificials.
    let mut obj = vec![Rational::zero(); ncols + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[ncols] -= &row[ncols];
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        ncols,
    };
    // Phase 1 is bounded above by zero, so no unbounded exit is possible.
    let _ = t.run(|_| true);
    if t.obj[ncols].is_negative() {
        return Standard::Infeasible;
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => {
                    t.pivot(r, j);
                    r += 1;
                }
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }

    // Phase 2 objective row.
    let mut obj = vec![Rational::zero(); ncols + 1];
    for (j, cj) in c.iter().enumerate() {
        obj[j] = -cj;
    }
    for (row, &bcol) in t.rows.iter().zip(&t.basis) {
        if bcol < n && !c[bcol].is_zero() {
            let cb = &c[bcol];
            for j in 0..n {
                if !row[j].is_zero() {
                    obj[j] += cb * &row[j];
                }
            }
            obj[ncols] += cb * &row[ncols];
        }
    }
    // Basic columns must carry zero reduced cost already; enforce exactly.
    t.obj = obj;

    match t.run(|j| j < n) {
        None => {
            let x = t.primal(n);
            let value = t.obj[ncols].clone();
            Standard::Optimal { x, value }
        }
        Some(e) => {
            let x = t.primal(n);
            let mut ray = vec![Rational::zero(); n];
            ray[e] = Rational::from_integer(1.into());
            for (i, &bcol) in t.basis.iter().enumerate() {
                if bcol < n {
                    ray[bcol] = -&t.rows[i][e];
                }
            }
            Standard::Unbounded { x, ray }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, sense: Sense, rhs: Rational) -> Self {
        Constraint { coeffs, sense, rhs }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Outcome {
    Optimal { point: Vec<Rational>, value: Rational },
    Unbounded { point: Vec<Rational>, ray: Vec<Rational> },
    Infeasible,
}

/// `max objective·x` over general rows; `nonneg[i]` marks sign-constrained
/// variables, the rest are free.
pub(crate) fn maximize(
    objective: &[Rational],
    constraints: &[Constraint],
    nonneg: &[bool],
) -> Outcome {
    let nv = objective.len();
    debug_assert_eq!(nonneg.len(), nv);

    // column layout: for each variable its positive column, then a negative
    // column for free variables, then one slack per inequality row.
    let mut pos_col = Vec::with_capacity(nv);
    let mut neg_col = Vec::with_capacity(nv);
    let mut ncols = 0;
    for &nn in nonneg {
        pos_col.push(ncols);
        ncols += 1;
        if nn {
            neg_col.push(None);
        } else {
            neg_col.push(Some(ncols));
            ncols += 1;
        }
    }
    let slack_start = ncols;
    ncols += constraints
        .iter()
        .filter(|c| c.sense != Sense::Eq)
        .count();

    let mut a = Vec::with_capacity(constraints.len());
    let mut b = Vec::with_capacity(constraints.len());
    let mut slack = slack_start;
    for con in constraints {
        debug_assert_eq!(con.coeffs.len(), nv);
        let mut row = vec![Rational::zero(); ncols];
        for (i, v) in con.coeffs.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            row[pos_col[i]] = v.clone();
            if let Some(nc) = neg_col[i] {
                row[nc] = -v;
            }
        }
        match con.sense {
            Sense::Le => {
                row[slack] = Rational::from_integer(1.into());
                slack += 1;
            }
            Sense::Ge => {
                row[slack] = Rational::from_integer((-1).into());
                slack += 1;
            }
            Sense::Eq => {}
        }
        a.push(row);
        b.push(con.rhs.clone());
    }

    let mut c = vec![Rational::zero(); ncols];
    for (i, v) in objective.iter().enumerate() {
        c[pos_col[i]] = v.clone();
        if let Some(nc) = neg_col[i] {
            c[nc] = -v;
        }
    }

    let recover = |x: &[Rational]| -> Vec<Rational> {
        (0..nv)
            .map(|i| match neg_col[i] {
                Some(nc) => &x[pos_col[i]] - &x[nc],
                None => x[pos_col[i]].clone(),
            })
            .collect()
    };

    match solve_standard(&c, &a, &b) {
        Standard::Optimal { x, value } => Outcome::Optimal {
            point: recover(&x),
            value,
        },
        Standard::Unbounded { x, ray } => Outcome::Unbounded {
            point: recover(&x),
            ray: recover(&ray),
        },
        Standard::Infeasible => Outcome::Infeasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ints, ratio};

    #[test]
    fn small_bounded_lp() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0 -> (8/5, 6/5), 14/5
        let cons = vec![
            Constraint::new(ints(&[1, 2]), Sense::Le, int(4)),
            Constraint::new(ints(&[3, 1]), Sense::Le, int(6)),
        ];
        match maximize(&ints(&[1, 1]), &cons, &[true, true]) {
            Outcome::Optimal { point, value } => {
                assert_eq!(value, ratio(14, 5));
                assert_eq!(point, vec![ratio(8, 5), ratio(6, 5)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        let cons = vec![
            Constraint::new(ints(&[1]), Sense::Ge, int(2)),
            Constraint::new(ints(&[1]), Sense::Le, int(1)),
        ];
        assert!(matches!(
            maximize(&ints(&[0]), &cons, &[false]),
            Outcome::Infeasible
        ));
    }

    #[test]
    fn unbounded_ray_is_improving_and_feasible() {
        // max x - y, x - 2y <= 1, free variables
        let cons = vec![Constraint::new(ints(&[1, -2]), Sense::Le, int(1))];
        match maximize(&ints(&[1, -1]), &cons, &[false, false]) {
            Outcome::Unbounded { ray, .. } => {
                let gain = &ray[0] - &ray[1];
                assert!(gain > int(0));
                assert!(&ray[0] - &(int(2) * &ray[1]) <= int(0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let cons = vec![
            Constraint::new(ints(&[1, 1]), Sense::Eq, int(2)),
            Constraint::new(ints(&[2, 2]), Sense::Eq, int(4)),
        ];
        match maximize(&ints(&[1, 0]), &cons, &[true, true]) {
            Outcome::Optimal { value, .. } => assert_eq!(value, int(2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example (Beale) terminates under Bland's rule
        let cons = vec![
            Constraint::new(
                vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)],
                Sense::Le,
                int(0),
            ),
            Constraint::new(
                vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)],
                Sense::Le,
                int(0),
            ),
            Constraint::new(ints(&[0, 0, 1, 0]), Sense::Le, int(1)),
        ];
        let obj = vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)];
        match maximize(&obj, &cons, &[true; 4]) {
            Outcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
