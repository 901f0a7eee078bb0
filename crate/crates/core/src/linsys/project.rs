//! Fourier–Motzkin elimination for mixed strict/weak homogeneous systems.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::{decide_feasible, LinearSystem, StrictRelation, WeakRelation};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectOptions {
    /// Rows beyond this count trigger LP-based redundancy removal after each
    /// elimination step. Zero means always.
    pub redundancy_threshold: usize,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions {
            redundancy_threshold: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Eq,
    Le,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Row {
    coeffs: Vec<Rational>,
    kind: Kind,
}

/// Projects out the variables in `eliminate`; the result is over the kept
/// variables in their original order.
pub fn project(system: &LinearSystem, eliminate: &[usize]) -> LinearSystem {
    project_with(system, eliminate, ProjectOptions::default())
}

pub fn project_with(
    system: &LinearSystem,
    eliminate: &[usize],
    options: ProjectOptions,
) -> LinearSystem {
    let n = system.dim();
    let targets: BTreeSet<usize> = eliminate.iter().copied().collect();
    assert!(
        targets.iter().all(|&v| v < n),
        "eliminated variable out of range"
    );
    let kept: Vec<usize> = (0..n).filter(|v| !targets.contains(v)).collect();

    let mut rows = Vec::with_capacity(system.row_count());
    for r in system.weak_rows() {
        let kind = if r.relation == WeakRelation::Eq {
            Kind::Eq
        } else {
            Kind::Le
        };
        rows.push(Row {
            coeffs: r.oriented(),
            kind,
        });
    }
    for r in system.strict_rows() {
        rows.push(Row {
            coeffs: r.oriented(),
            kind: Kind::Lt,
        });
    }

    let mut rows = match simplify(rows) {
        Some(r) => r,
        None => return LinearSystem::empty_set(kept.len()),
    };
    let mut remaining = targets;
    while let Some(v) = pick_variable(&rows, &remaining) {
        remaining.remove(&v);
        rows = match simplify(eliminate_one(rows, v)) {
            Some(r) => r,
            None => return LinearSystem::empty_set(kept.len()),
        };
        if rows.len() > options.redundancy_threshold {
            rows = remove_redundant(rows, n);
        }
    }

    let mut out = LinearSystem::new(kept.len());
    for r in rows {
        let coeffs: Vec<Rational> = kept.iter().map(|&i| r.coeffs[i].clone()).collect();
        match r.kind {
            Kind::Eq => out.push_weak(coeffs, WeakRelation::Eq),
            Kind::Le => out.push_weak(coeffs, WeakRelation::Le),
            Kind::Lt => out.push_strict(coeffs, StrictRelation::Lt),
        }
    }
    out
}

/// Next variable to eliminate: one pinned by an equality if possible,
/// otherwise the one producing the fewest combined rows.
fn pick_variable(rows: &[Row], remaining: &BTreeSet<usize>) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for &v in remaining {
        if rows
            .iter()
            .any(|r| r.kind == Kind::Eq && !r.coeffs[v].is_zero())
        {
            return Some(v);
        }
        let pos = rows.iter().filter(|r| r.coeffs[v].is_positive()).count();
        let neg = rows.iter().filter(|r| r.coeffs[v].is_negative()).count();
        let cost = pos * neg;
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((v, cost));
        }
    }
    best.map(|(v, _)| v)
}

fn eliminate_one(rows: Vec<Row>, v: usize) -> Vec<Row> {
    if let Some(pivot_idx) = rows
        .iter()
        .position(|r| r.kind == Kind::Eq && !r.coeffs[v].is_zero())
    {
        let pivot = rows[pivot_idx].clone();
        let pv = pivot.coeffs[v].clone();
        return rows
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != pivot_idx)
            .map(|(_, mut r)| {
                if !r.coeffs[v].is_zero() {
                    let f = &r.coeffs[v] / &pv;
                    for (c, p) in r.coeffs.iter_mut().zip(&pivot.coeffs) {
                        *c -= &f * p;
                    }
                }
                r
            })
            .collect();
    }

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        if r.coeffs[v].is_positive() {
            pos.push(r);
        } else if r.coeffs[v].is_negative() {
            neg.push(r);
        } else {
            out.push(r);
        }
    }
    for p in &pos {
        for q in &neg {
            let a = -&q.coeffs[v];
            let b = p.coeffs[v].clone();
            let coeffs = p
                .coeffs
                .iter()
                .zip(&q.coeffs)
                .map(|(x, y)| &a * x + &b * y)
                .collect();
            let kind = if p.kind == Kind::Lt || q.kind == Kind::Lt {
                Kind::Lt
            } else {
                Kind::Le
            };
            out.push(Row { coeffs, kind });
        }
    }
    out
}

/// Scales rows to a canonical form, drops trivial rows and duplicates.
/// Returns `None` when a row reads `0 < 0`.
fn simplify(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut out: Vec<Row> = Vec::with_capacity(rows.len());
    for mut r in rows {
        let Some(lead) = r.coeffs.iter().find(|c| !c.is_zero()).cloned() else {
            if r.kind == Kind::Lt {
                return None;
            }
            continue;
        };
        let k = lead.abs().recip();
        if !k.is_one() {
            for c in r.coeffs.iter_mut() {
                *c *= &k;
            }
        }
        if r.kind == Kind::Eq && lead.is_negative() {
            for c in r.coeffs.iter_mut() {
                *c = -&*c;
            }
        }
        if let Some(existing) = out.iter_mut().find(|e| e.coeffs == r.coeffs) {
            // Same left-hand side: keep the tighter relation.
            if (existing.kind, r.kind) == (Kind::Le, Kind::Lt)
                || (existing.kind, r.kind) == (Kind::Le, Kind::Eq)
            {
                existing.kind = r.kind;
                continue;
            }
            if existing.kind == r.kind
                || (existing.kind, r.kind) == (Kind::Lt, Kind::Le)
                || (existing.kind, r.kind) == (Kind::Eq, Kind::Le)
            {
                continue;
            }
        }
        out.push(r);
    }
    Some(out)
}

/// Drops rows implied by the others: a row is redundant when the rest of
/// the system together with its negation is infeasible.
fn remove_redundant(mut rows: Vec<Row>, n: usize) -> Vec<Row> {
    let mut i = 0;
    while i < rows.len() {
        if rows[i].kind == Kind::Eq {
            i += 1;
            continue;
        }
        let mut test = LinearSystem::new(n);
        for (j, r) in rows.iter().enumerate() {
            if j == i {
                continue;
            }
            match r.kind {
                Kind::Eq => test.push_weak(r.coeffs.clone(), WeakRelation::Eq),
                Kind::Le => test.push_weak(r.coeffs.clone(), WeakRelation::Le),
                Kind::Lt => test.push_strict(r.coeffs.clone(), StrictRelation::Lt),
            }
        }
        match rows[i].kind {
            Kind::Le => test.push_strict(rows[i].coeffs.clone(), StrictRelation::Gt),
            Kind::Lt => test.push_weak(rows[i].coeffs.clone(), WeakRelation::Ge),
            Kind::Eq => unreachable!(),
        }
        if decide_feasible(&test).is_feasible() {
            i += 1;
        } else {
            rows.remove(i);
        }
    }
    rows
}
