//! Direction cones over output space: budget-reducing directions, the
//! feature-improving cone and the reachable cone of an input vector.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::linsys::{
    decide_feasible, project_with, simplex, FeasibilityResult, LinearSystem, MotzkinCertificate,
    ProjectOptions, StrictRelation, WeakRelation,
};
use crate::model::{Instance, SufficientStatistic};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Provenance {
    BudgetReducing(SufficientStatistic),
    FeatureCone,
    ReachableCone(SufficientStatistic),
    Intersection,
}

/// A set of directions `d ∈ ℚ^M` described by a homogeneous system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionSet {
    pub system: LinearSystem,
    pub provenance: Provenance,
}

impl DirectionSet {
    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn contains(&self, d: &[Rational]) -> bool {
        self.system.contains(d)
    }
}

fn unit(m: usize, i: usize) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); m];
    e[i] = Rational::one();
    e
}

/// `{C_V d ≤ 0, d_j ≥ 0 for j ∉ S, 1ᵀd < 0}`.
pub fn budget_reducing_directions(stat: &SufficientStatistic, instance: &Instance) -> DirectionSet {
    let m = instance.m();
    let mut s = LinearSystem::new(m);
    for &l in &stat.binding {
        s.push_weak(instance.c()[l].clone(), WeakRelation::Le);
    }
    for j in stat.off_support(m) {
        s.push_weak(unit(m, j), WeakRelation::Ge);
    }
    s.push_strict(vec![Rational::one(); m], StrictRelation::Lt);
    DirectionSet {
        system: s,
        provenance: Provenance::BudgetReducing(stat.clone()),
    }
}

/// `{αd ≥ 0}`.
pub fn feature_cone(alpha: &[Vec<Rational>]) -> DirectionSet {
    let m = alpha.first().map_or(0, Vec::len);
    let mut s = LinearSystem::new(m);
    for row in alpha {
        s.push_weak(row.clone(), WeakRelation::Ge);
    }
    DirectionSet {
        system: s,
        provenance: Provenance::FeatureCone,
    }
}

/// The system in `(d, v)` whose projection onto `d` is the reachable cone:
/// `v ≥ 0` and `d + v ∈ B_{S,V}`.
pub fn reachable_lift(stat: &SufficientStatistic, instance: &Instance) -> LinearSystem {
    let m = instance.m();
    let b = budget_reducing_directions(stat, instance).system;
    let doubled = |row: &[Rational]| -> Vec<Rational> {
        let mut r = row.to_vec();
        r.extend_from_slice(row);
        r
    };
    let mut s = LinearSystem::new(2 * m);
    for i in 0..m {
        s.push_weak(unit(2 * m, m + i), WeakRelation::Ge);
    }
    for r in b.weak_rows() {
        s.push_weak(doubled(&r.coeffs), r.relation);
    }
    for r in b.strict_rows() {
        s.push_strict(doubled(&r.coeffs), r.relation);
    }
    s
}

/// `{d : ∃ v ≥ 0, d + v ∈ B_{S,V}}`, materialized by eliminating `v`.
pub fn reachable_cone(stat: &SufficientStatistic, instance: &Instance) -> DirectionSet {
    let m = instance.m();
    let lift = reachable_lift(stat, instance);
    let eliminate: Vec<usize> = (m..2 * m).collect();
    let system = project_with(
        &lift,
        &eliminate,
        ProjectOptions {
            redundancy_threshold: 0,
        },
    );
    DirectionSet {
        system,
        provenance: Provenance::ReachableCone(stat.clone()),
    }
}

/// Membership in the reachable cone decided on the unprojected system.
pub fn reachable_contains(stat: &SufficientStatistic, instance: &Instance, d: &[Rational]) -> bool {
    let m = instance.m();
    let lift = reachable_lift(stat, instance);
    // Fix d by homogenizing: variables (v, s) with s > 0 standing for (v/s, d).
    let mut s = LinearSystem::new(m + 1);
    let fold = |row: &[Rational]| -> Vec<Rational> {
        let mut r = row[m..].to_vec();
        r.push(rational::dot(&row[..m], d));
        r
    };
    for r in lift.weak_rows() {
        s.push_weak(fold(&r.coeffs), r.relation);
    }
    for r in lift.strict_rows() {
        s.push_strict(fold(&r.coeffs), r.relation);
    }
    s.push_strict(unit(m + 1, m), StrictRelation::Gt);
    decide_feasible(&s).is_feasible()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Intersection {
    Empty(MotzkinCertificate),
    Nonempty(Vec<Rational>),
}

impl Intersection {
    pub fn is_empty(&self) -> bool {
        matches!(self, Intersection::Empty(_))
    }
}

/// Decides whether two direction sets meet. A nonempty answer carries a
/// canonical member, rescaled so `1ᵀd = -1` whenever its sum is negative.
/// An empty answer carries the certificate for the rows of `a` followed by
/// the rows of `b`.
pub fn intersect_empty(a: &DirectionSet, b: &DirectionSet) -> Intersection {
    let system = a.system.and(&b.system);
    match decide_feasible(&system) {
        FeasibilityResult::Certificate(c) => Intersection::Empty(c),
        FeasibilityResult::Witness(w) => {
            let d = canonical_member(&system).unwrap_or(w);
            Intersection::Nonempty(rational::normalize_budget(&d).unwrap_or(d))
        }
    }
}

/// A reproducible member of a feasible system: maximize the total strict
/// slack over the closure intersected with the box `[-1, 1]^n`. Returns
/// `None` if that point misses some strict row.
pub(crate) fn canonical_member(system: &LinearSystem) -> Option<Vec<Rational>> {
    use simplex::{maximize, Constraint, Outcome, Sense};
    let n = system.dim();
    let mut cons = Vec::new();
    for r in system.weak_rows() {
        let sense = if r.relation == WeakRelation::Eq {
            Sense::Eq
        } else {
            Sense::Le
        };
        cons.push(Constraint::new(r.oriented(), sense, Rational::zero()));
    }
    let mut objective = vec![Rational::zero(); n];
    for r in system.strict_rows() {
        let o = r.oriented();
        for (t, v) in objective.iter_mut().zip(&o) {
            *t -= v;
        }
        cons.push(Constraint::new(o, Sense::Le, Rational::zero()));
    }
    for i in 0..n {
        cons.push(Constraint::new(unit(n, i), Sense::Le, Rational::one()));
        cons.push(Constraint::new(unit(n, i), Sense::Ge, -Rational::one()));
    }
    match maximize(&objective, &cons, &vec![false; n]) {
        Outcome::Optimal { point, value } if value.is_positive() || system.strict_rows().is_empty() => {
            system.contains(&point).then_some(point)
        }
        _ => None,
    }
}
