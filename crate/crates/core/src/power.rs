//! Elicitability expansion: for a fixed feature map, and existentially over
//! feature maps through the power-characterizing condition in its direct
//! (margin) form and its reachable-cone form.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::aggregate::{mechanisms, MechanismReport};
use crate::cones::{
    budget_reducing_directions, canonical_member, reachable_cone, reachable_contains, DirectionSet,
};
use crate::elicit::{decide_elicitable, ElicitError, ElicitabilityVerdict};
use crate::linsys::simplex::{maximize, Constraint, Outcome, Sense};
use crate::linsys::{
    decide_feasible, project_with, FeasibilityResult, LinearSystem, MotzkinCertificate,
    ProjectOptions, StrictRelation, WeakRelation,
};
use crate::model::{
    is_feasible, sufficient_statistic, AggregationOperation, Instance, ModelError,
    SufficientStatistic,
};
use crate::rational::{self, dot, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PowerError {
    #[error("aggregation vectors must be nonzero")]
    ZeroVector,
    #[error("direction has no strictly positive coordinate")]
    NoPositiveCoordinate,
    #[error("direction must have a negative coordinate sum")]
    NotBudgetReducing,
    #[error("constructed feature map failed re-verification: {0}")]
    ClosedLoopFailure(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Elicit(#[from] ElicitError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedAlphaVerdict {
    pub per_input_elicitable: Vec<bool>,
    pub aggregate_elicitable: bool,
    pub expanding: bool,
    pub input_verdicts: Vec<ElicitabilityVerdict>,
    pub aggregate_verdict: ElicitabilityVerdict,
}

fn check_nonzero(op: &AggregationOperation) -> Result<(), PowerError> {
    if op.aggregate().is_zero() || op.inputs().iter().any(|x| x.is_zero()) {
        return Err(PowerError::ZeroVector);
    }
    Ok(())
}

/// Inputs all elicitable and aggregate not, under the instance's own `α`.
pub fn expansion_fixed_alpha(
    op: &AggregationOperation,
    instance: &Instance,
) -> Result<FixedAlphaVerdict, PowerError> {
    check_nonzero(op)?;
    let input_verdicts = op
        .inputs()
        .iter()
        .map(|x| decide_elicitable(x, instance))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregate_verdict = decide_elicitable(op.aggregate(), instance)?;
    let per_input_elicitable: Vec<bool> = input_verdicts
        .iter()
        .map(ElicitabilityVerdict::is_elicitable)
        .collect();
    let aggregate_elicitable = aggregate_verdict.is_elicitable();
    let expanding = per_input_elicitable.iter().all(|&e| e) && !aggregate_elicitable;
    Ok(FixedAlphaVerdict {
        per_input_elicitable,
        aggregate_elicitable,
        expanding,
        input_verdicts,
        aggregate_verdict,
    })
}

/// How the margin condition is met for one input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchWitness {
    /// Coordinate `j` outside the input's support with `-d_j - |1ᵀd| > 0`.
    SupportBranch(usize),
    /// Nonnegative weights on the input's binding rows with a positive
    /// margin.
    BindingBranch(#[serde(with = "rational::serde_vec")] Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerWitness {
    FeasibilityRoute,
    DirectionRoute {
        #[serde(with = "rational::serde_vec")]
        d: Vec<Rational>,
        per_k: Vec<BranchWitness>,
    },
}

fn unit(m: usize, i: usize) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); m];
    e[i] = Rational::one();
    e
}

fn binding_matrix(stat: &SufficientStatistic, instance: &Instance) -> Vec<Vec<Rational>> {
    stat.binding.iter().map(|&l| instance.c()[l].clone()).collect()
}

/// `γᵀC_V d − |1ᵀd|·|min_j min(0, (γᵀC_V)_j)|`.
fn binding_margin(gamma: &[Rational], cv: &[Vec<Rational>], d: &[Rational]) -> Rational {
    let g = rational::vec_mat(gamma, cv, d.len());
    let worst = g
        .iter()
        .filter(|v| v.is_negative())
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    dot(&g, d) - rational::sum(d).abs() * worst
}

/// Checks a witness of the direct (margin) form exactly.
pub fn verify_power_witness(
    op: &AggregationOperation,
    instance: &Instance,
    witness: &PowerWitness,
) -> bool {
    let m = instance.m();
    match witness {
        PowerWitness::FeasibilityRoute => matches!(is_feasible(op.aggregate(), instance), Ok(false)),
        PowerWitness::DirectionRoute { d, per_k } => {
            if d.len() != m || per_k.len() != op.k() {
                return false;
            }
            if rational::sum(d) != -Rational::one() || !d.iter().any(Signed::is_positive) {
                return false;
            }
            let Ok(agg) = sufficient_statistic(op.aggregate(), instance) else {
                return false;
            };
            if !budget_reducing_directions(&agg, instance).contains(d) {
                return false;
            }
            let budget = rational::sum(d).abs();
            op.inputs().iter().zip(per_k).all(|(x, branch)| {
                let Ok(stat) = sufficient_statistic(x, instance) else {
                    return false;
                };
                match branch {
                    BranchWitness::SupportBranch(j) => {
                        *j < m
                            && !stat.support.contains(j)
                            && (-&d[*j] - &budget).is_positive()
                    }
                    BranchWitness::BindingBranch(gamma) => {
                        gamma.len() == stat.binding.len()
                            && !gamma.iter().any(Signed::is_negative)
                            && binding_margin(gamma, &binding_matrix(&stat, instance), d)
                                .is_positive()
                    }
                }
            })
        }
    }
}

/// Best binding-branch multipliers for a fixed direction: maximize `γᵀC_V d`
/// over `γ ≥ 0` with `γᵀC_V ≥ −1` coordinatewise.
fn binding_branch(stat: &SufficientStatistic, instance: &Instance, d: &[Rational]) -> Option<Vec<Rational>> {
    let cv = binding_matrix(stat, instance);
    if cv.is_empty() {
        return None;
    }
    let m = instance.m();
    let nv = cv.len();
    let cd = rational::mat_vec(&cv, d);
    let cons: Vec<Constraint> = (0..m)
        .map(|j| {
            let row = cv.iter().map(|r| r[j].clone()).collect();
            Constraint::new(row, Sense::Ge, -Rational::one())
        })
        .collect();
    let gamma = match maximize(&cd, &cons, &vec![true; nv]) {
        Outcome::Unbounded { ray, .. } => ray,
        Outcome::Optimal { point, .. } => point,
        Outcome::Infeasible => unreachable!("γ = 0 is feasible"),
    };
    binding_margin(&gamma, &cv, d).is_positive().then_some(gamma)
}

/// Reads off per-input branches for a fixed direction, if every input has
/// one. Support branches are preferred, lowest coordinate first.
pub fn extract_power_witness(
    op: &AggregationOperation,
    instance: &Instance,
    d: &[Rational],
) -> Option<PowerWitness> {
    let d = rational::normalize_budget(d)?;
    let budget = Rational::one();
    let mut per_k = Vec::with_capacity(op.k());
    for x in op.inputs() {
        let stat = sufficient_statistic(x, instance).ok()?;
        let support = stat
            .off_support(instance.m())
            .into_iter()
            .find(|&j| (-&d[j] - &budget).is_positive());
        match support {
            Some(j) => per_k.push(BranchWitness::SupportBranch(j)),
            None => per_k.push(BranchWitness::BindingBranch(binding_branch(&stat, instance, &d)?)),
        }
    }
    let w = PowerWitness::DirectionRoute { d, per_k };
    verify_power_witness(op, instance, &w).then_some(w)
}

/// One extra row added to a search system.
#[derive(Debug, Clone)]
enum Cut {
    Nothing,
    Weak(Vec<Rational>, WeakRelation),
    Strict(Vec<Rational>, StrictRelation),
}

impl Cut {
    fn apply(&self, s: &LinearSystem) -> LinearSystem {
        let mut out = s.clone();
        match self {
            Cut::Nothing => {}
            Cut::Weak(a, r) => out.push_weak(a.clone(), *r),
            Cut::Strict(a, r) => out.push_strict(a.clone(), *r),
        }
        out
    }

    fn strictified(&self) -> Cut {
        match self {
            Cut::Weak(a, WeakRelation::Ge) => Cut::Strict(a.clone(), StrictRelation::Gt),
            Cut::Weak(a, WeakRelation::Le) => Cut::Strict(a.clone(), StrictRelation::Lt),
            other => other.clone(),
        }
    }

    fn relaxed(&self) -> Cut {
        match self {
            Cut::Strict(a, StrictRelation::Gt) => Cut::Weak(a.clone(), WeakRelation::Ge),
            Cut::Strict(a, StrictRelation::Lt) => Cut::Weak(a.clone(), WeakRelation::Le),
            other => other.clone(),
        }
    }
}

/// Cuts whose union is the complement of the set described by `system`.
fn complement_cuts(system: &LinearSystem) -> Vec<Cut> {
    if system.is_trivially_empty() {
        return vec![Cut::Nothing];
    }
    let mut cuts = Vec::new();
    for r in system.weak_rows() {
        match r.relation {
            WeakRelation::Le => cuts.push(Cut::Strict(r.coeffs.clone(), StrictRelation::Gt)),
            WeakRelation::Ge => cuts.push(Cut::Strict(r.coeffs.clone(), StrictRelation::Lt)),
            WeakRelation::Eq => {
                cuts.push(Cut::Strict(r.coeffs.clone(), StrictRelation::Gt));
                cuts.push(Cut::Strict(r.coeffs.clone(), StrictRelation::Lt));
            }
        }
    }
    for r in system.strict_rows() {
        match r.relation {
            StrictRelation::Lt => cuts.push(Cut::Weak(r.coeffs.clone(), WeakRelation::Ge)),
            StrictRelation::Gt => cuts.push(Cut::Weak(r.coeffs.clone(), WeakRelation::Le)),
        }
    }
    cuts
}

/// A branch of the search that was refuted, with its certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedCombination {
    /// `(input, cut)` choices made so far.
    pub cuts: Vec<(usize, usize)>,
    pub positive_coordinate: Option<usize>,
    pub system: LinearSystem,
    pub certificate: MotzkinCertificate,
}

struct Search<'a> {
    options: &'a [Vec<Cut>],
    m: usize,
    log: Vec<PrunedCombination>,
    keep_log: bool,
}

impl Search<'_> {
    fn run(&mut self, k: usize, sys: &LinearSystem, path: &mut Vec<(usize, usize)>) -> Option<Vec<Rational>> {
        if k == self.options.len() {
            for p in 0..self.m {
                let mut leaf = sys.clone();
                leaf.push_strict(unit(self.m, p), StrictRelation::Gt);
                match decide_feasible(&leaf) {
                    FeasibilityResult::Witness(w) => {
                        let d = canonical_member(&leaf).unwrap_or(w);
                        return rational::normalize_budget(&d);
                    }
                    FeasibilityResult::Certificate(c) => self.prune(path, Some(p), leaf, c),
                }
            }
            return None;
        }
        for (i, cut) in self.options[k].iter().enumerate() {
            let next = cut.apply(sys);
            path.push((k, i));
            match decide_feasible(&next) {
                FeasibilityResult::Witness(_) => {
                    if let Some(d) = self.run(k + 1, &next, path) {
                        path.pop();
                        return Some(d);
                    }
                }
                FeasibilityResult::Certificate(c) => self.prune(path, None, next, c),
            }
            path.pop();
        }
        None
    }

    fn prune(&mut self, path: &[(usize, usize)], p: Option<usize>, system: LinearSystem, certificate: MotzkinCertificate) {
        if self.keep_log {
            self.log.push(PrunedCombination {
                cuts: path.to_vec(),
                positive_coordinate: p,
                system,
                certificate,
            });
        }
    }
}

fn search(
    base: &LinearSystem,
    options: &[Vec<Cut>],
    keep_log: bool,
) -> (Option<Vec<Rational>>, Vec<PrunedCombination>) {
    let mut s = Search {
        options,
        m: base.dim(),
        log: Vec::new(),
        keep_log,
    };
    let found = match decide_feasible(base) {
        FeasibilityResult::Witness(_) => s.run(0, base, &mut Vec::new()),
        FeasibilityResult::Certificate(c) => {
            s.prune(&[], None, base.clone(), c);
            None
        }
    };
    (found, s.log)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlternateVerdict {
    SatisfiedByFeasibility,
    /// A direction `d` in the aggregate's budget-reducing set, with a
    /// positive coordinate, outside every input's reachable cone; `1ᵀd = -1`.
    SatisfiedByDirection(#[serde(with = "rational::serde_vec")] Vec<Rational>),
    Unsatisfied(Vec<PrunedCombination>),
}

impl AlternateVerdict {
    pub fn is_satisfied(&self) -> bool {
        !matches!(self, AlternateVerdict::Unsatisfied(_))
    }
}

fn aggregate_budget_set(op: &AggregationOperation, instance: &Instance) -> Result<DirectionSet, PowerError> {
    let agg = sufficient_statistic(op.aggregate(), instance)?;
    Ok(budget_reducing_directions(&agg, instance))
}

/// Decides the reachable-cone form of the power-characterizing condition.
pub fn decide_power_alternate(
    op: &AggregationOperation,
    instance: &Instance,
) -> Result<AlternateVerdict, PowerError> {
    check_nonzero(op)?;
    if !is_feasible(op.aggregate(), instance)? {
        return Ok(AlternateVerdict::SatisfiedByFeasibility);
    }
    let base = aggregate_budget_set(op, instance)?.system;
    let mut options = Vec::with_capacity(op.k());
    for x in op.inputs() {
        let stat = sufficient_statistic(x, instance)?;
        options.push(complement_cuts(&reachable_cone(&stat, instance).system));
    }
    // Interior witnesses first; the exact negations decide.
    let strict: Vec<Vec<Cut>> = options
        .iter()
        .map(|o| o.iter().map(Cut::strictified).collect())
        .collect();
    if let (Some(d), _) = search(&base, &strict, false) {
        return Ok(AlternateVerdict::SatisfiedByDirection(d));
    }
    match search(&base, &options, true) {
        (Some(d), _) => Ok(AlternateVerdict::SatisfiedByDirection(d)),
        (None, log) => Ok(AlternateVerdict::Unsatisfied(log)),
    }
}

/// `{d : ∃ v ≥ 0, C_V(d + v) ≤ 0, 1ᵀ(d + v) ≤ 0}`: directions for which no
/// binding-branch multiplier has a positive margin.
fn binding_obstruction(stat: &SufficientStatistic, instance: &Instance) -> LinearSystem {
    let m = instance.m();
    let mut s = LinearSystem::new(2 * m);
    let doubled = |row: &[Rational]| -> Vec<Rational> {
        let mut r = row.to_vec();
        r.extend_from_slice(row);
        r
    };
    for i in 0..m {
        s.push_weak(unit(2 * m, m + i), WeakRelation::Ge);
    }
    for &l in &stat.binding {
        s.push_weak(doubled(&instance.c()[l]), WeakRelation::Le);
    }
    s.push_weak(vec![Rational::one(); 2 * m], WeakRelation::Le);
    project_with(
        &s,
        &(m..2 * m).collect::<Vec<_>>(),
        ProjectOptions {
            redundancy_threshold: 0,
        },
    )
}

/// Cuts whose union is the set of directions meeting the margin condition
/// for one input: `d_j < 1ᵀd` for some `j ∉ S`, or `d` outside the binding
/// obstruction.
fn margin_cuts(stat: &SufficientStatistic, instance: &Instance) -> Vec<Cut> {
    let m = instance.m();
    let mut cuts = Vec::new();
    for j in stat.off_support(m) {
        let mut a = vec![-Rational::one(); m];
        a[j] += Rational::one();
        cuts.push(Cut::Strict(a, StrictRelation::Lt));
    }
    if !stat.binding.is_empty() {
        cuts.extend(
            complement_cuts(&binding_obstruction(stat, instance))
                .into_iter()
                .filter(|c| !matches!(c, Cut::Nothing)),
        );
    }
    cuts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectVerdict {
    Satisfied(PowerWitness),
    /// No direction meets the strict margins, but one meets them with
    /// equality allowed.
    OnlyInClosure(#[serde(with = "rational::serde_vec")] Vec<Rational>),
    Unsatisfied,
}

/// Decides the margin form of the power-characterizing condition directly,
/// existentially over directions.
pub fn decide_power_direct(
    op: &AggregationOperation,
    instance: &Instance,
) -> Result<DirectVerdict, PowerError> {
    check_nonzero(op)?;
    if !is_feasible(op.aggregate(), instance)? {
        return Ok(DirectVerdict::Satisfied(PowerWitness::FeasibilityRoute));
    }
    let base = aggregate_budget_set(op, instance)?.system;
    let mut options = Vec::with_capacity(op.k());
    for x in op.inputs() {
        let stat = sufficient_statistic(x, instance)?;
        options.push(margin_cuts(&stat, instance));
    }
    if let (Some(d), _) = search(&base, &options, false) {
        if let Some(w) = extract_power_witness(op, instance, &d) {
            return Ok(DirectVerdict::Satisfied(w));
        }
    }
    let relaxed: Vec<Vec<Cut>> = options
        .iter()
        .map(|o| o.iter().map(Cut::relaxed).collect())
        .collect();
    match search(&base, &relaxed, false) {
        (Some(d), _) => Ok(DirectVerdict::OnlyInClosure(d)),
        (None, _) => Ok(DirectVerdict::Unsatisfied),
    }
}

/// A feature map whose improving cone lies inside `{u + λd : u, λ ≥ 0}`:
/// a unit row per positive coordinate `p`, and for every pair of a positive
/// `p` and a nonpositive `q` a row with `|d_q|` at `p` and `d_p` at `q`.
pub fn construct_separating_alpha(d: &[Rational]) -> Result<Vec<Vec<Rational>>, PowerError> {
    let m = d.len();
    let pos: Vec<usize> = (0..m).filter(|&i| d[i].is_positive()).collect();
    if pos.is_empty() {
        return Err(PowerError::NoPositiveCoordinate);
    }
    if !rational::sum(d).is_negative() {
        return Err(PowerError::NotBudgetReducing);
    }
    let nonpos: Vec<usize> = (0..m).filter(|&i| !d[i].is_positive()).collect();
    let mut alpha: Vec<Vec<Rational>> = pos.iter().map(|&p| unit(m, p)).collect();
    for &p in &pos {
        for &q in &nonpos {
            let mut row = vec![Rational::zero(); m];
            row[p] = d[q].abs();
            row[q] = d[p].clone();
            alpha.push(row);
        }
    }
    Ok(alpha)
}

/// The single all-ones feature.
pub fn uniform_alpha(m: usize) -> Vec<Vec<Rational>> {
    vec![vec![Rational::one(); m]]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionRoute {
    Feasibility,
    Direction(#[serde(with = "rational::serde_vec")] Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
pub enum ExistentialVerdict {
    Expanding {
        route: ExpansionRoute,
        /// Margin-form witness for the same operation, when one exists.
        power_witness: Option<PowerWitness>,
        #[serde(with = "rational::serde_matrix")]
        alpha_witness: Vec<Vec<Rational>>,
        fixed_check: FixedAlphaVerdict,
    },
    NotExpanding {
        evidence: Vec<PrunedCombination>,
    },
}

impl ExistentialVerdict {
    pub fn is_expanding(&self) -> bool {
        matches!(self, ExistentialVerdict::Expanding { .. })
    }
}

/// Decides whether some feature map makes the operation expand
/// elicitability, building and re-verifying that map when it does. Only
/// the instance's constraints are used.
pub fn decide_expansion_existential(
    op: &AggregationOperation,
    instance: &Instance,
) -> Result<ExistentialVerdict, PowerError> {
    let (route, alpha) = match decide_power_alternate(op, instance)? {
        AlternateVerdict::Unsatisfied(evidence) => {
            return Ok(ExistentialVerdict::NotExpanding { evidence })
        }
        AlternateVerdict::SatisfiedByFeasibility => {
            (ExpansionRoute::Feasibility, uniform_alpha(instance.m()))
        }
        AlternateVerdict::SatisfiedByDirection(d) => {
            let alpha = construct_separating_alpha(&d)?;
            (ExpansionRoute::Direction(d), alpha)
        }
    };
    let power_witness = match &route {
        ExpansionRoute::Feasibility => Some(PowerWitness::FeasibilityRoute),
        ExpansionRoute::Direction(d) => extract_power_witness(op, instance, d).or_else(|| {
            match decide_power_direct(op, instance) {
                Ok(DirectVerdict::Satisfied(w)) => Some(w),
                _ => None,
            }
        }),
    };
    let witness_instance = instance.with_alpha(alpha.clone())?;
    let fixed_check = expansion_fixed_alpha(op, &witness_instance)?;
    if !fixed_check.expanding {
        return Err(PowerError::ClosedLoopFailure(format!(
            "route {route:?}, inputs elicitable {:?}, aggregate elicitable {}",
            fixed_check.per_input_elicitable, fixed_check.aggregate_elicitable
        )));
    }
    Ok(ExistentialVerdict::Expanding {
        route,
        power_witness,
        alpha_witness: alpha,
        fixed_check,
    })
}

/// Feasibility expansion, or support expansion or binding contraction
/// relative to every input.
pub fn check_weak_necessity(op: &AggregationOperation, instance: &Instance) -> bool {
    mechanisms(op, instance).weak_necessity()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorollaryOutcome {
    /// The special case applies; the payload says whether the existential
    /// decision matches "feasibility expansion or support expansion for
    /// every input".
    Applicable(bool),
    NotApplicable,
}

/// Special case with no binding constraints anywhere, where expansion is
/// feasibility expansion or plain support expansion for every input.
pub fn corollary_special_case(
    op: &AggregationOperation,
    instance: &Instance,
) -> Result<CorollaryOutcome, PowerError> {
    let m = instance.m();
    let agg = sufficient_statistic(op.aggregate(), instance)?;
    let stats = op
        .inputs()
        .iter()
        .map(|x| sufficient_statistic(x, instance))
        .collect::<Result<Vec<_>, _>>()?;
    if !agg.binding.is_empty() || stats.iter().any(|s| !s.binding.is_empty()) {
        return Ok(CorollaryOutcome::NotApplicable);
    }
    let full = agg.support.len() == m;
    let some_gap = (0..m).any(|j| {
        let target: Vec<usize> = (0..m).filter(|&i| i != j).collect();
        stats.iter().all(|s| s.support != target)
    });
    if full && !some_gap {
        return Ok(CorollaryOutcome::NotApplicable);
    }
    let existential = decide_expansion_existential(op, instance)?.is_expanding();
    let report = mechanisms(op, instance);
    let mechanism_side =
        report.feasibility_expansion || report.support_expansion.iter().all(|&s| s);
    Ok(CorollaryOutcome::Applicable(existential == mechanism_side))
}

/// Agreement of the two forms of the power-characterizing condition on one
/// operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equivalence {
    /// Both forms agree. `same_direction` tells whether the reachable-cone
    /// direction itself carried a margin witness.
    Agree { satisfied: bool, same_direction: bool },
    /// The reachable-cone form holds and the margin form holds only with
    /// some margin at equality.
    BoundaryAmbiguous,
    Violation(String),
}

pub fn check_equivalence(
    op: &AggregationOperation,
    instance: &Instance,
) -> Result<Equivalence, PowerError> {
    let alternate = decide_power_alternate(op, instance)?;
    let direct = decide_power_direct(op, instance)?;
    Ok(match (&alternate, &direct) {
        (AlternateVerdict::SatisfiedByFeasibility, DirectVerdict::Satisfied(_)) => {
            Equivalence::Agree {
                satisfied: true,
                same_direction: true,
            }
        }
        (AlternateVerdict::SatisfiedByDirection(d), _) => {
            if extract_power_witness(op, instance, d).is_some() {
                Equivalence::Agree {
                    satisfied: true,
                    same_direction: true,
                }
            } else {
                match direct {
                    DirectVerdict::Satisfied(_) => Equivalence::Agree {
                        satisfied: true,
                        same_direction: false,
                    },
                    DirectVerdict::OnlyInClosure(_) => Equivalence::BoundaryAmbiguous,
                    DirectVerdict::Unsatisfied => Equivalence::Violation(format!(
                        "reachable-cone direction {} has no margin witness and none exists",
                        rational::Show(d)
                    )),
                }
            }
        }
        (AlternateVerdict::Unsatisfied(_), DirectVerdict::Satisfied(w)) => {
            Equivalence::Violation(format!("margin witness {w:?} but reachable-cone form fails"))
        }
        (AlternateVerdict::Unsatisfied(_), _) => Equivalence::Agree {
            satisfied: false,
            same_direction: true,
        },
        (AlternateVerdict::SatisfiedByFeasibility, other) => {
            Equivalence::Violation(format!("feasibility expansion but margin form gave {other:?}"))
        }
    })
}

/// Every input whose reachable cone misses `d` must show support expansion
/// or binding contraction; returns false on any mismatch.
pub fn direction_implies_mechanisms(
    op: &AggregationOperation,
    instance: &Instance,
    d: &[Rational],
    report: &MechanismReport,
) -> bool {
    op.inputs().iter().enumerate().all(|(k, x)| {
        let Ok(stat) = sufficient_statistic(x, instance) else {
            return false;
        };
        reachable_contains(&stat, instance, d)
            || report.support_expansion[k]
            || report.binding_contraction[k]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{alpha_q, OutputVector};
    use crate::rational::{int, ints, ratio};

    fn ov(v: Vec<Rational>) -> OutputVector {
        OutputVector::new(v).unwrap()
    }

    fn op(inst: &Instance, inputs: Vec<Vec<Rational>>, agg: Vec<Rational>) -> AggregationOperation {
        AggregationOperation::new(inputs.into_iter().map(ov).collect(), ov(agg), inst).unwrap()
    }

    fn support_example() -> (Instance, AggregationOperation) {
        let inst = Instance::new(vec![], alpha_q(ratio(3, 5))).unwrap();
        let o = op(
            &inst,
            vec![ints(&[1, 0, 0]), ints(&[0, 1, 0])],
            vec![ratio(1, 2), ratio(1, 2), int(0)],
        );
        (inst, o)
    }

    fn binding_example() -> (Instance, AggregationOperation) {
        let inst = Instance::new(vec![ints(&[1, 1, -1])], alpha_q(ratio(1, 5))).unwrap();
        let o = op(&inst, vec![ints(&[1, 0, 1]), ints(&[0, 1, 1])], ints(&[0, 0, 1]));
        (inst, o)
    }

    fn feasibility_example() -> (Instance, AggregationOperation) {
        let inst = Instance::new(vec![ints(&[-1, -1, 1])], alpha_q(int(2))).unwrap();
        let o = op(&inst, vec![ints(&[1, 0, 1]), ints(&[0, 1, 1])], ints(&[0, 0, 1]));
        (inst, o)
    }

    #[test]
    fn fixed_alpha_examples() {
        let (inst, o) = support_example();
        assert!(expansion_fixed_alpha(&o, &inst).unwrap().expanding);
        let (inst, o) = binding_example();
        assert!(expansion_fixed_alpha(&o, &inst).unwrap().expanding);
        let (inst, _) = support_example();
        let same = op(&inst, vec![ints(&[1, 0, 0])], ints(&[1, 0, 0]));
        assert!(!expansion_fixed_alpha(&same, &inst).unwrap().expanding);
    }

    #[test]
    fn separating_alpha_examples() {
        let a = construct_separating_alpha(&[ratio(1, 5), ratio(1, 5), int(-1)]).unwrap();
        assert_eq!(
            a,
            vec![
                ints(&[1, 0, 0]),
                ints(&[0, 1, 0]),
                vec![int(1), int(0), ratio(1, 5)],
                vec![int(0), int(1), ratio(1, 5)],
            ]
        );
        let a = construct_separating_alpha(&ints(&[1, -2])).unwrap();
        assert_eq!(a, vec![ints(&[1, 0]), ints(&[2, 1])]);
        assert_eq!(
            construct_separating_alpha(&ints(&[-1, -1])),
            Err(PowerError::NoPositiveCoordinate)
        );
    }

    #[test]
    fn support_branch_witness_verifies() {
        let (inst, o) = support_example();
        let w = PowerWitness::DirectionRoute {
            d: ints(&[-2, -2, 3]),
            per_k: vec![BranchWitness::SupportBranch(1), BranchWitness::SupportBranch(0)],
        };
        assert!(verify_power_witness(&o, &inst, &w));
        let nonpositive = PowerWitness::DirectionRoute {
            d: vec![ratio(-1, 2), ratio(-1, 2), int(0)],
            per_k: vec![BranchWitness::SupportBranch(1), BranchWitness::SupportBranch(0)],
        };
        assert!(!verify_power_witness(&o, &inst, &nonpositive));
    }

    #[test]
    fn feasibility_route() {
        let (inst, o) = feasibility_example();
        assert!(verify_power_witness(&o, &inst, &PowerWitness::FeasibilityRoute));
        assert_eq!(
            decide_power_alternate(&o, &inst).unwrap(),
            AlternateVerdict::SatisfiedByFeasibility
        );
        match decide_expansion_existential(&o, &inst).unwrap() {
            ExistentialVerdict::Expanding { alpha_witness, .. } => {
                assert_eq!(alpha_witness, vec![ints(&[1, 1, 1])])
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn support_counterexample_not_expanding() {
        let inst = Instance::new(vec![], vec![ints(&[1, 1, 1])]).unwrap();
        let o = op(
            &inst,
            vec![ints(&[0, 1, 1]), ints(&[1, 0, 1]), ints(&[1, 1, 0])],
            ints(&[1, 1, 1]),
        );
        assert!(!decide_power_alternate(&o, &inst).unwrap().is_satisfied());
        assert!(!decide_expansion_existential(&o, &inst).unwrap().is_expanding());
        assert_eq!(
            corollary_special_case(&o, &inst).unwrap(),
            CorollaryOutcome::NotApplicable
        );
    }

    #[test]
    fn binding_counterexample_not_expanding() {
        let inst = Instance::new(vec![ints(&[1, -1]), ints(&[-2, 1])], vec![ints(&[1, 1])]).unwrap();
        let o = op(&inst, vec![ints(&[1, 1]), ints(&[1, 2])], ints(&[5, 7]));
        assert!(!decide_power_alternate(&o, &inst).unwrap().is_satisfied());
        assert!(!decide_expansion_existential(&o, &inst).unwrap().is_expanding());
    }

    #[test]
    fn examples_expand_existentially() {
        for (inst, o) in [support_example(), binding_example()] {
            let v = decide_expansion_existential(&o, &inst).unwrap();
            assert!(v.is_expanding());
            assert!(check_weak_necessity(&o, &inst));
            assert!(matches!(
                check_equivalence(&o, &inst).unwrap(),
                Equivalence::Agree { satisfied: true, .. }
            ));
        }
        let (inst, o) = support_example();
        assert_eq!(
            corollary_special_case(&o, &inst).unwrap(),
            CorollaryOutcome::Applicable(true)
        );
        let (inst, o) = binding_example();
        assert_eq!(
            corollary_special_case(&o, &inst).unwrap(),
            CorollaryOutcome::NotApplicable
        );
    }

    #[test]
    fn identity_aggregation_has_no_power() {
        let (inst, _) = binding_example();
        let o = op(&inst, vec![ints(&[1, 0, 1])], ints(&[1, 0, 1]));
        assert!(!check_weak_necessity(&o, &inst));
        assert!(!decide_expansion_existential(&o, &inst).unwrap().is_expanding());
    }

    #[test]
    fn per_direction_forms_can_differ() {
        // Binding input (1,0,1) on c = (-1,5,1), full-support slack aggregate.
        // d = (-1,-1/2,1/2) avoids the reachable cone only through a mixed
        // multiplier, so it has no margin witness, while d = (-2,0,1) does.
        let inst = Instance::new(vec![ints(&[-1, 5, 1])], vec![ints(&[1, 1, 1])]).unwrap();
        let o = op(
            &inst,
            vec![ints(&[1, 0, 1])],
            vec![int(3), ratio(1, 10), int(1)],
        );
        let st = sufficient_statistic(&o.inputs()[0], &inst).unwrap();
        let d = vec![int(-1), ratio(-1, 2), ratio(1, 2)];
        assert!(!reachable_contains(&st, &inst, &d));
        assert!(extract_power_witness(&o, &inst, &d).is_none());
        assert!(extract_power_witness(&o, &inst, &ints(&[-2, 0, 1])).is_some());
        assert!(matches!(
            check_equivalence(&o, &inst).unwrap(),
            Equivalence::Agree { satisfied: true, .. }
        ));
    }
}
