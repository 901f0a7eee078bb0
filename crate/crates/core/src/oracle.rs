//! Seeded random instances, brute-force grid oracles and the cross-check
//! battery that compares them with the exact decisions.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::{aggregate_addition, aggregate_intersection, mechanisms};
use crate::elicit::{
    best_response, decide_elicitable, elicitability_system, is_optimal, verify_improving_direction, verify_kkt,
    ElicitabilityVerdict,
};
use crate::linsys::simplex::{maximize, Constraint, Outcome, Sense};
use crate::linsys::verify_certificate;
use crate::model::{AggregationOperation, Instance, LinearReward, OutputVector};
use crate::power::{
    check_equivalence, check_weak_necessity, corollary_special_case, decide_expansion_existential,
    decide_power_alternate, direction_implies_mechanisms, expansion_fixed_alpha,
    extract_power_witness, AlternateVerdict, BranchWitness, CorollaryOutcome, Equivalence,
    ExistentialVerdict, PowerError, PowerWitness,
};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("no valid instance after {0} attempts")]
    GenerationExhausted(usize),
    #[error("dimensions out of range: {0}")]
    InvalidDims(String),
}

/// Instance sizes: outputs `m`, features `n`, constraints `l`, inputs `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub k: usize,
}

impl Dims {
    pub const MAX: Dims = Dims {
        m: 6,
        n: 4,
        l: 3,
        k: 4,
    };

    fn check(&self) -> Result<(), OracleError> {
        let ok = (1..=Self::MAX.m).contains(&self.m)
            && (1..=Self::MAX.n).contains(&self.n)
            && self.l <= Self::MAX.l
            && (1..=Self::MAX.k).contains(&self.k);
        if ok {
            Ok(())
        } else {
            Err(OracleError::InvalidDims(format!("{self:?}")))
        }
    }

    /// Uniform sizes with `2 ≤ m ≤ max.m`, `1 ≤ n ≤ max.n`, `l ≤ max.l`,
    /// `1 ≤ k ≤ max.k`.
    pub fn sample<R: Rng>(rng: &mut R, max: Dims) -> Dims {
        Dims {
            m: rng.gen_range(2..=max.m.max(2)),
            n: rng.gen_range(1..=max.n.max(1)),
            l: rng.gen_range(0..=max.l),
            k: rng.gen_range(1..=max.k.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AggregationRule {
    Intersection,
    Addition,
    /// An arbitrary nonnegative aggregate unrelated to the inputs.
    Free,
}

#[derive(Debug, Clone)]
pub struct GeneratedCase {
    pub instance: Instance,
    pub operation: AggregationOperation,
    pub rule: AggregationRule,
}

#[derive(Debug, Clone)]
pub struct InstanceGenerator {
    rng: ChaCha8Rng,
    dims: Dims,
    max_attempts: usize,
}

const ATTEMPTS: usize = 200;

impl InstanceGenerator {
    pub fn new(seed: u64, dims: Dims) -> Result<Self, OracleError> {
        dims.check()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dims,
            max_attempts: ATTEMPTS,
        })
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Signed pool entry: numerator in `-2..=2`, denominator in `1..=4`.
    fn coefficient(&mut self) -> Rational {
        rational::ratio(self.rng.gen_range(-2..=2), self.rng.gen_range(1..=4))
    }

    fn weight(&mut self) -> Rational {
        rational::ratio(self.rng.gen_range(0..=2), self.rng.gen_range(1..=4))
    }

    fn positive(&mut self) -> Rational {
        rational::ratio(self.rng.gen_range(1..=4), self.rng.gen_range(1..=4))
    }

    /// A random valid feature map for `m` outputs with `n` rows.
    pub fn alpha(&mut self, n: usize, m: usize) -> Vec<Vec<Rational>> {
        (0..n)
            .map(|_| loop {
                let row: Vec<Rational> = (0..m).map(|_| self.weight()).collect();
                if row.iter().any(Signed::is_positive) {
                    break row;
                }
            })
            .collect()
    }

    pub fn instance(&mut self) -> Result<Instance, OracleError> {
        let Dims { m, n, l, .. } = self.dims;
        for _ in 0..self.max_attempts {
            let c: Vec<Vec<Rational>> = (0..l)
                .map(|_| (0..m).map(|_| self.coefficient()).collect())
                .collect();
            let alpha = self.alpha(n, m);
            if let Ok(inst) = Instance::new(c, alpha) {
                return Ok(inst);
            }
        }
        Err(OracleError::GenerationExhausted(self.max_attempts))
    }

    /// Vertices of the slice `{x ≥ 0, Cx ≤ 0, 1ᵀx = 1}` reached by
    /// maximizing random objectives, deduplicated in discovery order.
    pub fn slice_vertices(&mut self, instance: &Instance) -> Vec<Vec<Rational>> {
        let m = instance.m();
        let mut cons: Vec<Constraint> = instance
            .c()
            .iter()
            .map(|row| Constraint::new(row.clone(), Sense::Le, Rational::zero()))
            .collect();
        cons.push(Constraint::new(vec![Rational::one(); m], Sense::Eq, Rational::one()));
        let mut out: Vec<Vec<Rational>> = Vec::new();
        for _ in 0..3 * m {
            let objective: Vec<Rational> = (0..m).map(|_| self.coefficient()).collect();
            if let Outcome::Optimal { point, .. } = maximize(&objective, &cons, &vec![true; m]) {
                if !out.contains(&point) {
                    out.push(point);
                }
            }
        }
        out
    }

    /// A random conic combination of one or two slice vertices.
    pub fn feasible_vector(&mut self, vertices: &[Vec<Rational>]) -> OutputVector {
        let parts = self.rng.gen_range(1..=2.min(vertices.len()));
        let mut acc = vec![Rational::zero(); vertices[0].len()];
        for v in vertices.choose_multiple(&mut self.rng, parts).cloned().collect::<Vec<_>>() {
            acc = rational::add(&acc, &rational::scale(&v, &self.positive()));
        }
        OutputVector::new(acc).expect("conic combination of nonnegative vertices")
    }

    pub fn next_case(&mut self) -> Result<GeneratedCase, OracleError> {
        for _ in 0..self.max_attempts {
            let instance = self.instance()?;
            let vertices = self.slice_vertices(&instance);
            if vertices.is_empty() {
                continue;
            }
            let inputs: Vec<OutputVector> = (0..self.dims.k)
                .map(|_| self.feasible_vector(&vertices))
                .collect();
            let rule = match self.rng.gen_range(0..10) {
                0..=3 => AggregationRule::Intersection,
                4..=6 => AggregationRule::Addition,
                _ => AggregationRule::Free,
            };
            let aggregate = match rule {
                AggregationRule::Intersection => aggregate_intersection(&inputs),
                AggregationRule::Addition => {
                    let w: Vec<Rational> = (0..inputs.len()).map(|_| self.positive()).collect();
                    aggregate_addition(&inputs, &w)
                }
                AggregationRule::Free => {
                    OutputVector::new((0..instance.m()).map(|_| self.weight()).collect())
                }
            }
            .expect("generated inputs share a dimension");
            if aggregate.is_zero() {
                continue;
            }
            if let Ok(operation) = AggregationOperation::new(inputs, aggregate, &instance) {
                return Ok(GeneratedCase {
                    instance,
                    operation,
                    rule,
                });
            }
        }
        Err(OracleError::GenerationExhausted(self.max_attempts))
    }
}

/// The first case drawn from a fresh generator.
pub fn random_instance(seed: u64, dims: Dims) -> Result<(Instance, AggregationOperation), OracleError> {
    let case = InstanceGenerator::new(seed, dims)?.next_case()?;
    Ok((case.instance, case.operation))
}

/// Integer compositions of `total` into `parts` nonnegative summands, in
/// decreasing lexicographic order (simplex vertices first).
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GridReward {
    FoundReward(#[serde(with = "rational::serde_vec")] Vec<Rational>),
    NotFound,
}

/// Searches `ν` on the simplex grid with the given denominator for a reward
/// under which `x` is a best response at budget `‖x‖₁`.
pub fn grid_elicitability_oracle(x: &OutputVector, instance: &Instance, denominator: u32) -> GridReward {
    if x.is_zero() || denominator == 0 {
        return GridReward::NotFound;
    }
    let den = Rational::from_integer(denominator.into());
    for c in compositions(denominator, instance.n()) {
        let nu: Vec<Rational> = c.iter().map(|&v| Rational::from_integer(v.into()) / &den).collect();
        let Ok(reward) = LinearReward::new(nu.clone(), x.l1_norm()) else {
            continue;
        };
        if is_optimal(x, &reward, instance) {
            return GridReward::FoundReward(nu);
        }
    }
    GridReward::NotFound
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GridDirection {
    FoundDirection(#[serde(with = "rational::serde_vec")] Vec<Rational>),
    NotFound,
}

/// Searches integer vectors with entries in `[-D, D]` and negative sum,
/// rescaled to `1ᵀd = -1`, for an improving direction at `x`.
pub fn grid_direction_oracle(x: &OutputVector, instance: &Instance, denominator: u32) -> GridDirection {
    let m = instance.m();
    let bound = i64::from(denominator);
    let mut a = vec![-bound; m];
    loop {
        let total: i64 = a.iter().sum();
        let g = a.iter().fold(0i64, |g, v| g.gcd(v));
        if total < 0 && g == 1 {
            let d: Vec<Rational> = a.iter().map(|&v| rational::ratio(v, -total)).collect();
            if verify_improving_direction(x, &d, instance).is_some() {
                return GridDirection::FoundDirection(d);
            }
        }
        // Odometer increment, last coordinate fastest.
        let mut i = m;
        loop {
            if i == 0 {
                return GridDirection::NotFound;
            }
            i -= 1;
            if a[i] < bound {
                a[i] += 1;
                break;
            }
            a[i] = -bound;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleComparison {
    pub elicitable: bool,
    pub reward: GridReward,
    pub direction: GridDirection,
    pub contradiction: Option<String>,
}

/// Runs both grid oracles on one vector and compares them with the exact
/// decision.
pub fn oracle_consistency(x: &OutputVector, instance: &Instance, denominator: u32) -> OracleComparison {
    let reward = grid_elicitability_oracle(x, instance, denominator);
    let direction = grid_direction_oracle(x, instance, denominator);
    let (elicitable, contradiction) = match decide_elicitable(x, instance) {
        Err(e) => (false, Some(format!("decision failed: {e}"))),
        Ok(verdict) => {
            let e = verdict.is_elicitable();
            let c = match (&reward, &direction) {
                (GridReward::FoundReward(nu), GridDirection::FoundDirection(d)) => Some(format!(
                    "both oracles succeeded: ν {} and d {}",
                    rational::Show(nu),
                    rational::Show(d)
                )),
                (GridReward::FoundReward(nu), _) if !e => {
                    Some(format!("grid reward {} for an inelicitable vector", rational::Show(nu)))
                }
                (_, GridDirection::FoundDirection(d)) if e => {
                    Some(format!("grid direction {} for an elicitable vector", rational::Show(d)))
                }
                _ => None,
            };
            (e, c)
        }
    };
    OracleComparison {
        elicitable,
        reward,
        direction,
        contradiction,
    }
}

/// Checks every certificate carried by an elicitability verdict.
pub fn verdict_certificates_hold(x: &OutputVector, instance: &Instance, verdict: &ElicitabilityVerdict) -> bool {
    match verdict {
        ElicitabilityVerdict::Elicitable { reward, kkt, certificate } => {
            elicitability_system(x, instance).is_ok_and(|s| verify_certificate(&s, certificate))
                && verify_kkt(x, reward, kkt, instance)
                && *reward.budget() == x.l1_norm()
                && is_optimal(x, reward, instance)
                && best_response(reward, instance).0 == reward.value(x.entries(), instance)
        }
        ElicitabilityVerdict::ElicitableWithoutReward { certificate, .. } => {
            elicitability_system(x, instance).is_ok_and(|s| verify_certificate(&s, certificate))
        }
        ElicitabilityVerdict::Inelicitable(_) => match verdict.direction() {
            Some(d) => verify_improving_direction(x, d, instance).is_some(),
            None => !matches!(crate::model::is_feasible(x, instance), Ok(true)),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyViolation {
    pub property: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCheckReport {
    pub expanding: Option<bool>,
    pub alternate_satisfied: Option<bool>,
    pub boundary_ambiguous: bool,
    /// The reachable-cone direction itself had no margin witness, though
    /// another direction did.
    pub direction_mismatch: bool,
    pub certificates_checked: usize,
    pub violations: Vec<PropertyViolation>,
}

impl CrossCheckReport {
    fn violate(&mut self, property: &str, detail: impl Into<String>) {
        self.violations.push(PropertyViolation {
            property: property.into(),
            detail: detail.into(),
        });
    }
}

/// Runs the power-module property battery on one operation. `trials`
/// random feature maps and sampled directions are drawn from `seed`.
pub fn cross_check(op: &AggregationOperation, instance: &Instance, trials: usize, seed: u64) -> CrossCheckReport {
    let mut report = CrossCheckReport {
        expanding: None,
        alternate_satisfied: None,
        boundary_ambiguous: false,
        direction_mismatch: false,
        certificates_checked: 0,
        violations: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = instance.m();
    let mech = mechanisms(op, instance);

    // Existential decision with closed-loop re-verification.
    match decide_expansion_existential(op, instance) {
        Ok(verdict) => {
            report.expanding = Some(verdict.is_expanding());
            match &verdict {
                ExistentialVerdict::Expanding { fixed_check, alpha_witness, .. } => {
                    if !check_weak_necessity(op, instance) {
                        report.violate("weak_necessity", "expanding without any mechanism");
                    }
                    let Ok(wi) = instance.with_alpha(alpha_witness.clone()) else {
                        report.violate("closed_loop", "constructed feature map is invalid");
                        return report;
                    };
                    let all = op
                        .inputs()
                        .iter()
                        .zip(&fixed_check.input_verdicts)
                        .chain(std::iter::once((op.aggregate(), &fixed_check.aggregate_verdict)));
                    for (x, v) in all {
                        report.certificates_checked += 1;
                        if !verdict_certificates_hold(x, &wi, v) {
                            report.violate("certificate", format!("verdict {v:?} does not re-verify"));
                        }
                    }
                }
                ExistentialVerdict::NotExpanding { evidence } => {
                    if mech.feasibility_expansion {
                        report.violate("feasibility_sufficiency", "feasibility expansion but not expanding");
                    }
                    for e in evidence {
                        report.certificates_checked += 1;
                        if !verify_certificate(&e.system, &e.certificate) {
                            report.violate("certificate", format!("pruned combination {:?}", e.cuts));
                        }
                    }
                }
            }
        }
        Err(PowerError::ClosedLoopFailure(s)) => report.violate("closed_loop", s),
        Err(e) => report.violate("decision", e.to_string()),
    }

    // Reachable-cone form against mechanisms and random feature maps.
    let mut generator = InstanceGenerator {
        rng: ChaCha8Rng::seed_from_u64(rng.gen()),
        dims: Dims { m, n: instance.n(), l: instance.l(), k: op.k() },
        max_attempts: ATTEMPTS,
    };
    match decide_power_alternate(op, instance) {
        Ok(alt) => {
            report.alternate_satisfied = Some(alt.is_satisfied());
            match &alt {
                AlternateVerdict::SatisfiedByFeasibility => {
                    if !mech.feasibility_expansion {
                        report.violate("mechanism_consistency", "feasibility route on a feasible aggregate");
                    }
                }
                AlternateVerdict::SatisfiedByDirection(d) => {
                    if !direction_implies_mechanisms(op, instance, d, &mech) {
                        report.violate("mechanism_consistency", format!("direction {}", rational::Show(d)));
                    }
                    if let Some(PowerWitness::DirectionRoute { per_k, .. }) = extract_power_witness(op, instance, d) {
                        for (k, b) in per_k.iter().enumerate() {
                            let ok = match b {
                                BranchWitness::SupportBranch(_) => mech.support_expansion[k],
                                BranchWitness::BindingBranch(_) => mech.binding_contraction[k],
                            };
                            if !ok {
                                report.violate("mechanism_consistency", format!("branch {b:?} for input {k}"));
                            }
                        }
                    }
                }
                AlternateVerdict::Unsatisfied(_) => {
                    for _ in 0..trials {
                        let alpha = generator.alpha(instance.n().max(1), m);
                        let Ok(ai) = instance.with_alpha(alpha.clone()) else {
                            continue;
                        };
                        match expansion_fixed_alpha(op, &ai) {
                            Ok(v) if v.expanding => report.violate(
                                "necessity",
                                format!("expanding under random α {:?}", alpha.iter().map(|r| rational::Show(r).to_string()).collect::<Vec<_>>()),
                            ),
                            Ok(_) => {}
                            Err(e) => report.violate("decision", e.to_string()),
                        }
                    }
                }
            }

            // Sampled margin witnesses imply the reachable-cone form.
            for _ in 0..trials {
                let a: Vec<Rational> = (0..m).map(|_| rational::int(generator.rng.gen_range(-5..=5))).collect();
                if let Some(w) = extract_power_witness(op, instance, &a) {
                    if !alt.is_satisfied() {
                        report.violate("equivalence", format!("sampled witness {w:?} but condition unsatisfied"));
                    }
                }
            }
        }
        Err(e) => report.violate("decision", e.to_string()),
    }

    match check_equivalence(op, instance) {
        Ok(Equivalence::Agree { same_direction, .. }) => report.direction_mismatch = !same_direction,
        Ok(Equivalence::BoundaryAmbiguous) => report.boundary_ambiguous = true,
        Ok(Equivalence::Violation(s)) => report.violate("equivalence", s),
        Err(e) => report.violate("decision", e.to_string()),
    }

    match corollary_special_case(op, instance) {
        Ok(CorollaryOutcome::Applicable(false)) => {
            report.violate("special_case", "mechanism form disagrees with the existential decision")
        }
        Ok(_) => {}
        Err(e) => report.violate("decision", e.to_string()),
    }
    report
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryCase {
    pub seed: u64,
    pub dims: Dims,
    pub rule: AggregationRule,
    pub report: CrossCheckReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub cases: usize,
    pub expanding: usize,
    pub boundary_ambiguous: usize,
    pub direction_mismatch: usize,
    pub certificates_checked: usize,
    pub generation_failures: usize,
    pub violations: Vec<BatteryCase>,
}

impl BatteryReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.generation_failures == 0
    }
}

/// Derives the seed of case `i` in a battery.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

/// Generates one case for a battery: sizes are drawn below `max`, then the
/// instance and operation from the same stream.
pub fn battery_case(seed: u64, max: Dims) -> Result<(Dims, GeneratedCase), OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = Dims::sample(&mut rng, max);
    let mut generator = InstanceGenerator::new(rng.gen(), dims)?;
    Ok((dims, generator.next_case()?))
}

/// Cross-checks `cases` random operations in parallel; results are merged
/// in case order.
pub fn run_battery(seed: u64, cases: usize, max: Dims, trials: usize) -> BatteryReport {
    let results: Vec<Result<BatteryCase, OracleError>> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let s = case_seed(seed, i);
            let (dims, case) = battery_case(s, max)?;
            let report = cross_check(&case.operation, &case.instance, trials, s);
            Ok(BatteryCase {
                seed: s,
                dims,
                rule: case.rule,
                report,
            })
        })
        .collect();
    let mut out = BatteryReport {
        cases,
        expanding: 0,
        boundary_ambiguous: 0,
        direction_mismatch: 0,
        certificates_checked: 0,
        generation_failures: 0,
        violations: Vec::new(),
    };
    for r in results {
        match r {
            Ok(c) => {
                out.expanding += usize::from(c.report.expanding == Some(true));
                out.boundary_ambiguous += usize::from(c.report.boundary_ambiguous);
                out.direction_mismatch += usize::from(c.report.direction_mismatch);
                out.certificates_checked += c.report.certificates_checked;
                if !c.report.violations.is_empty() {
                    out.violations.push(c);
                }
            }
            Err(_) => out.generation_failures += 1,
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct GridViolation {
    pub seed: u64,
    #[serde(with = "rational::serde_vec")]
    pub vector: Vec<Rational>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridBatteryReport {
    pub pairs: usize,
    pub elicitable: usize,
    pub found_rewards: usize,
    pub found_directions: usize,
    pub generation_failures: usize,
    pub violations: Vec<GridViolation>,
}

impl GridBatteryReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.generation_failures == 0
    }
}

/// Compares the grid oracles with the exact decision on `pairs` random
/// (instance, vector) pairs. Even cases take a fresh feasible vector, odd
/// cases the generated aggregate.
pub fn run_grid_battery(seed: u64, pairs: usize, max: Dims, denominator: u32) -> GridBatteryReport {
    let results: Vec<Option<(u64, OutputVector, OracleComparison)>> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let s = case_seed(seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let dims = Dims::sample(&mut rng, max);
            let mut generator = InstanceGenerator::new(rng.gen(), dims).ok()?;
            let case = generator.next_case().ok()?;
            let x = if i % 2 == 0 {
                let vertices = generator.slice_vertices(&case.instance);
                generator.feasible_vector(&vertices)
            } else {
                case.operation.aggregate().clone()
            };
            let cmp = oracle_consistency(&x, &case.instance, denominator);
            Some((s, x, cmp))
        })
        .collect();
    let mut out = GridBatteryReport {
        pairs,
        elicitable: 0,
        found_rewards: 0,
        found_directions: 0,
        generation_failures: 0,
        violations: Vec::new(),
    };
    for r in results {
        let Some((seed, x, cmp)) = r else {
            out.generation_failures += 1;
            continue;
        };
        out.elicitable += usize::from(cmp.elicitable);
        out.found_rewards += usize::from(matches!(cmp.reward, GridReward::FoundReward(_)));
        out.found_directions += usize::from(matches!(cmp.direction, GridDirection::FoundDirection(_)));
        if let Some(detail) = cmp.contradiction {
            out.violations.push(GridViolation {
                seed,
                vector: x.entries().to_vec(),
                detail,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::alpha_q;
    use crate::rational::{int, ints, ratio};

    #[test]
    fn compositions_cover_simplex_grid() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(5, 3).len(), 21);
        assert_eq!(compositions(3, 1), vec![vec![3]]);
    }

    #[test]
    fn generation_is_deterministic() {
        let dims = Dims { m: 3, n: 2, l: 1, k: 2 };
        let (a, oa) = random_instance(1, dims).unwrap();
        let (b, ob) = random_instance(1, dims).unwrap();
        assert_eq!(a, b);
        assert_eq!(oa, ob);
        assert_eq!(a.l(), 1);
        assert_eq!(oa.k(), 2);
    }

    #[test]
    fn empty_constraints_request() {
        let (inst, op) = random_instance(5, Dims { m: 3, n: 1, l: 0, k: 2 }).unwrap();
        assert!(inst.c().is_empty());
        for x in op.inputs() {
            assert!(crate::model::is_feasible(x, &inst).unwrap());
        }
    }

    #[test]
    fn dims_are_checked() {
        assert!(matches!(
            InstanceGenerator::new(0, Dims { m: 7, n: 1, l: 0, k: 1 }),
            Err(OracleError::InvalidDims(_))
        ));
    }

    #[test]
    fn reward_grid_examples() {
        let inst = Instance::new(vec![ints(&[-1, -1, 1])], alpha_q(int(2))).unwrap();
        let x = OutputVector::new(ints(&[1, 0, 1])).unwrap();
        match grid_elicitability_oracle(&x, &inst, 4) {
            GridReward::FoundReward(nu) => assert!(nu[0] >= ratio(3, 4)),
            r => panic!("unexpected {r:?}"),
        }
        let inst = Instance::new(vec![], alpha_q(ratio(3, 5))).unwrap();
        let x = OutputVector::new(vec![ratio(1, 2), ratio(1, 2), int(0)]).unwrap();
        assert_eq!(grid_elicitability_oracle(&x, &inst, 10), GridReward::NotFound);
    }

    #[test]
    fn direction_grid_examples() {
        let inst = Instance::new(vec![], alpha_q(ratio(3, 5))).unwrap();
        let x = OutputVector::new(vec![ratio(1, 2), ratio(1, 2), int(0)]).unwrap();
        assert!(matches!(
            grid_direction_oracle(&x, &inst, 5),
            GridDirection::FoundDirection(_)
        ));
        let inst = Instance::new(vec![ints(&[1, 1, -1])], alpha_q(ratio(1, 5))).unwrap();
        let x = OutputVector::new(ints(&[0, 0, 1])).unwrap();
        assert!(matches!(
            grid_direction_oracle(&x, &inst, 5),
            GridDirection::FoundDirection(_)
        ));
        let elicitable = OutputVector::new(ints(&[1, 0, 1])).unwrap();
        for den in 1..=5 {
            assert_eq!(grid_direction_oracle(&elicitable, &inst, den), GridDirection::NotFound);
        }
    }

    #[test]
    fn small_grid_battery_is_clean() {
        let r = run_grid_battery(11, 8, Dims { m: 3, n: 2, l: 2, k: 2 }, 3);
        assert!(r.is_clean(), "{:#?}", r.violations);
        assert!(r.found_rewards + r.found_directions > 0);
    }

    #[test]
    fn small_battery_is_clean() {
        let r = run_battery(3, 12, Dims { m: 3, n: 2, l: 2, k: 2 }, 5);
        assert!(r.is_clean(), "{:#?}", r.violations);
    }
}
