//! Single-output elicitability: eliciting rewards with KKT certificates, or
//! improving directions proving that no monotone reward elicits `x`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cones::{budget_reducing_directions, feature_cone, intersect_empty, Intersection};
use crate::linsys::simplex::{maximize, Constraint, Outcome, Sense};
use crate::linsys::{
    optimize, AffineRow, LinearSystem, MotzkinCertificate, OptimizeResult, WeakRelation,
};
use crate::model::{
    is_feasible, sufficient_statistic, Instance, LinearReward, ModelError, OutputVector,
    SufficientStatistic,
};
use crate::rational::{self, dot, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElicitError {
    #[error("the zero vector cannot be elicited with a positive budget")]
    ZeroVector,
    #[error("certificate has no positive weight on any feature row")]
    DegenerateCertificate,
    #[error("certificate does not match the elicitability system of this vector")]
    CertificateMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Lagrange multipliers proving that `x` maximizes a linear reward over
/// `{x ≥ 0, Cx ≤ 0, 1ᵀx ≤ E}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KktCertificate {
    /// Multiplier `τ` of the budget row.
    #[serde(with = "rational::serde_rational")]
    pub budget_multiplier: Rational,
    /// Coordinates `j ∉ S(x)` carrying multipliers `λ_j`.
    pub off_support: Vec<usize>,
    #[serde(with = "rational::serde_vec")]
    pub off_support_multipliers: Vec<Rational>,
    /// Constraint rows `ℓ ∈ V(x)` carrying multipliers `γ_ℓ`.
    pub binding: Vec<usize>,
    #[serde(with = "rational::serde_vec")]
    pub binding_multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InelicitableReason {
    Infeasible,
    ImprovingDirection(#[serde(with = "rational::serde_vec")] Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
pub enum ElicitabilityVerdict {
    Elicitable {
        reward: LinearReward,
        kkt: KktCertificate,
        certificate: MotzkinCertificate,
    },
    /// The intersection is empty but no reward could be built from the
    /// certificate.
    ElicitableWithoutReward {
        certificate: MotzkinCertificate,
        diagnostic: String,
    },
    Inelicitable(InelicitableReason),
}

impl ElicitabilityVerdict {
    pub fn is_elicitable(&self) -> bool {
        !matches!(self, ElicitabilityVerdict::Inelicitable(_))
    }

    pub fn direction(&self) -> Option<&[Rational]> {
        match self {
            ElicitabilityVerdict::Inelicitable(InelicitableReason::ImprovingDirection(d)) => {
                Some(d)
            }
            _ => None,
        }
    }
}

pub fn decide_elicitable(
    x: &OutputVector,
    instance: &Instance,
) -> Result<ElicitabilityVerdict, ElicitError> {
    if !is_feasible(x, instance)? {
        return Ok(ElicitabilityVerdict::Inelicitable(
            InelicitableReason::Infeasible,
        ));
    }
    if x.is_zero() {
        return Err(ElicitError::ZeroVector);
    }
    let stat = sufficient_statistic(x, instance)?;
    let b = budget_reducing_directions(&stat, instance);
    let f = feature_cone(instance.alpha());
    match intersect_empty(&b, &f) {
        Intersection::Nonempty(d) => Ok(ElicitabilityVerdict::Inelicitable(
            InelicitableReason::ImprovingDirection(d),
        )),
        Intersection::Empty(certificate) => match construct_reward(x, instance, &certificate) {
            Ok((reward, kkt)) => Ok(ElicitabilityVerdict::Elicitable {
                reward,
                kkt,
                certificate,
            }),
            Err(ElicitError::DegenerateCertificate) => {
                Ok(ElicitabilityVerdict::ElicitableWithoutReward {
                    certificate,
                    diagnostic: ElicitError::DegenerateCertificate.to_string(),
                })
            }
            Err(e) => Err(e),
        },
    }
}

/// `B_{S(x),V(x)} ∧ {αd ≥ 0}`, rows in the order used by the Motzkin
/// certificates of elicitable verdicts.
pub fn elicitability_system(x: &OutputVector, instance: &Instance) -> Result<LinearSystem, ElicitError> {
    let stat = sufficient_statistic(x, instance)?;
    Ok(budget_reducing_directions(&stat, instance)
        .system
        .and(&feature_cone(instance.alpha()).system))
}

/// Builds an eliciting reward from a certificate that `B_{S(x),V(x)}` and
/// `{αd ≥ 0}` do not meet.
///
/// The multipliers are normalized to `τ = 1` and, among all such
/// certificates, the one with the smallest `Σν` is reported. The caller's
/// certificate is used as is if that program fails.
pub fn construct_reward(
    x: &OutputVector,
    instance: &Instance,
    certificate: &MotzkinCertificate,
) -> Result<(LinearReward, KktCertificate), ElicitError> {
    if x.is_zero() {
        return Err(ElicitError::ZeroVector);
    }
    let stat = sufficient_statistic(x, instance)?;
    let m = instance.m();
    let off = stat.off_support(m);
    let nv = stat.binding.len();
    let no = off.len();
    let nf = instance.n();
    if certificate.weak_multipliers.len() != nv + no + nf
        || certificate.strict_multipliers.len() != 1
    {
        return Err(ElicitError::CertificateMismatch);
    }

    let kkt_from = |nu: Vec<Rational>, lambda: Vec<Rational>, gamma: Vec<Rational>| {
        (
            nu,
            KktCertificate {
                budget_multiplier: Rational::one(),
                off_support: off.clone(),
                off_support_multipliers: lambda,
                binding: stat.binding.clone(),
                binding_multipliers: gamma,
            },
        )
    };

    let (nu, kkt) = match canonical_multipliers(&stat, instance) {
        Some((nu, lambda, gamma)) => kkt_from(nu, lambda, gamma),
        None => {
            let tau = &certificate.strict_multipliers[0];
            if !tau.is_positive() {
                return Err(ElicitError::CertificateMismatch);
            }
            let k = tau.recip();
            let w = rational::scale(&certificate.weak_multipliers, &k);
            let gamma = w[..nv].to_vec();
            let lambda = w[nv..nv + no].to_vec();
            let nu = w[nv + no..].to_vec();
            kkt_from(nu, lambda, gamma)
        }
    };
    if !nu.iter().any(Signed::is_positive) {
        return Err(ElicitError::DegenerateCertificate);
    }
    let reward = LinearReward::new(nu, x.l1_norm())?;
    debug_assert!(verify_kkt(x, &reward, &kkt, instance));
    Ok((reward, kkt))
}

/// Minimizes `Σν` subject to stationarity with `τ = 1`.
fn canonical_multipliers(
    stat: &SufficientStatistic,
    instance: &Instance,
) -> Option<(Vec<Rational>, Vec<Rational>, Vec<Rational>)> {
    let m = instance.m();
    let nf = instance.n();
    let off = stat.off_support(m);
    let nb = stat.binding.len();
    let nvars = nf + off.len() + nb;
    let mut cons = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(nvars);
        row.extend(instance.alpha().iter().map(|a| a[i].clone()));
        row.extend(off.iter().map(|&j| {
            if j == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        }));
        row.extend(stat.binding.iter().map(|&l| -&instance.c()[l][i]));
        cons.push(Constraint::new(row, Sense::Eq, Rational::one()));
    }
    let mut objective = vec![Rational::zero(); nvars];
    for o in objective.iter_mut().take(nf) {
        *o = -Rational::one();
    }
    match maximize(&objective, &cons, &vec![true; nvars]) {
        Outcome::Optimal { mut point, .. } => {
            let gamma = point.split_off(nf + off.len());
            let lambda = point.split_off(nf);
            Some((point, lambda, gamma))
        }
        _ => None,
    }
}

/// Checks that the KKT conditions certify `x` as a maximizer of `reward`.
pub fn verify_kkt(
    x: &OutputVector,
    reward: &LinearReward,
    kkt: &KktCertificate,
    instance: &Instance,
) -> bool {
    let m = instance.m();
    if x.dim() != m || reward.nu().len() != instance.n() {
        return false;
    }
    if kkt.off_support.len() != kkt.off_support_multipliers.len()
        || kkt.binding.len() != kkt.binding_multipliers.len()
    {
        return false;
    }
    let xs = x.entries();
    // primal feasibility, with the budget row tight since τ > 0
    if !matches!(is_feasible(x, instance), Ok(true)) {
        return false;
    }
    if !kkt.budget_multiplier.is_positive() || x.l1_norm() != *reward.budget() {
        return false;
    }
    // dual feasibility and complementary slackness
    for (&j, lam) in kkt.off_support.iter().zip(&kkt.off_support_multipliers) {
        if j >= m || lam.is_negative() || !xs[j].is_zero() {
            return false;
        }
    }
    for (&l, g) in kkt.binding.iter().zip(&kkt.binding_multipliers) {
        if l >= instance.l() || g.is_negative() || !dot(&instance.c()[l], xs).is_zero() {
            return false;
        }
    }
    // stationarity: αᵀν − τ1 + λ − C_Vᵀγ = 0
    let mut r = reward.output_weights(instance);
    for v in r.iter_mut() {
        *v -= &kkt.budget_multiplier;
    }
    for (&j, lam) in kkt.off_support.iter().zip(&kkt.off_support_multipliers) {
        r[j] += lam;
    }
    for (&l, g) in kkt.binding.iter().zip(&kkt.binding_multipliers) {
        for (ri, c) in r.iter_mut().zip(&instance.c()[l]) {
            *ri -= g * c;
        }
    }
    rational::is_zero_vec(&r)
}

/// Optimal value of the agent program and a vertex attaining it.
pub fn best_response(reward: &LinearReward, instance: &Instance) -> (Rational, Vec<Rational>) {
    let objective = reward.output_weights(instance);
    let budget = AffineRow::new(
        vec![Rational::one(); instance.m()],
        WeakRelation::Le,
        reward.budget().clone(),
    );
    match optimize(&objective, &instance.feasible_cone(), &[budget]) {
        OptimizeResult::Optimum { value, point } => (value, point),
        // The region is a nonempty polytope: it contains 0 and is bounded
        // by the budget on the nonnegative orthant.
        other => unreachable!("agent program is a nonempty polytope: {other:?}"),
    }
}

/// True when `x` attains the best-response value of `reward`.
pub fn is_optimal(x: &OutputVector, reward: &LinearReward, instance: &Instance) -> bool {
    if !matches!(is_feasible(x, instance), Ok(true)) || x.l1_norm() > *reward.budget() {
        return false;
    }
    let (value, _) = best_response(reward, instance);
    reward.value(x.entries(), instance) == value
}

/// Checks that `d` proves `x` inelicitable and returns a step `ε > 0` for
/// which `x + εd` is feasible, cheaper, and weakly better in every feature.
pub fn verify_improving_direction(
    x: &OutputVector,
    d: &[Rational],
    instance: &Instance,
) -> Option<Rational> {
    let m = instance.m();
    if x.dim() != m || d.len() != m || !matches!(is_feasible(x, instance), Ok(true)) {
        return None;
    }
    let stat = sufficient_statistic(x, instance).ok()?;
    if !budget_reducing_directions(&stat, instance).contains(d)
        || !feature_cone(instance.alpha()).contains(d)
    {
        return None;
    }

    let xs = x.entries();
    let mut bound: Option<Rational> = None;
    let mut tighten = |b: Rational| {
        if bound.as_ref().is_none_or(|cur| b < *cur) {
            bound = Some(b);
        }
    };
    for (xi, di) in xs.iter().zip(d) {
        if di.is_negative() {
            tighten(xi / -di);
        }
    }
    for (l, row) in instance.c().iter().enumerate() {
        if stat.binding.contains(&l) {
            continue;
        }
        let cd = dot(row, d);
        if cd.is_positive() {
            tighten(-dot(row, xs) / cd);
        }
    }
    let eps = match bound {
        Some(b) => b / rational::int(2),
        None => Rational::one(),
    };
    if !eps.is_positive() {
        return None;
    }

    let moved = rational::add(xs, &rational::scale(d, &eps));
    let moved = OutputVector::new(moved).ok()?;
    let ok = matches!(is_feasible(&moved, instance), Ok(true))
        && moved.l1_norm() < x.l1_norm()
        && instance
            .features(moved.entries())
            .iter()
            .zip(instance.features(xs))
            .all(|(a, b)| *a >= b);
    ok.then_some(eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::alpha_q;
    use crate::rational::{int, ints, ratio};

    fn ov(v: Vec<Rational>) -> OutputVector {
        OutputVector::new(v).unwrap()
    }

    fn feasibility_instance() -> Instance {
        Instance::new(vec![ints(&[-1, -1, 1])], alpha_q(int(2))).unwrap()
    }

    fn support_instance() -> Instance {
        Instance::new(vec![], alpha_q(ratio(3, 5))).unwrap()
    }

    fn binding_instance() -> Instance {
        Instance::new(vec![ints(&[1, 1, -1])], alpha_q(ratio(1, 5))).unwrap()
    }

    #[test]
    fn feasibility_example_input_is_elicitable() {
        let inst = feasibility_instance();
        let x = ov(ints(&[1, 0, 1]));
        match decide_elicitable(&x, &inst).unwrap() {
            ElicitabilityVerdict::Elicitable { reward, kkt, .. } => {
                assert!(verify_kkt(&x, &reward, &kkt, &inst));
                assert_eq!(*reward.budget(), int(2));
                assert!(is_optimal(&x, &reward, &inst));
                // smallest-Σν certificate with τ = 1
                assert_eq!(reward.nu(), &[ratio(2, 3), int(0)]);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn support_example_aggregate_is_inelicitable() {
        let inst = support_instance();
        let x = ov(vec![ratio(1, 2), ratio(1, 2), int(0)]);
        let v = decide_elicitable(&x, &inst).unwrap();
        let d = v.direction().unwrap().to_vec();
        assert_eq!(d, ints(&[-3, -3, 5]));
        assert!(verify_improving_direction(&x, &d, &inst).is_some());
    }

    #[test]
    fn binding_example_aggregate_is_inelicitable() {
        let inst = binding_instance();
        let x = ov(ints(&[0, 0, 1]));
        let d = decide_elicitable(&x, &inst).unwrap().direction().unwrap().to_vec();
        let scaled = rational::scale(&d, &ratio(-3, 5));
        assert_eq!(scaled, vec![ratio(-1, 5), ratio(-1, 5), int(1)]);
        assert!(verify_improving_direction(&x, &[ratio(1, 5), ratio(1, 5), int(-1)], &inst).is_some());
    }

    #[test]
    fn single_dimension_output_rewards_one_feature() {
        let inst = support_instance();
        let x = ov(ints(&[1, 0, 0]));
        match decide_elicitable(&x, &inst).unwrap() {
            ElicitabilityVerdict::Elicitable { reward, .. } => {
                assert_eq!(reward.nu(), &[int(1), int(0)]);
                assert_eq!(*reward.budget(), int(1));
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn identity_features_give_uniform_reward() {
        let inst = Instance::new(vec![], vec![ints(&[1, 0]), ints(&[0, 1])]).unwrap();
        let x = ov(ints(&[2, 3]));
        match decide_elicitable(&x, &inst).unwrap() {
            ElicitabilityVerdict::Elicitable { reward, kkt, .. } => {
                assert_eq!(reward.nu(), &[int(1), int(1)]);
                assert_eq!(*reward.budget(), int(5));
                assert_eq!(kkt.budget_multiplier, int(1));
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn kkt_rejections() {
        let inst = feasibility_instance();
        let x = ov(ints(&[1, 0, 1]));
        let (reward, kkt) = match decide_elicitable(&x, &inst).unwrap() {
            ElicitabilityVerdict::Elicitable { reward, kkt, .. } => (reward, kkt),
            v => panic!("unexpected {v:?}"),
        };
        let mut neg = kkt.clone();
        neg.budget_multiplier = -neg.budget_multiplier;
        assert!(!verify_kkt(&x, &reward, &neg, &inst));
        let other = ov(ints(&[0, 1, 1]));
        assert!(!verify_kkt(&other, &reward, &kkt, &inst));
    }

    #[test]
    fn infeasible_and_zero_vectors() {
        let inst = feasibility_instance();
        assert_eq!(
            decide_elicitable(&ov(ints(&[0, 0, 1])), &inst).unwrap(),
            ElicitabilityVerdict::Inelicitable(InelicitableReason::Infeasible)
        );
        assert_eq!(
            decide_elicitable(&ov(ints(&[0, 0, 0])), &inst),
            Err(ElicitError::ZeroVector)
        );
    }

    #[test]
    fn best_response_values() {
        let inst = feasibility_instance();
        let r = LinearReward::new(ints(&[1, 0]), int(2)).unwrap();
        let (value, point) = best_response(&r, &inst);
        assert_eq!(value, int(3));
        assert_eq!(r.value(&point, &inst), int(3));

        let id = Instance::new(vec![], vec![ints(&[1, 0]), ints(&[0, 1])]).unwrap();
        let r = LinearReward::new(ints(&[0, 1]), int(1)).unwrap();
        assert_eq!(best_response(&r, &id), (int(1), ints(&[0, 1])));

        let inst = support_instance();
        let r = LinearReward::new(ints(&[1, 1]), int(1)).unwrap();
        assert_eq!(best_response(&r, &inst), (ratio(6, 5), ints(&[0, 0, 1])));
    }

    #[test]
    fn improving_direction_step_size() {
        let inst = support_instance();
        let x = ov(vec![ratio(1, 2), ratio(1, 2), int(0)]);
        let eps = verify_improving_direction(&x, &[ratio(-3, 5), ratio(-3, 5), int(1)], &inst)
            .unwrap();
        assert_eq!(eps, ratio(5, 12));
        assert!(verify_improving_direction(&x, &ints(&[0, 0, 0]), &inst).is_none());
    }
}
