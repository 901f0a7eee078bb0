//! Instances, output vectors and their sufficient statistics.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linsys::{optimize, AffineRow, LinearSystem, OptimizeResult, WeakRelation};
use crate::rational::{self, dot, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("feature row {0} has no strictly positive weight")]
    ZeroAlphaRow(usize),
    #[error("feature weight at row {row}, column {col} is negative")]
    NegativeAlphaEntry { row: usize, col: usize },
    #[error("coordinate {0} is zero at every feasible output vector")]
    DimensionForcedZero(usize),
    #[error("output vector has a negative entry at coordinate {0}")]
    NegativeEntry(usize),
    #[error("aggregation needs at least one input vector")]
    EmptyList,
    #[error("aggregation input {0} violates the conic constraints")]
    InfeasibleInput(usize),
    #[error("aggregation weight {0} is negative")]
    NegativeWeight(usize),
    #[error("reward coefficients must be nonnegative and not all zero")]
    InvalidReward,
    #[error("budget must be strictly positive")]
    NonPositiveBudget,
}

/// Instance data before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub c: Vec<Vec<Rational>>,
    pub alpha: Vec<Vec<Rational>>,
}

/// A validated instance: `M` output coordinates, feasible cone
/// `{x ≥ 0, Cx ≤ 0}`, and an `N × M` nonnegative feature-weight matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    m: usize,
    c: Vec<Vec<Rational>>,
    alpha: Vec<Vec<Rational>>,
}

fn check_matrix(
    name: &str,
    rows: &[Vec<Rational>],
    expected_rows: usize,
    m: usize,
) -> Result<(), ModelError> {
    if rows.len() != expected_rows {
        return Err(ModelError::DimensionMismatch(format!(
            "{name} has {} rows, expected {expected_rows}",
            rows.len()
        )));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(ModelError::DimensionMismatch(format!(
            "{name} row {i} has {} entries, expected {m}",
            r.len()
        )));
    }
    Ok(())
}

fn check_alpha(alpha: &[Vec<Rational>]) -> Result<(), ModelError> {
    for (row, r) in alpha.iter().enumerate() {
        if let Some(col) = r.iter().position(Signed::is_negative) {
            return Err(ModelError::NegativeAlphaEntry { row, col });
        }
        if !r.iter().any(Signed::is_positive) {
            return Err(ModelError::ZeroAlphaRow(row));
        }
    }
    Ok(())
}

pub fn validate_instance(raw: &RawInstance) -> Result<Instance, ModelError> {
    if raw.m == 0 {
        return Err(ModelError::DimensionMismatch("M must be positive".into()));
    }
    if raw.n == 0 {
        return Err(ModelError::DimensionMismatch("N must be positive".into()));
    }
    check_matrix("C", &raw.c, raw.l, raw.m)?;
    check_matrix("alpha", &raw.alpha, raw.n, raw.m)?;
    check_alpha(&raw.alpha)?;
    let inst = Instance {
        m: raw.m,
        c: raw.c.clone(),
        alpha: raw.alpha.clone(),
    };
    // Every coordinate must be positive somewhere on the feasible cone; by
    // homogeneity x_i ≥ 1 is as good as x_i > 0.
    let cone = inst.feasible_cone();
    for i in 0..inst.m {
        let mut e = vec![Rational::zero(); inst.m];
        e[i] = rational::int(1);
        let lift = AffineRow::new(e, WeakRelation::Ge, rational::int(1));
        let zero = vec![Rational::zero(); inst.m];
        if let OptimizeResult::Infeasible(_) = optimize(&zero, &cone, &[lift]) {
            return Err(ModelError::DimensionForcedZero(i));
        }
    }
    Ok(inst)
}

impl Instance {
    pub fn new(c: Vec<Vec<Rational>>, alpha: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let m = alpha
            .first()
            .or(c.first())
            .map(Vec::len)
            .ok_or_else(|| ModelError::DimensionMismatch("cannot infer M".into()))?;
        validate_instance(&RawInstance {
            m,
            n: alpha.len(),
            l: c.len(),
            c,
            alpha,
        })
    }

    /// Same constraints, different feature map.
    pub fn with_alpha(&self, alpha: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        check_matrix("alpha", &alpha, alpha.len(), self.m)?;
        if alpha.is_empty() {
            return Err(ModelError::DimensionMismatch("N must be positive".into()));
        }
        check_alpha(&alpha)?;
        Ok(Instance {
            m: self.m,
            c: self.c.clone(),
            alpha,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn l(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[Vec<Rational>] {
        &self.c
    }

    pub fn alpha(&self) -> &[Vec<Rational>] {
        &self.alpha
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            m: self.m,
            n: self.n(),
            l: self.l(),
            c: self.c.clone(),
            alpha: self.alpha.clone(),
        }
    }

    /// `{x ≥ 0, Cx ≤ 0}` as a linear system over `x`.
    pub fn feasible_cone(&self) -> LinearSystem {
        let mut s = LinearSystem::new(self.m);
        for i in 0..self.m {
            let mut e = vec![Rational::zero(); self.m];
            e[i] = rational::int(1);
            s.push_weak(e, WeakRelation::Ge);
        }
        for row in &self.c {
            s.push_weak(row.clone(), WeakRelation::Le);
        }
        s
    }

    /// Feature vector `αx`.
    pub fn features(&self, x: &[Rational]) -> Vec<Rational> {
        rational::mat_vec(&self.alpha, x)
    }

    fn check_dim(&self, x: &OutputVector) -> Result<(), ModelError> {
        if x.dim() != self.m {
            return Err(ModelError::DimensionMismatch(format!(
                "vector has {} entries, instance has M = {}",
                x.dim(),
                self.m
            )));
        }
        Ok(())
    }
}

/// A nonnegative output vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutputVector {
    #[serde(with = "rational::serde_vec")]
    entries: Vec<Rational>,
}

impl OutputVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self, ModelError> {
        if let Some(i) = entries.iter().position(Signed::is_negative) {
            return Err(ModelError::NegativeEntry(i));
        }
        Ok(OutputVector { entries })
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        rational::is_zero_vec(&self.entries)
    }

    pub fn l1_norm(&self) -> Rational {
        rational::sum(&self.entries)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| self.entries[i].is_positive())
            .collect()
    }

    pub fn scaled(&self, k: &Rational) -> Result<Self, ModelError> {
        OutputVector::new(rational::scale(&self.entries, k))
    }
}

/// Support `S(x)` and binding set `V(x)`, both sorted and 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SufficientStatistic {
    pub support: Vec<usize>,
    pub binding: Vec<usize>,
}

impl SufficientStatistic {
    /// Coordinates outside the support, for an `m`-dimensional space.
    pub fn off_support(&self, m: usize) -> Vec<usize> {
        (0..m).filter(|i| !self.support.contains(i)).collect()
    }
}

pub fn sufficient_statistic(
    x: &OutputVector,
    instance: &Instance,
) -> Result<SufficientStatistic, ModelError> {
    instance.check_dim(x)?;
    let binding = instance
        .c
        .iter()
        .enumerate()
        .filter(|(_, row)| dot(row, &x.entries).is_zero())
        .map(|(l, _)| l)
        .collect();
    Ok(SufficientStatistic {
        support: x.support(),
        binding,
    })
}

pub fn is_feasible(x: &OutputVector, instance: &Instance) -> Result<bool, ModelError> {
    instance.check_dim(x)?;
    Ok(instance
        .c
        .iter()
        .all(|row| !dot(row, &x.entries).is_positive()))
}

/// Feasible input vectors and an arbitrary aggregate of the same dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationOperation {
    inputs: Vec<OutputVector>,
    aggregate: OutputVector,
}

impl AggregationOperation {
    pub fn new(
        inputs: Vec<OutputVector>,
        aggregate: OutputVector,
        instance: &Instance,
    ) -> Result<Self, ModelError> {
        if inputs.is_empty() {
            return Err(ModelError::EmptyList);
        }
        instance.check_dim(&aggregate)?;
        for (k, x) in inputs.iter().enumerate() {
            if !is_feasible(x, instance)? {
                return Err(ModelError::InfeasibleInput(k));
            }
        }
        Ok(AggregationOperation { inputs, aggregate })
    }

    pub fn inputs(&self) -> &[OutputVector] {
        &self.inputs
    }

    pub fn aggregate(&self) -> &OutputVector {
        &self.aggregate
    }

    pub fn k(&self) -> usize {
        self.inputs.len()
    }
}

/// `R(x) = ν·(αx)` with budget `E`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearReward {
    #[serde(with = "rational::serde_vec")]
    nu: Vec<Rational>,
    #[serde(with = "rational::serde_rational")]
    budget: Rational,
}

impl LinearReward {
    pub fn new(nu: Vec<Rational>, budget: Rational) -> Result<Self, ModelError> {
        if nu.iter().any(Signed::is_negative) || !nu.iter().any(Signed::is_positive) {
            return Err(ModelError::InvalidReward);
        }
        if !budget.is_positive() {
            return Err(ModelError::NonPositiveBudget);
        }
        Ok(LinearReward { nu, budget })
    }

    pub fn nu(&self) -> &[Rational] {
        &self.nu
    }

    pub fn budget(&self) -> &Rational {
        &self.budget
    }

    /// Reward as a linear functional on outputs: `αᵀν`.
    pub fn output_weights(&self, instance: &Instance) -> Vec<Rational> {
        rational::vec_mat(&self.nu, instance.alpha(), instance.m())
    }

    pub fn value(&self, x: &[Rational], instance: &Instance) -> Rational {
        dot(&self.nu, &instance.features(x))
    }
}

/// The two-feature weight matrix `[[1, 0, q], [0, 1, q]]` used throughout
/// the three-dimensional examples.
pub fn alpha_q(q: Rational) -> Vec<Vec<Rational>> {
    use rational::int;
    vec![vec![int(1), int(0), q.clone()], vec![int(0), int(1), q]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ints, ratio};

    fn ov(v: &[i64]) -> OutputVector {
        OutputVector::new(ints(v)).unwrap()
    }

    #[test]
    fn accepts_example_instances() {
        assert!(Instance::new(vec![ints(&[1, 1, -1])], alpha_q(ratio(1, 5))).is_ok());
        assert!(Instance::new(vec![], alpha_q(ratio(3, 5))).is_ok());
        assert!(Instance::new(vec![ints(&[-1, -1, 1])], alpha_q(int(2))).is_ok());
    }

    #[test]
    fn rejects_bad_alpha() {
        let zero_row = vec![ints(&[0, 0]), ints(&[1, 0])];
        assert_eq!(
            Instance::new(vec![], zero_row),
            Err(ModelError::ZeroAlphaRow(0))
        );
        let neg = vec![ints(&[1, -1])];
        assert_eq!(
            Instance::new(vec![], neg),
            Err(ModelError::NegativeAlphaEntry { row: 0, col: 1 })
        );
    }

    #[test]
    fn detects_forced_zero_coordinate() {
        // x1 ≤ 0 forces the first coordinate to vanish
        let c = vec![ints(&[1, 0]), ints(&[-1, 1])];
        assert_eq!(
            Instance::new(c, vec![ints(&[1, 1])]),
            Err(ModelError::DimensionForcedZero(0))
        );
    }

    #[test]
    fn dimension_mismatch() {
        let raw = RawInstance {
            m: 3,
            n: 1,
            l: 1,
            c: vec![ints(&[1, 1])],
            alpha: vec![ints(&[1, 1, 1])],
        };
        assert!(matches!(
            validate_instance(&raw),
            Err(ModelError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn statistics_of_example_vectors() {
        let inst = Instance::new(vec![ints(&[-1, -1, 1])], alpha_q(int(2))).unwrap();
        let s = sufficient_statistic(&ov(&[1, 0, 1]), &inst).unwrap();
        assert_eq!(s.support, vec![0, 2]);
        assert_eq!(s.binding, vec![0]);
        let z = sufficient_statistic(&ov(&[0, 0, 0]), &inst).unwrap();
        assert!(z.support.is_empty());
        assert_eq!(z.binding, vec![0]);
        assert!(!is_feasible(&ov(&[0, 0, 1]), &inst).unwrap());
        assert!(is_feasible(&ov(&[0, 0, 0]), &inst).unwrap());

        let inst2 = Instance::new(
            vec![ints(&[1, -1, 0]), vec![int(1), ratio(-1, 4), int(-1)]],
            vec![ints(&[1, 1, 1])],
        )
        .unwrap();
        let s = sufficient_statistic(&ov(&[1, 1, 2]), &inst2).unwrap();
        assert_eq!(s.support, vec![0, 1, 2]);
        assert_eq!(s.binding, vec![0]);
        assert!(is_feasible(&ov(&[3, 5, 3]), &inst2).unwrap());
    }

    #[test]
    fn rejects_negative_outputs_and_bad_rewards() {
        assert_eq!(
            OutputVector::new(ints(&[1, -1])),
            Err(ModelError::NegativeEntry(1))
        );
        assert_eq!(
            LinearReward::new(ints(&[0, 0]), int(1)),
            Err(ModelError::InvalidReward)
        );
        assert_eq!(
            LinearReward::new(ints(&[1, 0]), int(0)),
            Err(ModelError::NonPositiveBudget)
        );
    }

    #[test]
    fn aggregation_requires_feasible_inputs() {
        let inst = Instance::new(vec![ints(&[-1, -1, 1])], alpha_q(int(2))).unwrap();
        assert_eq!(
            AggregationOperation::new(vec![], ov(&[0, 0, 1]), &inst),
            Err(ModelError::EmptyList)
        );
        assert_eq!(
            AggregationOperation::new(vec![ov(&[0, 0, 1])], ov(&[0, 0, 1]), &inst),
            Err(ModelError::InfeasibleInput(0))
        );
        // infeasible aggregate is allowed
        assert!(AggregationOperation::new(
            vec![ov(&[1, 0, 1]), ov(&[0, 1, 1])],
            ov(&[0, 0, 1]),
            &inst
        )
        .is_ok());
    }
}
