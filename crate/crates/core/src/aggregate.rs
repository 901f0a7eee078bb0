//! Aggregation rules and the three mechanism predicates.

use serde::{Deserialize, Serialize};

use crate::model::{
    is_feasible, sufficient_statistic, AggregationOperation, Instance, ModelError, OutputVector,
};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismReport {
    pub feasibility_expansion: bool,
    pub support_expansion: Vec<bool>,
    pub binding_contraction: Vec<bool>,
}

impl MechanismReport {
    /// Feasibility expansion, or for every input support expansion or
    /// binding contraction.
    pub fn weak_necessity(&self) -> bool {
        self.feasibility_expansion
            || self
                .support_expansion
                .iter()
                .zip(&self.binding_contraction)
                .all(|(s, b)| *s || *b)
    }
}

fn check_dims(inputs: &[OutputVector]) -> Result<usize, ModelError> {
    let first = inputs.first().ok_or(ModelError::EmptyList)?;
    let m = first.dim();
    if let Some(k) = inputs.iter().position(|x| x.dim() != m) {
        return Err(ModelError::DimensionMismatch(format!(
            "input {k} has {} entries, expected {m}",
            inputs[k].dim()
        )));
    }
    Ok(m)
}

/// Coordinate-wise minimum.
pub fn aggregate_intersection(inputs: &[OutputVector]) -> Result<OutputVector, ModelError> {
    let m = check_dims(inputs)?;
    let entries = (0..m)
        .map(|i| {
            inputs
                .iter()
                .map(|x| &x.entries()[i])
                .min()
                .cloned()
                .expect("inputs are nonempty")
        })
        .collect();
    OutputVector::new(entries)
}

/// Weighted sum with nonnegative weights.
pub fn aggregate_addition(
    inputs: &[OutputVector],
    weights: &[Rational],
) -> Result<OutputVector, ModelError> {
    let m = check_dims(inputs)?;
    if weights.len() != inputs.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "{} weights for {} inputs",
            weights.len(),
            inputs.len()
        )));
    }
    if let Some(k) = weights.iter().position(num_traits::Signed::is_negative) {
        return Err(ModelError::NegativeWeight(k));
    }
    let mut acc = vec![rational::int(0); m];
    for (x, w) in inputs.iter().zip(weights) {
        acc = rational::add(&acc, &rational::scale(x.entries(), w));
    }
    OutputVector::new(acc)
}

pub fn mechanisms(op: &AggregationOperation, instance: &Instance) -> MechanismReport {
    let agg = sufficient_statistic(op.aggregate(), instance).expect("operation was validated");
    let feasibility_expansion = !is_feasible(op.aggregate(), instance).expect("validated");
    let mut support_expansion = Vec::with_capacity(op.k());
    let mut binding_contraction = Vec::with_capacity(op.k());
    for x in op.inputs() {
        let s = sufficient_statistic(x, instance).expect("validated");
        support_expansion.push(!agg.support.iter().all(|i| s.support.contains(i)));
        binding_contraction.push(!s.binding.iter().all(|l| agg.binding.contains(l)));
    }
    MechanismReport {
        feasibility_expansion,
        support_expansion,
        binding_contraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::alpha_q;
    use crate::rational::{int, ints, ratio};

    fn ov(v: &[i64]) -> OutputVector {
        OutputVector::new(ints(v)).unwrap()
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(
            aggregate_intersection(&[ov(&[1, 0, 1]), ov(&[0, 1, 1])]).unwrap(),
            ov(&[0, 0, 1])
        );
        assert_eq!(
            aggregate_intersection(&[ov(&[2, 3]), ov(&[3, 2]), ov(&[1, 1])]).unwrap(),
            ov(&[1, 1])
        );
        assert_eq!(aggregate_intersection(&[]), Err(ModelError::EmptyList));
    }

    #[test]
    fn addition_examples() {
        let half = ratio(1, 2);
        assert_eq!(
            aggregate_addition(&[ov(&[1, 0, 0]), ov(&[0, 1, 0])], &[half.clone(), half]).unwrap(),
            OutputVector::new(vec![ratio(1, 2), ratio(1, 2), int(0)]).unwrap()
        );
        assert_eq!(
            aggregate_addition(&[ov(&[1, 1, 2]), ov(&[2, 4, 1])], &ints(&[1, 1])).unwrap(),
            ov(&[3, 5, 3])
        );
        assert_eq!(
            aggregate_addition(&[ov(&[1, 1, 2]), ov(&[2, 4, 1])], &ints(&[0, 1])).unwrap(),
            ov(&[2, 4, 1])
        );
        assert!(matches!(
            aggregate_addition(&[ov(&[1])], &ints(&[1, 1])),
            Err(ModelError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn mechanisms_of_examples() {
        let inst = Instance::new(vec![ints(&[-1, -1, 1])], alpha_q(int(2))).unwrap();
        let op =
            AggregationOperation::new(vec![ov(&[1, 0, 1]), ov(&[0, 1, 1])], ov(&[0, 0, 1]), &inst)
                .unwrap();
        assert!(mechanisms(&op, &inst).feasibility_expansion);

        let inst = Instance::new(vec![], alpha_q(ratio(3, 5))).unwrap();
        let agg = OutputVector::new(vec![ratio(1, 2), ratio(1, 2), int(0)]).unwrap();
        let op = AggregationOperation::new(vec![ov(&[1, 0, 0]), ov(&[0, 1, 0])], agg, &inst)
            .unwrap();
        let r = mechanisms(&op, &inst);
        assert!(!r.feasibility_expansion);
        assert_eq!(r.support_expansion, vec![true, true]);
        assert_eq!(r.binding_contraction, vec![false, false]);

        let inst = Instance::new(vec![ints(&[1, 1, -1])], alpha_q(ratio(1, 5))).unwrap();
        let op =
            AggregationOperation::new(vec![ov(&[1, 0, 1]), ov(&[0, 1, 1])], ov(&[0, 0, 1]), &inst)
                .unwrap();
        let r = mechanisms(&op, &inst);
        assert_eq!(r.binding_contraction, vec![true, true]);
        assert!(r.weak_necessity());
    }
}
