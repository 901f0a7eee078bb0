//! JSON instance documents: constraints, feature map and an optional
//! aggregation block, with every rational written as a string.

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate_addition, aggregate_intersection};
use crate::model::{validate_instance, AggregationOperation, Instance, ModelError, OutputVector, RawInstance};
use crate::rational::{self, Rational};

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Parse(serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("aggregate does not equal the {rule:?} of the inputs; expected {expected}")]
    RuleMismatch { rule: RuleName, expected: String },
    #[error("document has no aggregation block")]
    MissingAggregation,
}

impl From<serde_json::Error> for DocumentError {
    fn from(e: serde_json::Error) -> Self {
        DocumentError::Parse(e)
    }
}

impl DocumentError {
    /// Parse failures versus violated modelling assumptions.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, DocumentError::Parse(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleName {
    Intersection,
    Addition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationBlock {
    #[serde(with = "rational::serde_matrix")]
    pub inputs: Vec<Vec<Rational>>,
    #[serde(with = "rational::serde_vec")]
    pub aggregate: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleName>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_vec")]
    pub weights: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "C", with = "rational::serde_matrix")]
    pub c: Vec<Vec<Rational>>,
    #[serde(with = "rational::serde_matrix")]
    pub alpha: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<AggregationBlock>,
}

mod opt_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Wrapped(#[serde(with = "rational::serde_vec")] Vec<Rational>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        v.clone().map(Wrapped).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

fn vector(entries: &[Rational]) -> Result<OutputVector, ModelError> {
    OutputVector::new(entries.to_vec())
}

impl InstanceDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_instance(instance: &Instance) -> Self {
        let raw = instance.to_raw();
        Self {
            m: raw.m,
            n: raw.n,
            l: raw.l,
            c: raw.c,
            alpha: raw.alpha,
            aggregation: None,
        }
    }

    pub fn with_operation(mut self, op: &AggregationOperation, rule: Option<RuleName>, weights: Option<Vec<Rational>>) -> Self {
        self.aggregation = Some(AggregationBlock {
            inputs: op.inputs().iter().map(|x| x.entries().to_vec()).collect(),
            aggregate: op.aggregate().entries().to_vec(),
            rule,
            weights,
        });
        self
    }

    pub fn instance(&self) -> Result<Instance, DocumentError> {
        Ok(validate_instance(&RawInstance {
            m: self.m,
            n: self.n,
            l: self.l,
            c: self.c.clone(),
            alpha: self.alpha.clone(),
        })?)
    }

    /// The aggregation operation, with the declared rule re-applied and
    /// compared against the stated aggregate. Addition without weights uses
    /// unit weights.
    pub fn operation(&self, instance: &Instance) -> Result<AggregationOperation, DocumentError> {
        let block = self.aggregation.as_ref().ok_or(DocumentError::MissingAggregation)?;
        let inputs = block
            .inputs
            .iter()
            .map(|x| vector(x))
            .collect::<Result<Vec<_>, _>>()?;
        let aggregate = vector(&block.aggregate)?;
        if let Some(rule) = block.rule {
            let expected = match rule {
                RuleName::Intersection => aggregate_intersection(&inputs)?,
                RuleName::Addition => {
                    let w = block
                        .weights
                        .clone()
                        .unwrap_or_else(|| vec![rational::int(1); inputs.len()]);
                    aggregate_addition(&inputs, &w)?
                }
            };
            if expected != aggregate {
                return Err(DocumentError::RuleMismatch {
                    rule,
                    expected: rational::Show(expected.entries()).to_string(),
                });
            }
        }
        Ok(AggregationOperation::new(inputs, aggregate, instance)?)
    }
}
