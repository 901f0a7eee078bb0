//! Reference instances shipped with the crate and the checks that replay
//! their expected verdicts.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::aggregate::mechanisms;
use crate::document::{InstanceDocument, RuleName};
use crate::elicit::{decide_elicitable, ElicitabilityVerdict, InelicitableReason};
use crate::model::{sufficient_statistic, AggregationOperation, Instance, OutputVector};
use crate::oracle::verdict_certificates_hold;
use crate::power::{
    corollary_special_case, decide_expansion_existential, expansion_fixed_alpha, CorollaryOutcome,
    ExistentialVerdict,
};
use crate::rational::{self, Rational};

/// Directory name of the current reference set.
pub const VERSION: &str = "v1";

const FILES: [(&str, &str); 6] = [
    ("feasibility-expansion", include_str!("../data/reference/v1/feasibility-expansion.json")),
    ("support-expansion", include_str!("../data/reference/v1/support-expansion.json")),
    ("binding-contraction", include_str!("../data/reference/v1/binding-contraction.json")),
    ("insufficient-support", include_str!("../data/reference/v1/insufficient-support.json")),
    ("insufficient-binding", include_str!("../data/reference/v1/insufficient-binding.json")),
    ("addition-binding", include_str!("../data/reference/v1/addition-binding.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedVerdict {
    Elicitable,
    Inelicitable,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedVector {
    #[serde(with = "rational::serde_vec")]
    pub vector: Vec<Rational>,
    pub verdict: ExpectedVerdict,
    #[serde(default)]
    pub direction_parallel_to: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct Direction(#[serde(with = "rational::serde_vec")] pub Vec<Rational>);

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct Matrix(#[serde(with = "rational::serde_matrix")] pub Vec<Vec<Rational>>);

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedMechanisms {
    pub feasibility_expansion: bool,
    pub support_expansion: Vec<bool>,
    pub binding_contraction: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedSpecialCase {
    Agrees,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default)]
    pub vectors: Vec<ExpectedVector>,
    /// Inputs first, then the aggregate.
    #[serde(default)]
    pub support_sets: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub binding_sets: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub mechanisms: Option<ExpectedMechanisms>,
    #[serde(default)]
    pub fixed_alpha_expanding: Option<bool>,
    #[serde(default)]
    pub existential_expanding: Option<bool>,
    #[serde(default)]
    pub alpha_witness: Option<Matrix>,
    #[serde(default)]
    pub special_case: Option<ExpectedSpecialCase>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub name: String,
    pub description: String,
    pub instance: InstanceDocument,
    pub expected: Expected,
}

pub fn entries() -> Vec<Entry> {
    FILES
        .iter()
        .map(|(name, text)| {
            let e: Entry = serde_json::from_str(text)
                .unwrap_or_else(|err| panic!("reference file {name} is malformed: {err}"));
            assert_eq!(e.name, *name, "reference file name mismatch");
            e
        })
        .collect()
}

pub fn entry(name: &str) -> Option<Entry> {
    entries().into_iter().find(|e| e.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryOutcome {
    pub name: String,
    pub checks: Vec<Check>,
}

impl EntryOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            label: label.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// `d = c·target` for some `c > 0`.
pub fn is_positive_multiple(d: &[Rational], target: &[Rational]) -> bool {
    if d.len() != target.len() {
        return false;
    }
    let Some(i) = target.iter().position(|t| !t.is_zero()) else {
        return false;
    };
    let c = &d[i] / &target[i];
    c.is_positive() && d.iter().zip(target).all(|(a, b)| *a == &c * b)
}

fn verdict_class(v: &ElicitabilityVerdict) -> ExpectedVerdict {
    match v {
        ElicitabilityVerdict::Inelicitable(InelicitableReason::Infeasible) => ExpectedVerdict::Infeasible,
        ElicitabilityVerdict::Inelicitable(_) => ExpectedVerdict::Inelicitable,
        _ => ExpectedVerdict::Elicitable,
    }
}

fn check_vectors(out: &mut EntryOutcome, expected: &Expected, inst: &Instance) {
    for ev in &expected.vectors {
        let label = format!("verdict of {}", rational::Show(&ev.vector));
        let x = match OutputVector::new(ev.vector.clone()) {
            Ok(x) => x,
            Err(e) => {
                out.check(label, false, e.to_string());
                continue;
            }
        };
        let v = match decide_elicitable(&x, inst) {
            Ok(v) => v,
            Err(e) => {
                out.check(label, false, e.to_string());
                continue;
            }
        };
        let got = verdict_class(&v);
        out.check(&label, got == ev.verdict, format!("{got:?}"));
        out.check(
            format!("certificate of {}", rational::Show(&ev.vector)),
            verdict_certificates_hold(&x, inst, &v),
            "re-verified",
        );
        if let Some(target) = &ev.direction_parallel_to {
            let ok = v.direction().is_some_and(|d| is_positive_multiple(d, &target.0));
            let shown = v.direction().map(|d| rational::Show(d).to_string()).unwrap_or_default();
            out.check(format!("direction of {}", rational::Show(&ev.vector)), ok, shown);
        }
    }
}

fn check_statistics(out: &mut EntryOutcome, expected: &Expected, inst: &Instance, op: &AggregationOperation) {
    let vectors: Vec<&OutputVector> = op.inputs().iter().chain(std::iter::once(op.aggregate())).collect();
    let stats: Vec<_> = vectors
        .iter()
        .map(|x| sufficient_statistic(x, inst).expect("validated operation"))
        .collect();
    if let Some(s) = &expected.support_sets {
        let got: Vec<Vec<usize>> = stats.iter().map(|s| s.support.clone()).collect();
        out.check("support sets", &got == s, format!("{got:?}"));
    }
    if let Some(b) = &expected.binding_sets {
        let got: Vec<Vec<usize>> = stats.iter().map(|s| s.binding.clone()).collect();
        out.check("binding sets", &got == b, format!("{got:?}"));
    }
}

fn check_operation(out: &mut EntryOutcome, entry: &Entry, inst: &Instance, op: &AggregationOperation) {
    let expected = &entry.expected;
    check_statistics(out, expected, inst, op);
    let report = mechanisms(op, inst);
    if let Some(m) = &expected.mechanisms {
        let ok = report.feasibility_expansion == m.feasibility_expansion
            && report.support_expansion == m.support_expansion
            && report.binding_contraction == m.binding_contraction;
        out.check("mechanisms", ok, format!("{report:?}"));
    }
    // Rule-capability spot checks.
    match entry.instance.aggregation.as_ref().and_then(|a| a.rule) {
        Some(RuleName::Intersection) => out.check(
            "intersection never expands support",
            report.support_expansion.iter().all(|s| !s),
            format!("{:?}", report.support_expansion),
        ),
        Some(RuleName::Addition) => out.check(
            "addition never expands feasibility",
            !report.feasibility_expansion,
            format!("{}", report.feasibility_expansion),
        ),
        None => {}
    }
    if let Some(want) = expected.fixed_alpha_expanding {
        match expansion_fixed_alpha(op, inst) {
            Ok(v) => out.check("fixed feature map expansion", v.expanding == want, format!("{}", v.expanding)),
            Err(e) => out.check("fixed feature map expansion", false, e.to_string()),
        }
    }
    if let Some(want) = expected.existential_expanding {
        match decide_expansion_existential(op, inst) {
            Ok(v) => {
                out.check("existential expansion", v.is_expanding() == want, format!("{}", v.is_expanding()));
                if let (Some(a), ExistentialVerdict::Expanding { alpha_witness, .. }) = (&expected.alpha_witness, &v) {
                    out.check("feature map witness", *alpha_witness == a.0, format!("{alpha_witness:?}"));
                }
            }
            Err(e) => out.check("existential expansion", false, e.to_string()),
        }
    }
    if let Some(sc) = expected.special_case {
        match corollary_special_case(op, inst) {
            Ok(got) => {
                let ok = matches!(
                    (sc, got),
                    (ExpectedSpecialCase::Agrees, CorollaryOutcome::Applicable(true))
                        | (ExpectedSpecialCase::NotApplicable, CorollaryOutcome::NotApplicable)
                );
                out.check("no-binding special case", ok, format!("{got:?}"));
            }
            Err(e) => out.check("no-binding special case", false, e.to_string()),
        }
    }
}

pub fn run_entry(entry: &Entry) -> EntryOutcome {
    let mut out = EntryOutcome {
        name: entry.name.clone(),
        checks: Vec::new(),
    };
    let inst = match entry.instance.instance() {
        Ok(i) => i,
        Err(e) => {
            out.check("instance is valid", false, e.to_string());
            return out;
        }
    };
    out.check("instance is valid", true, "");
    check_vectors(&mut out, &entry.expected, &inst);
    if entry.instance.aggregation.is_some() {
        match entry.instance.operation(&inst) {
            Ok(op) => check_operation(&mut out, entry, &inst, &op),
            Err(e) => out.check("operation is valid", false, e.to_string()),
        }
    }
    out
}

pub fn run_all() -> Vec<EntryOutcome> {
    entries().iter().map(run_entry).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ints, ratio};

    #[test]
    fn all_reference_entries_pass() {
        for outcome in run_all() {
            assert!(outcome.passed(), "{outcome:#?}");
        }
    }

    #[test]
    fn positive_multiples() {
        assert!(is_positive_multiple(&ints(&[-3, -3, 5]), &[ratio(-3, 5), ratio(-3, 5), int(1)]));
        assert!(!is_positive_multiple(&ints(&[3, 3, -5]), &[ratio(-3, 5), ratio(-3, 5), int(1)]));
        assert!(!is_positive_multiple(&ints(&[-3, -2, 5]), &ints(&[-3, -3, 5])));
    }
}
