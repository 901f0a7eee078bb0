//! Report documents and their offline re-verification.

use serde::{Deserialize, Serialize};

use elicit_core::aggregate::{mechanisms, MechanismReport};
use elicit_core::document::InstanceDocument;
use elicit_core::elicit::ElicitabilityVerdict;
use elicit_core::linsys::{verify_certificate, LinearSystem, MotzkinCertificate};
use elicit_core::model::{Instance, OutputVector};
use elicit_core::oracle::verdict_certificates_hold;
use elicit_core::power::{verify_power_witness, PowerWitness};
use elicit_core::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Query,
    Input,
    Aggregate,
}

/// One elicitability verdict together with the feature map it was decided
/// under.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorVerdict {
    pub role: Role,
    #[serde(with = "rational::serde_vec")]
    pub vector: Vec<Rational>,
    #[serde(with = "rational::serde_matrix")]
    pub alpha: Vec<Vec<Rational>>,
    pub verdict: ElicitabilityVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemCertificate {
    pub system: LinearSystem,
    pub certificate: MotzkinCertificate,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Certificates {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<VectorVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_matrix")]
    pub alpha_witness: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_witness: Option<PowerWitness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub motzkin: Vec<SystemCertificate>,
}

mod opt_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Wrapped(#[serde(with = "rational::serde_matrix")] Vec<Vec<Rational>>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<Vec<Rational>>>, s: S) -> Result<S::Ok, S::Error> {
        v.clone().map(Wrapped).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<Rational>>>, D::Error> {
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceDocument>,
    pub certificates: Certificates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanisms: Option<MechanismReport>,
    pub timing_ms: u64,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, verdict: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            verdict: verdict.into(),
            instance: None,
            certificates: Certificates::default(),
            mechanisms: None,
            timing_ms: 0,
            details: serde_json::Value::Null,
        }
    }
}

/// Re-checks every certificate in a report against its embedded instance.
/// Returns the list of failures; empty means the report verifies.
pub fn verify_report(report: &Report) -> Vec<String> {
    let mut failures = Vec::new();
    for c in &report.certificates.motzkin {
        if !verify_certificate(&c.system, &c.certificate) {
            failures.push("Motzkin certificate does not refute its system".to_string());
        }
    }
    let needs_instance = !report.certificates.verdicts.is_empty()
        || report.certificates.power_witness.is_some()
        || report.mechanisms.is_some();
    if !needs_instance {
        return failures;
    }
    let Some(doc) = &report.instance else {
        failures.push("report carries verdicts but no instance".into());
        return failures;
    };
    let instance = match doc.instance() {
        Ok(i) => i,
        Err(e) => {
            failures.push(format!("embedded instance is invalid: {e}"));
            return failures;
        }
    };
    for v in &report.certificates.verdicts {
        let shown = rational::Show(&v.vector);
        let Ok(x) = OutputVector::new(v.vector.clone()) else {
            failures.push(format!("vector {shown} has a negative entry"));
            continue;
        };
        let Ok(under) = instance.with_alpha(v.alpha.clone()) else {
            failures.push(format!("feature map of {shown} is invalid"));
            continue;
        };
        if !verdict_certificates_hold(&x, &under, &v.verdict) {
            failures.push(format!("certificate for {shown} does not verify"));
        }
    }
    if report.command == "expand" {
        check_expansion_claim(report, &mut failures);
    }
    if report.mechanisms.is_some() || report.certificates.power_witness.is_some() {
        match doc.operation(&instance) {
            Ok(op) => {
                if let Some(m) = &report.mechanisms {
                    if mechanisms(&op, &instance) != *m {
                        failures.push("mechanism report does not match the operation".into());
                    }
                }
                if let Some(w) = &report.certificates.power_witness {
                    if !verify_power_witness(&op, &instance, w) {
                        failures.push("power witness does not verify".into());
                    }
                }
            }
            Err(e) => failures.push(format!("embedded operation is invalid: {e}")),
        }
    }
    failures
}

/// An expanding claim needs elicitable inputs and an inelicitable aggregate
/// under one feature map.
fn check_expansion_claim(report: &Report, failures: &mut Vec<String>) {
    if report.verdict != "expanding" {
        return;
    }
    let verdicts = &report.certificates.verdicts;
    let inputs_ok = verdicts
        .iter()
        .filter(|v| v.role == Role::Input)
        .all(|v| v.verdict.is_elicitable());
    let aggregate_ok = verdicts
        .iter()
        .any(|v| v.role == Role::Aggregate && !v.verdict.is_elicitable());
    let same_alpha = verdicts.windows(2).all(|w| w[0].alpha == w[1].alpha);
    if !(inputs_ok && aggregate_ok && same_alpha) {
        failures.push("verdicts do not support the expanding claim".into());
    }
}

pub fn vector_verdict(role: Role, x: &OutputVector, instance: &Instance, verdict: ElicitabilityVerdict) -> VectorVerdict {
    VectorVerdict {
        role,
        vector: x.entries().to_vec(),
        alpha: instance.alpha().to_vec(),
        verdict,
    }
}
