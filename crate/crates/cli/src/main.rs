mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand};

use elicit_core::aggregate::mechanisms;
use elicit_core::catalog;
use elicit_core::document::{DocumentError, InstanceDocument};
use elicit_core::elicit::{decide_elicitable, ElicitabilityVerdict, InelicitableReason};
use elicit_core::model::{sufficient_statistic, AggregationOperation, Instance, ModelError, OutputVector};
use elicit_core::oracle::{self, Dims};
use elicit_core::power::{
    construct_separating_alpha, decide_expansion_existential, expansion_fixed_alpha,
    ExistentialVerdict, ExpansionRoute,
};
use elicit_core::rational::{self, ParseRationalError, Rational};

use report::{vector_verdict, Report, Role, SystemCertificate};

#[derive(Parser)]
#[command(name = "elicit", version)]
#[command(about = "Exact elicitability and aggregation analysis with checkable certificates")]
struct Cli {
    /// Print the full report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing; the exit code carries the verdict.
    #[arg(long, global = true)]
    quiet: bool,
    /// Seed for random instances and feature maps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random trials (feature maps per check, or cases in a battery).
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    /// Denominator of the grid oracles.
    #[arg(long, global = true, default_value_t = 5)]
    grid_denominator: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file against the modelling assumptions.
    Validate { path: PathBuf },
    /// Decide whether an output vector is elicitable.
    Elicit {
        path: PathBuf,
        /// Comma-separated rationals, e.g. "1/2,1/2,0".
        #[arg(allow_hyphen_values = true)]
        vector: String,
    },
    /// Report feasibility expansion, support expansion and binding set
    /// contraction for the file's aggregation.
    Mechanisms { path: PathBuf },
    /// Decide elicitability expansion of the file's aggregation.
    #[command(group(ArgGroup::new("mode").required(true).args(["fixed_alpha", "existential"])))]
    Expand {
        path: PathBuf,
        /// Use the file's feature map.
        #[arg(long)]
        fixed_alpha: bool,
        /// Ask whether any feature map works, and build one.
        #[arg(long)]
        existential: bool,
    },
    /// Build an eliciting linear reward for an output vector.
    ConstructReward {
        path: PathBuf,
        #[arg(allow_hyphen_values = true)]
        vector: String,
    },
    /// Build a feature map separating a budget-reducing direction.
    ConstructAlpha {
        /// Comma-separated rationals with a positive entry and negative sum.
        #[arg(allow_hyphen_values = true)]
        direction: String,
    },
    /// Cross-check exact decisions with brute-force oracles, on a file or
    /// on `--trials` random cases.
    Oracle { path: Option<PathBuf> },
    /// Replay the bundled reference instances.
    PaperExamples,
    /// Re-check every certificate in a saved JSON report.
    Verify { report: PathBuf },
}

/// Parse failures exit with 3; every other error is a domain error.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    let parse = err.chain().any(|e| {
        e.downcast_ref::<ParseRationalError>().is_some()
            || e.downcast_ref::<serde_json::Error>().is_some()
            || e.downcast_ref::<DocumentError>().is_some_and(DocumentError::is_parse_error)
    });
    if parse {
        3
    } else {
        2
    }
}

fn assumption(e: &ModelError) -> &'static str {
    match e {
        ModelError::ZeroAlphaRow(_) | ModelError::NegativeAlphaEntry { .. } => {
            "feature map assumption (nonnegative weights, every row positive somewhere)"
        }
        ModelError::DimensionForcedZero(_) => {
            "nondegeneracy assumption (every coordinate positive at some feasible output)"
        }
        ModelError::DimensionMismatch(_) => "shape of the instance",
        _ => "aggregation block",
    }
}

fn load(path: &Path) -> Result<InstanceDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    InstanceDocument::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn instance_of(doc: &InstanceDocument) -> Result<Instance> {
    doc.instance().map_err(|e| match &e {
        DocumentError::Model(m) => anyhow!("invalid instance: violates the {}: {m}", assumption(m)),
        _ => anyhow::Error::new(e),
    })
}

fn operation_of(doc: &InstanceDocument, instance: &Instance) -> Result<AggregationOperation> {
    doc.operation(instance).map_err(anyhow::Error::new)
}

fn parse_vector(text: &str) -> Result<Vec<Rational>> {
    text.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|t| t.trim().trim_matches('"'))
        .filter(|t| !t.is_empty())
        .map(|t| rational::parse_rational(t).map_err(anyhow::Error::new))
        .collect()
}

fn output_vector(text: &str, instance: &Instance) -> Result<OutputVector> {
    let v = parse_vector(text)?;
    if v.len() != instance.m() {
        bail!("vector has {} entries, the instance has {}", v.len(), instance.m());
    }
    Ok(OutputVector::new(v)?)
}

struct Outcome {
    code: u8,
    report: Report,
    summary: Vec<String>,
}

fn verdict_label(v: &ElicitabilityVerdict) -> (&'static str, u8) {
    match v {
        ElicitabilityVerdict::Inelicitable(InelicitableReason::Infeasible) => ("infeasible", 2),
        ElicitabilityVerdict::Inelicitable(_) => ("inelicitable", 1),
        _ => ("elicitable", 0),
    }
}

fn describe(v: &ElicitabilityVerdict) -> String {
    match v {
        ElicitabilityVerdict::Elicitable { reward, .. } => format!(
            "elicitable: reward ν = {} at budget {}",
            rational::Show(reward.nu()),
            rational::format_rational(reward.budget())
        ),
        ElicitabilityVerdict::ElicitableWithoutReward { diagnostic, .. } => {
            format!("elicitable (no reward: {diagnostic})")
        }
        ElicitabilityVerdict::Inelicitable(InelicitableReason::Infeasible) => "infeasible".into(),
        ElicitabilityVerdict::Inelicitable(InelicitableReason::ImprovingDirection(d)) => {
            format!("inelicitable: improving direction {}", rational::Show(d))
        }
    }
}

fn cmd_validate(path: &Path) -> Result<Outcome> {
    let doc = load(path)?;
    let inst = instance_of(&doc)?;
    if doc.aggregation.is_some() {
        operation_of(&doc, &inst)?;
    }
    let mut report = Report::new("validate", "valid");
    report.instance = Some(doc);
    Ok(Outcome {
        code: 0,
        report,
        summary: vec![format!("valid: M = {}, N = {}, L = {}", inst.m(), inst.n(), inst.l())],
    })
}

fn cmd_elicit(path: &Path, vector: &str, command: &str) -> Result<Outcome> {
    let doc = load(path)?;
    let inst = instance_of(&doc)?;
    let x = output_vector(vector, &inst)?;
    let v = decide_elicitable(&x, &inst)?;
    let (label, code) = verdict_label(&v);
    let summary = vec![describe(&v)];
    let verdict = if command == "construct-reward" && code == 0 {
        "reward"
    } else {
        label
    };
    let mut report = Report::new(command, verdict);
    report.instance = Some(doc);
    report.certificates.verdicts.push(vector_verdict(Role::Query, &x, &inst, v));
    Ok(Outcome { code, report, summary })
}

fn cmd_mechanisms(path: &Path) -> Result<Outcome> {
    let doc = load(path)?;
    let inst = instance_of(&doc)?;
    let op = operation_of(&doc, &inst)?;
    let m = mechanisms(&op, &inst);
    let stats = op
        .inputs()
        .iter()
        .chain(std::iter::once(op.aggregate()))
        .map(|x| sufficient_statistic(x, &inst))
        .collect::<Result<Vec<_>, _>>()?;
    let mut summary = vec![format!("feasibility expansion: {}", m.feasibility_expansion)];
    for k in 0..op.k() {
        summary.push(format!(
            "input {k}: support expansion {}, binding set contraction {}",
            m.support_expansion[k], m.binding_contraction[k]
        ));
    }
    summary.push(format!("some mechanism for every input: {}", m.weak_necessity()));
    let mut report = Report::new("mechanisms", "reported");
    report.details = serde_json::json!({
        "weak_necessity": m.weak_necessity(),
        "statistics": stats,
    });
    report.mechanisms = Some(m);
    report.instance = Some(doc);
    Ok(Outcome {
        code: 0,
        report,
        summary,
    })
}

fn cmd_expand(path: &Path, existential: bool) -> Result<Outcome> {
    let doc = load(path)?;
    let inst = instance_of(&doc)?;
    let op = operation_of(&doc, &inst)?;
    let mut report = Report::new("expand", "");
    report.mechanisms = Some(mechanisms(&op, &inst));
    let mut summary = Vec::new();
    let push_verdicts = |report: &mut Report, under: &Instance, v: &elicit_core::power::FixedAlphaVerdict| {
        for (x, iv) in op.inputs().iter().zip(&v.input_verdicts) {
            report.certificates.verdicts.push(vector_verdict(Role::Input, x, under, iv.clone()));
        }
        report
            .certificates
            .verdicts
            .push(vector_verdict(Role::Aggregate, op.aggregate(), under, v.aggregate_verdict.clone()));
    };
    let expanding = if existential {
        match decide_expansion_existential(&op, &inst)? {
            ExistentialVerdict::Expanding {
                route,
                power_witness,
                alpha_witness,
                fixed_check,
            } => {
                let under = inst.with_alpha(alpha_witness.clone())?;
                push_verdicts(&mut report, &under, &fixed_check);
                summary.push(match &route {
                    ExpansionRoute::Feasibility => "expanding: the aggregate is infeasible".to_string(),
                    ExpansionRoute::Direction(d) => {
                        format!("expanding: separating direction {}", rational::Show(d))
                    }
                });
                summary.push("feature map witness:".into());
                summary.extend(alpha_witness.iter().map(|r| format!("  {}", rational::Show(r))));
                report.details = serde_json::json!({ "route": route });
                report.certificates.alpha_witness = Some(alpha_witness);
                report.certificates.power_witness = power_witness;
                true
            }
            ExistentialVerdict::NotExpanding { evidence } => {
                summary.push(format!(
                    "not expanding: {} refuted combinations",
                    evidence.len()
                ));
                report.certificates.motzkin = evidence
                    .into_iter()
                    .map(|e| SystemCertificate {
                        system: e.system,
                        certificate: e.certificate,
                    })
                    .collect();
                false
            }
        }
    } else {
        let v = expansion_fixed_alpha(&op, &inst)?;
        push_verdicts(&mut report, &inst, &v);
        summary.push(format!(
            "inputs elicitable {:?}, aggregate elicitable {}",
            v.per_input_elicitable, v.aggregate_elicitable
        ));
        summary.insert(0, if v.expanding { "expanding" } else { "not expanding" }.into());
        v.expanding
    };
    report.verdict = if expanding { "expanding" } else { "not-expanding" }.into();
    report.instance = Some(doc);
    Ok(Outcome {
        code: if expanding { 0 } else { 1 },
        report,
        summary,
    })
}

fn cmd_construct_alpha(direction: &str) -> Result<Outcome> {
    let d = parse_vector(direction)?;
    let alpha = construct_separating_alpha(&d)?;
    let summary = alpha.iter().map(|r| rational::Show(r).to_string()).collect();
    let mut report = Report::new("construct-alpha", "constructed");
    report.certificates.alpha_witness = Some(alpha);
    Ok(Outcome {
        code: 0,
        report,
        summary,
    })
}

fn cmd_oracle(cli: &Cli, path: Option<&Path>) -> Result<Outcome> {
    let mut report = Report::new("oracle", "");
    let (clean, summary) = match path {
        Some(path) => {
            let doc = load(path)?;
            let inst = instance_of(&doc)?;
            let op = operation_of(&doc, &inst)?;
            let cross = oracle::cross_check(&op, &inst, cli.trials, cli.seed);
            let grid: Vec<_> = op
                .inputs()
                .iter()
                .chain(std::iter::once(op.aggregate()))
                .map(|x| oracle::oracle_consistency(x, &inst, cli.grid_denominator))
                .collect();
            let grid_violations = grid.iter().filter(|g| g.contradiction.is_some()).count();
            let clean = cross.violations.is_empty() && grid_violations == 0;
            let summary = vec![
                format!("property violations: {}", cross.violations.len()),
                format!("grid oracle contradictions: {grid_violations}"),
            ];
            report.details = serde_json::json!({ "cross_check": cross, "grid": grid });
            report.instance = Some(doc);
            (clean, summary)
        }
        None => {
            let max = Dims { m: 4, n: 3, l: 3, k: 3 };
            let battery = oracle::run_battery(cli.seed, cli.trials, max, 20);
            let grid = oracle::run_grid_battery(cli.seed, cli.trials, max, cli.grid_denominator);
            let clean = battery.is_clean() && grid.is_clean();
            let summary = vec![
                format!(
                    "{} random operations: {} expanding, {} boundary-ambiguous, {} property violations",
                    battery.cases,
                    battery.expanding,
                    battery.boundary_ambiguous,
                    battery.violations.len()
                ),
                format!(
                    "{} random vectors: {} grid rewards, {} grid directions, {} contradictions",
                    grid.pairs,
                    grid.found_rewards,
                    grid.found_directions,
                    grid.violations.len()
                ),
            ];
            report.details = serde_json::json!({ "battery": battery, "grid": grid });
            (clean, summary)
        }
    };
    report.verdict = if clean { "consistent" } else { "violations" }.into();
    Ok(Outcome {
        code: if clean { 0 } else { 1 },
        report,
        summary,
    })
}

fn cmd_paper_examples() -> Result<Outcome> {
    let outcomes = catalog::run_all();
    let mut summary = Vec::new();
    for o in &outcomes {
        summary.push(format!("{} {}", if o.passed() { "PASS" } else { "FAIL" }, o.name));
        for c in o.checks.iter().filter(|c| !c.passed) {
            summary.push(format!("  failed: {} ({})", c.label, c.detail));
        }
    }
    let all = outcomes.iter().all(|o| o.passed());
    let mut report = Report::new("paper-examples", if all { "all-match" } else { "mismatch" });
    report.details = serde_json::json!({ "version": catalog::VERSION, "entries": outcomes });
    Ok(Outcome {
        code: if all { 0 } else { 1 },
        report,
        summary,
    })
}

fn cmd_verify(path: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let saved: Report = serde_json::from_str(&text).context("parsing report")?;
    let failures = report::verify_report(&saved);
    let ok = failures.is_empty();
    let mut summary = vec![if ok {
        format!("verified: {} report", saved.command)
    } else {
        "verification failed".to_string()
    }];
    summary.extend(failures.iter().map(|f| format!("  {f}")));
    let mut report = Report::new("verify", if ok { "verified" } else { "rejected" });
    report.details = serde_json::json!({ "failures": failures });
    Ok(Outcome {
        code: if ok { 0 } else { 1 },
        report,
        summary,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Validate { path } => cmd_validate(path),
        Command::Elicit { path, vector } => cmd_elicit(path, vector, "elicit"),
        Command::Mechanisms { path } => cmd_mechanisms(path),
        Command::Expand { path, existential, .. } => cmd_expand(path, *existential),
        Command::ConstructReward { path, vector } => cmd_elicit(path, vector, "construct-reward"),
        Command::ConstructAlpha { direction } => cmd_construct_alpha(direction),
        Command::Oracle { path } => cmd_oracle(cli, path.as_deref()),
        Command::PaperExamples => cmd_paper_examples(),
        Command::Verify { report } => cmd_verify(report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut outcome) => {
            outcome.report.timing_ms = start.elapsed().as_millis() as u64;
            if cli.json && !cli.quiet {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report).expect("reports serialize")
                );
            } else if !cli.quiet {
                for line in &outcome.summary {
                    println!("{line}");
                }
            }
            ExitCode::from(outcome.code)
        }
        Err(err) => {
            if !cli.quiet {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(exit_code_for(&err))
        }
    }
}
