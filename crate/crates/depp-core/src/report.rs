//! Canonical results documents (JSON with fixed key order and fixed
//! float formatting) and CSV sweep rows.

use serde_json::{Map, Number, Value};

use crate::montecarlo::SampleReport;
use crate::noise::BellDiagonalParams;
use crate::optics::CoincidencePattern;
use crate::protocols::{ProtocolComparison, RecurrenceTrace, RunResult};
use crate::scenario::{PolarizationNoise, ProtocolKind, ScenarioConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header of every CSV sweep table.
pub const CSV_HEADER: &str =
    "param,value,acceptance,fidelity,pattern_cd,pattern_cf,pattern_ed,pattern_ef";

/// The analytic payload of a results document.
#[derive(Debug, Clone)]
pub enum ProtocolOutput {
    Run { run: RunResult, sampling: Option<SampleReport> },
    Trace(RecurrenceTrace),
    SimonPan { input: BellDiagonalParams, output: BellDiagonalParams, efficiency: f64 },
    Comparison(ProtocolComparison),
}

/// All probabilities are written at 17 significant digits so documents
/// round-trip to equal values and re-serialize byte-identically.
fn fnum(x: f64) -> Value {
    Value::Number(Number::from_f64(x).expect("finite float"))
}

fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Deterministic JSON: object keys sorted, floats at 17 significant
/// digits, two-space indentation.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("string serializes"));
                out.push_str(": ");
                write_value(&map[key.as_str()], indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn obj(entries: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

fn scenario_value(cfg: &ScenarioConfig) -> Value {
    let noise = match &cfg.noise {
        PolarizationNoise::BellDiagonal(p) => obj(vec![
            ("model", Value::String("bell_diagonal".into())),
            ("F", fnum(p.f)),
            ("F1", fnum(p.f1)),
            ("F2", fnum(p.f2)),
            ("F3", fnum(p.f3)),
        ]),
        PolarizationNoise::Pauli { px, py, pz, target } => obj(vec![
            ("model", Value::String("pauli".into())),
            ("px", fnum(*px)),
            ("py", fnum(*py)),
            ("pz", fnum(*pz)),
            ("target", Value::String(format!("{target:?}"))),
        ]),
        PolarizationNoise::MatrixFile(path) => obj(vec![
            ("model", Value::String("matrix".into())),
            ("file", Value::String(path.clone())),
        ]),
    };
    let mut run = vec![
        ("shots", Value::Number(cfg.run.shots.into())),
        ("seed", Value::Number(cfg.run.seed.into())),
    ];
    if cfg.protocol == ProtocolKind::Bennett {
        run.push(("rounds", Value::Number(cfg.run.rounds.into())));
    }
    if let Some(t) = cfg.run.target_fidelity {
        run.push(("target_fidelity", fnum(t)));
    }
    if let Some(path) = &cfg.run.output {
        run.push(("output", Value::String(path.clone())));
    }
    obj(vec![
        (
            "source",
            obj(vec![("r", fnum(cfg.source.r())), ("theta", fnum(cfg.source.theta()))]),
        ),
        ("noise", noise),
        ("spatial_dephasing", fnum(cfg.spatial_dephasing)),
        ("protocol", Value::String(cfg.protocol.name().into())),
        ("run", obj(run)),
    ])
}

fn run_value(run: &RunResult) -> Value {
    let patterns: Vec<Value> = run
        .patterns
        .iter()
        .map(|rec| {
            obj(vec![
                ("pattern", Value::String(rec.pattern.label().into())),
                (
                    "detectors",
                    Value::Array(vec![
                        Value::String(rec.detector_pair.0.into()),
                        Value::String(rec.detector_pair.1.into()),
                    ]),
                ),
                ("probability", fnum(rec.probability)),
                (
                    "corrected_fidelity",
                    rec.corrected_fidelity.map(fnum).unwrap_or(Value::Null),
                ),
            ])
        })
        .collect();
    obj(vec![
        ("acceptance_probability", fnum(run.acceptance_probability)),
        ("mean_corrected_fidelity", fnum(run.mean_corrected_fidelity)),
        ("patterns", Value::Array(patterns)),
    ])
}

fn trace_value(trace: &RecurrenceTrace) -> Value {
    obj(vec![
        (
            "fidelities",
            Value::Array(trace.fidelities.iter().map(|&f| fnum(f)).collect()),
        ),
        (
            "success_probabilities",
            Value::Array(trace.success_probs.iter().map(|&p| fnum(p)).collect()),
        ),
        ("expected_pairs_consumed", fnum(trace.expected_pairs_consumed)),
    ])
}

fn bell_params_value(p: &BellDiagonalParams) -> Value {
    obj(vec![
        ("F", fnum(p.f)),
        ("F1", fnum(p.f1)),
        ("F2", fnum(p.f2)),
        ("F3", fnum(p.f3)),
    ])
}

fn comparison_value(cmp: &ProtocolComparison) -> Value {
    let bennett = if cmp.bennett.reachable {
        obj(vec![
            ("reachable", Value::Bool(true)),
            ("rounds", Value::Number(cmp.bennett.rounds.unwrap().into())),
            ("expected_pairs", fnum(cmp.bennett.expected_pairs.unwrap())),
            ("final_fidelity", fnum(cmp.bennett.final_fidelity.unwrap())),
        ])
    } else {
        obj(vec![("reachable", Value::Bool(false))])
    };
    obj(vec![
        ("target_fidelity", fnum(cmp.target_fidelity)),
        (
            "one_step_depp",
            obj(vec![
                ("final_fidelity", fnum(cmp.depp.final_fidelity)),
                ("acceptance_probability", fnum(cmp.depp.acceptance_probability)),
                ("pairs_consumed", fnum(cmp.depp.pairs_consumed)),
            ]),
        ),
        ("bennett", bennett),
        (
            "simon_pan",
            obj(vec![
                ("params", bell_params_value(&cmp.simon_pan.params)),
                ("efficiency", fnum(cmp.simon_pan.efficiency)),
            ]),
        ),
    ])
}

fn sampling_value(report: &SampleReport) -> Value {
    let mut counts = Vec::new();
    for (i, pat) in CoincidencePattern::ALL.iter().enumerate() {
        counts.push(obj(vec![
            ("pattern", Value::String(pat.label().into())),
            ("count", Value::Number(report.counts[i].into())),
            ("frequency", fnum(report.frequencies[i])),
            ("ci_halfwidth", fnum(report.ci_halfwidth[i])),
        ]));
    }
    obj(vec![
        ("shots", Value::Number(report.shots.into())),
        ("seed", Value::Number(report.seed.into())),
        ("patterns", Value::Array(counts)),
    ])
}

/// Builds the full results document for a scenario outcome.
pub fn results_document(cfg: &ScenarioConfig, out: &ProtocolOutput) -> Value {
    let analytic = match out {
        ProtocolOutput::Run { run, .. } => run_value(run),
        ProtocolOutput::Trace(trace) => trace_value(trace),
        ProtocolOutput::SimonPan { input, output, efficiency } => obj(vec![
            ("input", bell_params_value(input)),
            ("output", bell_params_value(output)),
            ("efficiency", fnum(*efficiency)),
        ]),
        ProtocolOutput::Comparison(cmp) => comparison_value(cmp),
    };
    let mut top = vec![("scenario", scenario_value(cfg)), ("analytic", analytic)];
    if let ProtocolOutput::Run { sampling: Some(report), .. } = out {
        top.push(("sampling", sampling_value(report)));
    }
    top.push((
        "meta",
        obj(vec![
            ("version", Value::String(TOOL_VERSION.into())),
            ("seed", Value::Number(cfg.run.seed.into())),
        ]),
    ));
    obj(top)
}

/// Canonical text form of a results document.
pub fn serialize_result(cfg: &ScenarioConfig, out: &ProtocolOutput) -> String {
    canonical_json(&results_document(cfg, out))
}

/// One CSV sweep row; numeric columns use the same 17-significant-digit
/// format as the JSON documents.
pub fn csv_row(param: &str, value: f64, run: &RunResult) -> String {
    let probs = run.pattern_probabilities();
    format!(
        "{},{},{},{},{},{},{},{}",
        param,
        format_float(value),
        format_float(run.acceptance_probability),
        format_float(run.mean_corrected_fidelity),
        format_float(probs[0]),
        format_float(probs[1]),
        format_float(probs[2]),
        format_float(probs[3]),
    )
}
