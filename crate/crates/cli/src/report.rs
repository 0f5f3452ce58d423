//! Verification report rendering: a human-oriented summary and a stable
//! machine-readable JSON document (field order and content are deterministic
//! for identical inputs, wall times aside).

use num_bigint::BigUint;
use serde_json::{json, Map, Value as Json};
use std::time::Duration;
use wste::expr::{ExprPool, Value};
use wste::oracle::ReplayReport;
use wste::solver::{SatStatus, SolverError};
use wste::ste::{Assignment, CheckReport, Obligation, VerifResult};

type DivZero = Result<(SatStatus, Option<Assignment>), String>;

pub fn print_no_solver(e: &SolverError, json_mode: bool) {
    if json_mode {
        let doc = json!({ "verdict": "UNKNOWN", "reason": e.to_string() });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        println!("verdict: UNKNOWN");
        println!("reason: {e}");
    }
}

pub fn print_timings(timings: &[(&'static str, Duration)]) {
    println!("timings:");
    for (phase, d) in timings {
        println!("  {phase:<9} {:>9.3} ms", d.as_secs_f64() * 1e3);
    }
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Bits { width, value } => format!("{value:#x}:{width}"),
        Value::Bool(b) => b.to_string(),
        Value::Array(a) => {
            let mut parts: Vec<String> =
                a.store.iter().map(|(i, v)| format!("[{i:#x}]={v:#x}")).collect();
            parts.push(format!("default={:#x}", a.default));
            format!("{{{}}}", parts.join(", "))
        }
    }
}

fn atom_str(atom: &(String, u32, u32)) -> String {
    format!("{}[{}:{}]", atom.0, atom.1, atom.2)
}

pub fn print_human(
    _pool: &ExprPool,
    ob: &Obligation,
    rpt: &CheckReport,
    replay: Option<&ReplayReport>,
    divzero: Option<&DivZero>,
    timings: &[(&'static str, Duration)],
) {
    println!("verdict: {}", rpt.verdict.verdict_str());
    for w in &rpt.warnings {
        println!("warning: {w}");
    }
    println!("checks: {} consequent check(s) over {} frame(s)", ob.per_check.len(), ob.frames);
    match &rpt.verdict {
        VerifResult::Pass { vacuous } => {
            if *vacuous {
                println!("  (pass is vacuous)");
            }
        }
        VerifResult::Fail { assignment, violated } => {
            println!("counterexample:");
            for (name, v) in assignment.guard_values(&ob.guard_vars) {
                println!("  {name} = {}", fmt_value(v));
            }
            for (name, v) in assignment.witnesses() {
                println!("  {name} = {} (division witness)", fmt_value(v));
            }
            if !assignment.defaulted.is_empty() {
                println!("  (defaulted to zero: {})", assignment.defaulted.join(", "));
            }
            println!("violated checks:");
            for c in violated {
                println!("  {} at frame {} (tuple {})", atom_str(&c.atom), c.frame, c.tuple);
            }
            if let Some(r) = replay {
                for (c, want, got) in &r.confirmed {
                    println!(
                        "replay: {} at frame {} expected {:#x}, circuit gives {:#x} (confirmed)",
                        atom_str(&c.atom),
                        c.frame,
                        want,
                        got
                    );
                }
                for c in &r.unconfirmed {
                    println!(
                        "replay: {} at frame {} not reproduced concretely (unknown-value \
                         abstraction)",
                        atom_str(&c.atom),
                        c.frame
                    );
                }
            }
        }
        VerifResult::AntecedentFailure { assignment, conflicts } => {
            println!("antecedent failure under:");
            for (name, v) in assignment.guard_values(&ob.guard_vars) {
                println!("  {name} = {}", fmt_value(v));
            }
            println!("conflicting antecedent merges:");
            for c in conflicts {
                println!(
                    "  {} at frame {} (antecedent tuple {})",
                    atom_str(&c.atom),
                    c.frame,
                    c.tuple
                );
            }
        }
        VerifResult::Unknown { reason } => println!("reason: {reason}"),
    }
    if let Some(dz) = divzero {
        match dz {
            Ok((SatStatus::Sat, Some(a))) => {
                println!("divide-by-zero: reachable, e.g. under:");
                for (name, v) in a.guard_values(&ob.guard_vars) {
                    println!("  {name} = {}", fmt_value(v));
                }
            }
            Ok((SatStatus::Unsat, _)) => println!("divide-by-zero: unreachable"),
            Ok((SatStatus::Unknown, _)) => println!("divide-by-zero: inconclusive"),
            Ok((SatStatus::Sat, None)) => println!("divide-by-zero: reachable"),
            Err(e) => println!("divide-by-zero: query failed: {e}"),
        }
    }
    for q in &rpt.queries {
        println!(
            "query {}: {} in {:.3} ms{}",
            q.query,
            match q.status {
                SatStatus::Sat => "sat",
                SatStatus::Unsat => "unsat",
                SatStatus::Unknown => "unknown",
            },
            q.wall.as_secs_f64() * 1e3,
            match q.validated {
                Some(true) => " (model validated)",
                Some(false) => " (MODEL VALIDATION FAILED)",
                None => "",
            }
        );
    }
    print_timings(timings);
}

fn json_value(v: &Value) -> Json {
    match v {
        Value::Bits { width, value } => json!({ "bits": value.to_string(), "width": width }),
        Value::Bool(b) => json!(b),
        Value::Array(a) => {
            let store: Map<String, Json> = a
                .store
                .iter()
                .map(|(i, v)| (i.to_string(), Json::String(v.to_string())))
                .collect();
            json!({ "default": a.default.to_string(), "store": store })
        }
    }
}

fn json_assignment(a: &Assignment, ob: &Obligation) -> Json {
    let guards: Map<String, Json> = a
        .guard_values(&ob.guard_vars)
        .map(|(n, v)| (n.to_string(), json_value(v)))
        .collect();
    let witnesses: Map<String, Json> =
        a.witnesses().map(|(n, v)| (n.to_string(), json_value(v))).collect();
    json!({ "guards": guards, "witnesses": witnesses, "defaulted": a.defaulted })
}

fn json_check(c: &wste::ste::CheckRef) -> Json {
    json!({ "atom": atom_str(&c.atom), "frame": c.frame, "tuple": c.tuple })
}

pub fn print_json(
    _pool: &ExprPool,
    ob: &Obligation,
    rpt: &CheckReport,
    replay: Option<&ReplayReport>,
    divzero: Option<&DivZero>,
    timings: &[(&'static str, Duration)],
) {
    let mut doc = Map::new();
    doc.insert("verdict".into(), json!(rpt.verdict.verdict_str()));
    doc.insert("frames".into(), json!(ob.frames));
    doc.insert("check_count".into(), json!(ob.per_check.len()));
    doc.insert("warnings".into(), json!(rpt.warnings));
    match &rpt.verdict {
        VerifResult::Pass { vacuous } => {
            doc.insert("vacuous".into(), json!(vacuous));
        }
        VerifResult::Fail { assignment, violated } => {
            doc.insert("counterexample".into(), json_assignment(assignment, ob));
            doc.insert(
                "violated".into(),
                Json::Array(violated.iter().map(json_check).collect()),
            );
            if let Some(r) = replay {
                let confirmed: Vec<Json> = r
                    .confirmed
                    .iter()
                    .map(|(c, want, got)| {
                        let mut j = json_check(c);
                        let obj = j.as_object_mut().unwrap();
                        obj.insert("expected".into(), json!(want.to_string()));
                        obj.insert("actual".into(), json!(got.to_string()));
                        j
                    })
                    .collect();
                doc.insert(
                    "replay".into(),
                    json!({
                        "confirmed": confirmed,
                        "unconfirmed": r.unconfirmed.iter().map(json_check).collect::<Vec<_>>(),
                    }),
                );
            }
        }
        VerifResult::AntecedentFailure { assignment, conflicts } => {
            doc.insert("counterexample".into(), json_assignment(assignment, ob));
            doc.insert(
                "conflicts".into(),
                Json::Array(
                    conflicts
                        .iter()
                        .map(|c| {
                            json!({
                                "atom": atom_str(&c.atom),
                                "frame": c.frame,
                                "tuple": c.tuple,
                            })
                        })
                        .collect(),
                ),
            );
        }
        VerifResult::Unknown { reason } => {
            doc.insert("reason".into(), json!(reason));
        }
    }
    if let Some(dz) = divzero {
        let v = match dz {
            Ok((s, a)) => json!({
                "status": match s {
                    SatStatus::Sat => "reachable",
                    SatStatus::Unsat => "unreachable",
                    SatStatus::Unknown => "inconclusive",
                },
                "assignment": a.as_ref().map(|a| json_assignment(a, ob)),
            }),
            Err(e) => json!({ "status": "error", "reason": e }),
        };
        doc.insert("divide_by_zero".into(), v);
    }
    let queries: Vec<Json> = rpt
        .queries
        .iter()
        .map(|q| {
            json!({
                "query": q.query.to_string(),
                "status": match q.status {
                    SatStatus::Sat => "sat",
                    SatStatus::Unsat => "unsat",
                    SatStatus::Unknown => "unknown",
                },
                "wall_ms": q.wall.as_secs_f64() * 1e3,
                "model_validated": q.validated,
            })
        })
        .collect();
    doc.insert("queries".into(), Json::Array(queries));
    let timing: Map<String, Json> = timings
        .iter()
        .map(|(p, d)| (p.to_string(), json!(d.as_secs_f64() * 1e3)))
        .collect();
    doc.insert("timings_ms".into(), Json::Object(timing));
    println!("{}", serde_json::to_string_pretty(&Json::Object(doc)).unwrap());
    let _: Option<BigUint> = None;
}
