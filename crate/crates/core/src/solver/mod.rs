//! External SMT solver driver: serialize obligations, run a configurable
//! solver process, parse verdicts and models, validate models engine-side,
//! and map assignments back to spec variables.
//!
//! No solver is linked in. The command template names the executable; a `{}`
//! placeholder is replaced by the script path, otherwise the script is piped
//! to standard input. The `WSTE_SOLVER` environment variable supplies the
//! default command.

mod emit;
mod sexpr;

pub use emit::{emit, emit_roots, query_roots, SmtScript};
pub use sexpr::{parse_all, SExpr};

use crate::expr::{ArrayValue, Env, ExprPool, Sort, Value};
use num_bigint::BigUint;
use num_traits::{Num, Zero};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Environment variable naming the default solver command.
pub const SOLVER_ENV: &str = "WSTE_SOLVER";

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Command template, whitespace-split; `{}` is replaced by the script
    /// path. Without a placeholder the script arrives on standard input.
    pub command: String,
    pub timeout: Duration,
}

impl SolverConfig {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Self {
        Self { command: command.into(), timeout }
    }

    /// Resolve the command from an explicit choice or `WSTE_SOLVER`.
    pub fn resolve(explicit: Option<&str>, timeout: Duration) -> Result<Self, SolverError> {
        if let Some(c) = explicit {
            return Ok(Self::new(c, timeout));
        }
        if let Ok(c) = std::env::var(SOLVER_ENV) {
            if !c.trim().is_empty() {
                return Ok(Self::new(c, timeout));
            }
        }
        Err(SolverError::NoSolver)
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no solver configured: pass --solver or set {SOLVER_ENV}")]
    NoSolver,
    #[error("failed to start solver '{cmd}': {source}")]
    Spawn { cmd: String, source: std::io::Error },
    #[error("i/o while driving solver: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
    Unknown,
}

/// Parsed solver response.
#[derive(Debug, Clone)]
pub struct SolverAnswer {
    pub status: SatStatus,
    /// Engine-name keyed model values (sat only).
    pub model: BTreeMap<String, Value>,
    /// Declared variables the model did not cover; they default to zero.
    pub defaulted: Vec<String>,
    pub raw_output: String,
    pub wall: Duration,
    pub timed_out: bool,
    /// Engine-side re-evaluation of every asserted formula under the model.
    pub validated: Option<bool>,
}

/// Run the solver on a script and parse the answer; on sat, the model is
/// validated by evaluating every asserted root engine-side.
pub fn solve(
    pool: &ExprPool,
    script: &SmtScript,
    cfg: &SolverConfig,
) -> Result<SolverAnswer, SolverError> {
    let started = Instant::now();
    let mut parts = cfg.command.split_whitespace();
    let exe = parts.next().ok_or(SolverError::NoSolver)?;
    let rest: Vec<&str> = parts.collect();

    let mut tmp = tempfile::Builder::new().suffix(".smt2").tempfile()?;
    tmp.write_all(script.text.as_bytes())?;
    tmp.flush()?;
    let path = tmp.path().to_string_lossy().to_string();

    let uses_file = rest.iter().any(|a| a.contains("{}"));
    let mut cmd = std::process::Command::new(exe);
    for a in &rest {
        cmd.arg(a.replace("{}", &path));
    }
    if !uses_file {
        cmd.stdin(std::process::Stdio::piped());
    } else {
        cmd.stdin(std::process::Stdio::null());
    }
    cmd.stdout(std::process::Stdio::piped());
    cmd.stderr(std::process::Stdio::piped());
    let mut child = cmd
        .spawn()
        .map_err(|source| SolverError::Spawn { cmd: cfg.command.clone(), source })?;
    if !uses_file {
        if let Some(mut stdin) = child.stdin.take() {
            let _ = stdin.write_all(script.text.as_bytes());
        }
    }

    // poll with a deadline; kill on timeout
    let deadline = started + cfg.timeout;
    let mut timed_out = false;
    loop {
        match child.try_wait()? {
            Some(_) => break,
            None => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    timed_out = true;
                    break;
                }
                std::thread::sleep(Duration::from_millis(5));
            }
        }
    }
    let output = child.wait_with_output()?;
    let mut raw = String::from_utf8_lossy(&output.stdout).to_string();
    let stderr = String::from_utf8_lossy(&output.stderr);
    if !stderr.trim().is_empty() {
        raw.push_str("\n;; stderr:\n");
        raw.push_str(&stderr);
    }
    let wall = started.elapsed();

    let status = if timed_out {
        SatStatus::Unknown
    } else {
        match raw.split_whitespace().next() {
            Some("sat") => SatStatus::Sat,
            Some("unsat") => SatStatus::Unsat,
            _ => SatStatus::Unknown,
        }
    };
    let mut answer = SolverAnswer {
        status,
        model: BTreeMap::new(),
        defaulted: Vec::new(),
        raw_output: raw,
        wall,
        timed_out,
        validated: None,
    };
    if status == SatStatus::Sat {
        parse_model(script, &mut answer);
        let env = model_env(script, &answer);
        let ok = script
            .roots
            .iter()
            .all(|&r| matches!(pool.eval(r, &env), Ok(Value::Bool(true))));
        answer.validated = Some(ok);
    }
    Ok(answer)
}

/// Environment for engine-side evaluation: model values plus zero defaults
/// for anything the model omitted.
pub fn model_env(script: &SmtScript, answer: &SolverAnswer) -> Env {
    let mut env = Env::new();
    for (engine, _, sort) in &script.decls {
        let v = answer.model.get(engine).cloned().unwrap_or_else(|| default_value(*sort));
        env.insert(engine.clone(), v);
    }
    env
}

pub fn default_value(sort: Sort) -> Value {
    match sort {
        Sort::BitVec(w) => Value::bits(w, 0u32),
        Sort::Bool => Value::Bool(false),
        Sort::Array { index_width, elem_width } => {
            Value::Array(ArrayValue::filled(index_width, elem_width, BigUint::zero()))
        }
    }
}

fn parse_model(script: &SmtScript, answer: &mut SolverAnswer) {
    let exprs = parse_all(&answer.raw_output);
    // accept both a bare list of define-funs and a (model ...) wrapper
    let mut defs: Vec<&[SExpr]> = Vec::new();
    for e in &exprs {
        if let Some(items) = e.list() {
            let items = match items.first().and_then(SExpr::atom) {
                Some("model") => &items[1..],
                _ => items,
            };
            for d in items {
                if let Some(l) = d.list() {
                    if l.first().and_then(SExpr::atom) == Some("define-fun") {
                        defs.push(l);
                    }
                }
            }
        }
    }
    // aux function definitions (z3's as-array lambdas) by name
    let mut aux: BTreeMap<String, &SExpr> = BTreeMap::new();
    for d in &defs {
        if let (Some(name), Some(args)) = (d[1].atom(), d[2].list()) {
            if !args.is_empty() {
                aux.insert(name.to_string(), &d[4]);
            }
        }
    }
    for d in &defs {
        let Some(name) = d[1].atom() else { continue };
        let Some(engine) = script.name_map.get(name) else { continue };
        let Some((_, _, sort)) =
            script.decls.iter().find(|(en, _, _)| en == engine)
        else {
            continue;
        };
        if d.len() < 5 || !d[2].list().is_some_and(<[SExpr]>::is_empty) {
            continue;
        }
        if let Some(v) = parse_value(&d[4], *sort, &aux) {
            answer.model.insert(engine.clone(), v);
        }
    }
    for (engine, _, _) in &script.decls {
        if !answer.model.contains_key(engine) {
            answer.defaulted.push(engine.clone());
        }
    }
}

fn parse_value(e: &SExpr, sort: Sort, aux: &BTreeMap<String, &SExpr>) -> Option<Value> {
    match sort {
        Sort::Bool => match e.atom()? {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        Sort::BitVec(w) => parse_bv(e).map(|v| Value::bits(w, v)),
        Sort::Array { index_width, elem_width } => {
            let mut arr = ArrayValue::filled(index_width, elem_width, BigUint::zero());
            parse_array(e, &mut arr, aux)?;
            Some(Value::Array(arr))
        }
    }
}

fn parse_bv(e: &SExpr) -> Option<BigUint> {
    match e {
        SExpr::Atom(a) => {
            if let Some(b) = a.strip_prefix("#b") {
                BigUint::from_str_radix(b, 2).ok()
            } else if let Some(h) = a.strip_prefix("#x") {
                BigUint::from_str_radix(h, 16).ok()
            } else {
                None
            }
        }
        SExpr::List(l) => {
            // (_ bvN W)
            if l.len() == 3 && l[0].atom() == Some("_") {
                let n = l[1].atom()?.strip_prefix("bv")?;
                BigUint::from_str_radix(n, 10).ok()
            } else {
                None
            }
        }
    }
}

fn parse_array(e: &SExpr, arr: &mut ArrayValue, aux: &BTreeMap<String, &SExpr>) -> Option<()> {
    match e {
        SExpr::List(l) if l.first().and_then(SExpr::atom) == Some("store") => {
            parse_array(&l[1], arr, aux)?;
            let idx = parse_bv(&l[2])?;
            let val = parse_bv(&l[3])?;
            arr.set(idx, val);
            Some(())
        }
        // ((as const (Array ...)) v)
        SExpr::List(l)
            if l.len() == 2
                && l[0]
                    .list()
                    .is_some_and(|c| c.first().and_then(SExpr::atom) == Some("as")) =>
        {
            arr.default = parse_bv(&l[1])?;
            Some(())
        }
        // (_ as-array k!N) with an aux lambda definition
        SExpr::List(l)
            if l.len() == 3
                && l[0].atom() == Some("_")
                && l[1].atom() == Some("as-array") =>
        {
            let fname = l[2].atom()?;
            let body = aux.get(fname)?;
            parse_ite_lambda(body, arr)
        }
        _ => None,
    }
}

/// Walk a z3-style `(ite (= x!0 <idx>) <val> ...)` chain.
fn parse_ite_lambda(e: &SExpr, arr: &mut ArrayValue) -> Option<()> {
    match e {
        SExpr::List(l) if l.first().and_then(SExpr::atom) == Some("ite") => {
            let cond = l[1].list()?;
            let idx = parse_bv(&cond[2])?;
            let val = parse_bv(&l[2])?;
            arr.set(idx, val);
            parse_ite_lambda(&l[3], arr)
        }
        other => {
            arr.default = parse_bv(other)?;
            Some(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script_with(names: &[(&str, Sort)]) -> SmtScript {
        SmtScript {
            text: String::new(),
            decls: names
                .iter()
                .map(|(n, s)| (n.to_string(), n.to_string(), *s))
                .collect(),
            roots: Vec::new(),
            name_map: names.iter().map(|(n, _)| (n.to_string(), n.to_string())).collect(),
        }
    }

    #[test]
    fn parses_bitvector_literal_shapes() {
        let script = script_with(&[("x", Sort::BitVec(8)), ("y", Sort::BitVec(4)), ("z", Sort::BitVec(12))]);
        let mut ans = SolverAnswer {
            status: SatStatus::Sat,
            model: BTreeMap::new(),
            defaulted: vec![],
            raw_output: "sat\n((define-fun x () (_ BitVec 8) #x2a)\n (define-fun y () (_ BitVec 4) #b0110)\n (define-fun z () (_ BitVec 12) (_ bv300 12)))".into(),
            wall: Duration::ZERO,
            timed_out: false,
            validated: None,
        };
        parse_model(&script, &mut ans);
        assert_eq!(ans.model["x"], Value::bits(8, 0x2au32));
        assert_eq!(ans.model["y"], Value::bits(4, 6u32));
        assert_eq!(ans.model["z"], Value::bits(12, 300u32));
    }

    #[test]
    fn parses_array_store_chain_and_as_const() {
        let sort = Sort::Array { index_width: 2, elem_width: 4 };
        let script = script_with(&[("m", sort)]);
        let mut ans = SolverAnswer {
            status: SatStatus::Sat,
            model: BTreeMap::new(),
            defaulted: vec![],
            raw_output: "sat\n((define-fun m () (Array (_ BitVec 2) (_ BitVec 4)) \
                         (store ((as const (Array (_ BitVec 2) (_ BitVec 4))) #b0001) #b10 #b1111)))"
                .into(),
            wall: Duration::ZERO,
            timed_out: false,
            validated: None,
        };
        parse_model(&script, &mut ans);
        let Value::Array(a) = &ans.model["m"] else { panic!() };
        assert_eq!(a.default, BigUint::from(1u32));
        assert_eq!(a.get(&BigUint::from(2u32)), BigUint::from(15u32));
    }

    #[test]
    fn parses_as_array_lambda() {
        let sort = Sort::Array { index_width: 2, elem_width: 4 };
        let script = script_with(&[("m", sort)]);
        let mut ans = SolverAnswer {
            status: SatStatus::Sat,
            model: BTreeMap::new(),
            defaulted: vec![],
            raw_output: "sat\n(\
              (define-fun m () (Array (_ BitVec 2) (_ BitVec 4)) (_ as-array k!0))\n\
              (define-fun k!0 ((x!0 (_ BitVec 2))) (_ BitVec 4) \
                 (ite (= x!0 #b01) #b1010 #b0011)))"
                .into(),
            wall: Duration::ZERO,
            timed_out: false,
            validated: None,
        };
        parse_model(&script, &mut ans);
        let Value::Array(a) = &ans.model["m"] else { panic!() };
        assert_eq!(a.get(&BigUint::from(1u32)), BigUint::from(10u32));
        assert_eq!(a.default, BigUint::from(3u32));
    }

    #[test]
    fn missing_symbols_are_defaulted_and_flagged() {
        let script = script_with(&[("x", Sort::BitVec(8)), ("g", Sort::Bool)]);
        let mut ans = SolverAnswer {
            status: SatStatus::Sat,
            model: BTreeMap::new(),
            defaulted: vec![],
            raw_output: "sat\n((define-fun x () (_ BitVec 8) #x01))".into(),
            wall: Duration::ZERO,
            timed_out: false,
            validated: None,
        };
        parse_model(&script, &mut ans);
        assert_eq!(ans.defaulted, vec!["g".to_string()]);
        let env = model_env(&script, &ans);
        assert_eq!(env["g"], Value::Bool(false));
    }
}
