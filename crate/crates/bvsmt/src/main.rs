//! bvsmt: a small QF_ABV solver for SMT-LIB2 scripts.
//!
//! Intended as a bundled fallback so verification runs work without an
//! external SMT solver; point `WSTE_SOLVER` at z3/boolector/bitwuzla for
//! production use. Decides the fragment the engine emits: quantifier-free
//! bit-vectors with extensional-array reads and writes (no array equality).
//!
//! Pipeline: parse -> expand read-over-write -> Ackermannize base-array
//! reads -> bit-blast to CNF -> CDCL (varisat) -> model reconstruction.
//!
//! Reads a script from the path argument or standard input.

mod blast;
mod sexpr;
mod term;

use sexpr::SExpr;
use std::io::Read;
use term::{Pool, Sort, TermId};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let src = match args.get(1) {
        Some(p) => std::fs::read_to_string(p).unwrap_or_else(|e| {
            eprintln!("bvsmt: cannot read {p}: {e}");
            std::process::exit(2);
        }),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).expect("read stdin");
            s
        }
    };
    match run(&src) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("bvsmt: {e}");
            println!("unknown");
            std::process::exit(1);
        }
    }
}

struct Engine {
    pool: Pool,
    /// name -> bound term (declared consts bind to fresh vars, define-funs to
    /// their bodies)
    bindings: std::collections::HashMap<String, TermId>,
    /// declared constants, in declaration order
    decls: Vec<(String, Sort)>,
    asserts: Vec<TermId>,
}

fn run(src: &str) -> Result<String, String> {
    let cmds = sexpr::parse_all(src)?;
    let mut eng = Engine {
        pool: Pool::new(),
        bindings: std::collections::HashMap::new(),
        decls: Vec::new(),
        asserts: Vec::new(),
    };
    let mut out = String::new();
    let mut solved: Option<blast::Outcome> = None;
    for cmd in &cmds {
        let Some(items) = cmd.list() else {
            return Err(format!("unexpected top-level atom {cmd:?}"));
        };
        let head = items
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| "empty command".to_string())?;
        match head {
            "set-logic" | "set-option" | "set-info" => {}
            "declare-const" | "declare-fun" => {
                let name = items[1].atom().ok_or("bad declare name")?.to_string();
                let sort_idx = if head == "declare-fun" {
                    // only 0-ary: (declare-fun name () sort)
                    if items[2].list().is_none_or(|l| !l.is_empty()) {
                        return Err("only 0-ary declare-fun supported".into());
                    }
                    3
                } else {
                    2
                };
                let sort = parse_sort(&items[sort_idx])?;
                let t = eng.pool.var(&name, sort);
                eng.bindings.insert(name.clone(), t);
                eng.decls.push((name, sort));
            }
            "define-fun" => {
                let name = items[1].atom().ok_or("bad define-fun name")?.to_string();
                if items[2].list().is_none_or(|l| !l.is_empty()) {
                    return Err("only 0-ary define-fun supported".into());
                }
                let body = parse_term(&mut eng, &items[4])?;
                eng.bindings.insert(name, body);
            }
            "assert" => {
                let t = parse_term(&mut eng, &items[1])?;
                eng.asserts.push(t);
            }
            "check-sat" => {
                let outcome = blast::solve(&mut eng.pool, &eng.asserts)?;
                out.push_str(if outcome.sat { "sat\n" } else { "unsat\n" });
                solved = Some(outcome);
            }
            "get-model" => match &solved {
                Some(outcome) if outcome.sat => out.push_str(&print_model(&eng, outcome)),
                _ => out.push_str("(error \"model is not available\")\n"),
            },
            "exit" => break,
            other => return Err(format!("unsupported command {other}")),
        }
    }
    Ok(out)
}

fn parse_sort(e: &SExpr) -> Result<Sort, String> {
    match e {
        SExpr::Atom(a) if a == "Bool" => Ok(Sort::Bool),
        SExpr::List(l) => match l.first().and_then(SExpr::atom) {
            Some("_") if l.get(1).and_then(SExpr::atom) == Some("BitVec") => {
                let w: u32 =
                    l[2].atom().and_then(|s| s.parse().ok()).ok_or("bad BitVec width")?;
                Ok(Sort::Bv(w))
            }
            Some("Array") => {
                let Sort::Bv(iw) = parse_sort(&l[1])? else {
                    return Err("array index sort must be a bit-vector".into());
                };
                let Sort::Bv(ew) = parse_sort(&l[2])? else {
                    return Err("array element sort must be a bit-vector".into());
                };
                Ok(Sort::Array(iw, ew))
            }
            _ => Err(format!("unsupported sort {l:?}")),
        },
        _ => Err(format!("unsupported sort {e:?}")),
    }
}

fn parse_term(eng: &mut Engine, e: &SExpr) -> Result<TermId, String> {
    match e {
        SExpr::Atom(a) => {
            if a == "true" {
                return Ok(eng.pool.tru());
            }
            if a == "false" {
                return Ok(eng.pool.fls());
            }
            if let Some(b) = a.strip_prefix("#b") {
                let bits: Vec<bool> = b.chars().rev().map(|c| c == '1').collect();
                return Ok(eng.pool.bv_const(bits));
            }
            if let Some(h) = a.strip_prefix("#x") {
                let mut bits = Vec::with_capacity(h.len() * 4);
                for c in h.chars().rev() {
                    let d = c.to_digit(16).ok_or("bad hex literal")?;
                    for k in 0..4 {
                        bits.push(d >> k & 1 == 1);
                    }
                }
                return Ok(eng.pool.bv_const(bits));
            }
            eng.bindings
                .get(a.as_str())
                .copied()
                .ok_or_else(|| format!("unbound symbol {a}"))
        }
        SExpr::List(l) => {
            let head = &l[0];
            // indexed operators: ((_ extract h l) x), ((_ zero_extend k) x)
            if let Some(inner) = head.list() {
                if inner.first().and_then(SExpr::atom) == Some("_") {
                    let kind = inner[1].atom().ok_or("bad indexed op")?;
                    match kind {
                        "extract" => {
                            let hi: u32 =
                                inner[2].atom().unwrap().parse().map_err(|_| "bad hi")?;
                            let lo: u32 =
                                inner[3].atom().unwrap().parse().map_err(|_| "bad lo")?;
                            let x = parse_term(eng, &l[1])?;
                            return eng.pool.extract(hi, lo, x);
                        }
                        "zero_extend" => {
                            let k: u32 =
                                inner[2].atom().unwrap().parse().map_err(|_| "bad k")?;
                            let x = parse_term(eng, &l[1])?;
                            return Ok(eng.pool.zext(x, k));
                        }
                        other => return Err(format!("unsupported indexed op {other}")),
                    }
                }
            }
            if head.atom() == Some("_") {
                // (_ bvN w)
                let n = l[1].atom().and_then(|s| s.strip_prefix("bv")).ok_or("bad bv lit")?;
                let w: u32 = l[2].atom().and_then(|s| s.parse().ok()).ok_or("bad width")?;
                let v: u128 = n.parse().map_err(|_| "bv value too large")?;
                let bits: Vec<bool> = (0..w).map(|i| v >> i & 1 == 1).collect();
                return Ok(eng.pool.bv_const(bits));
            }
            let op = head.atom().ok_or("expected operator")?.to_string();
            let args: Vec<TermId> =
                l[1..].iter().map(|a| parse_term(eng, a)).collect::<Result<_, _>>()?;
            eng.pool.app(&op, args)
        }
    }
}

fn print_model(eng: &Engine, outcome: &blast::Outcome) -> String {
    use std::fmt::Write;
    let mut s = String::from("(\n");
    for (name, sort) in &eng.decls {
        let t = eng.bindings[name];
        match sort {
            Sort::Bool => {
                let v = outcome.bool_value(t).unwrap_or(false);
                let _ = writeln!(s, "  (define-fun {name} () Bool {v})");
            }
            Sort::Bv(w) => {
                let bits = outcome.bv_value(t).unwrap_or_else(|| vec![false; *w as usize]);
                let _ =
                    writeln!(s, "  (define-fun {name} () (_ BitVec {w}) {})", bit_str(&bits));
            }
            Sort::Array(iw, ew) => {
                let mut body = format!(
                    "((as const (Array (_ BitVec {iw}) (_ BitVec {ew}))) {})",
                    bit_str(&vec![false; *ew as usize])
                );
                for (idx_bits, val_bits) in outcome.array_reads(t) {
                    body =
                        format!("(store {body} {} {})", bit_str(&idx_bits), bit_str(&val_bits));
                }
                let _ = writeln!(
                    s,
                    "  (define-fun {name} () (Array (_ BitVec {iw}) (_ BitVec {ew})) {body})"
                );
            }
        }
    }
    s.push_str(")\n");
    s
}

fn bit_str(bits: &[bool]) -> String {
    let mut s = String::from("#b");
    for &b in bits.iter().rev() {
        s.push(if b { '1' } else { '0' });
    }
    s
}
