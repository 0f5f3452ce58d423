//! Deterministic SMT-LIB2 script generation.
//!
//! Nodes referenced more than once are factored into 0-ary `define-fun`s in
//! first-visit topological order, so emission is byte-reproducible for equal
//! obligations and the script skeleton does not depend on atom widths.

use crate::expr::{ExprId, ExprPool, Node, Op, Sort};
use crate::ste::{Obligation, Query};
use std::collections::HashMap;
use std::fmt::Write;

/// A rendered SMT script plus the metadata needed to interpret its models.
#[derive(Debug, Clone)]
pub struct SmtScript {
    pub text: String,
    /// Declared variables: engine name, SMT symbol, sort.
    pub decls: Vec<(String, String, Sort)>,
    /// Asserted engine-side formulas, for model validation.
    pub roots: Vec<ExprId>,
    /// SMT symbol -> engine name.
    pub name_map: HashMap<String, String>,
}

/// Asserted formulas for a query over an obligation.
pub fn query_roots(pool: &mut ExprPool, ob: &Obligation, query: Query) -> Vec<ExprId> {
    let mut roots = Vec::new();
    roots.push(ob.constr);
    match query {
        Query::AntFail => {
            roots.extend(ob.side_constraints.iter().copied());
            let conds: Vec<ExprId> = ob.ant_fail.iter().map(|a| a.cond).collect();
            roots.push(pool.or_all(&conds));
        }
        Query::NegOk => {
            roots.extend(ob.side_constraints.iter().copied());
            roots.push(ob.no_ant_fail);
            let negs: Vec<ExprId> = ob
                .per_check
                .iter()
                .map(|c| pool.not(c.ok))
                .collect();
            roots.push(pool.or_all(&negs));
        }
        Query::Vacuity => {
            roots.extend(ob.side_constraints.iter().copied());
            roots.push(ob.no_ant_fail);
        }
        Query::DivZero => {
            roots.push(ob.no_ant_fail);
            let conds: Vec<ExprId> = ob.div_zero_conds.to_vec();
            roots.push(pool.or_all(&conds));
        }
    }
    roots
}

/// Serialize an obligation query.
pub fn emit(pool: &mut ExprPool, ob: &Obligation, query: Query) -> SmtScript {
    let roots = query_roots(pool, ob, query);
    emit_roots(pool, &roots)
}

/// Serialize a list of asserted formulas.
pub fn emit_roots(pool: &ExprPool, roots: &[ExprId]) -> SmtScript {
    // post-order walk: declaration order, sharing counts, topological order
    let mut order: Vec<ExprId> = Vec::new();
    let mut refs: HashMap<ExprId, u32> = HashMap::new();
    let mut seen: HashMap<ExprId, bool> = HashMap::new();
    for &root in roots {
        let mut stack = vec![(root, false)];
        while let Some((e, expanded)) = stack.pop() {
            if expanded {
                order.push(e);
                seen.insert(e, true);
                continue;
            }
            *refs.entry(e).or_insert(0) += 1;
            if seen.contains_key(&e) {
                continue;
            }
            seen.insert(e, false);
            stack.push((e, true));
            if let Node::App { args, .. } = pool.node(e) {
                for &a in args {
                    stack.push((a, false));
                }
            }
        }
    }

    // variable declarations with deterministic mangling
    let mut name_map: HashMap<String, String> = HashMap::new();
    let mut decls: Vec<(String, String, Sort)> = Vec::new();
    let mut taken: HashMap<String, u32> = HashMap::new();
    for &e in &order {
        if let Node::Var { name, sort } = pool.node(e) {
            if name_map.values().any(|v| v == name) {
                continue;
            }
            let mut smt = mangle(name);
            if let Some(n) = taken.get_mut(&smt) {
                *n += 1;
                smt = format!("{smt}~{n}");
            } else {
                taken.insert(smt.clone(), 0);
            }
            name_map.insert(smt.clone(), name.clone());
            decls.push((name.clone(), smt, *sort));
        }
    }
    let smt_of: HashMap<String, String> =
        decls.iter().map(|(en, sm, _)| (en.clone(), sm.clone())).collect();

    // shared non-leaf nodes become define-funs
    let mut defined: HashMap<ExprId, String> = HashMap::new();
    let mut text = String::new();
    let _ = writeln!(text, "(set-logic QF_ABV)");
    let _ = writeln!(text, "(set-option :produce-models true)");
    for (_, smt, sort) in &decls {
        let _ = writeln!(text, "(declare-const {smt} {})", sort_str(*sort));
    }
    let mut tcount = 0u32;
    for &e in &order {
        let shared = refs[&e] > 1 && matches!(pool.node(e), Node::App { .. });
        if shared {
            let name = format!("t{tcount}");
            tcount += 1;
            let body = render(pool, e, &defined, &smt_of);
            let _ = writeln!(text, "(define-fun {name} () {} {body})", sort_str(pool.sort(e)));
            defined.insert(e, name);
        }
    }
    for &root in roots {
        let body = render(pool, root, &defined, &smt_of);
        let _ = writeln!(text, "(assert {body})");
    }
    let _ = writeln!(text, "(check-sat)");
    let _ = writeln!(text, "(get-model)");
    SmtScript { text, decls, roots: roots.to_vec(), name_map }
}

fn mangle(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_@.!~".contains(c) { c } else { '.' })
        .collect();
    if out.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        out.insert(0, 'v');
    }
    out
}

pub fn sort_str(sort: Sort) -> String {
    match sort {
        Sort::BitVec(w) => format!("(_ BitVec {w})"),
        Sort::Bool => "Bool".to_string(),
        Sort::Array { index_width, elem_width } => {
            format!("(Array (_ BitVec {index_width}) (_ BitVec {elem_width}))")
        }
    }
}

fn render(
    pool: &ExprPool,
    e: ExprId,
    defined: &HashMap<ExprId, String>,
    smt_of: &HashMap<String, String>,
) -> String {
    if let Some(name) = defined.get(&e) {
        return name.clone();
    }
    match pool.node(e) {
        Node::BvConst { width, value } => {
            let mut bits = String::with_capacity(*width as usize + 2);
            bits.push_str("#b");
            for i in (0..*width).rev() {
                bits.push(if value.bit(u64::from(i)) { '1' } else { '0' });
            }
            bits
        }
        Node::BoolConst(b) => b.to_string(),
        Node::Var { name, .. } => smt_of[name].clone(),
        Node::App { op, args } => {
            let parts: Vec<String> =
                args.iter().map(|&a| render(pool, a, defined, smt_of)).collect();
            match op {
                Op::Add => format!("(bvadd {} {})", parts[0], parts[1]),
                Op::Sub => format!("(bvsub {} {})", parts[0], parts[1]),
                Op::Mul => format!("(bvmul {} {})", parts[0], parts[1]),
                Op::Udiv => format!("(bvudiv {} {})", parts[0], parts[1]),
                Op::Urem => format!("(bvurem {} {})", parts[0], parts[1]),
                Op::And => format!("(bvand {} {})", parts[0], parts[1]),
                Op::Or => format!("(bvor {} {})", parts[0], parts[1]),
                Op::Xor => format!("(bvxor {} {})", parts[0], parts[1]),
                Op::Not => format!("(bvnot {})", parts[0]),
                Op::Concat => {
                    let mut acc = parts[0].clone();
                    for p in &parts[1..] {
                        acc = format!("(concat {acc} {p})");
                    }
                    acc
                }
                Op::Extract { hi, lo } => format!("((_ extract {hi} {lo}) {})", parts[0]),
                Op::ShlConst(k) => {
                    let w = pool.width(e);
                    format!("(bvshl {} {})", parts[0], const_bits(u64::from(*k), w))
                }
                Op::LshrConst(k) => {
                    let w = pool.width(e);
                    format!("(bvlshr {} {})", parts[0], const_bits(u64::from(*k), w))
                }
                Op::Shl => {
                    let (wa, wd) = (pool.width(e), pool.width(args_of(pool, e)[1]));
                    let d = zext_str(&parts[1], wa - wd);
                    format!("(bvshl {} {})", parts[0], d)
                }
                Op::Lshr => {
                    let (wa, wd) = (pool.width(e), pool.width(args_of(pool, e)[1]));
                    let d = zext_str(&parts[1], wa - wd);
                    format!("(bvlshr {} {})", parts[0], d)
                }
                Op::Eq => format!("(= {} {})", parts[0], parts[1]),
                Op::Ult => format!("(bvult {} {})", parts[0], parts[1]),
                Op::Ule => format!("(bvule {} {})", parts[0], parts[1]),
                Op::Ite | Op::BoolIte => {
                    format!("(ite {} {} {})", parts[0], parts[1], parts[2])
                }
                Op::BoolNot => format!("(not {})", parts[0]),
                Op::BoolAnd => format!("(and {} {})", parts[0], parts[1]),
                Op::BoolOr => format!("(or {} {})", parts[0], parts[1]),
                Op::ArrayRead => format!("(select {} {})", parts[0], parts[1]),
                Op::ArrayUpdate => {
                    format!("(store {} {} {})", parts[0], parts[1], parts[2])
                }
            }
        }
    }
}

fn args_of(pool: &ExprPool, e: ExprId) -> &[ExprId] {
    match pool.node(e) {
        Node::App { args, .. } => args,
        _ => &[],
    }
}

fn const_bits(v: u64, width: u32) -> String {
    let mut s = String::from("#b");
    for i in (0..width).rev() {
        s.push(if v >> i & 1 == 1 { '1' } else { '0' });
    }
    s
}

fn zext_str(inner: &str, extra: u32) -> String {
    if extra == 0 {
        inner.to_string()
    } else {
        format!("((_ zero_extend {extra}) {inner})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emission_is_deterministic_and_shared() {
        let mut pool = ExprPool::new();
        let a = pool.bv_var("a", 8);
        let b = pool.bv_var("b", 8);
        let s = pool.add(a, b);
        let t = pool.mul(s, s);
        let z = pool.zero(8);
        let r1 = pool.eq(t, z);
        let one = pool.bv_const(8, 1u32);
        let t2 = pool.add(t, one);
        let r2 = pool.ult(t2, b);
        let s1 = emit_roots(&pool, &[r1, r2]);
        let s2 = emit_roots(&pool, &[r1, r2]);
        assert_eq!(s1.text, s2.text);
        // (bvmul s s) is referenced twice: once per root
        assert!(s1.text.contains("(define-fun t"), "{}", s1.text);
        assert_eq!(s1.decls.len(), 2);
    }

    #[test]
    fn mangling_keeps_symbols_legal() {
        let mut pool = ExprPool::new();
        let v = pool.bv_var("in!a[7:0]@3", 8);
        let z = pool.zero(8);
        let r = pool.eq(v, z);
        let s = emit_roots(&pool, &[r]);
        let (_, smt, _) = &s.decls[0];
        assert!(!smt.contains('[') && !smt.contains(':'), "{smt}");
        assert_eq!(s.name_map[smt], "in!a[7:0]@3");
    }
}
