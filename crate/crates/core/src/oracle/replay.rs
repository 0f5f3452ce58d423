//! Counterexample replay: re-run a failed verification concretely under the
//! solver's assignment and confirm that the reported checks really are
//! violated.
//!
//! The replay follows the trajectory semantics: inputs take the first
//! satisfied antecedent value (falling back to the don't-care payload, or to
//! the model's fresh variable for a bounded-model-checking run), and
//! internal atoms driven by a satisfied antecedent are overridden at their
//! frames. Values downstream of a valid atom never depend on don't-care
//! payloads, so a value-level mismatch reported by the solver must reproduce
//! here.

use crate::atomize::AtomMap;
use crate::expr::{ArrayValue, Env, ExprPool, Value};
use crate::ir::{Elaborated, LValue, RtlExpr, WordKind};
use crate::ste::{Assignment, CheckRef, Obligation, RunMode, Spec, TrajectoryTuple};
use crate::symsim::AtomKey;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::HashMap;

#[derive(Debug)]
pub struct ReplayReport {
    /// Violated checks the concrete run reproduces (actual != expected).
    pub confirmed: Vec<(CheckRef, BigUint, BigUint)>,
    /// Violated checks the concrete run could not reproduce (these stem from
    /// an unknown-value abstraction rather than a value mismatch).
    pub unconfirmed: Vec<CheckRef>,
}

impl ReplayReport {
    pub fn all_confirmed(&self) -> bool {
        self.unconfirmed.is_empty() && !self.confirmed.is_empty()
    }
}

fn mask(w: u32) -> BigUint {
    (BigUint::one() << w) - BigUint::one()
}

fn splice(word: BigUint, hi: u32, lo: u32, v: &BigUint) -> BigUint {
    let m = mask(hi - lo + 1) << lo;
    let cleared = word.clone() - (word & &m);
    cleared | ((v.clone() << lo) & m)
}

struct Replayer<'a> {
    pool: &'a ExprPool,
    el: &'a Elaborated,
    atoms: &'a AtomMap,
    spec: &'a Spec,
    ob: &'a Obligation,
    env: Env,
    fresh: HashMap<(AtomKey, u32), String>,
}

impl Replayer<'_> {
    fn eval_bits(&self, e: crate::expr::ExprId) -> BigUint {
        match self.pool.eval(e, &self.env) {
            Ok(Value::Bits { value, .. }) => value,
            other => panic!("replay evaluation failed: {other:?}"),
        }
    }

    fn guard_holds(&self, t: &TrajectoryTuple) -> bool {
        matches!(self.pool.eval(t.guard, &self.env), Ok(Value::Bool(true)))
    }

    /// Value of an input atom at a frame, following the drive fold.
    fn input_atom_value(&self, key: &AtomKey, t: u32) -> BigUint {
        let covering: Vec<&TrajectoryTuple> = self
            .spec
            .antecedents
            .iter()
            .filter(|tup| {
                tup.word == key.0
                    && t >= tup.start
                    && t < tup.end
                    && self.atoms[&tup.word].atoms_in(tup.hi, tup.lo).contains(&(key.1, key.2))
            })
            .collect();
        for tup in &covering {
            if self.guard_holds(tup) {
                let v = self.eval_bits(tup.vexpr);
                return (v >> (key.2 - tup.lo)) & mask(key.1 - key.2 + 1);
            }
        }
        // no satisfied drive: fresh model value (bounded model checking) or
        // the engine's payload convention
        if self.ob.mode == RunMode::Bmc {
            if let Some(name) = self.fresh.get(&(key.clone(), t)) {
                if let Some(Value::Bits { value, .. }) = self.env.get(name) {
                    return value.clone();
                }
            }
            return BigUint::zero();
        }
        match covering.last() {
            Some(tup) => {
                let v = self.eval_bits(tup.vexpr);
                (v >> (key.2 - tup.lo)) & mask(key.1 - key.2 + 1)
            }
            None => BigUint::zero(),
        }
    }

    /// Apply satisfied internal drives onto a word's value.
    fn override_internal(&self, word: &str, t: u32, cur: BigUint) -> BigUint {
        let mut cur = cur;
        for tup in &self.spec.antecedents {
            if tup.word != word || t < tup.start || t >= tup.end {
                continue;
            }
            if self.el.words[word].kind == WordKind::Input {
                continue;
            }
            if self.guard_holds(tup) {
                let v = self.eval_bits(tup.vexpr);
                cur = splice(cur, tup.hi, tup.lo, &v);
            }
        }
        cur
    }
}

/// Re-run the design concretely under a counterexample assignment and test
/// each violated check.
pub fn replay_fail(
    pool: &ExprPool,
    el: &Elaborated,
    atoms: &AtomMap,
    spec: &Spec,
    ob: &Obligation,
    assignment: &Assignment,
    violated: &[CheckRef],
) -> ReplayReport {
    let env: Env = assignment.values.clone().into_iter().collect();
    let fresh: HashMap<(AtomKey, u32), String> = ob
        .fresh_vars
        .iter()
        .map(|(name, key, t)| ((key.clone(), *t), name.clone()))
        .collect();
    let rp = Replayer { pool, el, atoms, spec, ob, env, fresh };

    // initial registers: declared reset value, else the model's fresh
    // variable (bounded model checking) or the zero payload
    let mut regs: HashMap<String, BigUint> = HashMap::new();
    for (name, info) in &el.words {
        if info.kind != WordKind::Reg {
            continue;
        }
        let mut v = info.init.clone().unwrap_or_else(BigUint::zero);
        if info.init.is_none() && ob.mode == RunMode::Bmc {
            for (hi, lo) in atoms[name.as_str()].atoms() {
                if let Some(n) = rp.fresh.get(&((name.clone(), hi, lo), 0)) {
                    if let Some(Value::Bits { value, .. }) = rp.env.get(n) {
                        v = splice(v, hi, lo, value);
                    }
                }
            }
        }
        regs.insert(name.clone(), v);
    }
    let mut arrays: HashMap<String, ArrayValue> = HashMap::new();
    for (name, info) in &el.arrays {
        let a = match rp.env.get(name) {
            Some(Value::Array(a)) => a.clone(),
            _ => ArrayValue::filled(info.index_width, info.elem_width, BigUint::zero()),
        };
        arrays.insert(name.clone(), a);
    }

    let mut trace: Vec<HashMap<String, BigUint>> = Vec::new();
    for t in 0..ob.frames {
        let mut words: HashMap<String, BigUint> = HashMap::new();
        for (name, info) in &el.words {
            match info.kind {
                WordKind::Input => {
                    let mut v = BigUint::zero();
                    for (hi, lo) in atoms[name.as_str()].atoms() {
                        let av = rp.input_atom_value(&(name.clone(), hi, lo), t);
                        v = splice(v, hi, lo, &av);
                    }
                    words.insert(name.clone(), v);
                }
                WordKind::Reg => {
                    let v = rp.override_internal(name, t, regs[name].clone());
                    words.insert(name.clone(), v);
                }
                WordKind::Wire => {
                    let v = rp.override_internal(name, t, BigUint::zero());
                    words.insert(name.clone(), v);
                }
            }
        }
        // settle, re-applying wire overrides after each assignment
        let mut st = ReplayState { words, arrays: arrays.clone() };
        for a in &el.transition().comb {
            let v = eval_rtl_concrete(&st, &a.rhs, rp.pool, &rp.env);
            match &a.lhs {
                LValue::Word(n) => {
                    let nv = rp.override_internal(n, t, v);
                    st.words.insert(n.clone(), nv);
                }
                LValue::Slice { word, hi, lo } => {
                    let cur = st.words[word].clone();
                    let nv = rp.override_internal(word, t, splice(cur, *hi, *lo, &v));
                    st.words.insert(word.clone(), nv);
                }
                LValue::ArrayElem { .. } => unreachable!(),
            }
        }
        // clock edge
        let mut next_regs = regs.clone();
        let mut next_arrays = st.arrays.clone();
        for a in &el.transition().seq {
            let v = eval_rtl_concrete(&st, &a.rhs, rp.pool, &rp.env);
            match &a.lhs {
                LValue::Word(n) => {
                    next_regs.insert(n.clone(), v);
                }
                LValue::Slice { word, hi, lo } => {
                    let cur = next_regs[word].clone();
                    next_regs.insert(word.clone(), splice(cur, *hi, *lo, &v));
                }
                LValue::ArrayElem { array, indices } => {
                    let mut idx = BigUint::zero();
                    for i in indices {
                        idx = (idx << i.width) | eval_rtl_concrete(&st, i, rp.pool, &rp.env);
                    }
                    next_arrays.get_mut(array).unwrap().set(idx, v);
                }
            }
        }
        trace.push(st.words);
        arrays = next_arrays;
        regs = next_regs;
    }

    let mut confirmed = Vec::new();
    let mut unconfirmed = Vec::new();
    for c in violated {
        let tup = &spec.consequents[c.tuple];
        if !rp.guard_holds(tup) {
            unconfirmed.push(c.clone());
            continue;
        }
        let want_full = rp.eval_bits(tup.vexpr);
        let want = (want_full >> (c.atom.2 - tup.lo)) & mask(c.atom.1 - c.atom.2 + 1);
        let got_word = &trace[c.frame as usize][&c.atom.0];
        let got = (got_word.clone() >> c.atom.2) & mask(c.atom.1 - c.atom.2 + 1);
        if got != want {
            confirmed.push((c.clone(), want, got));
        } else {
            unconfirmed.push(c.clone());
        }
    }
    ReplayReport { confirmed, unconfirmed }
}

struct ReplayState {
    words: HashMap<String, BigUint>,
    arrays: HashMap<String, ArrayValue>,
}

// Concrete evaluation of an elaborated expression over replay state. Spec
// variables cannot occur here (design expressions only).
fn eval_rtl_concrete(st: &ReplayState, e: &RtlExpr, _pool: &ExprPool, _env: &Env) -> BigUint {
    use crate::ir::{RtlBinOp, RtlExprKind};
    use num_traits::ToPrimitive;
    match &e.kind {
        RtlExprKind::Literal { value, .. } => value.clone(),
        RtlExprKind::Word(n) => st.words[n].clone(),
        RtlExprKind::Slice { word, hi, lo } => {
            (st.words[word].clone() >> lo) & mask(hi - lo + 1)
        }
        RtlExprKind::ArrayRead { array, indices } => {
            let mut idx = BigUint::zero();
            for i in indices {
                idx = (idx << i.width) | eval_rtl_concrete(st, i, _pool, _env);
            }
            st.arrays[array].get(&idx)
        }
        RtlExprKind::Not(x) => mask(e.width) ^ eval_rtl_concrete(st, x, _pool, _env),
        RtlExprKind::Binary { op, lhs, rhs } => {
            let a = eval_rtl_concrete(st, lhs, _pool, _env);
            let b = eval_rtl_concrete(st, rhs, _pool, _env);
            let w = e.width;
            match op {
                RtlBinOp::Add => (a + b) & mask(w),
                RtlBinOp::Sub => ((BigUint::one() << w) + a - b) & mask(w),
                RtlBinOp::Mul => (a * b) & mask(w),
                RtlBinOp::Div => {
                    if b.is_zero() {
                        mask(w)
                    } else {
                        a / b
                    }
                }
                RtlBinOp::Rem => {
                    if b.is_zero() {
                        a
                    } else {
                        a % b
                    }
                }
                RtlBinOp::And => a & b,
                RtlBinOp::Or => a | b,
                RtlBinOp::Xor => a ^ b,
                RtlBinOp::Shl | RtlBinOp::Shr => {
                    if b >= BigUint::from(w) {
                        BigUint::zero()
                    } else {
                        let k = b.to_u32().unwrap();
                        if *op == RtlBinOp::Shl {
                            (a << k) & mask(w)
                        } else {
                            a >> k
                        }
                    }
                }
                RtlBinOp::Eq => BigUint::from(u32::from(a == b)),
                RtlBinOp::Ult => BigUint::from(u32::from(a < b)),
                RtlBinOp::Ule => BigUint::from(u32::from(a <= b)),
            }
        }
        RtlExprKind::Cond { cond, then, els } => {
            if eval_rtl_concrete(st, cond, _pool, _env).is_one() {
                eval_rtl_concrete(st, then, _pool, _env)
            } else {
                eval_rtl_concrete(st, els, _pool, _env)
            }
        }
        RtlExprKind::Concat(parts) => {
            let mut acc = BigUint::zero();
            for p in parts {
                acc = (acc << p.width) | eval_rtl_concrete(st, p, _pool, _env);
            }
            acc
        }
    }
}
