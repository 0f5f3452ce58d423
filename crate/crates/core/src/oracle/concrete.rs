//! Concrete simulators: the deterministic two-valued interpreter used for
//! counterexample replay, and a ternary trace simulator that concretizes
//! every X source exhaustively (inputs marked X, uninitialized registers and
//! arrays) and merges the runs.

use super::{OracleError, X_BUDGET_DEFAULT};
use crate::expr::ArrayValue;
use crate::ir::{Elaborated, LValue, RtlBinOp, RtlExpr, RtlExprKind, WordKind};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;

/// Initial-state overrides for replay: values for uninitialized registers and
/// arrays, typically taken from a solver model. Anything not covered falls
/// back to zero.
#[derive(Debug, Clone, Default)]
pub struct ConcreteInit {
    pub regs: HashMap<String, BigUint>,
    pub arrays: HashMap<String, ArrayValue>,
}

/// Inputs for one frame; `None` marks a whole word as X (ternary simulation
/// only — the two-valued simulator takes zero for it).
pub type StimulusFrame = HashMap<String, Option<BigUint>>;

struct SimState {
    words: HashMap<String, BigUint>,
    arrays: HashMap<String, ArrayValue>,
}

fn mask(w: u32) -> BigUint {
    (BigUint::one() << w) - BigUint::one()
}

/// Deterministic two-valued simulation. Returns, per frame, the settled value
/// of every word (inputs, registers and wires).
pub fn simulate_concrete(
    el: &Elaborated,
    stimuli: &[StimulusFrame],
    frames: u32,
    init: &ConcreteInit,
) -> Vec<HashMap<String, BigUint>> {
    let mut regs: HashMap<String, BigUint> = HashMap::new();
    for (name, info) in &el.words {
        if info.kind == WordKind::Reg {
            let v = info
                .init
                .clone()
                .or_else(|| init.regs.get(name).cloned())
                .unwrap_or_else(BigUint::zero);
            regs.insert(name.clone(), v);
        }
    }
    let mut arrays: HashMap<String, ArrayValue> = HashMap::new();
    for (name, info) in &el.arrays {
        let a = init.arrays.get(name).cloned().unwrap_or_else(|| {
            ArrayValue::filled(info.index_width, info.elem_width, BigUint::zero())
        });
        arrays.insert(name.clone(), a);
    }

    let mut trace = Vec::with_capacity(frames as usize);
    for t in 0..frames {
        let mut st = SimState { words: HashMap::new(), arrays };
        // inputs
        for (name, info) in &el.words {
            if info.kind == WordKind::Input {
                let v = stimuli
                    .get(t as usize)
                    .and_then(|f| f.get(name).cloned())
                    .flatten()
                    .unwrap_or_else(BigUint::zero);
                st.words.insert(name.clone(), v & mask(info.width));
            }
        }
        // registers (pre-edge values), wires start at zero
        for (name, info) in &el.words {
            match info.kind {
                WordKind::Reg => {
                    st.words.insert(name.clone(), regs[name].clone());
                }
                WordKind::Wire => {
                    st.words.insert(name.clone(), BigUint::zero());
                }
                WordKind::Input => {}
            }
        }
        // settle combinational assignments in order
        for a in &el.transition().comb {
            let v = eval_rtl(&st, &a.rhs);
            write_lvalue_word(&mut st, &a.lhs, v, el);
        }
        trace.push(st.words.clone());
        // clock edge: all right-hand sides read the settled frame
        let mut next_regs = regs.clone();
        let mut next_arrays = st.arrays.clone();
        for a in &el.transition().seq {
            match &a.lhs {
                LValue::Word(n) => {
                    let v = eval_rtl(&st, &a.rhs);
                    next_regs.insert(n.clone(), v);
                }
                LValue::Slice { word, hi, lo } => {
                    let v = eval_rtl(&st, &a.rhs);
                    let cur = next_regs[word].clone();
                    next_regs.insert(word.clone(), splice(cur, *hi, *lo, v));
                }
                LValue::ArrayElem { array, indices } => {
                    let idx = flat_index(&st, indices);
                    let v = eval_rtl(&st, &a.rhs);
                    next_arrays.get_mut(array).unwrap().set(idx, v);
                }
            }
        }
        regs = next_regs;
        arrays = next_arrays;
    }
    trace
}

fn splice(word: BigUint, hi: u32, lo: u32, v: BigUint) -> BigUint {
    let m = mask(hi - lo + 1) << lo;
    let cleared = word.clone() - (word & &m);
    cleared | ((v << lo) & m)
}

fn write_lvalue_word(st: &mut SimState, lv: &LValue, v: BigUint, _el: &Elaborated) {
    match lv {
        LValue::Word(n) => {
            st.words.insert(n.clone(), v);
        }
        LValue::Slice { word, hi, lo } => {
            let cur = st.words[word].clone();
            st.words.insert(word.clone(), splice(cur, *hi, *lo, v));
        }
        LValue::ArrayElem { .. } => unreachable!("combinational array writes are rejected"),
    }
}

fn flat_index(st: &SimState, indices: &[RtlExpr]) -> BigUint {
    let mut acc = BigUint::zero();
    for i in indices {
        acc = (acc << i.width) | eval_rtl(st, i);
    }
    acc
}

fn eval_rtl(st: &SimState, e: &RtlExpr) -> BigUint {
    match &e.kind {
        RtlExprKind::Literal { value, .. } => value.clone(),
        RtlExprKind::Word(n) => st.words[n].clone(),
        RtlExprKind::Slice { word, hi, lo } => (st.words[word].clone() >> lo) & mask(hi - lo + 1),
        RtlExprKind::ArrayRead { array, indices } => {
            let idx = flat_index(st, indices);
            st.arrays[array].get(&idx)
        }
        RtlExprKind::Not(x) => mask(e.width) ^ eval_rtl(st, x),
        RtlExprKind::Binary { op, lhs, rhs } => {
            let a = eval_rtl(st, lhs);
            let b = eval_rtl(st, rhs);
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
            if eval_rtl(st, cond).is_one() {
                eval_rtl(st, then)
            } else {
                eval_rtl(st, els)
            }
        }
        RtlExprKind::Concat(parts) => {
            let mut acc = BigUint::zero();
            for p in parts {
                acc = (acc << p.width) | eval_rtl(st, p);
            }
            acc
        }
    }
}

/// Per-word ternary value in a merged trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryTrace {
    pub width: u32,
    pub bits: BigUint,
    pub xmask: BigUint,
}

impl TernaryTrace {
    pub fn display(&self) -> String {
        (0..self.width)
            .rev()
            .map(|i| {
                if (self.xmask.clone() >> i) & BigUint::one() == BigUint::one() {
                    'x'
                } else if (self.bits.clone() >> i) & BigUint::one() == BigUint::one() {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    pub fn is_fully_x(&self) -> bool {
        self.xmask == mask(self.width)
    }
}

/// Exact ternary simulation by global concretization: every X source (X
/// stimulus words, uninitialized registers, uninitialized array cells) is
/// enumerated both ways and the per-bit results are merged.
pub fn simulate_ternary(
    el: &Elaborated,
    stimuli: &[StimulusFrame],
    frames: u32,
    budget: Option<u32>,
) -> Result<Vec<HashMap<String, TernaryTrace>>, OracleError> {
    let budget = budget.unwrap_or(X_BUDGET_DEFAULT);
    enum Src {
        Input { frame: usize, name: String, width: u32 },
        Reg { name: String, width: u32 },
        ArrayCell { name: String, index: BigUint, width: u32 },
    }
    let mut sources = Vec::new();
    for t in 0..frames as usize {
        if let Some(fr) = stimuli.get(t) {
            for (n, v) in fr {
                if v.is_none() {
                    sources.push(Src::Input {
                        frame: t,
                        name: n.clone(),
                        width: el.width_of(n),
                    });
                }
            }
        }
    }
    for (name, info) in &el.words {
        if info.kind == WordKind::Reg && info.init.is_none() {
            sources.push(Src::Reg { name: name.clone(), width: info.width });
        }
    }
    for (name, info) in &el.arrays {
        if !info.initialized {
            let cells = BigUint::one() << info.index_width;
            let mut idx = BigUint::zero();
            while idx < cells {
                sources.push(Src::ArrayCell {
                    name: name.clone(),
                    index: idx.clone(),
                    width: info.elem_width,
                });
                idx += BigUint::one();
            }
        }
    }
    let total: u32 = sources
        .iter()
        .map(|s| match s {
            Src::Input { width, .. } | Src::Reg { width, .. } | Src::ArrayCell { width, .. } => {
                *width
            }
        })
        .sum();
    if total > budget {
        return Err(OracleError::BudgetExceeded(total, budget));
    }

    let mut merged: Option<Vec<HashMap<String, TernaryTrace>>> = None;
    for assignment in 0u64..(1u64 << total) {
        let mut stim: Vec<StimulusFrame> = stimuli.to_vec();
        let mut init = ConcreteInit::default();
        let mut bit = 0u32;
        let take = |width: u32, bit: &mut u32| -> BigUint {
            let v = BigUint::from((assignment >> *bit) & ((1u64 << width) - 1));
            *bit += width;
            v
        };
        for s in &sources {
            match s {
                Src::Input { frame, name, width } => {
                    let v = take(*width, &mut bit);
                    stim[*frame].insert(name.clone(), Some(v));
                }
                Src::Reg { name, width } => {
                    let v = take(*width, &mut bit);
                    init.regs.insert(name.clone(), v);
                }
                Src::ArrayCell { name, index, width } => {
                    let v = take(*width, &mut bit);
                    let info = &el.arrays[name];
                    init.arrays
                        .entry(name.clone())
                        .or_insert_with(|| {
                            ArrayValue::filled(info.index_width, info.elem_width, BigUint::zero())
                        })
                        .set(index.clone(), v);
                }
            }
        }
        let run = simulate_concrete(el, &stim, frames, &init);
        merged = Some(match merged {
            None => run
                .into_iter()
                .map(|fr| {
                    fr.into_iter()
                        .map(|(n, v)| {
                            let w = el.width_of(&n);
                            (n, TernaryTrace { width: w, bits: v, xmask: BigUint::zero() })
                        })
                        .collect()
                })
                .collect(),
            Some(mut acc) => {
                for (accf, runf) in acc.iter_mut().zip(run) {
                    for (name, v) in runf {
                        let t = accf.get_mut(&name).unwrap();
                        let known = mask(t.width) ^ &t.xmask;
                        let diff = (t.bits.clone() ^ &v) & known;
                        t.xmask |= diff;
                        let keep = mask(t.width) ^ &t.xmask;
                        t.bits &= keep;
                    }
                }
                acc
            }
        });
    }
    Ok(merged.expect("at least one concretization"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{elaborate, parse};

    fn stim(pairs: &[(&str, Option<u64>)]) -> StimulusFrame {
        pairs
            .iter()
            .map(|(n, v)| (n.to_string(), v.map(BigUint::from)))
            .collect()
    }

    #[test]
    fn register_chain_delays_input() {
        let el = elaborate(
            &parse("input a:8; reg r1:8 = 0; reg r2:8 = 0; r1 <= a; r2 <= r1;").unwrap(),
        )
        .unwrap();
        let stimuli = vec![
            stim(&[("a", Some(5))]),
            stim(&[("a", Some(9))]),
            stim(&[("a", Some(1))]),
        ];
        let tr = simulate_concrete(&el, &stimuli, 3, &ConcreteInit::default());
        assert_eq!(tr[1]["r1"], BigUint::from(5u32));
        assert_eq!(tr[2]["r1"], BigUint::from(9u32));
        assert_eq!(tr[2]["r2"], BigUint::from(5u32));
    }

    #[test]
    fn accumulates_absolute_differences() {
        let el = elaborate(
            &parse(
                "input a:8; input b:8; wire d:8; reg acc:8 = 0; \
                 d = a < b ? b - a : a - b; acc <= acc + d;",
            )
            .unwrap(),
        )
        .unwrap();
        let stimuli = vec![
            stim(&[("a", Some(10)), ("b", Some(3))]),  // |10-3| = 7
            stim(&[("a", Some(2)), ("b", Some(9))]),   // |2-9| = 7
            stim(&[("a", Some(5)), ("b", Some(5))]),   // 0
        ];
        let tr = simulate_concrete(&el, &stimuli, 3, &ConcreteInit::default());
        assert_eq!(tr[0]["acc"], BigUint::zero());
        assert_eq!(tr[1]["acc"], BigUint::from(7u32));
        assert_eq!(tr[2]["acc"], BigUint::from(14u32));
    }

    #[test]
    fn ternary_sim_marks_unknowns() {
        let el = elaborate(
            &parse("input a:2; input b:2; wire z:2; wire k:2; z = a & b; k = a & 2'd0;")
                .unwrap(),
        )
        .unwrap();
        let stimuli = vec![stim(&[("a", None), ("b", Some(3))])];
        let tr = simulate_ternary(&el, &stimuli, 1, None).unwrap();
        assert_eq!(tr[0]["z"].display(), "xx");
        assert_eq!(tr[0]["k"].display(), "00"); // zero absorbs the unknown
    }

    #[test]
    fn uninitialized_register_is_x_until_loaded() {
        let el =
            elaborate(&parse("input a:2; reg r:2; r <= a;").unwrap()).unwrap();
        let stimuli = vec![stim(&[("a", Some(2))]), stim(&[("a", Some(2))])];
        let tr = simulate_ternary(&el, &stimuli, 2, None).unwrap();
        assert!(tr[0]["r"].is_fully_x());
        assert_eq!(tr[1]["r"].display(), "10");
    }

    #[test]
    fn ternary_budget_enforced() {
        let el = elaborate(&parse("input a:16; wire z:16; z = a;").unwrap()).unwrap();
        let stimuli = vec![stim(&[("a", None)])];
        assert!(simulate_ternary(&el, &stimuli, 1, Some(12)).is_err());
    }
}
