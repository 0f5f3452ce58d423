//! Recursive evaluation of RTL expressions into value terms and slice-wise
//! invalid bits, memoized per frame by elaboration node id.

use super::templates::{self, Operand};
use super::{ArrayChain, Granule, SimCtx, SymArray, SymState};
use crate::atomize::AtomMap;
use crate::expr::ExprId;
use crate::ir::{RtlBinOp, RtlExpr, RtlExprKind};
use num_traits::ToPrimitive;
use std::cell::RefCell;
use std::collections::HashMap;

/// Per-frame memo tables, keyed by elaborated expression node id.
#[derive(Debug, Default)]
pub struct FrameCtx {
    val: HashMap<u32, ExprId>,
    inv: HashMap<(u32, u32, u32), ExprId>,
    witness: HashMap<u32, ExprId>,
    word_val: HashMap<String, ExprId>,
}

/// Borrowed evaluation environment: the frame state, the atom map and the
/// frame memo. Copyable so operand closures can capture it.
#[derive(Clone, Copy)]
pub struct EvalEnv<'c> {
    pub st: &'c SymState,
    pub atoms: &'c AtomMap,
    pub fc: &'c RefCell<FrameCtx>,
}

/// Full-width value term of an expression (the Lemma-1 side: invalid bits of
/// the operands are never consulted).
pub fn rtl_val(cx: &mut SimCtx<'_>, env: EvalEnv<'_>, e: &RtlExpr) -> ExprId {
    if let Some(v) = env.fc.borrow().val.get(&e.id) {
        return *v;
    }
    let v = match &e.kind {
        RtlExprKind::Literal { value, .. } => cx.pool.bv_const(e.width, value.clone()),
        RtlExprKind::Word(n) => word_val(cx, env, n),
        RtlExprKind::Slice { word, hi, lo } => {
            let wv = word_val(cx, env, word);
            cx.pool.extract(*hi, *lo, wv)
        }
        RtlExprKind::ArrayRead { array, indices } => {
            let (idx, _) = flat_index(cx, env, indices);
            let arr = env.st.arrays[array.as_str()].val;
            cx.pool.array_read(arr, idx)
        }
        RtlExprKind::Not(x) => {
            let v = rtl_val(cx, env, x);
            cx.pool.bvnot(v)
        }
        RtlExprKind::Binary { op, lhs, rhs } => {
            let a = rtl_val(cx, env, lhs);
            let b = rtl_val(cx, env, rhs);
            match op {
                RtlBinOp::Add => cx.pool.add(a, b),
                RtlBinOp::Sub => cx.pool.sub(a, b),
                RtlBinOp::Mul => cx.pool.mul(a, b),
                RtlBinOp::Div => cx.pool.udiv(a, b),
                RtlBinOp::Rem => cx.pool.urem(a, b),
                RtlBinOp::And => cx.pool.bvand(a, b),
                RtlBinOp::Or => cx.pool.bvor(a, b),
                RtlBinOp::Xor => cx.pool.bvxor(a, b),
                RtlBinOp::Shl | RtlBinOp::Shr => {
                    let d = cx.pool.zext(b, lhs.width - rhs.width);
                    if *op == RtlBinOp::Shl {
                        cx.pool.shl(a, d)
                    } else {
                        cx.pool.lshr(a, d)
                    }
                }
                RtlBinOp::Eq | RtlBinOp::Ult | RtlBinOp::Ule => {
                    let c = match op {
                        RtlBinOp::Eq => cx.pool.eq(a, b),
                        RtlBinOp::Ult => cx.pool.ult(a, b),
                        _ => cx.pool.ule(a, b),
                    };
                    let one = cx.pool.bv_const(1, 1u32);
                    let zero = cx.pool.bv_const(1, 0u32);
                    cx.pool.ite(c, one, zero)
                }
            }
        }
        RtlExprKind::Cond { cond, then, els } => {
            let c = rtl_val(cx, env, cond);
            let one = cx.pool.bv_const(1, 1u32);
            let cb = cx.pool.eq(c, one);
            let t = rtl_val(cx, env, then);
            let f = rtl_val(cx, env, els);
            cx.pool.ite(cb, t, f)
        }
        RtlExprKind::Concat(parts) => {
            let vs: Vec<ExprId> = parts.iter().map(|p| rtl_val(cx, env, p)).collect();
            cx.pool.concat(&vs)
        }
    };
    env.fc.borrow_mut().val.insert(e.id, v);
    v
}

/// Invalid bit of `e[q:p]`, via the operator templates.
pub fn rtl_inv(cx: &mut SimCtx<'_>, env: EvalEnv<'_>, e: &RtlExpr, q: u32, p: u32) -> ExprId {
    debug_assert!(p <= q && q < e.width, "slice [{q}:{p}] out of range for width {}", e.width);
    if let Some(v) = env.fc.borrow().inv.get(&(e.id, q, p)) {
        return *v;
    }
    let v = match &e.kind {
        RtlExprKind::Literal { .. } => cx.pool.fls(),
        RtlExprKind::Word(n) => env.st.word_inv_slice(cx.pool, env.atoms, n, q, p),
        RtlExprKind::Slice { word, lo, .. } => {
            env.st.word_inv_slice(cx.pool, env.atoms, word, lo + q, lo + p)
        }
        RtlExprKind::ArrayRead { array, indices } => {
            let (idx_val, idx_inv) = flat_index(cx, env, indices);
            inv_array_read(cx, &env.st.arrays[array.as_str()], idx_val, idx_inv, q, p)
        }
        RtlExprKind::Not(x) => rtl_inv(cx, env, x, q, p),
        RtlExprKind::Binary { op, lhs, rhs } => {
            let mut a = operand(cx, env, lhs);
            match op {
                RtlBinOp::Add => {
                    let mut b = operand(cx, env, rhs);
                    templates::inv_add(cx, &mut a, &mut b, q, p)
                }
                RtlBinOp::Sub => {
                    let mut b = operand(cx, env, rhs);
                    templates::inv_sub(cx, &mut a, &mut b, q, p)
                }
                RtlBinOp::Mul => {
                    let mut b = operand(cx, env, rhs);
                    templates::inv_mul(cx, &mut a, &mut b)
                }
                RtlBinOp::Div | RtlBinOp::Rem => {
                    let mut b = operand(cx, env, rhs);
                    let witness = env.fc.borrow().witness.get(&e.id).copied();
                    let i = match witness {
                        Some(i) => i,
                        None => {
                            let i = templates::div_witness(cx, &mut b);
                            env.fc.borrow_mut().witness.insert(e.id, i);
                            i
                        }
                    };
                    if *op == RtlBinOp::Div {
                        templates::inv_udiv(cx, &mut a, &mut b, i, q, p)
                    } else {
                        templates::inv_urem(cx, &mut a, &mut b, i, q, p)
                    }
                }
                RtlBinOp::And => {
                    let mut b = operand(cx, env, rhs);
                    templates::inv_and(cx, &mut a, &mut b, q, p)
                }
                RtlBinOp::Or => {
                    let mut b = operand(cx, env, rhs);
                    templates::inv_or(cx, &mut a, &mut b, q, p)
                }
                RtlBinOp::Xor => {
                    let mut b = operand(cx, env, rhs);
                    templates::inv_xor(cx, &mut a, &mut b, q, p)
                }
                RtlBinOp::Eq | RtlBinOp::Ult | RtlBinOp::Ule => {
                    let mut b = operand(cx, env, rhs);
                    templates::inv_cmp(cx, &mut a, &mut b)
                }
                RtlBinOp::Shl | RtlBinOp::Shr => {
                    if let RtlExprKind::Literal { value, .. } = &rhs.kind {
                        let k = value.to_u32().unwrap_or(u32::MAX).min(e.width);
                        if *op == RtlBinOp::Shl {
                            templates::inv_shl_const(cx, &mut a, k, q, p)
                        } else {
                            templates::inv_lshr_const(cx, &mut a, k, q, p)
                        }
                    } else {
                        let mut d = operand(cx, env, rhs);
                        if *op == RtlBinOp::Shl {
                            templates::inv_shl_var(cx, &mut a, &mut d, q, p)
                        } else {
                            templates::inv_lshr_var(cx, &mut a, &mut d, q, p)
                        }
                    }
                }
            }
        }
        RtlExprKind::Cond { cond, then, els } => {
            let mut c = operand(cx, env, cond);
            let mut t = operand(cx, env, then);
            let mut f = operand(cx, env, els);
            templates::inv_ite(cx, &mut c, &mut t, &mut f, q, p)
        }
        RtlExprKind::Concat(parts) => {
            let mut ops: Vec<Operand<'_>> = parts.iter().map(|x| operand(cx, env, x)).collect();
            templates::inv_concat(cx, &mut ops, q, p)
        }
    };
    env.fc.borrow_mut().inv.insert((e.id, q, p), v);
    v
}

/// Granule decomposition of an expression, used for symbolic-bound slices:
/// word references decompose into their atoms, concatenations into their
/// parts; anything else is one whole-width granule.
pub fn rtl_granules(cx: &mut SimCtx<'_>, env: EvalEnv<'_>, e: &RtlExpr) -> Vec<Granule> {
    match &e.kind {
        RtlExprKind::Word(n) => env.atoms[n.as_str()]
            .atoms()
            .into_iter()
            .map(|(hi, lo)| Granule {
                hi,
                lo,
                inv: env.st.atom(&(n.clone(), hi, lo)).inv,
            })
            .collect(),
        RtlExprKind::Slice { word, hi, lo } => env.atoms[word.as_str()]
            .atoms_in(*hi, *lo)
            .into_iter()
            .map(|(ahi, alo)| Granule {
                hi: ahi.min(*hi) - lo,
                lo: alo.max(*lo) - lo,
                inv: env.st.atom(&(word.clone(), ahi, alo)).inv,
            })
            .collect(),
        RtlExprKind::Concat(parts) => {
            let mut out = Vec::new();
            let mut base = e.width;
            for p in parts {
                base -= p.width;
                for g in rtl_granules(cx, env, p) {
                    out.push(Granule { hi: g.hi + base, lo: g.lo + base, inv: g.inv });
                }
            }
            out
        }
        _ => {
            let inv = rtl_inv(cx, env, e, e.width - 1, 0);
            vec![Granule { hi: e.width - 1, lo: 0, inv }]
        }
    }
}

/// Wrap an expression as a template operand.
pub fn operand<'c>(cx: &mut SimCtx<'_>, env: EvalEnv<'c>, e: &'c RtlExpr) -> Operand<'c> {
    let val = rtl_val(cx, env, e);
    Operand::new(
        e.width,
        val,
        move |cx, q, p| rtl_inv(cx, env, e, q, p),
        move |cx| rtl_granules(cx, env, e),
    )
}

/// Flattened (concatenated) index of a possibly multi-dimensional access,
/// with its invalid bit (any index dimension unknown poisons the whole).
pub fn flat_index(
    cx: &mut SimCtx<'_>,
    env: EvalEnv<'_>,
    indices: &[RtlExpr],
) -> (ExprId, ExprId) {
    let vals: Vec<ExprId> = indices.iter().map(|i| rtl_val(cx, env, i)).collect();
    let val = if vals.len() == 1 { vals[0] } else { cx.pool.concat(&vals) };
    let mut inv = cx.pool.fls();
    for i in indices {
        let ii = rtl_inv(cx, env, i, i.width - 1, 0);
        inv = cx.pool.or(inv, ii);
    }
    (val, inv)
}

/// Invalid bit of `read(A, i)[q:p]` over the update chain: an unknown read or
/// write index anywhere poisons the read; a matching known write index
/// resolves to the stored element's slice; otherwise recurse past the write.
pub fn inv_array_read(
    cx: &mut SimCtx<'_>,
    arr: &SymArray,
    idx_val: ExprId,
    idx_inv: ExprId,
    q: u32,
    p: u32,
) -> ExprId {
    let rec = inv_array_read_rec(cx, arr, idx_val, q, p);
    cx.pool.or(idx_inv, rec)
}

fn inv_array_read_rec(
    cx: &mut SimCtx<'_>,
    arr: &SymArray,
    idx_val: ExprId,
    q: u32,
    p: u32,
) -> ExprId {
    match &arr.chain {
        ArrayChain::Base { initialized } => cx.pool.bool_const(!initialized),
        ArrayChain::Update(step) => {
            let elem_inv = granule_slice_inv(cx, &step.elem_granules, q, p);
            let hit = cx.pool.eq(idx_val, step.idx_val);
            let deeper = inv_array_read_rec(cx, &step.prev, idx_val, q, p);
            let ite = cx.pool.bool_ite(hit, elem_inv, deeper);
            cx.pool.or(step.idx_inv, ite)
        }
    }
}

fn granule_slice_inv(cx: &mut SimCtx<'_>, granules: &[Granule], q: u32, p: u32) -> ExprId {
    let mut acc = cx.pool.fls();
    for g in granules {
        if g.lo <= q && g.hi >= p {
            acc = cx.pool.or(acc, g.inv);
        }
    }
    acc
}

/// Whole-word value assembled from the state's atoms, cached per frame.
fn word_val(cx: &mut SimCtx<'_>, env: EvalEnv<'_>, word: &str) -> ExprId {
    if let Some(v) = env.fc.borrow().word_val.get(word) {
        return *v;
    }
    let v = env.st.word_val(cx.pool, env.atoms, word);
    env.fc.borrow_mut().word_val.insert(word.to_string(), v);
    v
}
