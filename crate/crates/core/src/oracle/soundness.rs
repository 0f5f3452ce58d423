//! Exhaustive soundness checking of the invalid-bit templates against the
//! exact X-propagation oracle.
//!
//! For an operator at width m, every operand configuration (payload value
//! plus invalid flag, operands modeled as whole atoms) and every result slice
//! is enumerated. The engine's invalid-bit and value expressions are built
//! once per slice from the real templates, then evaluated concretely per
//! configuration. Whenever the engine reports a slice valid, the oracle must
//! find the slice fully determined and equal to the engine's value.
//!
//! Division carries its domain assumption: the witness constraint
//! `2^i <= val(b) < 2^(i+1)` excludes a zero divisor (payload and
//! concretization alike), so divisor-zero cases are outside the checked
//! domain.

use super::ternary::{apply_concrete, TernaryWord};
use crate::expr::{ArrayValue, Env, ExprId, ExprPool, Value};
use crate::symsim::templates::{self, Operand};
use crate::symsim::{
    inv_array_read, ArrayChain, ArrayStep, Granule, ShiftMode, SimCtx, SimSide, SymArray,
};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use std::rc::Rc;

/// Operators the exhaustive checker covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpUnderTest {
    Add,
    Sub,
    Mul,
    Udiv,
    Urem,
    Not,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Eq,
    Ult,
    Ule,
    Ite,
    Concat,
    Extract { hi: u32, lo: u32 },
    ShlConst(u32),
    LshrConst(u32),
    Shl,
    Lshr,
}

impl OpUnderTest {
    pub fn name(self) -> String {
        match self {
            OpUnderTest::Extract { hi, lo } => format!("extract[{hi}:{lo}]"),
            OpUnderTest::ShlConst(k) => format!("shl-const({k})"),
            OpUnderTest::LshrConst(k) => format!("lshr-const({k})"),
            other => format!("{other:?}").to_lowercase(),
        }
    }

    fn is_division(self) -> bool {
        matches!(self, OpUnderTest::Udiv | OpUnderTest::Urem)
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub op: String,
    pub width: u32,
    pub q: u32,
    pub p: u32,
    /// Reproducer: operand payloads and invalid flags.
    pub config: String,
    pub engine_inv: bool,
    pub engine_val: u64,
    pub oracle: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}\tm={}\tslice=[{}:{}]\t{}\tengine=(inv={}, val={:#x})\toracle={}",
            self.op, self.width, self.q, self.p, self.config, self.engine_inv, self.engine_val,
            self.oracle
        )
    }
}

#[derive(Debug, Clone)]
pub struct SoundnessReport {
    pub op: String,
    pub width: u32,
    pub mode: ShiftMode,
    pub configs_checked: u64,
    pub violations: Vec<Violation>,
    /// Configurations with every invalid flag false where the engine value
    /// slice differed from the concrete operator result (the value rule).
    pub value_rule_mismatches: u64,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

struct OperandSpec {
    width: u32,
    val_name: &'static str,
    inv_name: &'static str,
}

fn operand_specs(op: OpUnderTest, m: u32) -> Vec<OperandSpec> {
    match op {
        OpUnderTest::Not
        | OpUnderTest::Extract { .. }
        | OpUnderTest::ShlConst(_)
        | OpUnderTest::LshrConst(_) => {
            vec![OperandSpec { width: m, val_name: "av", inv_name: "ai" }]
        }
        OpUnderTest::Ite => vec![
            OperandSpec { width: 1, val_name: "sv", inv_name: "si" },
            OperandSpec { width: m, val_name: "av", inv_name: "ai" },
            OperandSpec { width: m, val_name: "bv", inv_name: "bi" },
        ],
        _ => vec![
            OperandSpec { width: m, val_name: "av", inv_name: "ai" },
            OperandSpec { width: m, val_name: "bv", inv_name: "bi" },
        ],
    }
}

fn result_width(op: OpUnderTest, m: u32) -> u32 {
    match op {
        OpUnderTest::Concat => 2 * m,
        OpUnderTest::Eq | OpUnderTest::Ult | OpUnderTest::Ule => 1,
        OpUnderTest::Extract { hi, lo } => hi - lo + 1,
        _ => m,
    }
}

/// Build the engine's value expression (the Lemma-1 side) for the whole
/// result, from the operand value variables.
fn build_val(pool: &mut ExprPool, op: OpUnderTest, vals: &[ExprId]) -> ExprId {
    match op {
        OpUnderTest::Add => pool.add(vals[0], vals[1]),
        OpUnderTest::Sub => pool.sub(vals[0], vals[1]),
        OpUnderTest::Mul => pool.mul(vals[0], vals[1]),
        OpUnderTest::Udiv => pool.udiv(vals[0], vals[1]),
        OpUnderTest::Urem => pool.urem(vals[0], vals[1]),
        OpUnderTest::Not => pool.bvnot(vals[0]),
        OpUnderTest::And => pool.bvand(vals[0], vals[1]),
        OpUnderTest::Or => pool.bvor(vals[0], vals[1]),
        OpUnderTest::Xor => pool.bvxor(vals[0], vals[1]),
        OpUnderTest::Nand => {
            let x = pool.bvand(vals[0], vals[1]);
            pool.bvnot(x)
        }
        OpUnderTest::Nor => {
            let x = pool.bvor(vals[0], vals[1]);
            pool.bvnot(x)
        }
        OpUnderTest::Xnor => {
            let x = pool.bvxor(vals[0], vals[1]);
            pool.bvnot(x)
        }
        OpUnderTest::Eq | OpUnderTest::Ult | OpUnderTest::Ule => {
            let c = match op {
                OpUnderTest::Eq => pool.eq(vals[0], vals[1]),
                OpUnderTest::Ult => pool.ult(vals[0], vals[1]),
                _ => pool.ule(vals[0], vals[1]),
            };
            let one = pool.bv_const(1, 1u32);
            let zero = pool.bv_const(1, 0u32);
            pool.ite(c, one, zero)
        }
        OpUnderTest::Ite => {
            let one = pool.bv_const(1, 1u32);
            let c = pool.eq(vals[0], one);
            pool.ite(c, vals[1], vals[2])
        }
        OpUnderTest::Concat => pool.concat(&[vals[0], vals[1]]),
        OpUnderTest::Extract { hi, lo } => pool.extract(hi, lo, vals[0]),
        OpUnderTest::ShlConst(k) => pool.shl_const(vals[0], k),
        OpUnderTest::LshrConst(k) => pool.lshr_const(vals[0], k),
        OpUnderTest::Shl => pool.shl(vals[0], vals[1]),
        OpUnderTest::Lshr => pool.lshr(vals[0], vals[1]),
    }
}

/// Build the engine's invalid-bit expression for `res[q:p]` through the real
/// templates, operands modeled as whole atoms.
fn build_inv(
    cx: &mut SimCtx<'_>,
    op: OpUnderTest,
    ops: &mut [Operand<'_>],
    q: u32,
    p: u32,
) -> ExprId {
    let (a, rest) = ops.split_at_mut(1);
    let a = &mut a[0];
    match op {
        OpUnderTest::Add => templates::inv_add(cx, a, &mut rest[0], q, p),
        OpUnderTest::Sub => templates::inv_sub(cx, a, &mut rest[0], q, p),
        OpUnderTest::Mul => templates::inv_mul(cx, a, &mut rest[0]),
        OpUnderTest::Udiv => {
            let i = templates::div_witness(cx, &mut rest[0]);
            templates::inv_udiv(cx, a, &mut rest[0], i, q, p)
        }
        OpUnderTest::Urem => {
            let i = templates::div_witness(cx, &mut rest[0]);
            templates::inv_urem(cx, a, &mut rest[0], i, q, p)
        }
        OpUnderTest::Not => a.inv_slice(cx, q, p),
        OpUnderTest::And => templates::inv_and(cx, a, &mut rest[0], q, p),
        OpUnderTest::Or => templates::inv_or(cx, a, &mut rest[0], q, p),
        OpUnderTest::Xor => templates::inv_xor(cx, a, &mut rest[0], q, p),
        // outer negation passes invalid bits through
        OpUnderTest::Nand => templates::inv_and(cx, a, &mut rest[0], q, p),
        OpUnderTest::Nor => templates::inv_or(cx, a, &mut rest[0], q, p),
        OpUnderTest::Xnor => templates::inv_xor(cx, a, &mut rest[0], q, p),
        OpUnderTest::Eq | OpUnderTest::Ult | OpUnderTest::Ule => {
            templates::inv_cmp(cx, a, &mut rest[0])
        }
        OpUnderTest::Ite => {
            let (t, e) = rest.split_at_mut(1);
            templates::inv_ite(cx, a, &mut t[0], &mut e[0], q, p)
        }
        OpUnderTest::Concat => {
            let total = a.width + rest[0].width;
            let mut acc = cx.pool.fls();
            let mut top = total;
            for o in std::iter::once(&mut *a).chain(rest.iter_mut()) {
                let (phi, plo) = (top - 1, top - o.width);
                top -= o.width;
                if plo > q || phi < p {
                    continue;
                }
                let shi = q.min(phi) - plo;
                let slo = p.max(plo) - plo;
                let iv = o.inv_slice(cx, shi, slo);
                acc = cx.pool.or(acc, iv);
            }
            acc
        }
        OpUnderTest::Extract { hi, lo } => templates::inv_extract(cx, a, hi, lo, q, p),
        OpUnderTest::ShlConst(k) => templates::inv_shl_const(cx, a, k, q, p),
        OpUnderTest::LshrConst(k) => templates::inv_lshr_const(cx, a, k, q, p),
        OpUnderTest::Shl => templates::inv_shl_var(cx, a, &mut rest[0], q, p),
        OpUnderTest::Lshr => templates::inv_lshr_var(cx, a, &mut rest[0], q, p),
    }
}

fn ternary_op(op: OpUnderTest) -> super::ternary::TernaryOp {
    use super::ternary::TernaryOp as T;
    match op {
        OpUnderTest::Add => T::Add,
        OpUnderTest::Sub => T::Sub,
        OpUnderTest::Mul => T::Mul,
        OpUnderTest::Udiv => T::Udiv,
        OpUnderTest::Urem => T::Urem,
        OpUnderTest::Not => T::Not,
        OpUnderTest::And => T::And,
        OpUnderTest::Or => T::Or,
        OpUnderTest::Xor => T::Xor,
        OpUnderTest::Nand => T::Nand,
        OpUnderTest::Nor => T::Nor,
        OpUnderTest::Xnor => T::Xnor,
        OpUnderTest::Eq => T::Eq,
        OpUnderTest::Ult => T::Ult,
        OpUnderTest::Ule => T::Ule,
        OpUnderTest::Ite => T::Ite,
        OpUnderTest::Concat => T::Concat,
        OpUnderTest::Extract { .. } => unreachable!("handled via slicing"),
        OpUnderTest::ShlConst(k) => T::ShlConst(k),
        OpUnderTest::LshrConst(k) => T::LshrConst(k),
        OpUnderTest::Shl => T::Shl,
        OpUnderTest::Lshr => T::Lshr,
    }
}

/// Exact ternary result of the operator restricted to the division domain
/// (divisor concretizations of zero are excluded for udiv/urem).
fn oracle_result(op: OpUnderTest, operands: &[TernaryWord], q: u32, p: u32) -> TernaryWord {
    if let OpUnderTest::Extract { hi: _, lo: elo } = op {
        return operands[0].slice(elo + q, elo + p);
    }
    let top = ternary_op(op);
    let mut xpos = Vec::new();
    for (oi, o) in operands.iter().enumerate() {
        for b in 0..o.width {
            if o.bit(b).is_none() {
                xpos.push((oi, b));
            }
        }
    }
    let mut first: Option<u64> = None;
    let mut diff: u64 = 0;
    for assignment in 0u64..(1 << xpos.len()) {
        let mut vals: Vec<(u32, u64)> = operands.iter().map(|o| (o.width, o.bits)).collect();
        for (k, &(oi, b)) in xpos.iter().enumerate() {
            if assignment >> k & 1 == 1 {
                vals[oi].1 |= 1 << b;
            }
        }
        if op.is_division() && vals[1].1 == 0 {
            continue;
        }
        let (_, r) = apply_concrete(top, &vals);
        let w = q - p + 1;
        let sl = (r >> p) & if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
        match first {
            None => first = Some(sl),
            Some(f) => diff |= f ^ sl,
        }
    }
    let f = first.expect("non-empty concretization domain");
    TernaryWord::new(q - p + 1, f, diff)
}

/// Run the exhaustive check for one operator at one width.
pub fn check_template_soundness(op: OpUnderTest, width: u32, mode: ShiftMode) -> SoundnessReport {
    let m = width;
    let specs = operand_specs(op, m);
    let rw = result_width(op, m);
    let mut report = SoundnessReport {
        op: op.name(),
        width: m,
        mode,
        configs_checked: 0,
        violations: Vec::new(),
        value_rule_mismatches: 0,
    };
    for q in 0..rw {
        for p in 0..=q {
            // engine expressions, built once per slice
            let mut pool = ExprPool::new();
            let mut side = SimSide::default();
            let var_ids: Vec<(ExprId, ExprId)> = specs
                .iter()
                .map(|s| (pool.bv_var(s.val_name, s.width), pool.bool_var(s.inv_name)))
                .collect();
            let vals: Vec<ExprId> = var_ids.iter().map(|(v, _)| *v).collect();
            let full_val = build_val(&mut pool, op, &vals);
            let engine_val = pool.extract(q, p, full_val);
            let engine_inv = {
                let mut cx = SimCtx { pool: &mut pool, side: &mut side, mode };
                let mut ops: Vec<Operand<'_>> = specs
                    .iter()
                    .zip(&var_ids)
                    .map(|(s, (v, i))| Operand::atom(s.width, *v, *i))
                    .collect();
                build_inv(&mut cx, op, &mut ops, q, p)
            };

            // enumerate every (payload, invalid) configuration
            let dims: Vec<u64> = specs.iter().map(|s| 1u64 << s.width).collect();
            let mut counters = vec![(0u64, false); specs.len()];
            'configs: loop {
                let divisor_payload_zero = op.is_division() && counters[1].0 == 0;
                if !divisor_payload_zero {
                    report.configs_checked += 1;
                    let mut env = Env::new();
                    for (k, s) in specs.iter().enumerate() {
                        env.insert(s.val_name.to_string(), Value::bits(s.width, counters[k].0));
                        env.insert(s.inv_name.to_string(), Value::Bool(counters[k].1));
                    }
                    if op.is_division() {
                        let b = counters[1].0;
                        let i_val = 63 - u64::from(b.leading_zeros());
                        env.insert("i!0".to_string(), Value::bits(m, i_val));
                    }
                    let inv_v = pool.eval(engine_inv, &env).expect("inv eval").as_bool();
                    let val_v = pool
                        .eval(engine_val, &env)
                        .expect("val eval")
                        .as_bits()
                        .to_u64()
                        .unwrap();
                    let t_ops: Vec<TernaryWord> = specs
                        .iter()
                        .enumerate()
                        .map(|(k, s)| {
                            if counters[k].1 {
                                TernaryWord::all_x(s.width)
                            } else {
                                TernaryWord::defined(s.width, counters[k].0)
                            }
                        })
                        .collect();
                    let oracle = oracle_result(op, &t_ops, q, p);
                    if !inv_v && !(oracle.is_fully_defined() && oracle.bits == val_v) {
                        let config = specs
                            .iter()
                            .enumerate()
                            .map(|(k, s)| {
                                format!("{}=({:#x},{})", s.val_name, counters[k].0, counters[k].1)
                            })
                            .collect::<Vec<_>>()
                            .join(" ");
                        report.violations.push(Violation {
                            op: op.name(),
                            width: m,
                            q,
                            p,
                            config,
                            engine_inv: inv_v,
                            engine_val: val_v,
                            oracle: oracle.display(),
                        });
                    }
                    if counters.iter().all(|(_, i)| !i) && oracle.bits != val_v {
                        report.value_rule_mismatches += 1;
                    }
                }
                // advance the odometer over (payload, inv) pairs
                let mut k = 0;
                loop {
                    if k == counters.len() {
                        break 'configs;
                    }
                    if !counters[k].1 {
                        counters[k].1 = true;
                        break;
                    }
                    counters[k].1 = false;
                    counters[k].0 += 1;
                    if counters[k].0 < dims[k] {
                        break;
                    }
                    counters[k].0 = 0;
                    k += 1;
                }
            }
        }
    }
    report
}

/// Exhaustive check of array read/update over two-entry arrays: one or two
/// symbolic updates over an initialized or uninitialized base, then a read.
pub fn check_array_soundness(elem_width: u32, updates: usize) -> SoundnessReport {
    let ew = elem_width;
    let mut report = SoundnessReport {
        op: format!("array-read/update(x{updates})"),
        width: ew,
        mode: ShiftMode::StrictSound,
        configs_checked: 0,
        violations: Vec::new(),
        value_rule_mismatches: 0,
    };
    for initialized in [true, false] {
        for q in 0..ew {
            for p in 0..=q {
                let mut pool = ExprPool::new();
                let mut side = SimSide::default();
                let base_val = pool.array_var("A", 1, ew);
                let mut arr = SymArray {
                    index_width: 1,
                    elem_width: ew,
                    val: base_val,
                    chain: ArrayChain::Base { initialized },
                };
                for k in 0..updates {
                    let iv = pool.bv_var(&format!("u{k}i"), 1);
                    let ii = pool.bool_var(&format!("u{k}ix"));
                    let ev = pool.bv_var(&format!("u{k}e"), ew);
                    let ei = pool.bool_var(&format!("u{k}ex"));
                    let val = pool.array_update(arr.val, iv, ev);
                    arr = SymArray {
                        index_width: 1,
                        elem_width: ew,
                        val,
                        chain: ArrayChain::Update(Rc::new(ArrayStep {
                            prev: arr.clone(),
                            idx_val: iv,
                            idx_inv: ii,
                            elem_val: ev,
                            elem_granules: vec![Granule { hi: ew - 1, lo: 0, inv: ei }],
                        })),
                    };
                }
                let ridx = pool.bv_var("ri", 1);
                let ridx_inv = pool.bool_var("rix");
                let engine_inv = {
                    let mut cx = SimCtx {
                        pool: &mut pool,
                        side: &mut side,
                        mode: ShiftMode::StrictSound,
                    };
                    inv_array_read(&mut cx, &arr, ridx, ridx_inv, q, p)
                };
                let read = pool.array_read(arr.val, ridx);
                let engine_val = pool.extract(q, p, read);

                let cells = if initialized { 1u64 << (2 * ew) } else { 1 };
                for cell_cfg in 0..cells {
                    let c0 = cell_cfg & ((1 << ew) - 1);
                    let c1 = (cell_cfg >> ew) & ((1 << ew) - 1);
                    let upd_space = 1u64 << (updates as u32 * (ew + 3));
                    for ucfg in 0..upd_space {
                        for rcfg in 0..4u64 {
                            report.configs_checked += 1;
                            let mut env = Env::new();
                            let mut av = ArrayValue::filled(1, ew, BigUint::zero());
                            av.set(BigUint::zero(), BigUint::from(c0));
                            av.set(BigUint::from(1u32), BigUint::from(c1));
                            env.insert("A".to_string(), Value::Array(av));
                            let mut bits = ucfg;
                            let mut take = |n: u32| {
                                let v = bits & ((1 << n) - 1);
                                bits >>= n;
                                v
                            };
                            let mut upd_cfg = Vec::new();
                            for k in 0..updates {
                                let i = take(1);
                                let ix = take(1) == 1;
                                let e = take(ew);
                                let ex = take(1) == 1;
                                upd_cfg.push((i, ix, e, ex));
                                env.insert(format!("u{k}i"), Value::bits(1, i));
                                env.insert(format!("u{k}ix"), Value::Bool(ix));
                                env.insert(format!("u{k}e"), Value::bits(ew, e));
                                env.insert(format!("u{k}ex"), Value::Bool(ex));
                            }
                            let ri = rcfg & 1;
                            let rix = rcfg >> 1 == 1;
                            env.insert("ri".to_string(), Value::bits(1, ri));
                            env.insert("rix".to_string(), Value::Bool(rix));

                            let inv_v = pool.eval(engine_inv, &env).expect("inv").as_bool();
                            let val_v = pool
                                .eval(engine_val, &env)
                                .expect("val")
                                .as_bits()
                                .to_u64()
                                .unwrap();

                            let oracle =
                                array_oracle(initialized, ew, [c0, c1], &upd_cfg, ri, rix, q, p);
                            if !inv_v && !(oracle.is_fully_defined() && oracle.bits == val_v) {
                                report.violations.push(Violation {
                                    op: report.op.clone(),
                                    width: ew,
                                    q,
                                    p,
                                    config: format!(
                                        "init={initialized} cells=({c0:#x},{c1:#x}) \
                                         upd={upd_cfg:?} read=({ri},{rix})"
                                    ),
                                    engine_inv: inv_v,
                                    engine_val: val_v,
                                    oracle: oracle.display(),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    report
}

/// Exact oracle for the read-over-update chain: enumerate every X source
/// (uninitialized cells, X update indices/elements, X read index) and merge
/// the concrete walks.
#[allow(clippy::too_many_arguments)]
fn array_oracle(
    initialized: bool,
    ew: u32,
    cells: [u64; 2],
    updates: &[(u64, bool, u64, bool)],
    ri: u64,
    rix: bool,
    q: u32,
    p: u32,
) -> TernaryWord {
    let mut xbits = 0u32;
    if !initialized {
        xbits += 2 * ew;
    }
    for &(_, ix, _, ex) in updates {
        if ix {
            xbits += 1;
        }
        if ex {
            xbits += ew;
        }
    }
    if rix {
        xbits += 1;
    }
    assert!(xbits <= 24, "array oracle blow-up");
    let mut first: Option<u64> = None;
    let mut diff = 0u64;
    for asg in 0u64..(1 << xbits) {
        let mut bit = 0u32;
        let take = |n: u32, bit: &mut u32| {
            let v = (asg >> *bit) & ((1u64 << n) - 1);
            *bit += n;
            v
        };
        let mut cc = cells;
        if !initialized {
            cc[0] = take(ew, &mut bit);
            cc[1] = take(ew, &mut bit);
        }
        let mut concrete_updates = Vec::new();
        for &(i, ix, e, ex) in updates {
            let ci = if ix { take(1, &mut bit) } else { i };
            let ce = if ex { take(ew, &mut bit) } else { e };
            concrete_updates.push((ci, ce));
        }
        let cri = if rix { take(1, &mut bit) } else { ri };
        // newest write wins
        let mut result = None;
        for &(ci, ce) in concrete_updates.iter().rev() {
            if ci == cri {
                result = Some(ce);
                break;
            }
        }
        let r = result.unwrap_or(cc[cri as usize]);
        let sl = (r >> p) & ((1u64 << (q - p + 1)) - 1);
        match first {
            None => first = Some(sl),
            Some(f) => diff |= f ^ sl,
        }
    }
    TernaryWord::new(q - p + 1, first.unwrap(), diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_sound(op: OpUnderTest, widths: std::ops::RangeInclusive<u32>, mode: ShiftMode) {
        for m in widths {
            let r = check_template_soundness(op, m, mode);
            assert!(
                r.is_sound(),
                "{} m={} has {} violations, first: {}",
                r.op,
                m,
                r.violations.len(),
                r.violations[0]
            );
            assert_eq!(r.value_rule_mismatches, 0, "{} m={} value rule", r.op, m);
        }
    }

    #[test]
    fn add_sub_sound_small() {
        assert_sound(OpUnderTest::Add, 1..=3, ShiftMode::StrictSound);
        assert_sound(OpUnderTest::Sub, 1..=3, ShiftMode::StrictSound);
    }

    #[test]
    fn division_sound_small() {
        assert_sound(OpUnderTest::Udiv, 1..=3, ShiftMode::StrictSound);
        assert_sound(OpUnderTest::Urem, 1..=3, ShiftMode::StrictSound);
    }

    #[test]
    fn bitwise_and_ite_sound_small() {
        for op in [
            OpUnderTest::And,
            OpUnderTest::Or,
            OpUnderTest::Xor,
            OpUnderTest::Not,
            OpUnderTest::Ite,
        ] {
            assert_sound(op, 1..=3, ShiftMode::StrictSound);
        }
    }

    #[test]
    fn strict_shifts_sound_paper_shift_unsound() {
        assert_sound(OpUnderTest::Shl, 1..=3, ShiftMode::StrictSound);
        assert_sound(OpUnderTest::Lshr, 1..=3, ShiftMode::StrictSound);
        let r = check_template_soundness(OpUnderTest::Shl, 3, ShiftMode::PaperFaithful);
        assert!(
            !r.is_sound(),
            "expected violations from the paper-faithful variable shift at width 3"
        );
        // the known corner: valid nonzero source bits under an unknown distance
        let v = &r.violations[0];
        assert!(v.config.contains("bv=") && v.config.contains("true"), "{v}");
    }

    #[test]
    fn arrays_sound_small() {
        for ew in 1..=2 {
            let r = check_array_soundness(ew, 1);
            assert!(r.is_sound(), "array ew={ew}: {}", r.violations[0]);
        }
        let r = check_array_soundness(1, 2);
        assert!(r.is_sound(), "array 2 updates: {}", r.violations[0]);
    }
}
