//! Sorted word-level expression DAG with hash-consing and local simplification.
//!
//! Every symbolic value, invalid-bit formula, guard and obligation in the
//! engine is an [`ExprId`] into a single [`ExprPool`]. Structurally identical
//! terms are interned to the same id, so equality of ids is structural
//! equality and downstream passes (emission, evaluation) can memoize by id.

mod eval;

pub use eval::{ArrayValue, Env, EvalError, Value};

use indexmap::IndexSet;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

/// Sort of an expression node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    BitVec(u32),
    Bool,
    Array { index_width: u32, elem_width: u32 },
}

impl Sort {
    pub fn bv_width(self) -> u32 {
        match self {
            Sort::BitVec(w) => w,
            _ => panic!("sort {self:?} is not a bit-vector"),
        }
    }

    pub fn is_bv(self) -> bool {
        matches!(self, Sort::BitVec(_))
    }
}

impl std::fmt::Display for Sort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sort::BitVec(w) => write!(f, "bv{w}"),
            Sort::Bool => write!(f, "bool"),
            Sort::Array { index_width, elem_width } => {
                write!(f, "array[{index_width}]{elem_width}")
            }
        }
    }
}

/// Operator tags. Bit-vector operators are unsigned throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Udiv,
    Urem,
    Concat,
    Extract { hi: u32, lo: u32 },
    Not,
    And,
    Or,
    Xor,
    ShlConst(u32),
    Shl,
    LshrConst(u32),
    Lshr,
    Eq,
    Ult,
    Ule,
    Ite,
    BoolNot,
    BoolAnd,
    BoolOr,
    BoolIte,
    ArrayRead,
    ArrayUpdate,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Udiv => "udiv",
            Op::Urem => "urem",
            Op::Concat => "concat",
            Op::Extract { .. } => "extract",
            Op::Not => "not",
            Op::And => "and",
            Op::Or => "or",
            Op::Xor => "xor",
            Op::ShlConst(_) => "shl-const",
            Op::Shl => "shl",
            Op::LshrConst(_) => "lshr-const",
            Op::Lshr => "lshr",
            Op::Eq => "eq",
            Op::Ult => "ult",
            Op::Ule => "ule",
            Op::Ite => "ite",
            Op::BoolNot => "bool-not",
            Op::BoolAnd => "bool-and",
            Op::BoolOr => "bool-or",
            Op::BoolIte => "bool-ite",
            Op::ArrayRead => "array-read",
            Op::ArrayUpdate => "array-update",
        }
    }
}

/// A node of the expression DAG. Children are pool ids, so the DAG is acyclic
/// by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    BvConst { width: u32, value: BigUint },
    BoolConst(bool),
    Var { name: String, sort: Sort },
    App { op: Op, args: Vec<ExprId> },
}

/// Handle to an interned expression node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("operator {op}: {detail}")]
    SortMismatch { op: &'static str, detail: String },
    #[error("extract [{hi}:{lo}] out of range for operand width {width}")]
    ExtractRange { hi: u32, lo: u32, width: u32 },
    #[error("constant value does not fit in {width} bits")]
    ConstantOverflow { width: u32 },
    #[error("width must be at least 1")]
    ZeroWidth,
}

/// Fresh-variable allocator plus the ordered list of side constraints a
/// simulation run accumulates (division witnesses, no-division-by-zero
/// assumptions). Append-only during one run.
#[derive(Debug, Default, Clone)]
pub struct SideConstraints {
    pub constraints: Vec<ExprId>,
    fresh_counter: u64,
}

impl SideConstraints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: ExprId) {
        self.constraints.push(c);
    }

    pub fn fresh_name(&mut self, prefix: &str) -> String {
        let n = self.fresh_counter;
        self.fresh_counter += 1;
        format!("{prefix}!{n}")
    }

    pub fn extend_from(&mut self, other: &SideConstraints) {
        self.constraints.extend(other.constraints.iter().copied());
        self.fresh_counter = self.fresh_counter.max(other.fresh_counter);
    }
}

/// Interning pool for expression nodes.
///
/// One pool per engine instance; the pool is the only mutable state shared by
/// a run and is confined to a single thread.
#[derive(Debug, Default)]
pub struct ExprPool {
    nodes: IndexSet<Node>,
    sorts: Vec<Sort>,
}

impl ExprPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, e: ExprId) -> &Node {
        self.nodes.get_index(e.index()).expect("dangling ExprId")
    }

    pub fn sort(&self, e: ExprId) -> Sort {
        self.sorts[e.index()]
    }

    /// Width of a bit-vector expression. Panics on non-bit-vector sorts.
    pub fn width(&self, e: ExprId) -> u32 {
        self.sort(e).bv_width()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn intern(&mut self, node: Node, sort: Sort) -> ExprId {
        let (idx, inserted) = self.nodes.insert_full(node);
        if inserted {
            self.sorts.push(sort);
        }
        debug_assert_eq!(self.sorts.len(), self.nodes.len());
        ExprId(idx as u32)
    }

    // ----- leaf constructors -----

    pub fn bv_const(&mut self, width: u32, value: impl Into<BigUint>) -> ExprId {
        let value = value.into() & mask(width);
        assert!(width >= 1, "zero-width constant");
        self.intern(Node::BvConst { width, value }, Sort::BitVec(width))
    }

    /// Checked constant constructor: rejects values that do not fit.
    pub fn try_bv_const(&mut self, width: u32, value: BigUint) -> Result<ExprId, ExprError> {
        if width == 0 {
            return Err(ExprError::ZeroWidth);
        }
        if value.bits() > u64::from(width) {
            return Err(ExprError::ConstantOverflow { width });
        }
        Ok(self.bv_const(width, value))
    }

    pub fn zero(&mut self, width: u32) -> ExprId {
        self.bv_const(width, 0u32)
    }

    pub fn ones(&mut self, width: u32) -> ExprId {
        let v = mask(width);
        self.bv_const(width, v)
    }

    pub fn bool_const(&mut self, b: bool) -> ExprId {
        self.intern(Node::BoolConst(b), Sort::Bool)
    }

    pub fn tru(&mut self) -> ExprId {
        self.bool_const(true)
    }

    pub fn fls(&mut self) -> ExprId {
        self.bool_const(false)
    }

    pub fn var(&mut self, name: &str, sort: Sort) -> ExprId {
        self.intern(Node::Var { name: name.to_string(), sort }, sort)
    }

    pub fn bv_var(&mut self, name: &str, width: u32) -> ExprId {
        self.var(name, Sort::BitVec(width))
    }

    pub fn bool_var(&mut self, name: &str) -> ExprId {
        self.var(name, Sort::Bool)
    }

    pub fn array_var(&mut self, name: &str, index_width: u32, elem_width: u32) -> ExprId {
        self.var(name, Sort::Array { index_width, elem_width })
    }

    // ----- checked application -----

    /// Build an operator application. Validates operand sorts, applies local
    /// simplification (constant folding, identity/absorption rules, extract
    /// fusion) and interns the result.
    pub fn try_mk(&mut self, op: Op, args: &[ExprId]) -> Result<ExprId, ExprError> {
        let sort = self.check_sorts(op, args)?;
        Ok(self.simplify(op, args, sort))
    }

    /// Unchecked convenience wrapper around [`ExprPool::try_mk`]; panics on a
    /// sort error. Internal construction sites are sort-correct by
    /// construction; external input goes through elaboration first.
    pub fn mk(&mut self, op: Op, args: &[ExprId]) -> ExprId {
        match self.try_mk(op, args) {
            Ok(e) => e,
            Err(e) => panic!("expression construction: {e}"),
        }
    }

    fn check_sorts(&self, op: Op, args: &[ExprId]) -> Result<Sort, ExprError> {
        let fail = |detail: String| ExprError::SortMismatch { op: op.name(), detail };
        let arity = |n: usize| -> Result<(), ExprError> {
            if args.len() != n {
                Err(fail(format!("expected {n} operands, got {}", args.len())))
            } else {
                Ok(())
            }
        };
        let bv = |e: ExprId| -> Result<u32, ExprError> {
            match self.sort(e) {
                Sort::BitVec(w) => Ok(w),
                s => Err(fail(format!("expected bit-vector operand, got {s}"))),
            }
        };
        let same_width = |a: ExprId, b: ExprId| -> Result<u32, ExprError> {
            let (wa, wb) = (bv(a)?, bv(b)?);
            if wa != wb {
                Err(fail(format!("operand widths {wa} and {wb} differ")))
            } else {
                Ok(wa)
            }
        };
        let boolean = |e: ExprId| -> Result<(), ExprError> {
            if self.sort(e) == Sort::Bool {
                Ok(())
            } else {
                Err(fail(format!("expected boolean operand, got {}", self.sort(e))))
            }
        };
        match op {
            Op::Add | Op::Sub | Op::Mul | Op::Udiv | Op::Urem | Op::And | Op::Or | Op::Xor => {
                arity(2)?;
                Ok(Sort::BitVec(same_width(args[0], args[1])?))
            }
            Op::Shl | Op::Lshr => {
                arity(2)?;
                let w = bv(args[0])?;
                let wd = bv(args[1])?;
                if wd > w {
                    return Err(fail(format!(
                        "shift amount width {wd} exceeds operand width {w}"
                    )));
                }
                Ok(Sort::BitVec(w))
            }
            Op::ShlConst(_) | Op::LshrConst(_) | Op::Not => {
                arity(1)?;
                Ok(Sort::BitVec(bv(args[0])?))
            }
            Op::Concat => {
                if args.len() < 2 {
                    return Err(fail("concat needs at least 2 operands".into()));
                }
                let mut w = 0u32;
                for &a in args {
                    w += bv(a)?;
                }
                Ok(Sort::BitVec(w))
            }
            Op::Extract { hi, lo } => {
                arity(1)?;
                let w = bv(args[0])?;
                if lo > hi || hi >= w {
                    return Err(ExprError::ExtractRange { hi, lo, width: w });
                }
                Ok(Sort::BitVec(hi - lo + 1))
            }
            Op::Eq => {
                arity(2)?;
                same_width(args[0], args[1])?;
                Ok(Sort::Bool)
            }
            Op::Ult | Op::Ule => {
                arity(2)?;
                same_width(args[0], args[1])?;
                Ok(Sort::Bool)
            }
            Op::Ite => {
                arity(3)?;
                boolean(args[0])?;
                Ok(Sort::BitVec(same_width(args[1], args[2])?))
            }
            Op::BoolNot => {
                arity(1)?;
                boolean(args[0])?;
                Ok(Sort::Bool)
            }
            Op::BoolAnd | Op::BoolOr => {
                arity(2)?;
                boolean(args[0])?;
                boolean(args[1])?;
                Ok(Sort::Bool)
            }
            Op::BoolIte => {
                arity(3)?;
                boolean(args[0])?;
                boolean(args[1])?;
                boolean(args[2])?;
                Ok(Sort::Bool)
            }
            Op::ArrayRead => {
                arity(2)?;
                match self.sort(args[0]) {
                    Sort::Array { index_width, elem_width } => {
                        if bv(args[1])? != index_width {
                            return Err(fail(format!(
                                "index width {} does not match array index width {index_width}",
                                self.width(args[1])
                            )));
                        }
                        Ok(Sort::BitVec(elem_width))
                    }
                    s => Err(fail(format!("expected array operand, got {s}"))),
                }
            }
            Op::ArrayUpdate => {
                arity(3)?;
                match self.sort(args[0]) {
                    Sort::Array { index_width, elem_width } => {
                        if bv(args[1])? != index_width {
                            return Err(fail(format!(
                                "index width {} does not match array index width {index_width}",
                                self.width(args[1])
                            )));
                        }
                        if bv(args[2])? != elem_width {
                            return Err(fail(format!(
                                "element width {} does not match array element width {elem_width}",
                                self.width(args[2])
                            )));
                        }
                        Ok(self.sort(args[0]))
                    }
                    s => Err(fail(format!("expected array operand, got {s}"))),
                }
            }
        }
    }

    // ----- typed builders -----

    pub fn add(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Add, &[a, b])
    }
    pub fn sub(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Sub, &[a, b])
    }
    pub fn mul(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Mul, &[a, b])
    }
    pub fn udiv(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Udiv, &[a, b])
    }
    pub fn urem(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Urem, &[a, b])
    }
    pub fn bvand(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::And, &[a, b])
    }
    pub fn bvor(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Or, &[a, b])
    }
    pub fn bvxor(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Xor, &[a, b])
    }
    pub fn bvnot(&mut self, a: ExprId) -> ExprId {
        self.mk(Op::Not, &[a])
    }
    pub fn concat(&mut self, parts: &[ExprId]) -> ExprId {
        self.mk(Op::Concat, parts)
    }
    pub fn extract(&mut self, hi: u32, lo: u32, a: ExprId) -> ExprId {
        self.mk(Op::Extract { hi, lo }, &[a])
    }
    pub fn eq(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Eq, &[a, b])
    }
    pub fn neq(&mut self, a: ExprId, b: ExprId) -> ExprId {
        let e = self.eq(a, b);
        self.not(e)
    }
    pub fn ult(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Ult, &[a, b])
    }
    pub fn ule(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::Ule, &[a, b])
    }
    pub fn ite(&mut self, c: ExprId, t: ExprId, e: ExprId) -> ExprId {
        self.mk(Op::Ite, &[c, t, e])
    }
    pub fn not(&mut self, a: ExprId) -> ExprId {
        self.mk(Op::BoolNot, &[a])
    }
    pub fn and(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::BoolAnd, &[a, b])
    }
    pub fn or(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.mk(Op::BoolOr, &[a, b])
    }
    pub fn bool_ite(&mut self, c: ExprId, t: ExprId, e: ExprId) -> ExprId {
        self.mk(Op::BoolIte, &[c, t, e])
    }
    pub fn implies(&mut self, a: ExprId, b: ExprId) -> ExprId {
        let na = self.not(a);
        self.or(na, b)
    }
    pub fn shl(&mut self, a: ExprId, d: ExprId) -> ExprId {
        self.mk(Op::Shl, &[a, d])
    }
    pub fn lshr(&mut self, a: ExprId, d: ExprId) -> ExprId {
        self.mk(Op::Lshr, &[a, d])
    }
    pub fn shl_const(&mut self, a: ExprId, k: u32) -> ExprId {
        self.mk(Op::ShlConst(k), &[a])
    }
    pub fn lshr_const(&mut self, a: ExprId, k: u32) -> ExprId {
        self.mk(Op::LshrConst(k), &[a])
    }
    pub fn array_read(&mut self, a: ExprId, i: ExprId) -> ExprId {
        self.mk(Op::ArrayRead, &[a, i])
    }
    pub fn array_update(&mut self, a: ExprId, i: ExprId, e: ExprId) -> ExprId {
        self.mk(Op::ArrayUpdate, &[a, i, e])
    }

    /// `1 << e`, the power-of-two witness form used by the division side
    /// constraints. Width is the width of `e`.
    pub fn pow2(&mut self, e: ExprId) -> ExprId {
        let w = self.width(e);
        let one = self.bv_const(w, 1u32);
        self.shl(one, e)
    }

    /// Zero-extend `e` by `extra` bits (no-op when `extra` is 0).
    pub fn zext(&mut self, e: ExprId, extra: u32) -> ExprId {
        if extra == 0 {
            return e;
        }
        let z = self.zero(extra);
        self.concat(&[z, e])
    }

    /// Conjunction of a list, `true` when empty.
    pub fn and_all(&mut self, terms: &[ExprId]) -> ExprId {
        let mut acc = self.tru();
        for &t in terms {
            acc = self.and(acc, t);
        }
        acc
    }

    /// Disjunction of a list, `false` when empty.
    pub fn or_all(&mut self, terms: &[ExprId]) -> ExprId {
        let mut acc = self.fls();
        for &t in terms {
            acc = self.or(acc, t);
        }
        acc
    }

    // ----- queries -----

    pub fn as_bv_const(&self, e: ExprId) -> Option<&BigUint> {
        match self.node(e) {
            Node::BvConst { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn as_bool_const(&self, e: ExprId) -> Option<bool> {
        match self.node(e) {
            Node::BoolConst(b) => Some(*b),
            _ => None,
        }
    }

    pub fn is_true(&self, e: ExprId) -> bool {
        self.as_bool_const(e) == Some(true)
    }

    pub fn is_false(&self, e: ExprId) -> bool {
        self.as_bool_const(e) == Some(false)
    }

    pub fn is_zero(&self, e: ExprId) -> bool {
        self.as_bv_const(e).is_some_and(|v| v.is_zero())
    }

    /// Variables reachable in the DAG rooted at `e`, sorted by name.
    pub fn free_vars(&self, e: ExprId) -> BTreeSet<(String, Sort)> {
        let mut out = BTreeSet::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![e];
        while let Some(id) = stack.pop() {
            if seen[id.index()] {
                continue;
            }
            seen[id.index()] = true;
            match self.node(id) {
                Node::Var { name, sort } => {
                    out.insert((name.clone(), *sort));
                }
                Node::App { args, .. } => stack.extend(args.iter().copied()),
                _ => {}
            }
        }
        out
    }

    // ----- simplification -----

    fn simplify(&mut self, op: Op, args: &[ExprId], sort: Sort) -> ExprId {
        // All-constant applications fold through the concrete semantics.
        if args.iter().all(|&a| self.is_const(a)) {
            if let Some(v) = self.fold_const(op, args) {
                return v;
            }
        }
        match op {
            Op::Add => {
                if self.is_zero(args[0]) {
                    return args[1];
                }
                if self.is_zero(args[1]) {
                    return args[0];
                }
            }
            Op::Sub => {
                if self.is_zero(args[1]) {
                    return args[0];
                }
                if args[0] == args[1] {
                    return self.zero(sort.bv_width());
                }
            }
            Op::Mul => {
                let w = sort.bv_width();
                if self.is_zero(args[0]) || self.is_zero(args[1]) {
                    return self.zero(w);
                }
                if self.as_bv_const(args[0]).is_some_and(|v| v.is_one()) {
                    return args[1];
                }
                if self.as_bv_const(args[1]).is_some_and(|v| v.is_one()) {
                    return args[0];
                }
            }
            Op::Udiv => {
                let w = sort.bv_width();
                if self.is_zero(args[1]) {
                    return self.ones(w);
                }
                if self.as_bv_const(args[1]).is_some_and(|v| v.is_one()) {
                    return args[0];
                }
            }
            Op::Urem => {
                let w = sort.bv_width();
                if self.is_zero(args[1]) {
                    return args[0];
                }
                if self.as_bv_const(args[1]).is_some_and(|v| v.is_one()) {
                    return self.zero(w);
                }
            }
            Op::And => {
                let w = sort.bv_width();
                if args[0] == args[1] {
                    return args[0];
                }
                for (c, other) in [(args[0], args[1]), (args[1], args[0])] {
                    if self.is_zero(c) {
                        return self.zero(w);
                    }
                    if self.as_bv_const(c).is_some_and(|v| *v == mask(w)) {
                        return other;
                    }
                }
            }
            Op::Or => {
                let w = sort.bv_width();
                if args[0] == args[1] {
                    return args[0];
                }
                for (c, other) in [(args[0], args[1]), (args[1], args[0])] {
                    if self.is_zero(c) {
                        return other;
                    }
                    if self.as_bv_const(c).is_some_and(|v| *v == mask(w)) {
                        return self.ones(w);
                    }
                }
            }
            Op::Xor => {
                let w = sort.bv_width();
                if args[0] == args[1] {
                    return self.zero(w);
                }
                if self.is_zero(args[0]) {
                    return args[1];
                }
                if self.is_zero(args[1]) {
                    return args[0];
                }
            }
            Op::ShlConst(k) | Op::LshrConst(k) => {
                let w = sort.bv_width();
                if k == 0 {
                    return args[0];
                }
                if k >= w {
                    return self.zero(w);
                }
            }
            Op::Shl | Op::Lshr => {
                let w = sort.bv_width();
                // Constant shift amounts lower to the constant-shift form.
                if let Some(k) = self.as_bv_const(args[1]).cloned() {
                    let k = if k.bits() > 32 { w } else { u32::try_from(&k).unwrap_or(w).min(w) };
                    let cop = if op == Op::Shl { Op::ShlConst(k) } else { Op::LshrConst(k) };
                    return self.mk(cop, &[args[0]]);
                }
                if self.is_zero(args[0]) {
                    return self.zero(w);
                }
            }
            Op::Eq => {
                if args[0] == args[1] {
                    return self.tru();
                }
            }
            Op::Ult => {
                if args[0] == args[1] {
                    return self.fls();
                }
                if self.is_zero(args[1]) {
                    return self.fls();
                }
            }
            Op::Ule => {
                if args[0] == args[1] || self.is_zero(args[0]) {
                    return self.tru();
                }
            }
            Op::Ite | Op::BoolIte => {
                if args[1] == args[2] {
                    return args[1];
                }
                if let Some(c) = self.as_bool_const(args[0]) {
                    return if c { args[1] } else { args[2] };
                }
            }
            Op::BoolNot => {
                if let Some(b) = self.as_bool_const(args[0]) {
                    return self.bool_const(!b);
                }
                if let Node::App { op: Op::BoolNot, args: inner } = self.node(args[0]) {
                    return inner[0];
                }
            }
            Op::BoolAnd => {
                if args[0] == args[1] {
                    return args[0];
                }
                for (c, other) in [(args[0], args[1]), (args[1], args[0])] {
                    match self.as_bool_const(c) {
                        Some(false) => return self.fls(),
                        Some(true) => return other,
                        None => {}
                    }
                }
            }
            Op::BoolOr => {
                if args[0] == args[1] {
                    return args[0];
                }
                for (c, other) in [(args[0], args[1]), (args[1], args[0])] {
                    match self.as_bool_const(c) {
                        Some(true) => return self.tru(),
                        Some(false) => return other,
                        None => {}
                    }
                }
            }
            Op::Extract { hi, lo } => {
                let w = self.width(args[0]);
                if lo == 0 && hi == w - 1 {
                    return args[0];
                }
                match self.node(args[0]).clone() {
                    // extract of extract composes
                    Node::App { op: Op::Extract { lo: ilo, .. }, args: inner } => {
                        return self.extract(ilo + hi, ilo + lo, inner[0]);
                    }
                    // extract of concat resolves into child extracts
                    Node::App { op: Op::Concat, args: parts } => {
                        return self.extract_of_concat(hi, lo, &parts);
                    }
                    _ => {}
                }
            }
            Op::Concat => {
                if args.len() == 1 {
                    return args[0];
                }
                // Flatten nested concats, then merge adjacent constants.
                let mut flat: Vec<ExprId> = Vec::with_capacity(args.len());
                let mut changed = false;
                for &a in args {
                    if let Node::App { op: Op::Concat, args: inner } = self.node(a) {
                        flat.extend(inner.iter().copied());
                        changed = true;
                    } else {
                        flat.push(a);
                    }
                }
                let mut merged: Vec<ExprId> = Vec::with_capacity(flat.len());
                for a in flat {
                    if let (Some(prev), Node::BvConst { width, value }) =
                        (merged.last().copied(), self.node(a).clone())
                    {
                        if let Node::BvConst { width: pw, value: pv } = self.node(prev).clone() {
                            let combined = (pv << width) | value;
                            let c = self.bv_const(pw + width, combined);
                            *merged.last_mut().unwrap() = c;
                            changed = true;
                            continue;
                        }
                    }
                    merged.push(a);
                }
                if merged.len() == 1 {
                    return merged[0];
                }
                if changed {
                    return self.intern(Node::App { op: Op::Concat, args: merged }, sort);
                }
            }
            Op::ArrayRead => {
                // read over write: same index resolves, distinct constant
                // indices skip the write
                if let Node::App { op: Op::ArrayUpdate, args: upd } = self.node(args[0]).clone() {
                    if upd[1] == args[1] {
                        return upd[2];
                    }
                    if let (Some(i), Some(j)) =
                        (self.as_bv_const(upd[1]).cloned(), self.as_bv_const(args[1]).cloned())
                    {
                        if i != j {
                            return self.array_read(upd[0], args[1]);
                        }
                    }
                }
            }
            _ => {}
        }
        self.intern(Node::App { op, args: args.to_vec() }, sort)
    }

    fn extract_of_concat(&mut self, hi: u32, lo: u32, parts: &[ExprId]) -> ExprId {
        // Parts are msb-first; compute each part's bit range.
        let mut ranges = Vec::with_capacity(parts.len());
        let total: u32 = parts.iter().map(|&p| self.width(p)).sum();
        let mut top = total;
        for &p in parts {
            let w = self.width(p);
            ranges.push((p, top - 1, top - w)); // (part, hi, lo) absolute
            top -= w;
        }
        let mut picked: Vec<ExprId> = Vec::new();
        for (part, phi, plo) in ranges {
            if plo > hi || phi < lo {
                continue;
            }
            let shi = hi.min(phi) - plo;
            let slo = lo.max(plo) - plo;
            picked.push(self.extract(shi, slo, part));
        }
        if picked.len() == 1 {
            picked[0]
        } else {
            self.concat(&picked)
        }
    }

    fn is_const(&self, e: ExprId) -> bool {
        matches!(self.node(e), Node::BvConst { .. } | Node::BoolConst(_))
    }

    fn fold_const(&mut self, op: Op, args: &[ExprId]) -> Option<ExprId> {
        let vals: Vec<Value> = args
            .iter()
            .map(|&a| match self.node(a) {
                Node::BvConst { width, value } => {
                    Value::Bits { width: *width, value: value.clone() }
                }
                Node::BoolConst(b) => Value::Bool(*b),
                _ => unreachable!(),
            })
            .collect();
        match eval::apply_op(op, &vals) {
            Ok(Value::Bits { width, value }) => Some(self.bv_const(width, value)),
            Ok(Value::Bool(b)) => Some(self.bool_const(b)),
            _ => None,
        }
    }
}

/// All-ones value of the given width.
pub fn mask(width: u32) -> BigUint {
    (BigUint::one() << width) - BigUint::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_folding_add() {
        let mut p = ExprPool::new();
        let a = p.bv_const(4, 3u32);
        let b = p.bv_const(4, 5u32);
        let s = p.add(a, b);
        assert_eq!(p.as_bv_const(s), Some(&BigUint::from(8u32)));
    }

    #[test]
    fn ite_identical_branches() {
        let mut p = ExprPool::new();
        let b = p.bool_var("b");
        let e = p.bv_var("e", 8);
        assert_eq!(p.ite(b, e, e), e);
    }

    #[test]
    fn extract_of_constant() {
        // bit-level slice of 0b0110 at [2:1] is 0b11
        let mut p = ExprPool::new();
        let c = p.bv_const(4, 0b0110u32);
        let e = p.extract(2, 1, c);
        assert_eq!(p.as_bv_const(e), Some(&BigUint::from(0b11u32)));
        assert_eq!(p.width(e), 2);
    }

    #[test]
    fn hash_consing_identity() {
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 8);
        let b = p.bv_var("b", 8);
        let e1 = p.add(a, b);
        let e2 = p.add(a, b);
        assert_eq!(e1, e2);
        let a2 = p.bv_var("a", 8);
        assert_eq!(a, a2);
    }

    #[test]
    fn sort_mismatch_reports_operator() {
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 8);
        let b = p.bv_var("b", 4);
        let err = p.try_mk(Op::Add, &[a, b]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("add"), "{msg}");
        assert!(msg.contains('8') && msg.contains('4'), "{msg}");
    }

    #[test]
    fn extract_out_of_range() {
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 4);
        assert!(matches!(
            p.try_mk(Op::Extract { hi: 4, lo: 0 }, &[a]),
            Err(ExprError::ExtractRange { .. })
        ));
    }

    #[test]
    fn extract_of_concat_resolves() {
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 4);
        let b = p.bv_var("b", 4);
        let c = p.concat(&[a, b]);
        // bits [5:4] live in `a`'s low bits
        let e = p.extract(5, 4, c);
        let expect = p.extract(1, 0, a);
        assert_eq!(e, expect);
        // a straddling slice picks from both parts
        let e2 = p.extract(4, 3, c);
        let lo_a = p.extract(0, 0, a);
        let hi_b = p.extract(3, 3, b);
        let expect2 = p.concat(&[lo_a, hi_b]);
        assert_eq!(e2, expect2);
    }

    #[test]
    fn extract_of_extract_composes() {
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 16);
        let inner = p.extract(11, 4, a);
        let outer = p.extract(5, 2, inner);
        let direct = p.extract(9, 6, a);
        assert_eq!(outer, direct);
    }

    #[test]
    fn free_vars_examples() {
        let mut p = ExprPool::new();
        let c = p.bv_const(8, 0u32);
        assert!(p.free_vars(c).is_empty());
        let v = p.bv_var("v", 8);
        assert_eq!(p.free_vars(v).len(), 1);
        let g = p.bool_var("g");
        let v1 = p.bv_var("v1", 8);
        let v2 = p.bv_var("v2", 8);
        let e = p.ite(g, v1, v2);
        let fv = p.free_vars(e);
        assert_eq!(fv.len(), 3);
    }

    #[test]
    fn variable_shift_with_const_amount_lowers() {
        let mut p = ExprPool::new();
        let a = p.bv_var("a", 8);
        let k = p.bv_const(8, 2u32);
        let e = p.shl(a, k);
        let direct = p.shl_const(a, 2);
        assert_eq!(e, direct);
    }

    #[test]
    fn bool_simplifications() {
        let mut p = ExprPool::new();
        let x = p.bool_var("x");
        let t = p.tru();
        let f = p.fls();
        assert_eq!(p.and(t, x), x);
        assert_eq!(p.and(f, x), f);
        assert_eq!(p.or(f, x), x);
        assert_eq!(p.or(t, x), t);
        let nx = p.not(x);
        assert_eq!(p.not(nx), x);
    }
}
