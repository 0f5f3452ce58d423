//! Width-checking elaboration and the per-cycle transition form.
//!
//! Elaboration (1) builds symbol tables, (2) desugars `if` blocks into
//! conditional right-hand sides, (3) annotates every expression with its
//! width (resolving unsized literals from context), and (4) verifies that the
//! combinational assignments form an acyclic def-before-use chain in listed
//! order. Sequential updates are simultaneous: all right-hand sides read the
//! pre-edge state; on overlapping slice writes the later update wins.

use super::*;
use crate::lex::Loc;
use indexmap::IndexMap;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ElabError {
    #[error("{loc}: width mismatch in {context}: {lhs} vs {rhs}")]
    WidthMismatch { loc: Loc, context: String, lhs: u32, rhs: u32 },
    #[error("{loc}: cannot infer width of literal here")]
    CannotInfer { loc: Loc },
    #[error("{loc}: literal does not fit in {width} bits")]
    LiteralTooWide { loc: Loc, width: u32 },
    #[error("{loc}: combinational cycle through '{wire}' (bits of '{wire}' are read before they are assigned)")]
    CombCycle { loc: Loc, wire: String },
    #[error("{loc}: bits [{hi}:{lo}] of wire '{wire}' are combinationally driven more than once")]
    DuplicateDrive { loc: Loc, wire: String, hi: u32, lo: u32 },
    #[error("{loc}: slice [{hi}:{lo}] out of range for '{name}' of width {width}")]
    SliceOutOfRange { loc: Loc, name: String, hi: u32, lo: u32, width: u32 },
    #[error("{loc}: {msg}")]
    Other { loc: Loc, msg: String },
}

fn other(loc: Loc, msg: impl Into<String>) -> ElabError {
    ElabError::Other { loc, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordKind {
    Input,
    Wire,
    Reg,
}

#[derive(Debug, Clone)]
pub struct WordInfo {
    pub kind: WordKind,
    pub width: u32,
    pub init: Option<BigUint>,
}

#[derive(Debug, Clone)]
pub struct ArrayInfo {
    /// Total index width; multi-dimensional arrays use the concatenation of
    /// their per-dimension indices (outer index in the high bits).
    pub index_width: u32,
    pub elem_width: u32,
    pub initialized: bool,
    pub dims: Vec<u32>,
}

/// Straight-line schedulable form: ordered combinational assignments plus
/// simultaneous sequential updates.
#[derive(Debug, Clone)]
pub struct Transition {
    pub comb: Vec<Assign>,
    pub seq: Vec<Assign>,
}

#[derive(Debug, Clone)]
pub struct Elaborated {
    pub name: String,
    pub words: IndexMap<String, WordInfo>,
    pub arrays: IndexMap<String, ArrayInfo>,
    pub outputs: Vec<String>,
    transition: Transition,
    pub expr_count: u32,
}

impl Elaborated {
    pub fn transition(&self) -> &Transition {
        &self.transition
    }

    pub fn word(&self, name: &str) -> Option<&WordInfo> {
        self.words.get(name)
    }

    pub fn width_of(&self, name: &str) -> u32 {
        self.words[name].width
    }
}

pub fn elaborate(design: &Design) -> Result<Elaborated, ElabError> {
    let mut words = IndexMap::new();
    for (n, w) in &design.inputs {
        words.insert(n.clone(), WordInfo { kind: WordKind::Input, width: *w, init: None });
    }
    for (n, w) in &design.wires {
        words.insert(n.clone(), WordInfo { kind: WordKind::Wire, width: *w, init: None });
    }
    for r in &design.registers {
        words.insert(
            r.name.clone(),
            WordInfo { kind: WordKind::Reg, width: r.width, init: r.init.clone() },
        );
    }
    let mut arrays = IndexMap::new();
    for a in &design.arrays {
        if a.index_widths.len() > 2 {
            return Err(other(a.loc, "arrays have at most two dimensions"));
        }
        arrays.insert(
            a.name.clone(),
            ArrayInfo {
                index_width: a.index_widths.iter().sum(),
                elem_width: a.elem_width,
                initialized: a.initialized,
                dims: a.index_widths.clone(),
            },
        );
    }

    let mut ctx = Ctx { words, arrays, next_id: 0 };
    let effects = ctx.desugar_block(&design.stmts)?;
    let mut comb: Vec<Assign> = effects.comb.into_values().collect();
    let mut seq: Vec<Assign> =
        effects.seq.into_values().chain(effects.seq_arrays).collect();

    for a in comb.iter_mut() {
        ctx.elab_assign(a, false)?;
    }
    for a in seq.iter_mut() {
        ctx.elab_assign(a, true)?;
    }
    ctx.check_comb_order(&comb)?;

    Ok(Elaborated {
        name: design.name.clone(),
        words: ctx.words,
        arrays: ctx.arrays,
        outputs: design.outputs.clone(),
        transition: Transition { comb, seq },
        expr_count: ctx.next_id,
    })
}

struct Ctx {
    words: IndexMap<String, WordInfo>,
    arrays: IndexMap<String, ArrayInfo>,
    next_id: u32,
}

/// Width-check a standalone expression over a flat symbol table (the
/// property-file parser's spec variables). Annotates widths in place.
pub(crate) fn elab_standalone_expr(
    vars: &IndexMap<String, WordInfo>,
    e: &mut RtlExpr,
    expect: Option<u32>,
) -> Result<u32, ElabError> {
    let mut ctx = Ctx { words: vars.clone(), arrays: IndexMap::new(), next_id: 0 };
    ctx.elab_expr(e, expect)
}

#[derive(Default)]
struct BlockEffects {
    comb: IndexMap<(String, u32, u32), Assign>,
    seq: IndexMap<(String, u32, u32), Assign>,
    seq_arrays: Vec<Assign>,
}

impl Ctx {
    fn lv_range(&self, lv: &LValue, loc: Loc) -> Result<(String, u32, u32), ElabError> {
        match lv {
            LValue::Word(n) => {
                let w = self
                    .words
                    .get(n)
                    .ok_or_else(|| other(loc, format!("'{n}' is not a word")))?
                    .width;
                Ok((n.clone(), w - 1, 0))
            }
            LValue::Slice { word, hi, lo } => {
                let w = self
                    .words
                    .get(word)
                    .ok_or_else(|| other(loc, format!("'{word}' is not a word")))?
                    .width;
                if *hi >= w {
                    return Err(ElabError::SliceOutOfRange {
                        loc,
                        name: word.clone(),
                        hi: *hi,
                        lo: *lo,
                        width: w,
                    });
                }
                Ok((word.clone(), *hi, *lo))
            }
            LValue::ArrayElem { .. } => unreachable!("array lvalues are not range-keyed"),
        }
    }

    /// Expression that reads back the current value of an lvalue, used as the
    /// hold value when an `if` branch leaves it unassigned.
    fn lv_read(&self, lv: &LValue, loc: Loc) -> RtlExpr {
        match lv {
            LValue::Word(n) => RtlExpr::new(RtlExprKind::Word(n.clone()), loc),
            LValue::Slice { word, hi, lo } => {
                RtlExpr::new(RtlExprKind::Slice { word: word.clone(), hi: *hi, lo: *lo }, loc)
            }
            LValue::ArrayElem { array, indices } => RtlExpr::new(
                RtlExprKind::ArrayRead { array: array.clone(), indices: indices.clone() },
                loc,
            ),
        }
    }

    fn guard_expr(cond: &RtlExpr, then: RtlExpr, els: RtlExpr, loc: Loc) -> RtlExpr {
        RtlExpr::new(
            RtlExprKind::Cond {
                cond: Box::new(cond.clone()),
                then: Box::new(then),
                els: Box::new(els),
            },
            loc,
        )
    }

    fn desugar_block(&mut self, stmts: &[Stmt]) -> Result<BlockEffects, ElabError> {
        let mut eff = BlockEffects::default();
        for s in stmts {
            match s {
                Stmt::Comb(a) => {
                    if matches!(a.lhs, LValue::ArrayElem { .. }) {
                        return Err(other(
                            a.loc,
                            "array elements can only be assigned sequentially (use '<=')",
                        ));
                    }
                    let key = self.lv_range(&a.lhs, a.loc)?;
                    if eff.comb.insert(key, a.clone()).is_some() {
                        return Err(other(
                            a.loc,
                            format!("'{}' is combinationally assigned twice", a.lhs.base_name()),
                        ));
                    }
                }
                Stmt::Seq(a) => {
                    if let LValue::ArrayElem { .. } = a.lhs {
                        eff.seq_arrays.push(a.clone());
                    } else {
                        let key = self.lv_range(&a.lhs, a.loc)?;
                        eff.seq.insert(key, a.clone());
                    }
                }
                Stmt::If { cond, then, els, loc } => {
                    let t = self.desugar_block(then)?;
                    let e = self.desugar_block(els)?;
                    // combinational: both branches must drive the same bits
                    let mut keys: Vec<_> = t.comb.keys().cloned().collect();
                    for k in e.comb.keys() {
                        if !t.comb.contains_key(k) {
                            keys.push(k.clone());
                        }
                    }
                    for k in keys {
                        match (t.comb.get(&k), e.comb.get(&k)) {
                            (Some(ta), Some(ea)) => {
                                let merged = Assign {
                                    lhs: ta.lhs.clone(),
                                    rhs: Self::guard_expr(
                                        cond,
                                        ta.rhs.clone(),
                                        ea.rhs.clone(),
                                        *loc,
                                    ),
                                    loc: ta.loc,
                                };
                                if eff.comb.insert(k, merged).is_some() {
                                    return Err(other(
                                        *loc,
                                        "wire is combinationally assigned twice",
                                    ));
                                }
                            }
                            (Some(a), None) | (None, Some(a)) => {
                                return Err(other(
                                    a.loc,
                                    format!(
                                        "combinational assignment to '{}' must be driven in both \
                                         branches of the if",
                                        a.lhs.base_name()
                                    ),
                                ));
                            }
                            (None, None) => unreachable!(),
                        }
                    }
                    // sequential: an unassigned side holds the previous value
                    let mut skeys: Vec<_> = t.seq.keys().cloned().collect();
                    for k in e.seq.keys() {
                        if !t.seq.contains_key(k) {
                            skeys.push(k.clone());
                        }
                    }
                    for k in skeys {
                        // an unassigned side falls back to the value an
                        // earlier statement in this block gave the target,
                        // or to the held register value
                        let prior = |eff: &BlockEffects, lhs: &LValue, aloc| {
                            eff.seq
                                .get(&k)
                                .map(|a| a.rhs.clone())
                                .unwrap_or_else(|| self.lv_read(lhs, aloc))
                        };
                        let (lhs, tv, ev, aloc) = match (t.seq.get(&k), e.seq.get(&k)) {
                            (Some(ta), Some(ea)) => {
                                (ta.lhs.clone(), ta.rhs.clone(), ea.rhs.clone(), ta.loc)
                            }
                            (Some(ta), None) => {
                                let hold = prior(&eff, &ta.lhs, ta.loc);
                                (ta.lhs.clone(), ta.rhs.clone(), hold, ta.loc)
                            }
                            (None, Some(ea)) => {
                                let hold = prior(&eff, &ea.lhs, ea.loc);
                                (ea.lhs.clone(), hold, ea.rhs.clone(), ea.loc)
                            }
                            (None, None) => unreachable!(),
                        };
                        let merged = Assign {
                            lhs,
                            rhs: Self::guard_expr(cond, tv, ev, *loc),
                            loc: aloc,
                        };
                        // last write wins within one block
                        eff.seq.insert(k, merged);
                    }
                    for a in t.seq_arrays {
                        let hold = self.lv_read(&a.lhs, a.loc);
                        eff.seq_arrays.push(Assign {
                            lhs: a.lhs.clone(),
                            rhs: Self::guard_expr(cond, a.rhs, hold, *loc),
                            loc: a.loc,
                        });
                    }
                    for a in e.seq_arrays {
                        let hold = self.lv_read(&a.lhs, a.loc);
                        eff.seq_arrays.push(Assign {
                            lhs: a.lhs.clone(),
                            rhs: Self::guard_expr(cond, hold, a.rhs, *loc),
                            loc: a.loc,
                        });
                    }
                }
            }
        }
        Ok(eff)
    }

    fn elab_assign(&mut self, a: &mut Assign, seq: bool) -> Result<(), ElabError> {
        let loc = a.loc;
        let expect = match &mut a.lhs {
            LValue::Word(n) => {
                let info = self
                    .words
                    .get(n)
                    .ok_or_else(|| other(loc, format!("'{n}' is not a word")))?;
                self.check_lhs_kind(info.kind, seq, n, loc)?;
                info.width
            }
            LValue::Slice { word, hi, lo } => {
                let info = self
                    .words
                    .get(word)
                    .cloned()
                    .ok_or_else(|| other(loc, format!("'{word}' is not a word")))?;
                if *hi >= info.width {
                    return Err(ElabError::SliceOutOfRange {
                        loc,
                        name: word.clone(),
                        hi: *hi,
                        lo: *lo,
                        width: info.width,
                    });
                }
                self.check_lhs_kind(info.kind, seq, word, loc)?;
                *hi - *lo + 1
            }
            LValue::ArrayElem { array, indices } => {
                let info = self
                    .arrays
                    .get(array)
                    .cloned()
                    .ok_or_else(|| other(loc, format!("'{array}' is not an array")))?;
                if indices.len() != info.dims.len() {
                    return Err(other(
                        loc,
                        format!(
                            "array '{array}' has {} dimension(s), {} index(es) given",
                            info.dims.len(),
                            indices.len()
                        ),
                    ));
                }
                let dims = info.dims.clone();
                for (ix, dim) in indices.iter_mut().zip(dims) {
                    self.elab_expr(ix, Some(dim))?;
                }
                info.elem_width
            }
        };
        self.elab_expr(&mut a.rhs, Some(expect))?;
        Ok(())
    }

    fn check_lhs_kind(
        &self,
        kind: WordKind,
        seq: bool,
        name: &str,
        loc: Loc,
    ) -> Result<(), ElabError> {
        match (kind, seq) {
            (WordKind::Wire, false) | (WordKind::Reg, true) => Ok(()),
            (WordKind::Input, _) => Err(other(loc, format!("input '{name}' cannot be assigned"))),
            (WordKind::Wire, true) => {
                Err(other(loc, format!("wire '{name}' needs '=' (combinational), not '<='")))
            }
            (WordKind::Reg, false) => {
                Err(other(loc, format!("register '{name}' needs '<=' (sequential), not '='")))
            }
        }
    }

    /// Does this expression need a width from context (i.e. is it built
    /// exclusively from unsized literals)?
    fn needs_context(e: &RtlExpr) -> bool {
        match &e.kind {
            RtlExprKind::Literal { width: None, .. } => true,
            RtlExprKind::Not(x) => Self::needs_context(x),
            RtlExprKind::Binary { op, lhs, rhs } if !op.is_comparison() => {
                Self::needs_context(lhs) && Self::needs_context(rhs)
            }
            RtlExprKind::Cond { then, els, .. } => {
                Self::needs_context(then) && Self::needs_context(els)
            }
            _ => false,
        }
    }

    fn elab_expr(&mut self, e: &mut RtlExpr, expect: Option<u32>) -> Result<u32, ElabError> {
        let loc = e.loc;
        let width = match &mut e.kind {
            RtlExprKind::Literal { value, width } => {
                let w = match (*width, expect) {
                    (Some(w), Some(x)) if w != x => {
                        return Err(ElabError::WidthMismatch {
                            loc,
                            context: "literal".into(),
                            lhs: w,
                            rhs: x,
                        })
                    }
                    (Some(w), _) => w,
                    (None, Some(x)) => x,
                    (None, None) => return Err(ElabError::CannotInfer { loc }),
                };
                if value.bits() > u64::from(w) {
                    return Err(ElabError::LiteralTooWide { loc, width: w });
                }
                *width = Some(w);
                w
            }
            RtlExprKind::Word(n) => {
                if self.arrays.contains_key(n.as_str()) {
                    return Err(other(loc, format!("array '{n}' cannot be used as a word")));
                }
                self.words
                    .get(n)
                    .ok_or_else(|| other(loc, format!("'{n}' is not a word")))?
                    .width
            }
            RtlExprKind::Slice { word, hi, lo } => {
                let w = self
                    .words
                    .get(word)
                    .ok_or_else(|| other(loc, format!("'{word}' is not a word")))?
                    .width;
                if *hi >= w {
                    return Err(ElabError::SliceOutOfRange {
                        loc,
                        name: word.clone(),
                        hi: *hi,
                        lo: *lo,
                        width: w,
                    });
                }
                *hi - *lo + 1
            }
            RtlExprKind::ArrayRead { array, indices } => {
                let info = self
                    .arrays
                    .get(array)
                    .cloned()
                    .ok_or_else(|| other(loc, format!("'{array}' is not an array")))?;
                if indices.len() != info.dims.len() {
                    return Err(other(
                        loc,
                        format!(
                            "array '{array}' has {} dimension(s), {} index(es) given",
                            info.dims.len(),
                            indices.len()
                        ),
                    ));
                }
                let dims = info.dims.clone();
                for (ix, dim) in indices.iter_mut().zip(dims) {
                    self.elab_expr(ix, Some(dim))?;
                }
                info.elem_width
            }
            RtlExprKind::Not(x) => self.elab_expr(x, expect)?,
            RtlExprKind::Binary { op, lhs, rhs } => {
                let op = *op;
                match op {
                    RtlBinOp::Shl | RtlBinOp::Shr => {
                        let wl = self.elab_expr(lhs, expect)?;
                        // unsized shift amounts take the operand width
                        let wr = if Self::needs_context(rhs) {
                            self.elab_expr(rhs, Some(wl))?
                        } else {
                            self.elab_expr(rhs, None)?
                        };
                        if wr > wl {
                            return Err(ElabError::WidthMismatch {
                                loc,
                                context: format!("shift amount wider than operand ('{}')", op.symbol()),
                                lhs: wl,
                                rhs: wr,
                            });
                        }
                        wl
                    }
                    RtlBinOp::Eq | RtlBinOp::Ult | RtlBinOp::Ule => {
                        if let Some(x) = expect {
                            if x != 1 {
                                return Err(ElabError::WidthMismatch {
                                    loc,
                                    context: format!("comparison '{}' result", op.symbol()),
                                    lhs: 1,
                                    rhs: x,
                                });
                            }
                        }
                        let w = self.elab_binary_same_width(lhs, rhs, None, op, loc)?;
                        let _ = w;
                        1
                    }
                    _ => self.elab_binary_same_width(lhs, rhs, expect, op, loc)?,
                }
            }
            RtlExprKind::Cond { cond, then, els } => {
                self.elab_expr(cond, Some(1))?;
                if !Self::needs_context(then) {
                    let w = self.elab_expr(then, expect)?;
                    self.elab_expr(els, Some(w))?;
                    w
                } else {
                    let w = self.elab_expr(els, expect)?;
                    self.elab_expr(then, Some(w))?;
                    w
                }
            }
            RtlExprKind::Concat(parts) => {
                let mut w = 0;
                for p in parts.iter_mut() {
                    if Self::needs_context(p) {
                        return Err(other(
                            p.loc,
                            "unsized literal in concatenation; give it a width (e.g. 4'd3)",
                        ));
                    }
                    w += self.elab_expr(p, None)?;
                }
                if let Some(x) = expect {
                    if x != w {
                        return Err(ElabError::WidthMismatch {
                            loc,
                            context: "concatenation".into(),
                            lhs: w,
                            rhs: x,
                        });
                    }
                }
                w
            }
        };
        e.width = width;
        e.id = self.next_id;
        self.next_id += 1;
        Ok(width)
    }

    fn elab_binary_same_width(
        &mut self,
        lhs: &mut RtlExpr,
        rhs: &mut RtlExpr,
        expect: Option<u32>,
        op: RtlBinOp,
        loc: Loc,
    ) -> Result<u32, ElabError> {
        let (wl, wr) = if !Self::needs_context(lhs) {
            let wl = self.elab_expr(lhs, expect)?;
            (wl, self.elab_expr(rhs, Some(wl))?)
        } else if !Self::needs_context(rhs) {
            let wr = self.elab_expr(rhs, expect)?;
            (self.elab_expr(lhs, Some(wr))?, wr)
        } else {
            let wl = self.elab_expr(lhs, expect)?;
            (wl, self.elab_expr(rhs, Some(wl))?)
        };
        if wl != wr {
            return Err(ElabError::WidthMismatch {
                loc,
                context: format!("operator '{}'", op.symbol()),
                lhs: wl,
                rhs: wr,
            });
        }
        Ok(wl)
    }

    /// Verify the combinational list is a def-before-use chain: any wire bit
    /// that is ever combinationally driven must be driven before it is read.
    fn check_comb_order(&self, comb: &[Assign]) -> Result<(), ElabError> {
        let mut total: IndexMap<&str, BigUint> = IndexMap::new();
        for a in comb {
            let (name, hi, lo) = match &a.lhs {
                LValue::Word(n) => (n.as_str(), self.words[n.as_str()].width - 1, 0),
                LValue::Slice { word, hi, lo } => (word.as_str(), *hi, *lo),
                LValue::ArrayElem { .. } => unreachable!(),
            };
            let m = range_mask(hi, lo);
            let entry = total.entry(name).or_insert_with(BigUint::zero);
            if !((&*entry) & &m).is_zero() {
                return Err(ElabError::DuplicateDrive { loc: a.loc, wire: name.into(), hi, lo });
            }
            *entry |= m;
        }
        let mut seen: IndexMap<&str, BigUint> = IndexMap::new();
        for a in comb {
            let mut reads: Vec<(&str, u32, u32, Loc)> = Vec::new();
            collect_wire_reads(&a.rhs, &mut reads, &self.words);
            for idx in lhs_index_exprs(&a.lhs) {
                collect_wire_reads(idx, &mut reads, &self.words);
            }
            for (w, hi, lo, rloc) in reads {
                let m = range_mask(hi, lo);
                let driven = total.get(w).cloned().unwrap_or_else(BigUint::zero);
                let before = seen.get(w).cloned().unwrap_or_else(BigUint::zero);
                // bits that will be driven but have not been driven yet
                let pending = (&m & &driven) & (driven.clone() ^ &before);
                if !pending.is_zero() {
                    return Err(ElabError::CombCycle { loc: rloc, wire: w.into() });
                }
            }
            let (name, hi, lo) = match &a.lhs {
                LValue::Word(n) => (n.as_str(), self.words[n.as_str()].width - 1, 0),
                LValue::Slice { word, hi, lo } => (word.as_str(), *hi, *lo),
                LValue::ArrayElem { .. } => unreachable!(),
            };
            *seen.entry(name).or_insert_with(BigUint::zero) |= range_mask(hi, lo);
        }
        Ok(())
    }
}

fn lhs_index_exprs(lv: &LValue) -> impl Iterator<Item = &RtlExpr> {
    match lv {
        LValue::ArrayElem { indices, .. } => indices.iter(),
        _ => [].iter(),
    }
}

fn range_mask(hi: u32, lo: u32) -> BigUint {
    ((BigUint::one() << (hi - lo + 1)) - BigUint::one()) << lo
}

fn collect_wire_reads<'a>(
    e: &'a RtlExpr,
    out: &mut Vec<(&'a str, u32, u32, Loc)>,
    words: &IndexMap<String, WordInfo>,
) {
    match &e.kind {
        RtlExprKind::Word(n) => {
            if let Some(info) = words.get(n.as_str()) {
                if info.kind == WordKind::Wire {
                    out.push((n, info.width - 1, 0, e.loc));
                }
            }
        }
        RtlExprKind::Slice { word, hi, lo } => {
            if let Some(info) = words.get(word.as_str()) {
                if info.kind == WordKind::Wire {
                    out.push((word, *hi, *lo, e.loc));
                }
            }
        }
        RtlExprKind::ArrayRead { indices, .. } => {
            for i in indices {
                collect_wire_reads(i, out, words);
            }
        }
        RtlExprKind::Not(x) => collect_wire_reads(x, out, words),
        RtlExprKind::Binary { lhs, rhs, .. } => {
            collect_wire_reads(lhs, out, words);
            collect_wire_reads(rhs, out, words);
        }
        RtlExprKind::Cond { cond, then, els } => {
            collect_wire_reads(cond, out, words);
            collect_wire_reads(then, out, words);
            collect_wire_reads(els, out, words);
        }
        RtlExprKind::Concat(parts) => {
            for p in parts {
                collect_wire_reads(p, out, words);
            }
        }
        RtlExprKind::Literal { .. } => {}
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn elab(src: &str) -> Result<Elaborated, ElabError> {
        elaborate(&parse(src).unwrap())
    }

    #[test]
    fn width_mismatch_names_both_sides() {
        let e = elab("input a:8; input b:4; wire c:8; c = a + b;").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains('8') && msg.contains('4'), "{msg}");
    }

    #[test]
    fn comb_cycle_reported() {
        let e = elab("wire x:4; wire y:4; x = y; y = x;").unwrap_err();
        assert!(matches!(e, ElabError::CombCycle { .. }), "{e}");
    }

    #[test]
    fn enable_desugars_to_cond() {
        let el = elab("input en:1; input x:8; reg r:8; if (en) { r <= x; }").unwrap();
        let tr = el.transition();
        assert_eq!(tr.seq.len(), 1);
        let RtlExprKind::Cond { els, .. } = &tr.seq[0].rhs.kind else {
            panic!("expected desugared conditional")
        };
        assert!(matches!(els.kind, RtlExprKind::Word(ref n) if n == "r"));
    }

    #[test]
    fn unsized_literal_takes_context_width() {
        let el = elab("input a:8; wire c:8; c = a + 3;").unwrap();
        let RtlExprKind::Binary { rhs, .. } = &el.transition().comb[0].rhs.kind else {
            panic!()
        };
        assert_eq!(rhs.width, 8);
    }

    #[test]
    fn literal_on_the_left_also_infers() {
        let el = elab("input a:8; wire c:1; c = 3 < a;").unwrap();
        let RtlExprKind::Binary { lhs, .. } = &el.transition().comb[0].rhs.kind else {
            panic!()
        };
        assert_eq!(lhs.width, 8);
    }

    #[test]
    fn comparison_has_width_one() {
        let e = elab("input a:8; input b:8; wire c:8; c = a == b;").unwrap_err();
        assert!(matches!(e, ElabError::WidthMismatch { .. }), "{e}");
    }

    #[test]
    fn def_before_use_in_order_is_fine() {
        let el = elab("input a:4; wire u:4; wire v:4; u = a + 1; v = u ^ a;").unwrap();
        assert_eq!(el.transition().comb.len(), 2);
    }

    #[test]
    fn duplicate_comb_drive_rejected() {
        let e = elab("input a:4; wire u:4; u[2:0] = a[2:0]; u[2:1] = a[3:2];").unwrap_err();
        assert!(matches!(e, ElabError::DuplicateDrive { .. }), "{e}");
    }

    #[test]
    fn successive_guarded_updates_chain() {
        // the second if falls back to the first if's value, not the register
        let el = elab(
            "input f:1; input s:1; input x:4; reg st:1 = 0; \
             if (f) { st <= 1'd1; } if (s) { st <= 1'd0; } reg r:4; r <= x;",
        )
        .unwrap();
        let st_assign = el
            .transition()
            .seq
            .iter()
            .find(|a| a.lhs.base_name() == "st")
            .unwrap();
        // outermost condition is the *second* if; its else-branch must embed
        // the first if's conditional rather than a bare register read
        let RtlExprKind::Cond { els, .. } = &st_assign.rhs.kind else { panic!() };
        assert!(
            matches!(els.kind, RtlExprKind::Cond { .. }),
            "expected chained conditional, got {:?}",
            els.kind
        );
    }

    #[test]
    fn two_dimensional_arrays_flatten() {
        let el =
            elab("input i:2; input j:3; input x:8; array b:[2][3]8; reg r:8; b[i][j] <= x; r <= b[i][j];")
                .unwrap();
        assert_eq!(el.arrays["b"].index_width, 5);
        assert_eq!(el.arrays["b"].dims, vec![2, 3]);
    }
}
