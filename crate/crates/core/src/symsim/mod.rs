//! Invalid-bit-encoded symbolic simulation.
//!
//! An m-bit atom is carried as a pair `(val, inv)`: when the boolean `inv`
//! holds, every bit of the atom is X and `val` is a don't-care payload
//! (the constant zero for undriven atoms); otherwise `val` is the exact
//! value. The value side of every operator follows the concrete semantics
//! applied to the `val` components alone; the invalid-bit side goes through
//! the per-operator approximation templates.

mod eval;
pub mod templates;

pub use eval::{inv_array_read, FrameCtx};
pub use templates::Operand;

use crate::atomize::AtomMap;
use crate::expr::{ExprId, ExprPool, SideConstraints};
use crate::ir::{Elaborated, LValue, WordKind};
use indexmap::IndexMap;
use std::cell::RefCell;
use std::collections::HashSet;

/// Invalid-bit encoded atom value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymAtom {
    pub val: ExprId,
    pub inv: ExprId,
}

/// A contiguous bit range `[hi:lo]` sharing one invalid bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Granule {
    pub hi: u32,
    pub lo: u32,
    pub inv: ExprId,
}

/// Variable-shift invalid-bit mode. `StrictSound` is the default; the
/// `PaperFaithful` variant keeps a slice valid whenever its candidate source
/// bits are valid, even under an unknown shift distance, and is retained for
/// comparison because the exhaustive checker refutes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftMode {
    #[default]
    StrictSound,
    PaperFaithful,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimConfig {
    pub shift_mode: ShiftMode,
}

/// Side constraints plus the recorded divide-by-zero reachability conditions.
#[derive(Debug, Clone, Default)]
pub struct SimSide {
    pub sc: SideConstraints,
    pub div_zero: Vec<ExprId>,
}

/// Evaluation context threaded through template construction.
pub struct SimCtx<'a> {
    pub pool: &'a mut ExprPool,
    pub side: &'a mut SimSide,
    pub mode: ShiftMode,
}

pub type AtomKey = (String, u32, u32);

/// Array value as an update chain over an initialized or uninitialized base,
/// mirrored by a value-side array term.
#[derive(Debug, Clone)]
pub struct SymArray {
    pub index_width: u32,
    pub elem_width: u32,
    /// Value-side chain: array variable at the base, `array-update` per step.
    pub val: ExprId,
    pub chain: ArrayChain,
}

#[derive(Debug, Clone)]
pub enum ArrayChain {
    Base { initialized: bool },
    Update(std::rc::Rc<ArrayStep>),
}

#[derive(Debug)]
pub struct ArrayStep {
    pub prev: SymArray,
    pub idx_val: ExprId,
    pub idx_inv: ExprId,
    pub elem_val: ExprId,
    pub elem_granules: Vec<Granule>,
}

/// Full symbolic state of one frame: every atom of the atom map, every array,
/// and the side constraints accumulated so far in the run.
#[derive(Debug, Clone)]
pub struct SymState {
    pub frame: u32,
    pub atoms: IndexMap<AtomKey, SymAtom>,
    pub arrays: IndexMap<String, SymArray>,
    pub side: SimSide,
}

impl SymState {
    pub fn atom(&self, key: &AtomKey) -> &SymAtom {
        self.atoms.get(key).unwrap_or_else(|| {
            panic!("state has no atom {}[{}:{}]", key.0, key.1, key.2)
        })
    }

    /// Whole-word value: msb-first concatenation of the word's atom values.
    pub fn word_val(&self, pool: &mut ExprPool, atoms: &AtomMap, word: &str) -> ExprId {
        let parts: Vec<ExprId> = atoms[word]
            .atoms()
            .into_iter()
            .map(|(hi, lo)| self.atom(&(word.to_string(), hi, lo)).val)
            .collect();
        if parts.len() == 1 {
            parts[0]
        } else {
            pool.concat(&parts)
        }
    }

    /// Invalid bit of a word slice: disjunction of the invalid bits of every
    /// atom overlapping `[p..q]`.
    pub fn word_inv_slice(
        &self,
        pool: &mut ExprPool,
        atoms: &AtomMap,
        word: &str,
        q: u32,
        p: u32,
    ) -> ExprId {
        let mut acc = pool.fls();
        for (hi, lo) in atoms[word].atoms_in(q, p) {
            let inv = self.atom(&(word.to_string(), hi, lo)).inv;
            acc = pool.or(acc, inv);
        }
        acc
    }
}

/// Least upper bound of two invalid-bit encoded atom values. Returns the
/// combined value and the condition under which the true lub would be the
/// unachievable top (both sides valid with different values); the caller
/// collects those conditions instead of storing top in the state.
pub fn lub(pool: &mut ExprPool, a: &SymAtom, b: &SymAtom) -> (SymAtom, ExprId) {
    let na = pool.not(a.inv);
    let nb = pool.not(b.inv);
    let ne = pool.neq(a.val, b.val);
    let both = pool.and(na, nb);
    let top_cond = pool.and(both, ne);
    let inv = pool.and(a.inv, b.inv);
    let val = pool.ite(a.inv, b.val, a.val);
    (SymAtom { val, inv }, top_cond)
}

/// One antecedent value to merge into an atom at some frame.
#[derive(Debug, Clone, Copy)]
pub struct Drive {
    pub val: ExprId,
    pub inv: ExprId,
    /// Index of the originating tuple, for antecedent-failure reports.
    pub tuple: usize,
}

pub type Drives = IndexMap<AtomKey, Vec<Drive>>;

/// A lub performed against a driven value, with the condition under which it
/// would have been top.
#[derive(Debug, Clone)]
pub struct LubEvent {
    pub atom: AtomKey,
    pub frame: u32,
    pub tuple: usize,
    pub top_cond: ExprId,
}

pub struct Simulator<'e> {
    pub el: &'e Elaborated,
    pub atoms: &'e AtomMap,
    pub cfg: SimConfig,
    comb_written: HashSet<AtomKey>,
}

impl<'e> Simulator<'e> {
    pub fn new(el: &'e Elaborated, atoms: &'e AtomMap, cfg: SimConfig) -> Self {
        let mut comb_written = HashSet::new();
        for a in &el.transition().comb {
            match &a.lhs {
                LValue::Word(n) => {
                    for (hi, lo) in atoms[n.as_str()].atoms() {
                        comb_written.insert((n.clone(), hi, lo));
                    }
                }
                LValue::Slice { word, hi, lo } => {
                    for (ahi, alo) in atoms[word.as_str()].atoms_in(*hi, *lo) {
                        comb_written.insert((word.clone(), ahi, alo));
                    }
                }
                LValue::ArrayElem { .. } => unreachable!(),
            }
        }
        Self { el, atoms, cfg, comb_written }
    }

    /// All-X bottom state with registers at their reset values (frame 0,
    /// before any antecedent drive or combinational settling).
    pub fn initial_state(&self, pool: &mut ExprPool) -> SymState {
        let mut atoms = IndexMap::new();
        for (word, at) in self.atoms.iter() {
            let info = &self.el.words[word.as_str()];
            for (hi, lo) in at.atoms() {
                let width = hi - lo + 1;
                let entry = match (&info.kind, &info.init) {
                    (WordKind::Reg, Some(v)) => {
                        let sliced = (v.clone() >> lo) & crate::expr::mask(width);
                        SymAtom { val: pool.bv_const(width, sliced), inv: pool.fls() }
                    }
                    _ => SymAtom { val: pool.zero(width), inv: pool.tru() },
                };
                atoms.insert((word.clone(), hi, lo), entry);
            }
        }
        let mut arrays = IndexMap::new();
        for (name, info) in &self.el.arrays {
            let base = pool.array_var(name, info.index_width, info.elem_width);
            arrays.insert(
                name.clone(),
                SymArray {
                    index_width: info.index_width,
                    elem_width: info.elem_width,
                    val: base,
                    chain: ArrayChain::Base { initialized: info.initialized },
                },
            );
        }
        SymState { frame: 0, atoms, arrays, side: SimSide::default() }
    }

    /// Clock edge: registers and arrays take their sequential updates
    /// (all right-hand sides read the settled previous frame; later writes to
    /// the same bits win), inputs and wires fall back to all-X.
    pub fn edge(&self, pool: &mut ExprPool, prev: &SymState) -> SymState {
        let mut side = prev.side.clone();
        let fc = RefCell::new(FrameCtx::default());
        let mut next_atoms: IndexMap<AtomKey, SymAtom> = IndexMap::new();
        for (key, sa) in &prev.atoms {
            let info = &self.el.words[key.0.as_str()];
            let entry = match info.kind {
                WordKind::Reg => *sa, // hold by default
                _ => SymAtom { val: pool.zero(key.1 - key.2 + 1), inv: pool.tru() },
            };
            next_atoms.insert(key.clone(), entry);
        }
        let mut next_arrays = prev.arrays.clone();
        for a in &self.el.transition().seq {
            let mut cx = SimCtx { pool, side: &mut side, mode: self.cfg.shift_mode };
            match &a.lhs {
                LValue::Word(_) | LValue::Slice { .. } => {
                    let (word, hi, lo) = lv_range(&a.lhs, self.el);
                    for (ahi, alo) in self.atoms[word].atoms_in(hi, lo) {
                        let (rq, rp) = (ahi - lo, alo - lo);
                        let val_full = eval::rtl_val(
                            &mut cx,
                            eval::EvalEnv { st: prev, atoms: self.atoms, fc: &fc },
                            &a.rhs,
                        );
                        let val = cx.pool.extract(rq, rp, val_full);
                        let inv = eval::rtl_inv(
                            &mut cx,
                            eval::EvalEnv { st: prev, atoms: self.atoms, fc: &fc },
                            &a.rhs,
                            rq,
                            rp,
                        );
                        next_atoms.insert((word.to_string(), ahi, alo), SymAtom { val, inv });
                    }
                }
                LValue::ArrayElem { array, indices } => {
                    let env = eval::EvalEnv { st: prev, atoms: self.atoms, fc: &fc };
                    let (idx_val, idx_inv) = eval::flat_index(&mut cx, env, indices);
                    let elem_val = eval::rtl_val(&mut cx, env, &a.rhs);
                    let elem_granules = eval::rtl_granules(&mut cx, env, &a.rhs);
                    let cur = next_arrays[array.as_str()].clone();
                    let val = cx.pool.array_update(cur.val, idx_val, elem_val);
                    next_arrays.insert(
                        array.clone(),
                        SymArray {
                            index_width: cur.index_width,
                            elem_width: cur.elem_width,
                            val,
                            chain: ArrayChain::Update(std::rc::Rc::new(ArrayStep {
                                prev: cur,
                                idx_val,
                                idx_inv,
                                elem_val,
                                elem_granules,
                            })),
                        },
                    );
                }
            }
        }
        SymState { frame: prev.frame + 1, atoms: next_atoms, arrays: next_arrays, side }
    }

    /// Merge antecedent drives into register and input atoms, and into wire
    /// atoms that no combinational assignment produces. Returns the lub
    /// events for the antecedent-failure set.
    pub fn apply_state_drives(
        &self,
        pool: &mut ExprPool,
        st: &mut SymState,
        drives: &Drives,
        events: &mut Vec<LubEvent>,
    ) {
        for (key, ds) in drives {
            if self.comb_written.contains(key) {
                continue; // merged during settle, right after assignment
            }
            let mut cur = *st.atom(key);
            for d in ds {
                let (merged, top) = lub(pool, &cur, &SymAtom { val: d.val, inv: d.inv });
                if !pool.is_false(top) {
                    events.push(LubEvent {
                        atom: key.clone(),
                        frame: st.frame,
                        tuple: d.tuple,
                        top_cond: top,
                    });
                }
                cur = merged;
            }
            st.atoms.insert(key.clone(), cur);
        }
    }

    /// Evaluate the combinational assignments in order, merging any drives on
    /// a wire atom immediately after it is produced so downstream logic sees
    /// the merged value.
    pub fn settle(
        &self,
        pool: &mut ExprPool,
        st: &mut SymState,
        drives: &Drives,
        events: &mut Vec<LubEvent>,
    ) {
        let fc = RefCell::new(FrameCtx::default());
        let trans = self.el.transition();
        for a in &trans.comb {
            let (word, hi, lo) = lv_range(&a.lhs, self.el);
            let word = word.to_string();
            let mut side = std::mem::take(&mut st.side);
            let mut written: Vec<(AtomKey, SymAtom)> = Vec::new();
            {
                let mut cx = SimCtx { pool, side: &mut side, mode: self.cfg.shift_mode };
                let env = eval::EvalEnv { st, atoms: self.atoms, fc: &fc };
                for (ahi, alo) in self.atoms[word.as_str()].atoms_in(hi, lo) {
                    let (rq, rp) = (ahi - lo, alo - lo);
                    let val_full = eval::rtl_val(&mut cx, env, &a.rhs);
                    let val = cx.pool.extract(rq, rp, val_full);
                    let inv = eval::rtl_inv(&mut cx, env, &a.rhs, rq, rp);
                    written.push(((word.clone(), ahi, alo), SymAtom { val, inv }));
                }
            }
            st.side = side;
            for (key, mut sa) in written {
                if let Some(ds) = drives.get(&key) {
                    for d in ds {
                        let (merged, top) = lub(pool, &sa, &SymAtom { val: d.val, inv: d.inv });
                        if !pool.is_false(top) {
                            events.push(LubEvent {
                                atom: key.clone(),
                                frame: st.frame,
                                tuple: d.tuple,
                                top_cond: top,
                            });
                        }
                        sa = merged;
                    }
                }
                st.atoms.insert(key, sa);
            }
        }
    }

    /// One full frame: clock edge from `prev` (or the initial state), then
    /// antecedent drives, then combinational settling. This is the defining
    /// trajectory step; with no drives it is exactly the transition function.
    pub fn next_frame(
        &self,
        pool: &mut ExprPool,
        prev: Option<&SymState>,
        drives: &Drives,
    ) -> (SymState, Vec<LubEvent>) {
        let mut st = match prev {
            None => self.initial_state(pool),
            Some(p) => self.edge(pool, p),
        };
        let mut events = Vec::new();
        self.apply_state_drives(pool, &mut st, drives, &mut events);
        self.settle(pool, &mut st, drives, &mut events);
        (st, events)
    }

    /// The bare transition function: advance one clock with no drives.
    pub fn step(&self, pool: &mut ExprPool, prev: &SymState) -> SymState {
        let (st, events) = self.next_frame(pool, Some(prev), &Drives::default());
        debug_assert!(events.is_empty());
        st
    }

    /// Does any combinational assignment produce this atom?
    pub fn is_comb_written(&self, key: &AtomKey) -> bool {
        self.comb_written.contains(key)
    }

    /// One bounded-model-checking frame: plain value unrolling with no
    /// invalid bits. `forced` supplies the value of every input atom for this
    /// frame (and, at frame 0, of every uninitialized register atom), plus
    /// fresh variables for wire atoms nothing drives. Every atom in the
    /// resulting state carries a constant-false invalid bit.
    pub fn bmc_frame(
        &self,
        pool: &mut ExprPool,
        prev: Option<&SymState>,
        forced: &IndexMap<AtomKey, ExprId>,
    ) -> SymState {
        let fls = pool.fls();
        let mut st = match prev {
            None => {
                let mut st = self.initial_state(pool);
                for sa in st.atoms.values_mut() {
                    sa.inv = fls;
                }
                st
            }
            Some(p) => {
                let mut side = p.side.clone();
                let fc = RefCell::new(FrameCtx::default());
                let mut next_atoms: IndexMap<AtomKey, SymAtom> = IndexMap::new();
                for (key, sa) in &p.atoms {
                    let info = &self.el.words[key.0.as_str()];
                    let entry = match info.kind {
                        WordKind::Reg => *sa,
                        _ => SymAtom { val: pool.zero(key.1 - key.2 + 1), inv: fls },
                    };
                    next_atoms.insert(key.clone(), entry);
                }
                let mut next_arrays = p.arrays.clone();
                for a in &self.el.transition().seq {
                    let mut cx = SimCtx { pool, side: &mut side, mode: self.cfg.shift_mode };
                    let env = eval::EvalEnv { st: p, atoms: self.atoms, fc: &fc };
                    match &a.lhs {
                        LValue::Word(_) | LValue::Slice { .. } => {
                            let (word, hi, lo) = lv_range(&a.lhs, self.el);
                            let val_full = eval::rtl_val(&mut cx, env, &a.rhs);
                            for (ahi, alo) in self.atoms[word].atoms_in(hi, lo) {
                                let val = cx.pool.extract(ahi - lo, alo - lo, val_full);
                                next_atoms
                                    .insert((word.to_string(), ahi, alo), SymAtom { val, inv: fls });
                            }
                        }
                        LValue::ArrayElem { array, indices } => {
                            let (idx_val, _) = eval::flat_index(&mut cx, env, indices);
                            let elem_val = eval::rtl_val(&mut cx, env, &a.rhs);
                            let cur = next_arrays[array.as_str()].clone();
                            let val = cx.pool.array_update(cur.val, idx_val, elem_val);
                            next_arrays.insert(
                                array.clone(),
                                SymArray {
                                    index_width: cur.index_width,
                                    elem_width: cur.elem_width,
                                    val,
                                    chain: ArrayChain::Update(std::rc::Rc::new(ArrayStep {
                                        prev: cur,
                                        idx_val,
                                        idx_inv: fls,
                                        elem_val,
                                        elem_granules: Vec::new(),
                                    })),
                                },
                            );
                        }
                    }
                }
                SymState { frame: p.frame + 1, atoms: next_atoms, arrays: next_arrays, side }
            }
        };
        for (key, val) in forced {
            st.atoms.insert(key.clone(), SymAtom { val: *val, inv: fls });
        }
        // value-only combinational settling
        let fc = RefCell::new(FrameCtx::default());
        for a in &self.el.transition().comb {
            let (word, hi, lo) = lv_range(&a.lhs, self.el);
            let word = word.to_string();
            let mut side = std::mem::take(&mut st.side);
            let mut written = Vec::new();
            {
                let mut cx = SimCtx { pool, side: &mut side, mode: self.cfg.shift_mode };
                let env = eval::EvalEnv { st: &st, atoms: self.atoms, fc: &fc };
                let val_full = eval::rtl_val(&mut cx, env, &a.rhs);
                for (ahi, alo) in self.atoms[word.as_str()].atoms_in(hi, lo) {
                    let val = cx.pool.extract(ahi - lo, alo - lo, val_full);
                    written.push(((word.clone(), ahi, alo), SymAtom { val, inv: fls }));
                }
            }
            st.side = side;
            for (key, sa) in written {
                st.atoms.insert(key, sa);
            }
        }
        st
    }
}

fn lv_range<'a>(lv: &'a LValue, el: &Elaborated) -> (&'a str, u32, u32) {
    match lv {
        LValue::Word(n) => (n.as_str(), el.width_of(n) - 1, 0),
        LValue::Slice { word, hi, lo } => (word.as_str(), *hi, *lo),
        LValue::ArrayElem { .. } => unreachable!(),
    }
}
