//! Array elimination, Ackermann expansion and Tseitin bit-blasting onto the
//! CDCL core.

use crate::term::{Node, Op, Pool, Sort, TermId};
use std::collections::{HashMap, HashSet};
use varisat::{ExtendFormula, Lit, Solver};

pub struct Outcome {
    pub sat: bool,
    model_true: HashSet<usize>,
    bool_memo: HashMap<TermId, Lit>,
    bv_memo: HashMap<TermId, Vec<Lit>>,
    /// base array var -> (index term, stand-in result term) per read
    selects: HashMap<TermId, Vec<(TermId, TermId)>>,
}

impl Outcome {
    fn lit_value(&self, l: Lit) -> bool {
        let v = self.model_true.contains(&l.var().index());
        if l.is_positive() {
            v
        } else {
            !v
        }
    }

    pub fn bool_value(&self, t: TermId) -> Option<bool> {
        self.bool_memo.get(&t).map(|&l| self.lit_value(l))
    }

    pub fn bv_value(&self, t: TermId) -> Option<Vec<bool>> {
        self.bv_memo.get(&t).map(|ls| ls.iter().map(|&l| self.lit_value(l)).collect())
    }

    /// Concrete (index, value) pairs for every read of a base array.
    pub fn array_reads(&self, base: TermId) -> Vec<(Vec<bool>, Vec<bool>)> {
        let Some(insts) = self.selects.get(&base) else { return Vec::new() };
        insts
            .iter()
            .filter_map(|(idx, res)| Some((self.bv_value(*idx)?, self.bv_value(*res)?)))
            .collect()
    }
}

pub fn solve(pool: &mut Pool, roots: &[TermId]) -> Result<Outcome, String> {
    // 1. resolve read-over-write, collect base reads
    let mut elim = ArrayElim { memo: HashMap::new(), selects: HashMap::new(), fresh: 0 };
    let mut new_roots: Vec<TermId> = Vec::new();
    for &r in roots {
        new_roots.push(elim.rewrite(pool, r)?);
    }
    // 2. Ackermann congruence over reads of the same base
    let selects = elim.selects.clone();
    for insts in selects.values() {
        for (k1, (i1, r1)) in insts.iter().enumerate() {
            for (i2, r2) in &insts[k1 + 1..] {
                let ie = pool.mk(Op::Eq, vec![*i1, *i2], Sort::Bool);
                let ne = pool.mk(Op::Not, vec![ie], Sort::Bool);
                let re = pool.mk(Op::Eq, vec![*r1, *r2], Sort::Bool);
                new_roots.push(pool.mk(Op::Or, vec![ne, re], Sort::Bool));
            }
        }
    }
    // 3. blast
    let mut solver = Solver::new();
    let tru = solver.new_lit();
    solver.add_clause(&[tru]);
    let mut bl = Blaster {
        pool,
        solver,
        tru,
        bool_memo: HashMap::new(),
        bv_memo: HashMap::new(),
        div_memo: HashMap::new(),
    };
    for &r in &new_roots {
        let l = bl.boolean(r)?;
        bl.solver.add_clause(&[l]);
    }
    // 4. decide
    let sat = bl.solver.solve().map_err(|e| format!("sat core: {e}"))?;
    let mut model_true = HashSet::new();
    if sat {
        if let Some(model) = bl.solver.model() {
            for l in model {
                if l.is_positive() {
                    model_true.insert(l.var().index());
                }
            }
        }
    }
    Ok(Outcome { sat, model_true, bool_memo: bl.bool_memo, bv_memo: bl.bv_memo, selects })
}

struct ArrayElim {
    memo: HashMap<TermId, TermId>,
    selects: HashMap<TermId, Vec<(TermId, TermId)>>,
    fresh: u32,
}

impl ArrayElim {
    fn rewrite(&mut self, pool: &mut Pool, t: TermId) -> Result<TermId, String> {
        if let Some(&r) = self.memo.get(&t) {
            return Ok(r);
        }
        let out = match pool.node(t).clone() {
            Node::App(Op::Select, args) => {
                let arr = self.rewrite(pool, args[0])?;
                let idx = self.rewrite(pool, args[1])?;
                self.resolve_select(pool, arr, idx)?
            }
            Node::App(op, args) => {
                let args: Vec<TermId> =
                    args.iter().map(|&a| self.rewrite(pool, a)).collect::<Result<_, _>>()?;
                let sort = pool.sort(t);
                pool.mk(op, args, sort)
            }
            _ => t,
        };
        self.memo.insert(t, out);
        Ok(out)
    }

    fn resolve_select(
        &mut self,
        pool: &mut Pool,
        arr: TermId,
        idx: TermId,
    ) -> Result<TermId, String> {
        match pool.node(arr).clone() {
            Node::App(Op::Store, args) => {
                let hit = pool.mk(Op::Eq, vec![idx, args[1]], Sort::Bool);
                let deeper = self.resolve_select(pool, args[0], idx)?;
                let ew = pool.width(args[2]);
                Ok(pool.mk(Op::Ite, vec![hit, args[2], deeper], Sort::Bv(ew)))
            }
            Node::Var(_, Sort::Array(_, ew)) => {
                // reuse the stand-in for a structurally identical read
                if let Some(insts) = self.selects.get(&arr) {
                    if let Some((_, r)) = insts.iter().find(|(i, _)| *i == idx) {
                        return Ok(*r);
                    }
                }
                let name = format!("sel!{}", self.fresh);
                self.fresh += 1;
                let r = pool.var(&name, Sort::Bv(ew));
                self.selects.entry(arr).or_default().push((idx, r));
                Ok(r)
            }
            other => Err(format!("select over unsupported array term {other:?}")),
        }
    }
}

struct Blaster<'p> {
    pool: &'p Pool,
    solver: Solver<'p>,
    tru: Lit,
    bool_memo: HashMap<TermId, Lit>,
    bv_memo: HashMap<TermId, Vec<Lit>>,
    div_memo: HashMap<(TermId, TermId), (Vec<Lit>, Vec<Lit>)>,
}

impl Blaster<'_> {
    fn fls(&self) -> Lit {
        !self.tru
    }

    fn konst(&self, b: bool) -> Lit {
        if b {
            self.tru
        } else {
            self.fls()
        }
    }

    // ----- gates -----

    fn g_and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.tru {
            return b;
        }
        if b == self.tru {
            return a;
        }
        if a == self.fls() || b == self.fls() {
            return self.fls();
        }
        if a == b {
            return a;
        }
        if a == !b {
            return self.fls();
        }
        let o = self.solver.new_lit();
        self.solver.add_clause(&[!a, !b, o]);
        self.solver.add_clause(&[a, !o]);
        self.solver.add_clause(&[b, !o]);
        o
    }

    fn g_or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.g_and(!a, !b)
    }

    fn g_xor(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.tru {
            return !b;
        }
        if b == self.tru {
            return !a;
        }
        if a == self.fls() {
            return b;
        }
        if b == self.fls() {
            return a;
        }
        if a == b {
            return self.fls();
        }
        if a == !b {
            return self.tru;
        }
        let o = self.solver.new_lit();
        self.solver.add_clause(&[!a, !b, !o]);
        self.solver.add_clause(&[a, b, !o]);
        self.solver.add_clause(&[a, !b, o]);
        self.solver.add_clause(&[!a, b, o]);
        o
    }

    fn g_ite(&mut self, c: Lit, t: Lit, e: Lit) -> Lit {
        if c == self.tru {
            return t;
        }
        if c == self.fls() {
            return e;
        }
        if t == e {
            return t;
        }
        let a = self.g_and(c, t);
        let b = self.g_and(!c, e);
        self.g_or(a, b)
    }

    fn g_maj(&mut self, a: Lit, b: Lit, c: Lit) -> Lit {
        let ab = self.g_and(a, b);
        let ac = self.g_and(a, c);
        let bc = self.g_and(b, c);
        let t = self.g_or(ab, ac);
        self.g_or(t, bc)
    }

    // ----- vectors -----

    fn fresh_vec(&mut self, w: usize) -> Vec<Lit> {
        (0..w).map(|_| self.solver.new_lit()).collect()
    }

    fn v_add(&mut self, a: &[Lit], b: &[Lit], cin: Lit) -> Vec<Lit> {
        let mut c = cin;
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let ab = self.g_xor(a[i], b[i]);
            out.push(self.g_xor(ab, c));
            c = self.g_maj(a[i], b[i], c);
        }
        out
    }

    fn v_eq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut acc = self.tru;
        for i in 0..a.len() {
            let x = self.g_xor(a[i], b[i]);
            acc = self.g_and(acc, !x);
        }
        acc
    }

    fn v_ult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut lt = self.fls();
        for i in 0..a.len() {
            let diff = self.g_xor(a[i], b[i]);
            lt = self.g_ite(diff, b[i], lt);
        }
        lt
    }

    fn v_mul(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc = vec![self.fls(); w];
        for i in 0..w {
            let mut row = Vec::with_capacity(w);
            for j in 0..w {
                if j < i {
                    row.push(self.fls());
                } else {
                    row.push(self.g_and(a[j - i], b[i]));
                }
            }
            acc = self.v_add(&acc, &row, self.fls());
        }
        acc
    }

    fn v_shift(&mut self, a: &[Lit], d: &[Lit], left: bool) -> Vec<Lit> {
        let w = a.len();
        let mut cur: Vec<Lit> = a.to_vec();
        let mut too_big = self.fls();
        for (j, &dj) in d.iter().enumerate() {
            if (1u64 << j.min(63)) >= w as u64 {
                too_big = self.g_or(too_big, dj);
                continue;
            }
            let k = 1usize << j;
            let mut shifted = Vec::with_capacity(w);
            for i in 0..w {
                let src = if left {
                    if i >= k { Some(cur[i - k]) } else { None }
                } else if i + k < w {
                    Some(cur[i + k])
                } else {
                    None
                };
                let sv = src.unwrap_or(self.fls());
                shifted.push(self.g_ite(dj, sv, cur[i]));
            }
            cur = shifted;
        }
        let keep = !too_big;
        cur.into_iter().map(|l| self.g_and(l, keep)).collect()
    }

    fn v_udiv_urem(&mut self, at: TermId, bt: TermId) -> Result<(Vec<Lit>, Vec<Lit>), String> {
        if let Some(qr) = self.div_memo.get(&(at, bt)) {
            return Ok(qr.clone());
        }
        let a = self.bv(at)?;
        let b = self.bv(bt)?;
        let w = a.len();
        let q = self.fresh_vec(w);
        let r = self.fresh_vec(w);
        let mut b_nonzero = self.fls();
        for &bi in &b {
            b_nonzero = self.g_or(b_nonzero, bi);
        }
        let b_zero = !b_nonzero;
        // division by zero: quotient all ones, remainder the dividend
        for i in 0..w {
            self.solver.add_clause(&[!b_zero, q[i]]);
            self.solver.add_clause(&[!b_zero, !r[i], a[i]]);
            self.solver.add_clause(&[!b_zero, r[i], !a[i]]);
        }
        // otherwise q*b + r = a (exactly, at doubled width) and r < b
        let pad = |v: &[Lit], fls: Lit| {
            let mut v = v.to_vec();
            v.extend(std::iter::repeat_n(fls, w));
            v
        };
        let fls = self.fls();
        let qz = pad(&q, fls);
        let bz = pad(&b, fls);
        let rz = pad(&r, fls);
        let az = pad(&a, fls);
        let prod = self.v_mul(&qz, &bz);
        let sum = self.v_add(&prod, &rz, fls);
        let rel = self.v_eq(&sum, &az);
        let lt = self.v_ult(&r, &b);
        self.solver.add_clause(&[b_zero, rel]);
        self.solver.add_clause(&[b_zero, lt]);
        self.div_memo.insert((at, bt), (q.clone(), r.clone()));
        Ok((q, r))
    }

    // ----- terms -----

    fn boolean(&mut self, t: TermId) -> Result<Lit, String> {
        if let Some(&l) = self.bool_memo.get(&t) {
            return Ok(l);
        }
        let l = match self.pool.node(t).clone() {
            Node::True => self.tru,
            Node::False => self.fls(),
            Node::Var(_, Sort::Bool) => self.solver.new_lit(),
            Node::Var(_, s) => return Err(format!("boolean context for var of sort {s:?}")),
            Node::BvConst(_) => return Err("boolean context for bv constant".into()),
            Node::App(op, args) => match op {
                Op::Not => {
                    let a = self.boolean(args[0])?;
                    !a
                }
                Op::And => {
                    let a = self.boolean(args[0])?;
                    let b = self.boolean(args[1])?;
                    self.g_and(a, b)
                }
                Op::Or => {
                    let a = self.boolean(args[0])?;
                    let b = self.boolean(args[1])?;
                    self.g_or(a, b)
                }
                Op::Ite => {
                    let c = self.boolean(args[0])?;
                    let x = self.boolean(args[1])?;
                    let y = self.boolean(args[2])?;
                    self.g_ite(c, x, y)
                }
                Op::Eq => match self.pool.sort(args[0]) {
                    Sort::Bool => {
                        let a = self.boolean(args[0])?;
                        let b = self.boolean(args[1])?;
                        !self.g_xor(a, b)
                    }
                    Sort::Bv(_) => {
                        let a = self.bv(args[0])?;
                        let b = self.bv(args[1])?;
                        self.v_eq(&a, &b)
                    }
                    Sort::Array(..) => return Err("array equality unsupported".into()),
                },
                Op::BvUlt => {
                    let a = self.bv(args[0])?;
                    let b = self.bv(args[1])?;
                    self.v_ult(&a, &b)
                }
                Op::BvUle => {
                    let a = self.bv(args[0])?;
                    let b = self.bv(args[1])?;
                    let gt = self.v_ult(&b, &a);
                    !gt
                }
                other => return Err(format!("{other:?} in boolean context")),
            },
        };
        self.bool_memo.insert(t, l);
        Ok(l)
    }

    fn bv(&mut self, t: TermId) -> Result<Vec<Lit>, String> {
        if let Some(ls) = self.bv_memo.get(&t) {
            return Ok(ls.clone());
        }
        let ls: Vec<Lit> = match self.pool.node(t).clone() {
            Node::BvConst(bits) => bits.iter().map(|&b| self.konst(b)).collect(),
            Node::Var(_, Sort::Bv(w)) => self.fresh_vec(w as usize),
            Node::Var(_, s) => return Err(format!("bv context for var of sort {s:?}")),
            Node::True | Node::False => return Err("bv context for boolean".into()),
            Node::App(op, args) => match op {
                Op::BvNot => {
                    let a = self.bv(args[0])?;
                    a.into_iter().map(|l| !l).collect()
                }
                Op::BvAnd | Op::BvOr | Op::BvXor => {
                    let a = self.bv(args[0])?;
                    let b = self.bv(args[1])?;
                    (0..a.len())
                        .map(|i| match op {
                            Op::BvAnd => self.g_and(a[i], b[i]),
                            Op::BvOr => self.g_or(a[i], b[i]),
                            _ => self.g_xor(a[i], b[i]),
                        })
                        .collect()
                }
                Op::BvAdd => {
                    let a = self.bv(args[0])?;
                    let b = self.bv(args[1])?;
                    let f = self.fls();
                    self.v_add(&a, &b, f)
                }
                Op::BvSub => {
                    let a = self.bv(args[0])?;
                    let b = self.bv(args[1])?;
                    let nb: Vec<Lit> = b.into_iter().map(|l| !l).collect();
                    self.v_add(&a, &nb, self.tru)
                }
                Op::BvMul => {
                    let a = self.bv(args[0])?;
                    let b = self.bv(args[1])?;
                    self.v_mul(&a, &b)
                }
                Op::BvUdiv => self.v_udiv_urem(args[0], args[1])?.0,
                Op::BvUrem => self.v_udiv_urem(args[0], args[1])?.1,
                Op::BvShl | Op::BvLshr => {
                    let a = self.bv(args[0])?;
                    let d = self.bv(args[1])?;
                    self.v_shift(&a, &d, op == Op::BvShl)
                }
                Op::Concat => {
                    // args[0] is the high part
                    let hi = self.bv(args[0])?;
                    let mut lo = self.bv(args[1])?;
                    lo.extend(hi);
                    lo
                }
                Op::Extract(hi, lo) => {
                    let a = self.bv(args[0])?;
                    a[lo as usize..=hi as usize].to_vec()
                }
                Op::Ite => {
                    let c = self.boolean(args[0])?;
                    let x = self.bv(args[1])?;
                    let y = self.bv(args[2])?;
                    (0..x.len()).map(|i| self.g_ite(c, x[i], y[i])).collect()
                }
                other => return Err(format!("{other:?} in bv context")),
            },
        };
        self.bv_memo.insert(t, ls.clone());
        Ok(ls)
    }
}
