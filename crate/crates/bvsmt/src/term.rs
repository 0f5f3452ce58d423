//! Hash-consed term graph with light sort checking.

use indexmap::IndexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Bv(u32),
    Array(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    // booleans
    Not,
    And,
    Or,
    Ite, // both sorts, by result
    Eq,
    // bit-vectors
    BvAdd,
    BvSub,
    BvMul,
    BvUdiv,
    BvUrem,
    BvAnd,
    BvOr,
    BvXor,
    BvNot,
    BvShl,
    BvLshr,
    BvUlt,
    BvUle,
    Concat,
    Extract(u32, u32),
    // arrays
    Select,
    Store,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    BvConst(Vec<bool>), // lsb-first
    Var(String, Sort),
    App(Op, Vec<TermId>),
}

pub struct Pool {
    nodes: IndexSet<Node>,
    sorts: Vec<Sort>,
}

impl Pool {
    pub fn new() -> Self {
        Self { nodes: IndexSet::new(), sorts: Vec::new() }
    }

    pub fn node(&self, t: TermId) -> &Node {
        self.nodes.get_index(t.0 as usize).unwrap()
    }

    pub fn sort(&self, t: TermId) -> Sort {
        self.sorts[t.0 as usize]
    }

    pub fn width(&self, t: TermId) -> u32 {
        match self.sort(t) {
            Sort::Bv(w) => w,
            s => panic!("not a bit-vector: {s:?}"),
        }
    }

    fn intern(&mut self, n: Node, sort: Sort) -> TermId {
        let (i, inserted) = self.nodes.insert_full(n);
        if inserted {
            self.sorts.push(sort);
        }
        TermId(i as u32)
    }

    pub fn tru(&mut self) -> TermId {
        self.intern(Node::True, Sort::Bool)
    }

    pub fn fls(&mut self) -> TermId {
        self.intern(Node::False, Sort::Bool)
    }

    pub fn bv_const(&mut self, bits: Vec<bool>) -> TermId {
        let w = bits.len() as u32;
        self.intern(Node::BvConst(bits), Sort::Bv(w))
    }

    pub fn var(&mut self, name: &str, sort: Sort) -> TermId {
        self.intern(Node::Var(name.to_string(), sort), sort)
    }

    pub fn extract(&mut self, hi: u32, lo: u32, x: TermId) -> Result<TermId, String> {
        let w = self.width(x);
        if lo > hi || hi >= w {
            return Err(format!("extract [{hi}:{lo}] out of range for width {w}"));
        }
        Ok(self.intern(Node::App(Op::Extract(hi, lo), vec![x]), Sort::Bv(hi - lo + 1)))
    }

    pub fn zext(&mut self, x: TermId, k: u32) -> TermId {
        if k == 0 {
            return x;
        }
        let zeros = self.bv_const(vec![false; k as usize]);
        let w = self.width(x) + k;
        self.intern(Node::App(Op::Concat, vec![zeros, x]), Sort::Bv(w))
    }

    pub fn mk(&mut self, op: Op, args: Vec<TermId>, sort: Sort) -> TermId {
        self.intern(Node::App(op, args), sort)
    }

    /// Parse-time application with sort computation.
    pub fn app(&mut self, op: &str, args: Vec<TermId>) -> Result<TermId, String> {
        let bv = |p: &Pool, t: TermId| -> Result<u32, String> {
            match p.sort(t) {
                Sort::Bv(w) => Ok(w),
                s => Err(format!("expected bit-vector, got {s:?}")),
            }
        };
        // n-ary and/or fold left
        let fold_bool = |p: &mut Pool, op: Op, args: &[TermId]| -> Result<TermId, String> {
            let mut acc = args[0];
            for &a in &args[1..] {
                acc = p.mk(op, vec![acc, a], Sort::Bool);
            }
            Ok(acc)
        };
        match op {
            "not" => Ok(self.mk(Op::Not, args, Sort::Bool)),
            "and" => fold_bool(self, Op::And, &args),
            "or" => fold_bool(self, Op::Or, &args),
            "=>" => {
                let n = self.mk(Op::Not, vec![args[0]], Sort::Bool);
                Ok(self.mk(Op::Or, vec![n, args[1]], Sort::Bool))
            }
            "=" => {
                if self.sort(args[0]) != self.sort(args[1]) {
                    return Err("= operands differ in sort".into());
                }
                if matches!(self.sort(args[0]), Sort::Array(..)) {
                    return Err("array equality is not supported".into());
                }
                Ok(self.mk(Op::Eq, args, Sort::Bool))
            }
            "ite" => {
                let sort = self.sort(args[1]);
                if self.sort(args[2]) != sort {
                    return Err("ite branches differ in sort".into());
                }
                Ok(self.mk(Op::Ite, args, sort))
            }
            "bvadd" | "bvsub" | "bvmul" | "bvudiv" | "bvurem" | "bvand" | "bvor" | "bvxor"
            | "bvshl" | "bvlshr" => {
                let w = bv(self, args[0])?;
                if bv(self, args[1])? != w {
                    return Err(format!("{op} operand widths differ"));
                }
                let o = match op {
                    "bvadd" => Op::BvAdd,
                    "bvsub" => Op::BvSub,
                    "bvmul" => Op::BvMul,
                    "bvudiv" => Op::BvUdiv,
                    "bvurem" => Op::BvUrem,
                    "bvand" => Op::BvAnd,
                    "bvor" => Op::BvOr,
                    "bvxor" => Op::BvXor,
                    "bvshl" => Op::BvShl,
                    _ => Op::BvLshr,
                };
                Ok(self.mk(o, args, Sort::Bv(w)))
            }
            "bvnot" => {
                let w = bv(self, args[0])?;
                Ok(self.mk(Op::BvNot, args, Sort::Bv(w)))
            }
            "bvneg" => {
                let w = bv(self, args[0])?;
                let n = self.mk(Op::BvNot, vec![args[0]], Sort::Bv(w));
                let mut one = vec![false; w as usize];
                one[0] = true;
                let one = self.bv_const(one);
                Ok(self.mk(Op::BvAdd, vec![n, one], Sort::Bv(w)))
            }
            "bvult" | "bvule" | "bvugt" | "bvuge" => {
                let w = bv(self, args[0])?;
                if bv(self, args[1])? != w {
                    return Err(format!("{op} operand widths differ"));
                }
                let (o, args) = match op {
                    "bvult" => (Op::BvUlt, args),
                    "bvule" => (Op::BvUle, args),
                    "bvugt" => (Op::BvUlt, vec![args[1], args[0]]),
                    _ => (Op::BvUle, vec![args[1], args[0]]),
                };
                Ok(self.mk(o, args, Sort::Bool))
            }
            "concat" => {
                let mut acc = args[0];
                for &a in &args[1..] {
                    let w = bv(self, acc)? + bv(self, a)?;
                    acc = self.mk(Op::Concat, vec![acc, a], Sort::Bv(w));
                }
                Ok(acc)
            }
            "select" => {
                let Sort::Array(iw, ew) = self.sort(args[0]) else {
                    return Err("select of non-array".into());
                };
                if bv(self, args[1])? != iw {
                    return Err("select index width mismatch".into());
                }
                Ok(self.mk(Op::Select, args, Sort::Bv(ew)))
            }
            "store" => {
                let sort = self.sort(args[0]);
                let Sort::Array(iw, ew) = sort else {
                    return Err("store of non-array".into());
                };
                if bv(self, args[1])? != iw || bv(self, args[2])? != ew {
                    return Err("store width mismatch".into());
                }
                Ok(self.mk(Op::Store, args, sort))
            }
            other => Err(format!("unsupported operator {other}")),
        }
    }
}
