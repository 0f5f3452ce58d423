//! A minimal synchronous RTL design language ("WDL"): abstract syntax,
//! recursive-descent parser, width-checking elaboration and the per-cycle
//! transition form consumed by the symbolic and concrete simulators.
//!
//! One implicit clock. `=` is a combinational assignment, `<=` a sequential
//! update applied at the clock edge. `if` blocks desugar into conditional
//! (`?:`) right-hand sides during elaboration, so downstream passes only ever
//! see straight-line assignments.

mod elab;
mod parse;
mod print;

pub use elab::{elaborate, ElabError, Elaborated, Transition, WordInfo, WordKind};
pub(crate) use elab::elab_standalone_expr;
pub use parse::{parse, ParseError};
pub(crate) use parse::parse_expression;

use crate::lex::Loc;
use num_bigint::BigUint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtlBinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Eq,
    Ult,
    Ule,
}

impl RtlBinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RtlBinOp::Add => "+",
            RtlBinOp::Sub => "-",
            RtlBinOp::Mul => "*",
            RtlBinOp::Div => "/",
            RtlBinOp::Rem => "%",
            RtlBinOp::And => "&",
            RtlBinOp::Or => "|",
            RtlBinOp::Xor => "^",
            RtlBinOp::Shl => "<<",
            RtlBinOp::Shr => ">>",
            RtlBinOp::Eq => "==",
            RtlBinOp::Ult => "<",
            RtlBinOp::Ule => "<=",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, RtlBinOp::Eq | RtlBinOp::Ult | RtlBinOp::Ule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RtlExprKind {
    /// Literal constant. `width` is `None` for an unsized decimal literal;
    /// elaboration resolves it from context.
    Literal { value: BigUint, width: Option<u32> },
    /// Whole-word reference.
    Word(String),
    /// Constant slice `w[hi:lo]`.
    Slice { word: String, hi: u32, lo: u32 },
    /// Array read `A[i]` or `B[i][j]`.
    ArrayRead { array: String, indices: Vec<RtlExpr> },
    /// Bitwise negation `~e`.
    Not(Box<RtlExpr>),
    Binary { op: RtlBinOp, lhs: Box<RtlExpr>, rhs: Box<RtlExpr> },
    /// `cond ? t : e`; `cond` is a 1-bit expression.
    Cond { cond: Box<RtlExpr>, then: Box<RtlExpr>, els: Box<RtlExpr> },
    /// `{a, b, ...}` msb-first.
    Concat(Vec<RtlExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtlExpr {
    pub kind: RtlExprKind,
    pub loc: Loc,
    /// Result width in bits; `0` until elaboration annotates it.
    pub width: u32,
    /// Stable node id assigned during elaboration, used for memoization.
    pub id: u32,
}

impl RtlExpr {
    pub fn new(kind: RtlExprKind, loc: Loc) -> Self {
        Self { kind, loc, width: 0, id: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Word(String),
    Slice { word: String, hi: u32, lo: u32 },
    ArrayElem { array: String, indices: Vec<RtlExpr> },
}

impl LValue {
    pub fn base_name(&self) -> &str {
        match self {
            LValue::Word(n) => n,
            LValue::Slice { word, .. } => word,
            LValue::ArrayElem { array, .. } => array,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assign {
    pub lhs: LValue,
    pub rhs: RtlExpr,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Comb(Assign),
    Seq(Assign),
    If { cond: RtlExpr, then: Vec<Stmt>, els: Vec<Stmt>, loc: Loc },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegDecl {
    pub name: String,
    pub width: u32,
    pub init: Option<BigUint>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayDecl {
    pub name: String,
    /// One entry per dimension; two-dimensional arrays carry two widths and
    /// are flattened to a concatenated index during elaboration.
    pub index_widths: Vec<u32>,
    pub elem_width: u32,
    pub initialized: bool,
    pub loc: Loc,
}

/// Parsed design, prior to elaboration.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub name: String,
    pub inputs: Vec<(String, u32)>,
    pub outputs: Vec<String>,
    pub wires: Vec<(String, u32)>,
    pub registers: Vec<RegDecl>,
    pub arrays: Vec<ArrayDecl>,
    pub stmts: Vec<Stmt>,
}
