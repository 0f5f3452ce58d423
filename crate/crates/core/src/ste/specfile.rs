//! Property file parser.
//!
//! ```text
//! var A:8;                                  // spec variable declarations
//! constr A < 8'd16;                         // assignment constraint (width-1 expr)
//! ant (g) word[q:p] = vexpr @ [start,end);  // antecedent tuple
//! cons (g) word     = vexpr @ [start,end);  // consequent tuple
//! ```
//!
//! Guards, constraints and value expressions use the design language's
//! expression grammar over the declared spec variables only (plus `true` and
//! `false`); guards and constraints must have width 1.

use super::{AntFailPolicy, Spec, TrajectoryTuple};
use crate::expr::{ExprId, ExprPool};
use crate::ir::{Elaborated, RtlBinOp, RtlExpr, RtlExprKind};
use crate::lex::{tokenize, Cursor, Loc, Spanned, Tok};
use indexmap::IndexMap;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
#[error("{loc}: {msg}")]
pub struct SpecError {
    pub loc: Loc,
    pub msg: String,
}

fn serr(loc: Loc, msg: impl Into<String>) -> SpecError {
    SpecError { loc, msg: msg.into() }
}

pub fn parse_spec(src: &str, el: &Elaborated, pool: &mut ExprPool) -> Result<Spec, SpecError> {
    let toks = tokenize(src).map_err(|e| serr(e.loc, e.msg))?;
    let mut p = SpecParser {
        cur: Cursor::new(toks),
        declared: ["true", "false"].iter().map(|s| s.to_string()).collect(),
        vars: IndexMap::new(),
        el,
    };
    let mut spec = Spec {
        vars: Vec::new(),
        constr: pool.tru(),
        antecedents: Vec::new(),
        consequents: Vec::new(),
        mode: AntFailPolicy::default(),
    };
    while !p.cur.at_eof() {
        let loc = p.cur.loc();
        match p.cur.bump() {
            Tok::Ident(kw) => match kw.as_str() {
                "var" => {
                    let name = p.ident()?;
                    p.expect(Tok::Colon)?;
                    let w = p.number()?;
                    if w == 0 {
                        return Err(serr(loc, "width must be at least 1"));
                    }
                    p.expect(Tok::Semi)?;
                    if !p.declared.insert(name.clone()) {
                        return Err(serr(loc, format!("duplicate spec variable '{name}'")));
                    }
                    p.vars.insert(name.clone(), w);
                    spec.vars.push((name, w));
                }
                "constr" => {
                    let c = p.bool_expr(pool)?;
                    p.expect(Tok::Semi)?;
                    spec.constr = pool.and(spec.constr, c);
                }
                "ant" | "cons" => {
                    let is_ant = kw == "ant";
                    p.expect(Tok::LParen)?;
                    let guard = p.bool_expr(pool)?;
                    p.expect(Tok::RParen)?;
                    let (word, hi, lo) = p.atom_ref(loc)?;
                    p.expect(Tok::Assign)?;
                    let vexpr = p.bv_expr(pool, Some(hi - lo + 1))?;
                    p.expect(Tok::At)?;
                    p.expect(Tok::LBrack)?;
                    let start = p.number()?;
                    p.expect(Tok::Comma)?;
                    let end = p.number()?;
                    p.expect(Tok::RParen)?;
                    p.expect(Tok::Semi)?;
                    if end < start + 1 {
                        return Err(serr(
                            loc,
                            format!("tuple interval [{start},{end}) is empty; end must be at least start+1"),
                        ));
                    }
                    let tup = TrajectoryTuple { guard, word, hi, lo, vexpr, start, end };
                    if is_ant {
                        spec.antecedents.push(tup);
                    } else {
                        spec.consequents.push(tup);
                    }
                }
                other => return Err(serr(loc, format!("unknown directive '{other}'"))),
            },
            other => return Err(serr(loc, format!("expected directive, found {other}"))),
        }
    }
    Ok(spec)
}

struct SpecParser<'e> {
    cur: Cursor,
    declared: HashSet<String>,
    vars: IndexMap<String, u32>,
    el: &'e Elaborated,
}

impl SpecParser<'_> {
    fn expect(&mut self, t: Tok) -> Result<(), SpecError> {
        let loc = self.cur.loc();
        let got = self.cur.bump();
        if got == t {
            Ok(())
        } else {
            Err(serr(loc, format!("expected {t}, found {got}")))
        }
    }

    fn ident(&mut self) -> Result<String, SpecError> {
        let loc = self.cur.loc();
        match self.cur.bump() {
            Tok::Ident(s) => Ok(s),
            other => Err(serr(loc, format!("expected identifier, found {other}"))),
        }
    }

    fn number(&mut self) -> Result<u32, SpecError> {
        let loc = self.cur.loc();
        match self.cur.bump() {
            Tok::Number { value, width: None } => u32::try_from(&value)
                .map_err(|_| serr(loc, "number too large")),
            other => Err(serr(loc, format!("expected number, found {other}"))),
        }
    }

    /// `word` or `word[q:p]`, validated against the design.
    fn atom_ref(&mut self, loc: Loc) -> Result<(String, u32, u32), SpecError> {
        let name = self.ident()?;
        let Some(info) = self.el.word(&name) else {
            return Err(serr(loc, format!("'{name}' is not a word of the design")));
        };
        if self.cur.eat(&Tok::LBrack) {
            let hi = self.number()?;
            self.expect(Tok::Colon)?;
            let lo = self.number()?;
            self.expect(Tok::RBrack)?;
            if lo > hi || hi >= info.width {
                return Err(serr(
                    loc,
                    format!("slice [{hi}:{lo}] out of range for '{name}' of width {}", info.width),
                ));
            }
            Ok((name, hi, lo))
        } else {
            Ok((name, info.width - 1, 0))
        }
    }

    fn parse_rtl_expr(&mut self, expect: Option<u32>) -> Result<RtlExpr, SpecError> {
        let loc = self.cur.loc();
        let dummy = Cursor::new(vec![Spanned { tok: Tok::Eof, loc }]);
        let cur = std::mem::replace(&mut self.cur, dummy);
        let (mut e, cur) =
            crate::ir::parse_expression(cur, &self.declared).map_err(|e| serr(e.loc, e.msg))?;
        self.cur = cur;
        // width-check against the spec variables
        let mut table: IndexMap<String, crate::ir::WordInfo> = self
            .vars
            .iter()
            .map(|(n, w)| {
                (n.clone(), crate::ir::WordInfo {
                    kind: crate::ir::WordKind::Input,
                    width: *w,
                    init: None,
                })
            })
            .collect();
        for lit in ["true", "false"] {
            table.insert(
                lit.to_string(),
                crate::ir::WordInfo { kind: crate::ir::WordKind::Input, width: 1, init: None },
            );
        }
        crate::ir::elab_standalone_expr(&table, &mut e, expect)
            .map_err(|err| serr(loc, err.to_string()))?;
        Ok(e)
    }

    /// Width-1 expression coerced to a boolean term.
    fn bool_expr(&mut self, pool: &mut ExprPool) -> Result<ExprId, SpecError> {
        let e = self.parse_rtl_expr(Some(1))?;
        let v = lower(pool, &e, &self.vars);
        let one = pool.bv_const(1, 1u32);
        Ok(pool.eq(v, one))
    }

    fn bv_expr(&mut self, pool: &mut ExprPool, expect: Option<u32>) -> Result<ExprId, SpecError> {
        let e = self.parse_rtl_expr(expect)?;
        Ok(lower(pool, &e, &self.vars))
    }
}

/// Lower a width-annotated expression over spec variables into a term.
fn lower(pool: &mut ExprPool, e: &RtlExpr, vars: &IndexMap<String, u32>) -> ExprId {
    match &e.kind {
        RtlExprKind::Literal { value, .. } => pool.bv_const(e.width, value.clone()),
        RtlExprKind::Word(n) => match n.as_str() {
            "true" => pool.bv_const(1, 1u32),
            "false" => pool.bv_const(1, 0u32),
            _ => pool.bv_var(n, e.width),
        },
        RtlExprKind::Slice { word, hi, lo } => {
            let v = pool.bv_var(word, vars[word.as_str()]);
            pool.extract(*hi, *lo, v)
        }
        RtlExprKind::ArrayRead { .. } => {
            unreachable!("spec variables are plain words, array reads cannot parse")
        }
        RtlExprKind::Not(x) => {
            let v = lower(pool, x, vars);
            pool.bvnot(v)
        }
        RtlExprKind::Binary { op, lhs, rhs } => {
            let a = lower(pool, lhs, vars);
            let b = lower(pool, rhs, vars);
            match op {
                RtlBinOp::Add => pool.add(a, b),
                RtlBinOp::Sub => pool.sub(a, b),
                RtlBinOp::Mul => pool.mul(a, b),
                RtlBinOp::Div => pool.udiv(a, b),
                RtlBinOp::Rem => pool.urem(a, b),
                RtlBinOp::And => pool.bvand(a, b),
                RtlBinOp::Or => pool.bvor(a, b),
                RtlBinOp::Xor => pool.bvxor(a, b),
                RtlBinOp::Shl | RtlBinOp::Shr => {
                    let d = pool.zext(b, lhs.width - rhs.width);
                    if *op == RtlBinOp::Shl {
                        pool.shl(a, d)
                    } else {
                        pool.lshr(a, d)
                    }
                }
                RtlBinOp::Eq | RtlBinOp::Ult | RtlBinOp::Ule => {
                    let c = match op {
                        RtlBinOp::Eq => pool.eq(a, b),
                        RtlBinOp::Ult => pool.ult(a, b),
                        _ => pool.ule(a, b),
                    };
                    let one = pool.bv_const(1, 1u32);
                    let zero = pool.bv_const(1, 0u32);
                    pool.ite(c, one, zero)
                }
            }
        }
        RtlExprKind::Cond { cond, then, els } => {
            let c = lower(pool, cond, vars);
            let one = pool.bv_const(1, 1u32);
            let cb = pool.eq(c, one);
            let t = lower(pool, then, vars);
            let f = lower(pool, els, vars);
            pool.ite(cb, t, f)
        }
        RtlExprKind::Concat(parts) => {
            let vs: Vec<ExprId> = parts.iter().map(|p| lower(pool, p, vars)).collect();
            pool.concat(&vs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{elaborate, parse};

    fn el() -> Elaborated {
        elaborate(&parse("input a:8; input en:1; reg r:8 = 0; r <= en == 1'd1 ? a : r;").unwrap())
            .unwrap()
    }

    #[test]
    fn parses_tuples_and_constr() {
        let el = el();
        let mut pool = ExprPool::new();
        let s = parse_spec(
            "var X:8; var M:1; constr X < 8'd100; \
             ant (M == 1'd1) a = X @ [0,2); \
             ant (true) en = 1'd1 @ [0,2); \
             cons (M == 1'd1) r[7:0] = X @ [1,3);",
            &el,
            &mut pool,
        )
        .unwrap();
        assert_eq!(s.vars.len(), 2);
        assert_eq!(s.antecedents.len(), 2);
        assert_eq!(s.consequents.len(), 1);
        assert_eq!(s.antecedents[0].start, 0);
        assert_eq!(s.antecedents[0].end, 2);
        assert_eq!(s.max_end(), 3);
    }

    #[test]
    fn rejects_empty_interval_and_unknown_names() {
        let el = el();
        let mut pool = ExprPool::new();
        assert!(parse_spec("ant (true) a = 8'd1 @ [2,2);", &el, &mut pool)
            .unwrap_err()
            .to_string()
            .contains("empty"));
        assert!(parse_spec("ant (true) ghost = 8'd1 @ [0,1);", &el, &mut pool)
            .unwrap_err()
            .to_string()
            .contains("not a word"));
        // design words are not in scope inside value expressions
        assert!(parse_spec("ant (true) a = r @ [0,1);", &el, &mut pool).is_err());
    }

    #[test]
    fn guard_expressions_use_spec_vars_only() {
        let el = el();
        let mut pool = ExprPool::new();
        let s = parse_spec(
            "var X:8; ant ((X < 8'd4) | (X == 8'd9)) a = X + 8'd1 @ [0,1);",
            &el,
            &mut pool,
        )
        .unwrap();
        let fv = pool.free_vars(s.antecedents[0].guard);
        assert_eq!(fv.len(), 1);
        assert_eq!(fv.iter().next().unwrap().0, "X");
    }
}
