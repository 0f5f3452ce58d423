//! Hand-written recursive-descent parser for WDL.

use super::*;
use crate::lex::{tokenize, Cursor, Loc, Tok};
use num_traits::ToPrimitive;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
#[error("{loc}: {msg}")]
pub struct ParseError {
    pub loc: Loc,
    pub msg: String,
}

fn perr(loc: Loc, msg: impl Into<String>) -> ParseError {
    ParseError { loc, msg: msg.into() }
}

struct Parser {
    cur: Cursor,
    design: Design,
    declared: HashSet<String>,
}

/// Parse one expression from a token stream against a caller-supplied symbol
/// check. The property-file parser reuses the design language's expression
/// grammar through this entry point.
pub(crate) fn parse_expression(
    cur: Cursor,
    declared: &HashSet<String>,
) -> Result<(RtlExpr, Cursor), ParseError> {
    let mut p = Parser {
        cur,
        design: Design {
            name: String::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wires: Vec::new(),
            registers: Vec::new(),
            arrays: Vec::new(),
            stmts: Vec::new(),
        },
        declared: declared.clone(),
    };
    let e = p.parse_expr()?;
    Ok((e, p.cur))
}

pub fn parse(src: &str) -> Result<Design, ParseError> {
    let toks = tokenize(src).map_err(|e| perr(e.loc, e.msg))?;
    let mut p = Parser {
        cur: Cursor::new(toks),
        design: Design {
            name: "top".into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wires: Vec::new(),
            registers: Vec::new(),
            arrays: Vec::new(),
            stmts: Vec::new(),
        },
        declared: HashSet::new(),
    };
    p.parse_design()?;
    Ok(p.design)
}

impl Parser {
    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.cur.peek() == &t {
            self.cur.bump();
            Ok(())
        } else {
            Err(perr(self.cur.loc(), format!("expected {t}, found {}", self.cur.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.cur.peek().clone() {
            Tok::Ident(s) => {
                self.cur.bump();
                Ok(s)
            }
            other => Err(perr(self.cur.loc(), format!("expected identifier, found {other}"))),
        }
    }

    fn number_u32(&mut self) -> Result<u32, ParseError> {
        let loc = self.cur.loc();
        match self.cur.peek().clone() {
            Tok::Number { value, width: None } => {
                self.cur.bump();
                value.to_u32().ok_or_else(|| perr(loc, "number too large"))
            }
            other => Err(perr(loc, format!("expected number, found {other}"))),
        }
    }

    fn width_decl(&mut self) -> Result<u32, ParseError> {
        let loc = self.cur.loc();
        let w = self.number_u32()?;
        if w == 0 {
            return Err(perr(loc, "width must be at least 1"));
        }
        Ok(w)
    }

    fn declare(&mut self, name: &str, loc: Loc) -> Result<(), ParseError> {
        if !self.declared.insert(name.to_string()) {
            return Err(perr(loc, format!("duplicate declaration of '{name}'")));
        }
        Ok(())
    }

    fn check_declared(&self, name: &str, loc: Loc) -> Result<(), ParseError> {
        if !self.declared.contains(name) {
            return Err(perr(loc, format!("use of undeclared name '{name}'")));
        }
        Ok(())
    }

    fn parse_design(&mut self) -> Result<(), ParseError> {
        if let Tok::Ident(kw) = self.cur.peek() {
            if kw == "design" {
                self.cur.bump();
                self.design.name = self.ident()?;
                self.expect(Tok::Semi)?;
            }
        }
        while !self.cur.at_eof() {
            let stmt = self.parse_stmt()?;
            if let Some(s) = stmt {
                self.design.stmts.push(s);
            }
        }
        Ok(())
    }

    /// One top-level item; declarations return `None`.
    fn parse_stmt(&mut self) -> Result<Option<Stmt>, ParseError> {
        let loc = self.cur.loc();
        match self.cur.peek().clone() {
            Tok::Ident(kw) => match kw.as_str() {
                "input" => {
                    self.cur.bump();
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let w = self.width_decl()?;
                    self.expect(Tok::Semi)?;
                    self.declare(&name, loc)?;
                    self.design.inputs.push((name, w));
                    Ok(None)
                }
                "output" => {
                    self.cur.bump();
                    let name = self.ident()?;
                    if self.cur.eat(&Tok::Colon) {
                        // `output w:8;` declares a wire and marks it
                        let w = self.width_decl()?;
                        self.declare(&name, loc)?;
                        self.design.wires.push((name.clone(), w));
                    } else {
                        self.check_declared(&name, loc)?;
                    }
                    self.expect(Tok::Semi)?;
                    self.design.outputs.push(name);
                    Ok(None)
                }
                "wire" => {
                    self.cur.bump();
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let w = self.width_decl()?;
                    self.expect(Tok::Semi)?;
                    self.declare(&name, loc)?;
                    self.design.wires.push((name, w));
                    Ok(None)
                }
                "reg" => {
                    self.cur.bump();
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let w = self.width_decl()?;
                    let init = if self.cur.eat(&Tok::Assign) {
                        let iloc = self.cur.loc();
                        match self.cur.bump() {
                            Tok::Number { value, width } => {
                                if let Some(lw) = width {
                                    if lw != w {
                                        return Err(perr(
                                            iloc,
                                            format!("init literal width {lw} != register width {w}"),
                                        ));
                                    }
                                }
                                if value.bits() > u64::from(w) {
                                    return Err(perr(iloc, "init value does not fit register"));
                                }
                                Some(value)
                            }
                            other => {
                                return Err(perr(iloc, format!("expected init constant, found {other}")))
                            }
                        }
                    } else {
                        None
                    };
                    self.expect(Tok::Semi)?;
                    self.declare(&name, loc)?;
                    self.design.registers.push(RegDecl { name, width: w, init, loc });
                    Ok(None)
                }
                "array" => {
                    self.cur.bump();
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    self.expect(Tok::LBrack)?;
                    let iw0 = self.width_decl()?;
                    self.expect(Tok::RBrack)?;
                    let mut index_widths = vec![iw0];
                    if self.cur.eat(&Tok::LBrack) {
                        index_widths.push(self.width_decl()?);
                        self.expect(Tok::RBrack)?;
                    }
                    let ew = self.width_decl()?;
                    let initialized = if let Tok::Ident(k) = self.cur.peek() {
                        if k == "uninit" {
                            self.cur.bump();
                            false
                        } else {
                            true
                        }
                    } else {
                        true
                    };
                    self.expect(Tok::Semi)?;
                    self.declare(&name, loc)?;
                    self.design.arrays.push(ArrayDecl {
                        name,
                        index_widths,
                        elem_width: ew,
                        initialized,
                        loc,
                    });
                    Ok(None)
                }
                "if" => Ok(Some(self.parse_if()?)),
                _ => Ok(Some(self.parse_assign()?)),
            },
            other => Err(perr(loc, format!("expected statement, found {other}"))),
        }
    }

    fn parse_if(&mut self) -> Result<Stmt, ParseError> {
        let loc = self.cur.loc();
        self.cur.bump(); // if
        self.expect(Tok::LParen)?;
        let cond = self.parse_expr()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut then = Vec::new();
        while !self.cur.eat(&Tok::RBrace) {
            if self.cur.at_eof() {
                return Err(perr(self.cur.loc(), "unterminated if block"));
            }
            match self.parse_stmt()? {
                Some(s) => then.push(s),
                None => return Err(perr(loc, "declarations are not allowed inside if blocks")),
            }
        }
        let mut els = Vec::new();
        if let Tok::Ident(kw) = self.cur.peek() {
            if kw == "else" {
                self.cur.bump();
                self.expect(Tok::LBrace)?;
                while !self.cur.eat(&Tok::RBrace) {
                    if self.cur.at_eof() {
                        return Err(perr(self.cur.loc(), "unterminated else block"));
                    }
                    match self.parse_stmt()? {
                        Some(s) => els.push(s),
                        None => {
                            return Err(perr(loc, "declarations are not allowed inside if blocks"))
                        }
                    }
                }
            }
        }
        Ok(Stmt::If { cond, then, els, loc })
    }

    fn parse_assign(&mut self) -> Result<Stmt, ParseError> {
        let loc = self.cur.loc();
        let name = self.ident()?;
        self.check_declared(&name, loc)?;
        let lhs = if self.cur.eat(&Tok::LBrack) {
            // slice lvalue `w[q:p]` or array element `A[expr]`
            if matches!(self.cur.peek(), Tok::Number { width: None, .. })
                && self.cur.peek2() == &Tok::Colon
            {
                let hi = self.number_u32()?;
                self.expect(Tok::Colon)?;
                let lo = self.number_u32()?;
                self.expect(Tok::RBrack)?;
                if lo > hi {
                    return Err(perr(loc, format!("slice [{hi}:{lo}] has hi < lo")));
                }
                LValue::Slice { word: name, hi, lo }
            } else {
                let mut indices = vec![self.parse_expr()?];
                self.expect(Tok::RBrack)?;
                if self.cur.eat(&Tok::LBrack) {
                    indices.push(self.parse_expr()?);
                    self.expect(Tok::RBrack)?;
                }
                LValue::ArrayElem { array: name, indices }
            }
        } else {
            LValue::Word(name)
        };
        let seq = match self.cur.bump() {
            Tok::Assign => false,
            Tok::SeqAssign => true,
            other => return Err(perr(loc, format!("expected '=' or '<=', found {other}"))),
        };
        let rhs = self.parse_expr()?;
        self.expect(Tok::Semi)?;
        let a = Assign { lhs, rhs, loc };
        Ok(if seq { Stmt::Seq(a) } else { Stmt::Comb(a) })
    }

    // Precedence, loosest first: ?:  |  ^  &  ==  < <=  << >>  + -  * / %  ~
    fn parse_expr(&mut self) -> Result<RtlExpr, ParseError> {
        let loc = self.cur.loc();
        let cond = self.parse_bitor()?;
        if self.cur.eat(&Tok::Question) {
            let then = self.parse_expr()?;
            self.expect(Tok::Colon)?;
            let els = self.parse_expr()?;
            Ok(RtlExpr::new(
                RtlExprKind::Cond {
                    cond: Box::new(cond),
                    then: Box::new(then),
                    els: Box::new(els),
                },
                loc,
            ))
        } else {
            Ok(cond)
        }
    }

    fn binary_chain(
        &mut self,
        ops: &[(Tok, RtlBinOp)],
        next: fn(&mut Self) -> Result<RtlExpr, ParseError>,
    ) -> Result<RtlExpr, ParseError> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, op) in ops {
                if self.cur.peek() == tok {
                    let loc = self.cur.loc();
                    self.cur.bump();
                    let rhs = next(self)?;
                    lhs = RtlExpr::new(
                        RtlExprKind::Binary { op: *op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                        loc,
                    );
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn parse_bitor(&mut self) -> Result<RtlExpr, ParseError> {
        self.binary_chain(&[(Tok::Pipe, RtlBinOp::Or)], Self::parse_bitxor)
    }

    fn parse_bitxor(&mut self) -> Result<RtlExpr, ParseError> {
        self.binary_chain(&[(Tok::Caret, RtlBinOp::Xor)], Self::parse_bitand)
    }

    fn parse_bitand(&mut self) -> Result<RtlExpr, ParseError> {
        self.binary_chain(&[(Tok::Amp, RtlBinOp::And)], Self::parse_cmp_eq)
    }

    fn parse_cmp_eq(&mut self) -> Result<RtlExpr, ParseError> {
        // non-associative comparisons
        let lhs = self.parse_cmp_rel()?;
        if self.cur.peek() == &Tok::EqEq {
            let loc = self.cur.loc();
            self.cur.bump();
            let rhs = self.parse_cmp_rel()?;
            return Ok(RtlExpr::new(
                RtlExprKind::Binary { op: RtlBinOp::Eq, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                loc,
            ));
        }
        Ok(lhs)
    }

    fn parse_cmp_rel(&mut self) -> Result<RtlExpr, ParseError> {
        let lhs = self.parse_shift()?;
        let op = match self.cur.peek() {
            Tok::Lt => Some(RtlBinOp::Ult),
            Tok::SeqAssign => Some(RtlBinOp::Ule), // `<=` inside an expression
            _ => None,
        };
        if let Some(op) = op {
            let loc = self.cur.loc();
            self.cur.bump();
            let rhs = self.parse_shift()?;
            return Ok(RtlExpr::new(
                RtlExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                loc,
            ));
        }
        Ok(lhs)
    }

    fn parse_shift(&mut self) -> Result<RtlExpr, ParseError> {
        self.binary_chain(
            &[(Tok::Shl, RtlBinOp::Shl), (Tok::Shr, RtlBinOp::Shr)],
            Self::parse_addsub,
        )
    }

    fn parse_addsub(&mut self) -> Result<RtlExpr, ParseError> {
        self.binary_chain(
            &[(Tok::Plus, RtlBinOp::Add), (Tok::Minus, RtlBinOp::Sub)],
            Self::parse_muldiv,
        )
    }

    fn parse_muldiv(&mut self) -> Result<RtlExpr, ParseError> {
        self.binary_chain(
            &[
                (Tok::Star, RtlBinOp::Mul),
                (Tok::Slash, RtlBinOp::Div),
                (Tok::Percent, RtlBinOp::Rem),
            ],
            Self::parse_unary,
        )
    }

    fn parse_unary(&mut self) -> Result<RtlExpr, ParseError> {
        let loc = self.cur.loc();
        if self.cur.eat(&Tok::Tilde) {
            let e = self.parse_unary()?;
            return Ok(RtlExpr::new(RtlExprKind::Not(Box::new(e)), loc));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<RtlExpr, ParseError> {
        let loc = self.cur.loc();
        match self.cur.peek().clone() {
            Tok::Number { value, width } => {
                self.cur.bump();
                Ok(RtlExpr::new(RtlExprKind::Literal { value, width }, loc))
            }
            Tok::LParen => {
                self.cur.bump();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.cur.bump();
                let mut parts = vec![self.parse_expr()?];
                while self.cur.eat(&Tok::Comma) {
                    parts.push(self.parse_expr()?);
                }
                self.expect(Tok::RBrace)?;
                Ok(RtlExpr::new(RtlExprKind::Concat(parts), loc))
            }
            Tok::Ident(name) => {
                self.cur.bump();
                self.check_declared(&name, loc)?;
                if self.cur.eat(&Tok::LBrack) {
                    if matches!(self.cur.peek(), Tok::Number { width: None, .. })
                        && self.cur.peek2() == &Tok::Colon
                    {
                        let hi = self.number_u32()?;
                        self.expect(Tok::Colon)?;
                        let lo = self.number_u32()?;
                        self.expect(Tok::RBrack)?;
                        if lo > hi {
                            return Err(perr(loc, format!("slice [{hi}:{lo}] has hi < lo")));
                        }
                        Ok(RtlExpr::new(RtlExprKind::Slice { word: name, hi, lo }, loc))
                    } else {
                        let mut indices = vec![self.parse_expr()?];
                        self.expect(Tok::RBrack)?;
                        if self.cur.eat(&Tok::LBrack) {
                            indices.push(self.parse_expr()?);
                            self.expect(Tok::RBrack)?;
                        }
                        Ok(RtlExpr::new(RtlExprKind::ArrayRead { array: name, indices }, loc))
                    }
                } else {
                    Ok(RtlExpr::new(RtlExprKind::Word(name), loc))
                }
            }
            other => Err(perr(loc, format!("expected expression, found {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_design() {
        let d = parse("input a:8; input b:8; reg s:8=0; s <= a + b;").unwrap();
        assert_eq!(d.inputs.len(), 2);
        assert_eq!(d.registers.len(), 1);
        assert_eq!(d.stmts.len(), 1);
        assert!(matches!(d.stmts[0], Stmt::Seq(_)));
    }

    #[test]
    fn parses_slice_assign_fragment() {
        // the classic sliced-add fragment
        let d = parse(
            "input a:16; input b:8; wire c:8; c[4:1] = a[10:7] + b[5:2];",
        )
        .unwrap();
        let Stmt::Comb(a) = &d.stmts[0] else { panic!() };
        assert_eq!(a.lhs, LValue::Slice { word: "c".into(), hi: 4, lo: 1 });
    }

    #[test]
    fn syntax_error_carries_location() {
        let e = parse("input a:8; wire c:8; c = a +").unwrap_err();
        assert!(e.to_string().contains("expected expression"), "{e}");
        assert_eq!(e.loc.line, 1);
    }

    #[test]
    fn duplicate_and_undeclared() {
        assert!(parse("input a:8; wire a:4;").unwrap_err().to_string().contains("duplicate"));
        assert!(parse("wire c:8; c = a;").unwrap_err().to_string().contains("undeclared"));
    }

    #[test]
    fn parses_if_else_and_arrays() {
        let d = parse(
            "input en:1; input x:8; reg r:8; array m:[2]8 uninit; \
             if (en) { r <= x; m[x[1:0]] <= x; } else { r <= r; }",
        )
        .unwrap();
        assert_eq!(d.arrays.len(), 1);
        assert!(!d.arrays[0].initialized);
        assert!(matches!(d.stmts[0], Stmt::If { .. }));
    }

    #[test]
    fn le_is_comparison_in_expressions() {
        let d = parse("input a:8; input b:8; wire c:1; c = a <= b;").unwrap();
        let Stmt::Comb(asgn) = &d.stmts[0] else { panic!() };
        assert!(matches!(
            asgn.rhs.kind,
            RtlExprKind::Binary { op: RtlBinOp::Ule, .. }
        ));
    }
}
