//! Shared tokenizer for the design language and the property file format.
//!
//! `//` comments run to end of line. Numbers come in three shapes: plain
//! decimal (`42`), prefixed binary/hex (`0b1010`, `0xff`), and sized
//! Verilog-style literals (`8'd255`, `4'b0110`, `16'habcd`).

use num_bigint::BigUint;
use num_traits::Num;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Loc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number { value: BigUint, width: Option<u32> },
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Semi,
    Colon,
    Comma,
    Question,
    Assign,   // =
    SeqAssign, // <=  (doubles as unsigned <= inside expressions)
    EqEq,
    Lt,
    Shl,
    Shr,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Amp,
    Pipe,
    Caret,
    Tilde,
    AmpAmp,
    PipePipe,
    Bang,
    At,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Number { value, .. } => write!(f, "number {value}"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::LBrack => write!(f, "'['"),
            Tok::RBrack => write!(f, "']'"),
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::Semi => write!(f, "';'"),
            Tok::Colon => write!(f, "':'"),
            Tok::Comma => write!(f, "','"),
            Tok::Question => write!(f, "'?'"),
            Tok::Assign => write!(f, "'='"),
            Tok::SeqAssign => write!(f, "'<='"),
            Tok::EqEq => write!(f, "'=='"),
            Tok::Lt => write!(f, "'<'"),
            Tok::Shl => write!(f, "'<<'"),
            Tok::Shr => write!(f, "'>>'"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::Percent => write!(f, "'%'"),
            Tok::Amp => write!(f, "'&'"),
            Tok::Pipe => write!(f, "'|'"),
            Tok::Caret => write!(f, "'^'"),
            Tok::Tilde => write!(f, "'~'"),
            Tok::AmpAmp => write!(f, "'&&'"),
            Tok::PipePipe => write!(f, "'||'"),
            Tok::Bang => write!(f, "'!'"),
            Tok::At => write!(f, "'@'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, Error)]
#[error("{loc}: {msg}")]
pub struct LexError {
    pub loc: Loc,
    pub msg: String,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub loc: Loc,
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;
    let err = |line, col, msg: String| LexError { loc: Loc { line, col }, msg };
    while i < chars.len() {
        let c = chars[i];
        let loc = Loc { line, col };
        let advance = |i: &mut usize, col: &mut u32, n: usize| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(&mut i, &mut col, 1),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                out.push(Spanned { tok: Tok::Ident(s), loc });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                if i < chars.len() && chars[i] == '\'' {
                    // sized literal: width 'base digits
                    let width: u32 = digits
                        .parse()
                        .map_err(|_| err(loc.line, loc.col, format!("bad width '{digits}'")))?;
                    i += 1;
                    col += 1;
                    let base = match chars.get(i) {
                        Some('d') => 10,
                        Some('b') => 2,
                        Some('h') => 16,
                        other => {
                            return Err(err(
                                line,
                                col,
                                format!("expected literal base d/b/h, got {other:?}"),
                            ))
                        }
                    };
                    i += 1;
                    col += 1;
                    let vstart = i;
                    while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let vdigits: String = chars[vstart..i].iter().collect();
                    col += (i - vstart) as u32;
                    let value = BigUint::from_str_radix(&vdigits, base).map_err(|_| {
                        err(loc.line, loc.col, format!("bad base-{base} digits '{vdigits}'"))
                    })?;
                    if value.bits() > u64::from(width) {
                        return Err(err(
                            loc.line,
                            loc.col,
                            format!("literal {vdigits} does not fit in {width} bits"),
                        ));
                    }
                    out.push(Spanned { tok: Tok::Number { value, width: Some(width) }, loc });
                } else if digits == "0"
                    && i < chars.len()
                    && (chars[i] == 'b' || chars[i] == 'x')
                {
                    let base = if chars[i] == 'b' { 2 } else { 16 };
                    i += 1;
                    col += 1;
                    let vstart = i;
                    while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let vdigits: String = chars[vstart..i].iter().collect();
                    col += (i - vstart) as u32;
                    let value = BigUint::from_str_radix(&vdigits, base).map_err(|_| {
                        err(loc.line, loc.col, format!("bad base-{base} digits '{vdigits}'"))
                    })?;
                    out.push(Spanned { tok: Tok::Number { value, width: None }, loc });
                } else {
                    let value = BigUint::from_str_radix(&digits, 10).unwrap();
                    out.push(Spanned { tok: Tok::Number { value, width: None }, loc });
                }
            }
            _ => {
                let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let (tok, n) = match two.as_str() {
                    "<=" => (Tok::SeqAssign, 2),
                    "==" => (Tok::EqEq, 2),
                    "<<" => (Tok::Shl, 2),
                    ">>" => (Tok::Shr, 2),
                    "&&" => (Tok::AmpAmp, 2),
                    "||" => (Tok::PipePipe, 2),
                    _ => match c {
                        '(' => (Tok::LParen, 1),
                        ')' => (Tok::RParen, 1),
                        '[' => (Tok::LBrack, 1),
                        ']' => (Tok::RBrack, 1),
                        '{' => (Tok::LBrace, 1),
                        '}' => (Tok::RBrace, 1),
                        ';' => (Tok::Semi, 1),
                        ':' => (Tok::Colon, 1),
                        ',' => (Tok::Comma, 1),
                        '?' => (Tok::Question, 1),
                        '=' => (Tok::Assign, 1),
                        '<' => (Tok::Lt, 1),
                        '+' => (Tok::Plus, 1),
                        '-' => (Tok::Minus, 1),
                        '*' => (Tok::Star, 1),
                        '/' => (Tok::Slash, 1),
                        '%' => (Tok::Percent, 1),
                        '&' => (Tok::Amp, 1),
                        '|' => (Tok::Pipe, 1),
                        '^' => (Tok::Caret, 1),
                        '~' => (Tok::Tilde, 1),
                        '!' => (Tok::Bang, 1),
                        '@' => (Tok::At, 1),
                        other => {
                            return Err(err(line, col, format!("unexpected character '{other}'")))
                        }
                    },
                };
                out.push(Spanned { tok, loc });
                advance(&mut i, &mut col, n);
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, loc: Loc { line, col } });
    Ok(out)
}

/// Cursor over a token stream with one-token lookahead helpers.
pub struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Spanned>) -> Self {
        Self { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    pub fn loc(&self) -> Loc {
        self.toks[self.pos].loc
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}
