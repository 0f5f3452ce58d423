//! S-expression reader.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l) => Some(l),
            _ => None,
        }
    }
}

pub fn parse_all(src: &str) -> Result<Vec<SExpr>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks: Vec<String> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => i += 1,
            '(' | ')' => {
                toks.push(chars[i].to_string());
                i += 1;
            }
            '|' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err("unterminated quoted symbol".into());
                }
                i += 1;
                toks.push(chars[start + 1..i - 1].iter().collect());
            }
            _ => {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !"();".contains(chars[i])
                {
                    i += 1;
                }
                toks.push(chars[start..i].iter().collect());
            }
        }
    }
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < toks.len() {
        let (e, next) = parse_one(&toks, pos)?;
        out.push(e);
        pos = next;
    }
    Ok(out)
}

fn parse_one(toks: &[String], pos: usize) -> Result<(SExpr, usize), String> {
    match toks.get(pos).map(String::as_str) {
        None => Err("unexpected end of input".into()),
        Some("(") => {
            let mut items = Vec::new();
            let mut p = pos + 1;
            loop {
                match toks.get(p).map(String::as_str) {
                    None => return Err("unbalanced parentheses".into()),
                    Some(")") => return Ok((SExpr::List(items), p + 1)),
                    Some(_) => {
                        let (e, next) = parse_one(toks, p)?;
                        items.push(e);
                        p = next;
                    }
                }
            }
        }
        Some(")") => Err("unexpected ')'".into()),
        Some(a) => Ok((SExpr::Atom(a.to_string()), pos + 1)),
    }
}
