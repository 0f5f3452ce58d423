//! Minimal s-expression reader for solver output.

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

/// Parse every top-level s-expression in the input; comments (`;` to end of
/// line) and stray atoms are tolerated.
pub fn parse_all(src: &str) -> Vec<SExpr> {
    let mut toks = Vec::new();
    let chars: Vec<char> = src.chars().collect();
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
                i += 1;
                toks.push(chars[start..i.min(chars.len())].iter().collect());
            }
            '"' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                i += 1;
                toks.push(chars[start..i.min(chars.len())].iter().collect());
            }
            _ => {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && chars[i] != '('
                    && chars[i] != ')'
                    && chars[i] != ';'
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
        if let Some((e, next)) = parse_one(&toks, pos) {
            out.push(e);
            pos = next;
        } else {
            pos += 1;
        }
    }
    out
}

fn parse_one(toks: &[String], pos: usize) -> Option<(SExpr, usize)> {
    match toks.get(pos)?.as_str() {
        "(" => {
            let mut items = Vec::new();
            let mut p = pos + 1;
            loop {
                match toks.get(p)?.as_str() {
                    ")" => return Some((SExpr::List(items), p + 1)),
                    _ => {
                        let (e, next) = parse_one(toks, p)?;
                        items.push(e);
                        p = next;
                    }
                }
            }
        }
        ")" => None,
        a => Some((SExpr::Atom(strip_pipes(a)), pos + 1)),
    }
}

fn strip_pipes(s: &str) -> String {
    if s.len() >= 2 && s.starts_with('|') && s.ends_with('|') {
        s[1..s.len() - 1].to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_shapes() {
        let out = parse_all(
            "sat\n(\n  (define-fun x () (_ BitVec 4) #xa)\n  (define-fun b () Bool true)\n)\n",
        );
        assert_eq!(out[0], SExpr::Atom("sat".into()));
        let model = out[1].list().unwrap();
        assert_eq!(model.len(), 2);
        assert_eq!(model[0].list().unwrap()[1].atom(), Some("x"));
    }

    #[test]
    fn tolerates_comments_and_quotes() {
        let out = parse_all("; hi\n(a |quo ted| \"str\")");
        let l = out[0].list().unwrap();
        assert_eq!(l[1].atom(), Some("quo ted"));
    }
}
