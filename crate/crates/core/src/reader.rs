//! Tokenizer and operator-precedence reader for the Prolog-like surface
//! syntax shared by domain and program files.

use std::sync::Arc;

use crate::domain::Span;
use crate::term::{Sym, Term, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    Str(String),
    Open,
    /// `(` directly after a name: argument list.
    OpenCall,
    Close,
    LBrack,
    RBrack,
    Comma,
    Bar,
    End,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
}

fn err<T>(span: Span, message: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError { span, message: message.into() })
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, '/');
            advance(&mut i, &mut line, &mut col, '*');
            loop {
                if i >= chars.len() {
                    return err(span, "unterminated block comment");
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    break;
                }
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<i64>() {
                Ok(n) => Tok::Int(n),
                Err(_) => return err(span, format!("integer out of range: {text}")),
            }
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            let text: String = chars[start..i].iter().collect();
            if c.is_uppercase() || c == '_' {
                Tok::Var(text)
            } else {
                Tok::Atom(text)
            }
        } else if c == '\'' || c == '"' {
            let quote = c;
            advance(&mut i, &mut line, &mut col, c);
            let mut text = String::new();
            loop {
                match chars.get(i) {
                    None => return err(span, "unterminated quoted atom"),
                    Some(&'\\') => {
                        advance(&mut i, &mut line, &mut col, '\\');
                        match chars.get(i) {
                            Some(&ch) => {
                                text.push(match ch {
                                    'n' => '\n',
                                    't' => '\t',
                                    other => other,
                                });
                                advance(&mut i, &mut line, &mut col, ch);
                            }
                            None => return err(span, "unterminated quoted atom"),
                        }
                    }
                    Some(&ch) if ch == quote => {
                        advance(&mut i, &mut line, &mut col, ch);
                        break;
                    }
                    Some(&ch) => {
                        text.push(ch);
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            if quote == '"' {
                Tok::Str(text)
            } else {
                Tok::Atom(text)
            }
        } else if c == '(' {
            advance(&mut i, &mut line, &mut col, c);
            let glued = matches!(out.last(), Some(Token { tok: Tok::Atom(_), span: s }) if s.line == span.line && i >= 2 && !chars[i - 2].is_whitespace());
            if glued {
                Tok::OpenCall
            } else {
                Tok::Open
            }
        } else if c == ')' {
            advance(&mut i, &mut line, &mut col, c);
            Tok::Close
        } else if c == '[' {
            advance(&mut i, &mut line, &mut col, c);
            Tok::LBrack
        } else if c == ']' {
            advance(&mut i, &mut line, &mut col, c);
            Tok::RBrack
        } else if c == ',' {
            advance(&mut i, &mut line, &mut col, c);
            Tok::Comma
        } else if c == '|' {
            advance(&mut i, &mut line, &mut col, c);
            Tok::Bar
        } else if c == '!' || c == ';' {
            advance(&mut i, &mut line, &mut col, c);
            Tok::Atom(c.to_string())
        } else if c == '.' && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%') {
            advance(&mut i, &mut line, &mut col, c);
            Tok::End
        } else if SYMBOL_CHARS.contains(c) {
            while i < chars.len() && SYMBOL_CHARS.contains(chars[i]) {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            Tok::Atom(chars[start..i].iter().collect())
        } else {
            return err(span, format!("unexpected character {c:?}"));
        };
        out.push(Token { tok, span });
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

fn infix(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        ":-" => (1200, Assoc::Xfx),
        ";" => (1100, Assoc::Xfy),
        "," => (1000, Assoc::Xfy),
        "=" | "\\=" | "is" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" | "==" => (700, Assoc::Xfx),
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "//" | "mod" | "/" => (400, Assoc::Yfx),
        _ => return None,
    })
}

fn prefix(name: &str) -> Option<u32> {
    match name {
        ":-" => Some(1200),
        "-" => Some(200),
        _ => None,
    }
}

/// A clause-level term read from source, with its variable table.
#[derive(Clone, Debug)]
pub struct ReadTerm {
    pub term: Term,
    pub var_names: Vec<Sym>,
    pub span: Span,
}

struct Reader {
    toks: Vec<Token>,
    pos: usize,
    var_names: Vec<Sym>,
}

impl Reader {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            err(t.span, format!("expected {what}, found {}", describe(&t.tok)))
        }
    }

    fn variable(&mut self, name: &str) -> Term {
        if name == "_" {
            self.var_names.push(Arc::from("_"));
            return Term::Var(Var(self.var_names.len() as u32 - 1));
        }
        match self.var_names.iter().position(|n| &**n == name) {
            Some(i) => Term::Var(Var(i as u32)),
            None => {
                self.var_names.push(Arc::from(name));
                Term::Var(Var(self.var_names.len() as u32 - 1))
            }
        }
    }

    fn infix_op(&self) -> Option<(String, u32, Assoc)> {
        let name = match &self.peek().tok {
            Tok::Atom(a) => a.clone(),
            Tok::Comma => ",".to_string(),
            _ => return None,
        };
        infix(&name).map(|(p, a)| (name, p, a))
    }

    fn parse(&mut self, max: u32) -> Result<Term, SyntaxError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        while let Some((name, prec, assoc)) = self.infix_op() {
            if prec > max {
                break;
            }
            let left_max = if assoc == Assoc::Yfx { prec } else { prec - 1 };
            if left_prec > left_max {
                break;
            }
            self.next();
            let right_max = if assoc == Assoc::Xfy { prec } else { prec - 1 };
            let right = self.parse(right_max)?;
            left = Term::app(&name, vec![left, right]);
            left_prec = prec;
        }
        Ok(left)
    }

    fn args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = vec![self.parse(999)?];
        while self.peek().tok == Tok::Comma {
            self.next();
            args.push(self.parse(999)?);
        }
        self.expect(Tok::Close, "`)`")?;
        Ok(args)
    }

    fn primary(&mut self, max: u32) -> Result<(Term, u32), SyntaxError> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok((Term::Int(n), 0)),
            Tok::Var(name) => Ok((self.variable(&name), 0)),
            Tok::Str(s) => Ok((Term::atom(&s), 0)),
            Tok::Open => {
                let inner = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                Ok((inner, 0))
            }
            Tok::LBrack => {
                if self.peek().tok == Tok::RBrack {
                    self.next();
                    return self.after_name("[]".to_string());
                }
                let mut items = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    items.push(self.parse(999)?);
                }
                let tail = if self.peek().tok == Tok::Bar {
                    self.next();
                    self.parse(999)?
                } else {
                    Term::nil()
                };
                self.expect(Tok::RBrack, "`]`")?;
                Ok((Term::list_with_tail(items, tail), 0))
            }
            Tok::Atom(name) => {
                if self.peek().tok == Tok::OpenCall {
                    self.next();
                    let args = self.args()?;
                    return Ok((Term::app(&name, args), 0));
                }
                if name == "-" {
                    if let Tok::Int(n) = self.peek().tok {
                        let glued = self.peek().span.line == t.span.line && self.peek().span.col == t.span.col + 1;
                        if glued {
                            self.next();
                            return Ok((Term::Int(-n), 0));
                        }
                    }
                }
                if let Some(p) = prefix(&name) {
                    let operand_follows = !matches!(
                        self.peek().tok,
                        Tok::Close | Tok::RBrack | Tok::Comma | Tok::Bar | Tok::End | Tok::Eof
                    ) && self.infix_op().is_none_or(|(n, _, _)| n == "-");
                    if operand_follows {
                        let p = p.min(max);
                        let arg_max = if name == ":-" { p - 1 } else { p };
                        let arg = self.parse(arg_max)?;
                        return Ok((Term::app(&name, vec![arg]), p));
                    }
                }
                self.after_name(name)
            }
            other => err(t.span, format!("unexpected {}", describe(&other))),
        }
    }

    fn after_name(&mut self, name: String) -> Result<(Term, u32), SyntaxError> {
        Ok((Term::atom(&name), 0))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Atom(a) => format!("`{a}`"),
        Tok::Var(v) => format!("variable `{v}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Open | Tok::OpenCall => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::LBrack => "`[`".into(),
        Tok::RBrack => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Bar => "`|`".into(),
        Tok::End => "end of clause".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Read every `.`-terminated clause term of `src`.
pub fn read_clauses(src: &str) -> Result<Vec<ReadTerm>, SyntaxError> {
    let toks = tokenize(src)?;
    let mut r = Reader { toks, pos: 0, var_names: Vec::new() };
    let mut out = Vec::new();
    while r.peek().tok != Tok::Eof {
        r.var_names.clear();
        let span = r.peek().span;
        let term = r.parse(1200)?;
        r.expect(Tok::End, "`.` ending the clause")?;
        out.push(ReadTerm { term, var_names: std::mem::take(&mut r.var_names), span });
    }
    Ok(out)
}

/// Read a single term (no terminating `.` required).
pub fn read_term(src: &str) -> Result<ReadTerm, SyntaxError> {
    let toks = tokenize(src)?;
    let mut r = Reader { toks, pos: 0, var_names: Vec::new() };
    let span = r.peek().span;
    let term = r.parse(1200)?;
    if r.peek().tok == Tok::End {
        r.next();
    }
    if r.peek().tok != Tok::Eof {
        let t = r.peek().clone();
        return err(t.span, format!("unexpected {} after term", describe(&t.tok)));
    }
    Ok(ReadTerm { term, var_names: r.var_names, span })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Term {
        read_term(s).unwrap().term
    }

    #[test]
    fn reads_compound_and_lists() {
        assert_eq!(read("at(agent, 1)"), Term::app("at", vec![Term::atom("agent"), Term::Int(1)]));
        assert_eq!(read("[a, b | T]").to_string(), "[a,b|_G0]");
        assert_eq!(read("[]"), Term::nil());
    }

    #[test]
    fn prefix_minus_is_negation() {
        let t = read("-at(agent, X)");
        assert_eq!(t.name(), Some("-"));
        assert_eq!(t.args().len(), 1);
        assert_eq!(read("-3"), Term::Int(-3));
    }

    #[test]
    fn minus_chain_is_left_associative() {
        // ((X-true)-Index)-Meaning
        let t = read("X-true-[i]-[m]");
        assert_eq!(t.name(), Some("-"));
        assert_eq!(t.args()[1], Term::list(vec![Term::atom("m")]));
        let inner = &t.args()[0];
        assert_eq!(inner.args()[1], Term::list(vec![Term::atom("i")]));
        assert_eq!(inner.args()[0].args()[1], Term::atom("true"));
    }

    #[test]
    fn clause_with_body_and_arith() {
        let cs = read_clauses("adj(X, Y) :- Y is X + 1, Y =< 5.\n% comment\nfoo.").unwrap();
        assert_eq!(cs.len(), 2);
        let c = &cs[0].term;
        assert_eq!(c.name(), Some(":-"));
        assert_eq!(c.args()[1].name(), Some(","));
        assert_eq!(cs[0].var_names.len(), 2);
        assert_eq!(cs[1].span.line, 3);
    }

    #[test]
    fn query_symbol_and_cut() {
        let cs = read_clauses("p :- ?(at(agent, X)), !, do(go(X)).").unwrap();
        let body = &cs[0].term.args()[1];
        assert_eq!(body.args()[0].name(), Some("?"));
        assert_eq!(body.args()[1].args()[0], Term::atom("!"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = read_clauses("p :- q(\n  a b).").unwrap_err();
        assert_eq!(e.span.line, 2);
        assert!(read_clauses("p(a").is_err());
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let t = read_term("f(_, _)").unwrap();
        assert_eq!(t.var_names.len(), 2);
        assert_ne!(t.term.args()[0], t.term.args()[1]);
    }
}
