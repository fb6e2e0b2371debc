//! Recursive-descent parser for defining-function expressions.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ('^' '-'? integer)?
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! func   := re | im | abs2 | conj | log
//! number := decimal, optional exponent, optional trailing 'i'
//! ```

use std::collections::BTreeSet;

use num_complex::Complex64;

use super::expr::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Complex64),
    Ident(String),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let value: f64 = text[start..i].parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{}`", &text[start..i]),
                })?;
                let imaginary = i < bytes.len()
                    && bytes[i] == b'i'
                    && !bytes
                        .get(i + 1)
                        .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_');
                if imaginary {
                    i += 1;
                    out.push((Tok::Num(Complex64::new(0.0, value)), start));
                } else {
                    out.push((Tok::Num(Complex64::new(value, 0.0)), start));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!(
                        "unexpected character `{}`",
                        text[start..].chars().next().unwrap()
                    ),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    params: &'a BTreeSet<String>,
    open: Vec<usize>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> Error {
        match self.peek() {
            // at end of input, point at the innermost unclosed parenthesis
            Tok::End => Error::Syntax {
                offset: self.open.last().copied().unwrap_or(self.offset()),
                message: format!("unexpected end of input, expected {what}"),
            },
            t => Error::Syntax {
                offset: self.offset(),
                message: format!("unexpected {t:?}, expected {what}"),
            },
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) if v.im == 0.0 && v.re.fract() == 0.0 && v.re.abs() < 1e6 => {
                let k = v.re as i64;
                Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }))
            }
            Tok::End => Err(self.unexpected("integer exponent")),
            _ => Err(Error::Syntax {
                offset: at,
                message: "exponent must be an integer".into(),
            }),
        }
    }

    fn group(&mut self) -> Result<Expr> {
        let at = self.offset();
        if *self.peek() != Tok::LParen {
            return Err(self.unexpected("`(`"));
        }
        self.bump();
        self.open.push(at);
        let inner = self.expr()?;
        if *self.peek() != Tok::RParen {
            return Err(self.unexpected("`)`"));
        }
        self.bump();
        self.open.pop();
        Ok(inner)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => self.group(),
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    let arg = self.group()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(j) = coordinate_index(&name) {
                    if j < self.dim {
                        return Ok(Expr::Var(j));
                    }
                }
                if self.params.contains(&name) {
                    return Ok(Expr::Param(name));
                }
                Err(Error::UnknownIdentifier { name, offset: at })
            }
            _ => Err(self.unexpected("a number, identifier or `(`")),
        }
    }
}

/// `z1`..`z9` map to coordinate indices 0..8.
fn coordinate_index(name: &str) -> Option<usize> {
    let b = name.as_bytes();
    if b.len() == 2 && b[0] == b'z' && (b'1'..=b'9').contains(&b[1]) {
        Some((b[1] - b'1') as usize)
    } else {
        None
    }
}

pub fn parse(text: &str, dim: usize, params: &BTreeSet<String>) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        dim,
        params,
        open: Vec::new(),
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::RParen => Err(Error::Syntax {
            offset: p.offset(),
            message: "unmatched `)`".into(),
        }),
        _ => Err(p.unexpected("operator or end of input")),
    }
}
