//! Text expressions for scalars and coefficient functions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term { ("+" | "-") term }
//! term    := unary { ("*" | "/") unary }
//! unary   := ("-" | "+") unary | postfix
//! postfix := atom [ "^" [ "-" ] integer ]
//! atom    := integer | identifier | "(" expr ")"
//! ```
//!
//! `i` and `pi` are reserved; every other identifier must appear in the
//! caller's declared-symbol set. Evaluation happens directly over [`RatFn`],
//! so division is exact and a zero denominator is reported as such.

use super::coefffn::CoeffFn;
use super::ratfn::RatFn;
use super::scalar::Scalar;
use super::symbols::Symbol;
use crate::Error;
use num::BigInt;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, Error> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut advance = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            advance(&mut chars);
            continue;
        }
        let tok = match c {
            '+' => {
                advance(&mut chars);
                Tok::Plus
            }
            '-' => {
                advance(&mut chars);
                Tok::Minus
            }
            '*' => {
                advance(&mut chars);
                Tok::Star
            }
            '/' => {
                advance(&mut chars);
                Tok::Slash
            }
            '^' => {
                advance(&mut chars);
                Tok::Caret
            }
            '(' => {
                advance(&mut chars);
                Tok::LParen
            }
            ')' => {
                advance(&mut chars);
                Tok::RParen
            }
            d if d.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        digits.push(advance(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Int(digits.parse::<BigInt>().expect("digit run"))
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let mut name = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        name.push(advance(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Ident(name)
            }
            other => {
                return Err(Error::Parse {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        };
        out.push(Spanned {
            tok,
            line: tline,
            col: tcol,
        });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    declared: &'a BTreeSet<Symbol>,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), Error> {
        match self.peek() {
            Some(t) if *t == want => {
                self.bump();
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected {what}, found {t:?}"))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<RatFn, Error> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFn, Error> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFn, Error> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<RatFn, Error> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let negative = if let Some(Tok::Minus) = self.peek() {
                self.bump();
                true
            } else {
                false
            };
            let exp = match self.bump() {
                Some(Spanned {
                    tok: Tok::Int(n), ..
                }) => n,
                _ => return Err(self.err("expected an integer exponent after '^'")),
            };
            let exp_u32: u32 = exp
                .try_into()
                .map_err(|_| self.err("exponent out of range"))?;
            if negative {
                return Ok(base.inv()?.pow(exp_u32));
            }
            return Ok(base.pow(exp_u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFn, Error> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.bump();
                Ok(RatFn::from(Scalar::from_rational(
                    num::BigRational::from_integer(n),
                )))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                match name.as_str() {
                    "i" => Ok(RatFn::from(Scalar::i())),
                    "pi" => Ok(RatFn::from(Scalar::pi())),
                    _ => {
                        let sym = Symbol::new(&name);
                        if self.declared.contains(&sym) {
                            Ok(RatFn::from(CoeffFn::symbol(sym)))
                        } else {
                            Err(Error::UndeclaredSymbol { name })
                        }
                    }
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(t) => Err(self.err(format!("expected a value, found {t:?}"))),
            None => Err(self.err("expected a value, found end of input")),
        }
    }
}

fn end_position(text: &str) -> (usize, usize) {
    let mut line = 1usize;
    let mut col = 1usize;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn parse_with(text: &str, declared: &BTreeSet<Symbol>) -> Result<RatFn, Error> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        declared,
        end: end_position(text),
    };
    let value = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input after expression"));
    }
    Ok(value)
}

/// Parses a closed-form constant: symbols other than `i`/`pi` are rejected.
pub fn parse_scalar(text: &str) -> Result<Scalar, Error> {
    let empty = BTreeSet::new();
    let value = parse_with(text, &empty)?;
    value
        .as_constant()
        .ok_or_else(|| Error::Internal("constant expression produced a non-constant".into()))
}

/// Parses a polynomial expression over the declared symbols. Division is
/// allowed only when the accumulated denominator is constant.
pub fn parse_coeff_fn(text: &str, declared: &BTreeSet<Symbol>) -> Result<CoeffFn, Error> {
    let value = parse_with(text, declared)?;
    match value.den().as_constant() {
        Some(c) => {
            let inv = c.inv()?;
            Ok(value.num().scale(&inv))
        }
        None => Err(Error::Unsupported(format!(
            "expression `{text}` has a non-constant denominator ({}) where a polynomial \
             coefficient is required",
            value.den()
        ))),
    }
}

/// Parses a rational expression over the declared symbols.
pub fn parse_ratfn(text: &str, declared: &BTreeSet<Symbol>) -> Result<RatFn, Error> {
    parse_with(text, declared)
}
