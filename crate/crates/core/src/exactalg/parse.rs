//! Text syntax shared by ring elements and series:
//! `3*a11^2 - 1/2*a12`, `x + y + a11*x*y`, `(1 + x)^3`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// The operations a parser target has to provide.
pub trait ExprAlgebra {
    type Elem: Clone;
    fn constant(&self, q: BigRational) -> Self::Elem;
    fn variable(&self, name: &str) -> Result<Self::Elem>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut pos = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        let start = pos;
        if c.is_whitespace() {
            i += 1;
            pos += c.len_utf8();
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                s.push(bytes[i]);
                pos += 1;
                i += 1;
            }
            out.push((start, Tok::Num(s.parse().expect("digits"))));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut s = String::new();
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                s.push(bytes[i]);
                pos += 1;
                i += 1;
            }
            out.push((start, Tok::Ident(s)));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            // ASCII hyphen and U+2212 MINUS SIGN
            '-' | '\u{2212}' => Tok::Minus,
            '*' | '\u{b7}' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => {
                return Err(Error::Parse {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((start, t));
        i += 1;
        pos += c.len_utf8();
    }
    Ok(out)
}

struct Parser<'a, A: ExprAlgebra> {
    alg: &'a A,
    toks: Vec<(usize, Tok)>,
    at: usize,
    len: usize,
}

impl<'a, A: ExprAlgebra> Parser<'a, A> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.len, |(p, _)| *p)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.to_string(),
        })
    }

    fn expr(&mut self) -> Result<A::Elem> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                negate = true;
                self.at += 1;
            }
            Some(Tok::Plus) => self.at += 1,
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = self.alg.neg(&acc);
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    let t = self.term()?;
                    acc = self.alg.add(&acc, &t);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    let t = self.term()?;
                    acc = self.alg.add(&acc, &self.alg.neg(&t));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<A::Elem> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.at += 1;
            let f = self.factor()?;
            acc = self.alg.mul(&acc, &f)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<A::Elem> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.at += 1;
            let Some(Tok::Num(n)) = self.peek().cloned() else {
                return self.err("expected a non-negative integer exponent");
            };
            self.at += 1;
            let n: u32 = n
                .try_into()
                .map_err(|_| Error::Parse {
                    pos: self.pos(),
                    msg: "exponent too large".into(),
                })?;
            let mut acc = self.alg.constant(BigRational::one());
            for _ in 0..n {
                acc = self.alg.mul(&acc, &base)?;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<A::Elem> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                if let Some(Tok::Slash) = self.peek() {
                    self.at += 1;
                    let Some(Tok::Num(d)) = self.peek().cloned() else {
                        return self.err("expected a denominator");
                    };
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    self.at += 1;
                    return Ok(self.alg.constant(BigRational::new(n, d)));
                }
                Ok(self.alg.constant(BigRational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                self.alg.variable(&name)
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.at += 1;
                Ok(e)
            }
            _ => self.err("expected a number, a name or `(`"),
        }
    }
}

/// Parses `src` into an element of `alg`.
pub fn parse_expr<A: ExprAlgebra>(alg: &A, src: &str) -> Result<A::Elem> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Ok(alg.constant(BigRational::zero()));
    }
    let mut p = Parser {
        alg,
        toks,
        at: 0,
        len: src.len(),
    };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses a single rational literal such as `-1/2` or `3`.
pub fn parse_rational(src: &str) -> Result<BigRational> {
    let s = src.trim().replace('\u{2212}', "-");
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("invalid rational `{src}`"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Formats a rational as `n` or `n/d`.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Joins signed terms `coeff * name^e * ...` in the given order.
pub fn format_terms<'a, I>(terms: I) -> String
where
    I: IntoIterator<Item = (BigRational, Vec<(&'a str, u32)>)>,
{
    let mut out = String::new();
    for (c, mono) in terms {
        if c.is_zero() {
            continue;
        }
        let neg = c < BigRational::zero();
        let abs = if neg { -c } else { c };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let factors: Vec<String> = mono
            .iter()
            .filter(|(_, e)| *e > 0)
            .map(|(n, e)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
            .collect();
        if factors.is_empty() {
            out.push_str(&format_rational(&abs));
        } else {
            if !abs.is_one() {
                out.push_str(&format_rational(&abs));
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
