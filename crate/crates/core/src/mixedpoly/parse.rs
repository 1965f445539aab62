//! Recursive-descent parser for the polynomial text grammar.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ['^' INT]
//! atom   := NUMBER | NUMBER 'i' | 'i' | 'z'INT | '~z'INT | 't' | '(' expr ')'
//! ```
//!
//! Implicit multiplication is rejected. The family parameter `t` is accepted
//! here and tracked separately; `~t` is always an error.

use std::collections::BTreeMap;

use super::{Complex, MonomialKey, EXPONENT_CAP};
use crate::{Error, Result};

/// Largest power accepted for a parenthesized sum; expansion is explicit.
const GROUP_POWER_CAP: u64 = 64;

/// Terms keyed by `(monomial, power of t)`.
#[derive(Clone, Debug, Default)]
pub struct FamilyTerms {
    pub n: usize,
    pub terms: BTreeMap<(MonomialKey, u32), Complex>,
    /// Byte offset of the first `t`, if any.
    pub parameter_pos: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Imag(f64),
    Var { index: usize, conj: bool },
    Param,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        self.skip_ws();
        let start = self.pos;
        let Some(&ch) = self.src.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let tok = match ch {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'i' => {
                self.pos += 1;
                Tok::Imag(1.0)
            }
            b't' => {
                self.pos += 1;
                Tok::Param
            }
            b'~' => {
                self.pos += 1;
                match self.src.get(self.pos) {
                    Some(b'z') => {
                        self.pos += 1;
                        Tok::Var {
                            index: self.var_index(start)?,
                            conj: true,
                        }
                    }
                    Some(b't') => return Err(Error::ConjugateParameter { pos: start }),
                    _ => {
                        return Err(Error::Syntax {
                            pos: start,
                            msg: "`~` must be followed by a variable".into(),
                        })
                    }
                }
            }
            b'z' => {
                self.pos += 1;
                Tok::Var {
                    index: self.var_index(start)?,
                    conj: false,
                }
            }
            b'0'..=b'9' | b'.' => self.number(start)?,
            other => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character {:?}", other as char),
                })
            }
        };
        Ok((start, tok))
    }

    fn var_index(&mut self, start: usize) -> Result<usize> {
        let d0 = self.pos;
        if self.digits() == 0 {
            return Err(Error::Syntax {
                pos: start,
                msg: "variable name needs an index, e.g. z1".into(),
            });
        }
        let text = std::str::from_utf8(&self.src[d0..self.pos]).unwrap();
        let index: usize = text.parse().map_err(|_| Error::Syntax {
            pos: start,
            msg: "variable index too large".into(),
        })?;
        if index == 0 {
            return Err(Error::Syntax {
                pos: start,
                msg: "variables are numbered from z1".into(),
            });
        }
        Ok(index)
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        let int_digits = self.digits();
        let mut integral = true;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            integral = false;
            if int_digits + self.digits() == 0 {
                return Err(Error::Syntax {
                    pos: start,
                    msg: "malformed number".into(),
                });
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                self.pos = save;
            } else {
                integral = false;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            pos: start,
            msg: format!("malformed number {:?}", text),
        })?;
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            return Ok(Tok::Imag(value));
        }
        Ok(Tok::Num(value, integral))
    }
}

/// Polynomial in `z, z̄, t` used during parsing.
#[derive(Clone, Debug)]
struct Poly {
    terms: BTreeMap<(MonomialKey, u32), Complex>,
}

impl Poly {
    fn constant(n: usize, c: Complex) -> Poly {
        let mut terms = BTreeMap::new();
        if c != Complex::new(0.0, 0.0) {
            terms.insert((MonomialKey::one(n), 0), c);
        }
        Poly { terms }
    }

    fn add_assign(&mut self, other: Poly, sign: f64) {
        for (k, c) in other.terms {
            let e = self.terms.entry(k).or_default();
            *e += c * sign;
            if *e == Complex::new(0.0, 0.0) {
                // Remove after the borrow ends.
            }
        }
        self.terms.retain(|_, c| *c != Complex::new(0.0, 0.0));
    }

    fn mul(&self, other: &Poly, pos: usize) -> Result<Poly> {
        let mut terms: BTreeMap<(MonomialKey, u32), Complex> = BTreeMap::new();
        for ((ka, ta), ca) in &self.terms {
            for ((kb, tb), cb) in &other.terms {
                let key = ka.times(kb).map_err(|e| match e {
                    Error::ExponentOverflow { value, cap, .. } => {
                        Error::ExponentOverflow { pos, value, cap }
                    }
                    other => other,
                })?;
                let td = *ta as u64 + *tb as u64;
                if td > EXPONENT_CAP as u64 {
                    return Err(Error::ExponentOverflow {
                        pos,
                        value: td,
                        cap: EXPONENT_CAP,
                    });
                }
                *terms.entry((key, td as u32)).or_default() += ca * cb;
            }
        }
        terms.retain(|_, c| *c != Complex::new(0.0, 0.0));
        Ok(Poly { terms })
    }

    /// A single monomial with unit coefficient, if that is what this is.
    fn as_unit_monomial(&self) -> Option<&(MonomialKey, u32)> {
        if self.terms.len() == 1 {
            let (k, c) = self.terms.iter().next().unwrap();
            (*c == Complex::new(1.0, 0.0)).then_some(k)
        } else {
            None
        }
    }

    fn pow(&self, e: u64, pos: usize, n: usize) -> Result<Poly> {
        if let Some((key, td)) = self.as_unit_monomial() {
            let scale = |v: u32| -> Result<u32> {
                let s = v as u64 * e;
                if s > EXPONENT_CAP as u64 {
                    Err(Error::ExponentOverflow {
                        pos,
                        value: s,
                        cap: EXPONENT_CAP,
                    })
                } else {
                    Ok(s as u32)
                }
            };
            let key = MonomialKey {
                nu: key.nu.iter().map(|&v| scale(v)).collect::<Result<_>>()?,
                mu: key.mu.iter().map(|&v| scale(v)).collect::<Result<_>>()?,
            };
            let td = scale(*td)?;
            let mut terms = BTreeMap::new();
            terms.insert((key, td), Complex::new(1.0, 0.0));
            return Ok(Poly { terms });
        }
        if e > GROUP_POWER_CAP {
            return Err(Error::ExponentOverflow {
                pos,
                value: e,
                cap: GROUP_POWER_CAP as u32,
            });
        }
        let mut acc = Poly::constant(n, Complex::new(1.0, 0.0));
        for _ in 0..e {
            acc = acc.mul(self, pos)?;
        }
        Ok(acc)
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    n: usize,
    cur: (usize, Tok),
    parameter_pos: Option<usize>,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<()> {
        self.cur = self.lex.next()?;
        Ok(())
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut sign = 1.0;
        match self.cur.1 {
            Tok::Plus => self.bump()?,
            Tok::Minus => {
                sign = -1.0;
                self.bump()?
            }
            _ => {}
        }
        let mut acc = Poly::constant(self.n, Complex::new(0.0, 0.0));
        acc.add_assign(self.term()?, sign);
        loop {
            let sign = match self.cur.1 {
                Tok::Plus => 1.0,
                Tok::Minus => -1.0,
                _ => break,
            };
            self.bump()?;
            acc.add_assign(self.term()?, sign);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.cur.1 {
                Tok::Star => {
                    let pos = self.cur.0;
                    self.bump()?;
                    let rhs = self.factor()?;
                    acc = acc.mul(&rhs, pos)?;
                }
                Tok::Num(..)
                | Tok::Imag(_)
                | Tok::Var { .. }
                | Tok::Param
                | Tok::LParen => {
                    return Err(Error::Syntax {
                        pos: self.cur.0,
                        msg: "implicit multiplication is not allowed; use `*`".into(),
                    })
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        if self.cur.1 == Tok::Minus {
            self.bump()?;
            let mut p = self.factor()?;
            for c in p.terms.values_mut() {
                *c = -*c;
            }
            return Ok(p);
        }
        let base = self.atom()?;
        if self.cur.1 == Tok::Caret {
            self.bump()?;
            let (pos, tok) = self.cur.clone();
            let e = match tok {
                Tok::Num(v, true) => v,
                _ => {
                    return Err(Error::Syntax {
                        pos,
                        msg: "exponent must be a non-negative integer".into(),
                    })
                }
            };
            if e > EXPONENT_CAP as f64 {
                return Err(Error::ExponentOverflow {
                    pos,
                    value: if e >= u64::MAX as f64 { u64::MAX } else { e as u64 },
                    cap: EXPONENT_CAP,
                });
            }
            self.bump()?;
            return base.pow(e as u64, pos, self.n);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        let (pos, tok) = self.cur.clone();
        let n = self.n;
        let p = match tok {
            Tok::Num(v, _) => Poly::constant(n, Complex::new(v, 0.0)),
            Tok::Imag(v) => Poly::constant(n, Complex::new(0.0, v)),
            Tok::Var { index, conj } => {
                if index > n {
                    return Err(Error::VariableOutOfRange { index, n });
                }
                let mut key = MonomialKey::one(n);
                if conj {
                    key.mu[index - 1] = 1;
                } else {
                    key.nu[index - 1] = 1;
                }
                let mut terms = BTreeMap::new();
                terms.insert((key, 0), Complex::new(1.0, 0.0));
                Poly { terms }
            }
            Tok::Param => {
                self.parameter_pos.get_or_insert(pos);
                let mut terms = BTreeMap::new();
                terms.insert((MonomialKey::one(n), 1), Complex::new(1.0, 0.0));
                Poly { terms }
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.cur.1 != Tok::RParen {
                    return Err(Error::Syntax {
                        pos: self.cur.0,
                        msg: "expected `)`".into(),
                    });
                }
                inner
            }
            Tok::End => {
                return Err(Error::Syntax {
                    pos,
                    msg: "unexpected end of input".into(),
                })
            }
            _ => {
                return Err(Error::Syntax {
                    pos,
                    msg: "expected a number, variable or `(`".into(),
                })
            }
        };
        self.bump()?;
        Ok(p)
    }
}

/// Parses text that may contain the family parameter `t`.
pub fn parse_family_terms(text: &str, n: usize) -> Result<FamilyTerms> {
    if n > crate::Subset::MAX_DIM {
        return Err(Error::DimensionMismatch {
            expected: crate::Subset::MAX_DIM,
            got: n,
        });
    }
    let mut lex = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let cur = lex.next()?;
    let mut p = Parser {
        lex,
        n,
        cur,
        parameter_pos: None,
    };
    let poly = p.expr()?;
    if p.cur.1 != Tok::End {
        return Err(Error::Syntax {
            pos: p.cur.0,
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(FamilyTerms {
        n,
        terms: poly.terms,
        parameter_pos: p.parameter_pos,
    })
}

/// Largest variable index `k` appearing as `z<k>` or `~z<k>` (at least 1).
pub fn infer_dimension(text: &str) -> Result<usize> {
    let mut lex = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut n = 1;
    loop {
        match lex.next() {
            Ok((_, Tok::End)) => return Ok(n),
            Ok((_, Tok::Var { index, .. })) => n = n.max(index),
            Ok(_) => {}
            Err(e) => return Err(e),
        }
    }
}
