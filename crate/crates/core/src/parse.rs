//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' uint)?
//! base   := '(' expr ')' | var | uint ('/' uint)?
//! var    := x1 | x2 | T | U
//! ```
//!
//! Multiplication must be written out. A literal `a/b` is field division, so
//! over `F_p` it denotes `a * b^-1 mod p`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::poly::{Poly2, PolyT, PolyTU, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        pos: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("variable {var} at {pos} is not allowed in a {context} position")]
    Context {
        pos: usize,
        var: Symbol,
        context: Context,
    },
    #[error("bad literal at {pos}: {reason}")]
    Literal { pos: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    X1,
    X2,
    T,
    U,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::X1 => "x1",
            Symbol::X2 => "x2",
            Symbol::T => "T",
            Symbol::U => "U",
        })
    }
}

/// Which ring the expression is evaluated into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    Poly2,
    PolyT,
    PolyTU,
}

impl Context {
    fn allows(self, s: Symbol) -> bool {
        match self {
            Context::Poly2 => matches!(s, Symbol::X1 | Symbol::X2),
            Context::PolyT => s != Symbol::U,
            Context::PolyTU => true,
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Context::Poly2 => "poly2",
            Context::PolyT => "polyT",
            Context::PolyTU => "polyTU",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprAst {
    Literal { num: BigInt, den: BigInt, pos: usize },
    Var { symbol: Symbol, pos: usize },
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Neg(Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
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
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                toks.push((Tok::Int(text[start..i].parse().unwrap()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(ParseError::Syntax {
                    pos: start,
                    found: format!("'{ch}'"),
                    expected: vec!["variable", "number", "operator", "'('", "')'"],
                });
            }
        };
        toks.push((tok, start));
        i += 1;
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            found: self.peek().to_string(),
            expected,
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = if *self.peek() == Tok::Minus {
            self.bump();
            ExprAst::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ExprAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = ExprAst::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            (Tok::Int(n), pos) => {
                let e = n.to_u32().ok_or_else(|| ParseError::Literal {
                    pos,
                    reason: format!("exponent {n} is too large"),
                })?;
                Ok(ExprAst::Pow(Box::new(base), e))
            }
            (found, pos) => Err(ParseError::Syntax {
                pos,
                found: found.to_string(),
                expected: vec!["nonnegative integer exponent"],
            }),
        }
    }

    fn base(&mut self) -> Result<ExprAst, ParseError> {
        let expected = vec!["'('", "variable", "number"];
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(vec!["')'", "'+'", "'-'", "'*'", "'^'"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                let symbol = match name.as_str() {
                    "x1" => Symbol::X1,
                    "x2" => Symbol::X2,
                    "T" => Symbol::T,
                    "U" => Symbol::U,
                    _ => return Err(self.unexpected(vec!["x1", "x2", "T", "U"])),
                };
                let (_, pos) = self.bump();
                Ok(ExprAst::Var { symbol, pos })
            }
            Tok::Int(num) => {
                let (_, pos) = self.bump();
                let den = if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.bump() {
                        (Tok::Int(d), _) => d,
                        (found, pos) => {
                            return Err(ParseError::Syntax {
                                pos,
                                found: found.to_string(),
                                expected: vec!["denominator"],
                            })
                        }
                    }
                } else {
                    BigInt::from(1)
                };
                if den.is_zero() {
                    return Err(ParseError::Literal {
                        pos,
                        reason: "denominator is zero".into(),
                    });
                }
                Ok(ExprAst::Literal { num, den, pos })
            }
            _ => Err(self.unexpected(expected)),
        }
    }
}

/// Parses text into an expression tree without evaluating it.
pub fn parse_expr(text: &str) -> Result<ExprAst, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(vec!["'+'", "'-'", "'*'", "'^'", "end of input"]));
    }
    Ok(e)
}

impl ExprAst {
    /// Evaluates into the ring `R`, mapping each variable through `var`.
    pub fn eval<R: Ring>(
        &self,
        spec: FieldSpec,
        context: Context,
        var: &impl Fn(Symbol) -> R,
    ) -> Result<R, ParseError> {
        Ok(match self {
            ExprAst::Literal { num, den, pos } => {
                let c = FieldElement::from_ratio(spec, num, den).map_err(|_| ParseError::Literal {
                    pos: *pos,
                    reason: format!("denominator {den} vanishes in {spec}"),
                })?;
                R::constant(c)
            }
            ExprAst::Var { symbol, pos } => {
                if !context.allows(*symbol) {
                    return Err(ParseError::Context {
                        pos: *pos,
                        var: *symbol,
                        context,
                    });
                }
                var(*symbol)
            }
            ExprAst::Add(a, b) => a.eval(spec, context, var)?.add_ref(&b.eval(spec, context, var)?),
            ExprAst::Sub(a, b) => a.eval(spec, context, var)?.sub_ref(&b.eval(spec, context, var)?),
            ExprAst::Mul(a, b) => a.eval(spec, context, var)?.mul_ref(&b.eval(spec, context, var)?),
            ExprAst::Neg(a) => a.eval(spec, context, var)?.neg_ref(),
            ExprAst::Pow(a, e) => a.eval(spec, context, var)?.pow(*e),
        })
    }
}

pub fn parse_poly2(text: &str, spec: FieldSpec) -> Result<Poly2, ParseError> {
    parse_expr(text)?.eval(spec, Context::Poly2, &|s| match s {
        Symbol::X1 => Poly2::x1(spec),
        Symbol::X2 => Poly2::x2(spec),
        _ => unreachable!("context rejects T and U"),
    })
}

pub fn parse_poly_t(text: &str, spec: FieldSpec) -> Result<PolyT, ParseError> {
    parse_expr(text)?.eval(spec, Context::PolyT, &|s| match s {
        Symbol::X1 => PolyT::from_poly2(&Poly2::x1(spec)),
        Symbol::X2 => PolyT::from_poly2(&Poly2::x2(spec)),
        Symbol::T => PolyT::t(spec),
        Symbol::U => unreachable!("context rejects U"),
    })
}

pub fn parse_poly_tu(text: &str, spec: FieldSpec) -> Result<PolyTU, ParseError> {
    parse_expr(text)?.eval(spec, Context::PolyTU, &|s| match s {
        Symbol::X1 => PolyTU::monomial_tu(Poly2::x1(spec), 0, 0),
        Symbol::X2 => PolyTU::monomial_tu(Poly2::x2(spec), 0, 0),
        Symbol::T => PolyTU::var_t(spec),
        Symbol::U => PolyTU::var_u(spec),
    })
}
