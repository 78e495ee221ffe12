//! Closed-form expression strings for weight profiles, initial data, and
//! forcing terms. Symbols `x1 x2 x3 t pi`, operators `+ - * / ^`, functions
//! `sin cos exp`. Differentiation is symbolic, so prescribed profiles come
//! with analytic derivative closures instead of differenced ones.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
    X3,
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X1 => write!(f, "x1"),
            Var::X2 => write!(f, "x2"),
            Var::X3 => write!(f, "x3"),
            Var::T => write!(f, "t"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, src };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expr(format!(
                "unexpected trailing input at token {} in `{src}`",
                p.pos
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, x: [f64; 3], t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::X1) => x[0],
            Expr::Var(Var::X2) => x[1],
            Expr::Var(Var::X3) => x[2],
            Expr::Var(Var::T) => t,
            Expr::Add(a, b) => a.eval(x, t) + b.eval(x, t),
            Expr::Sub(a, b) => a.eval(x, t) - b.eval(x, t),
            Expr::Mul(a, b) => a.eval(x, t) * b.eval(x, t),
            Expr::Div(a, b) => a.eval(x, t) / b.eval(x, t),
            Expr::Pow(a, b) => a.eval(x, t).powf(b.eval(x, t)),
            Expr::Neg(a) => -a.eval(x, t),
            Expr::Sin(a) => a.eval(x, t).sin(),
            Expr::Cos(a) => a.eval(x, t).cos(),
            Expr::Exp(a) => a.eval(x, t).exp(),
        }
    }

    pub fn uses_var(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.uses_var(v) || b.uses_var(v),
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.uses_var(v),
        }
    }

    /// Symbolic partial derivative. `a^b` requires a constant exponent.
    pub fn diff(&self, v: Var) -> Result<Expr> {
        use Expr::*;
        let e = match self {
            Const(_) => Const(0.0),
            Var(w) => Const(if *w == v { 1.0 } else { 0.0 }),
            Add(a, b) => Add(Box::new(a.diff(v)?), Box::new(b.diff(v)?)),
            Sub(a, b) => Sub(Box::new(a.diff(v)?), Box::new(b.diff(v)?)),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.diff(v)?), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.diff(v)?))),
            ),
            Div(a, b) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(a.diff(v)?), b.clone())),
                    Box::new(Mul(a.clone(), Box::new(b.diff(v)?))),
                )),
                Box::new(Mul(b.clone(), b.clone())),
            ),
            Pow(a, b) => {
                let c = match b.as_ref().clone().fold() {
                    Const(c) => c,
                    _ => {
                        return Err(Error::Expr(
                            "derivative of a non-constant exponent is unsupported".into(),
                        ))
                    }
                };
                // c * a^(c-1) * a'
                Mul(
                    Box::new(Mul(
                        Box::new(Const(c)),
                        Box::new(Pow(a.clone(), Box::new(Const(c - 1.0)))),
                    )),
                    Box::new(a.diff(v)?),
                )
            }
            Neg(a) => Neg(Box::new(a.diff(v)?)),
            Sin(a) => Mul(Box::new(Cos(a.clone())), Box::new(a.diff(v)?)),
            Cos(a) => Neg(Box::new(Mul(Box::new(Sin(a.clone())), Box::new(a.diff(v)?)))),
            Exp(a) => Mul(Box::new(Exp(a.clone())), Box::new(a.diff(v)?)),
        };
        Ok(e.fold())
    }

    /// Constant folding and 0/1 pruning; keeps repeatedly differentiated
    /// expressions from ballooning.
    pub fn fold(self) -> Expr {
        use Expr::*;
        match self {
            Add(a, b) => match (a.fold(), b.fold()) {
                (Const(x), Const(y)) => Const(x + y),
                (Const(c), e) | (e, Const(c)) if c == 0.0 => e,
                (a, b) => Add(Box::new(a), Box::new(b)),
            },
            Sub(a, b) => match (a.fold(), b.fold()) {
                (Const(x), Const(y)) => Const(x - y),
                (e, Const(c)) if c == 0.0 => e,
                (Const(c), e) if c == 0.0 => Neg(Box::new(e)).fold(),
                (a, b) => Sub(Box::new(a), Box::new(b)),
            },
            Mul(a, b) => match (a.fold(), b.fold()) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(c), _) | (_, Const(c)) if c == 0.0 => Const(0.0),
                (Const(c), e) | (e, Const(c)) if c == 1.0 => e,
                (a, b) => Mul(Box::new(a), Box::new(b)),
            },
            Div(a, b) => match (a.fold(), b.fold()) {
                (Const(x), Const(y)) => Const(x / y),
                (Const(c), _) if c == 0.0 => Const(0.0),
                (e, Const(c)) if c == 1.0 => e,
                (a, b) => Div(Box::new(a), Box::new(b)),
            },
            Pow(a, b) => match (a.fold(), b.fold()) {
                (Const(x), Const(y)) => Const(x.powf(y)),
                (e, Const(c)) if c == 1.0 => e,
                (_, Const(c)) if c == 0.0 => Const(1.0),
                (a, b) => Pow(Box::new(a), Box::new(b)),
            },
            Neg(a) => match a.fold() {
                Const(x) => Const(-x),
                Neg(inner) => *inner,
                e => Neg(Box::new(e)),
            },
            Sin(a) => match a.fold() {
                Const(x) => Const(x.sin()),
                e => Sin(Box::new(e)),
            },
            Cos(a) => match a.fold() {
                Const(x) => Const(x.cos()),
                e => Cos(Box::new(e)),
            },
            Exp(a) => match a.fold() {
                Const(x) => Const(x.exp()),
                e => Exp(Box::new(e)),
            },
            e => e,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            // accept the unicode minus sign too
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2;
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Expr(format!("bad number `{text}` in `{src}`")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_alphanumeric() || d == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            _ => {
                if src[i..].starts_with('\u{2212}') {
                    out.push(Token::Minus);
                    i += '\u{2212}'.len_utf8();
                } else {
                    return Err(Error::Expr(format!(
                        "unexpected character `{c}` at byte {i} in `{src}`"
                    )));
                }
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Expr(format!("expected {t:?}, got {got:?} in `{}`", self.src))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x1" => Ok(Expr::Var(Var::X1)),
                "x2" => Ok(Expr::Var(Var::X2)),
                "x3" => Ok(Expr::Var(Var::X3)),
                "t" => Ok(Expr::Var(Var::T)),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "sin" | "cos" | "exp" => {
                    self.expect(Token::LParen)?;
                    let arg = Box::new(self.expr()?);
                    self.expect(Token::RParen)?;
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(arg),
                        "cos" => Expr::Cos(arg),
                        _ => Expr::Exp(arg),
                    })
                }
                other => Err(Error::Expr(format!(
                    "unknown symbol `{other}` in `{}` (expected x1, x2, x3, t, pi, sin, cos, exp)",
                    self.src
                ))),
            },
            got => Err(Error::Expr(format!("unexpected token {got:?} in `{}`", self.src))),
        }
    }
}
