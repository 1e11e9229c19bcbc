//! Closed-form expression ASTs: the ingestion format for metric components,
//! map components and frame coefficients.
//!
//! Grammar: `+ - * /`, `^` with integer exponents, `sqrt`, `exp`, `sin`,
//! `cos`, numeric literals, and free identifiers. Identifiers are either the
//! chart variables (bound at evaluation) or named parameters (substituted by
//! [`Expr::bind`] before use).
//!
//! Expressions evaluate over jets, so the same AST serves both plain
//! evaluation and composition with jet-valued arguments (the pullback of a
//! base-space field along a map is an evaluation with jet arguments). The
//! symbolic derivative keeps map differentials at full jet order.

use std::fmt;

use thiserror::Error;

use crate::jet::{Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at byte {0}: {1}")]
    Parse(usize, String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        Parser::new(src).parse_all()
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    /// Substitute named parameters by numeric values. Unlisted identifiers
    /// stay symbolic (the chart variables).
    pub fn bind(&self, params: &[(&str, f64)]) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var(n) => match params.iter().find(|(p, _)| p == n) {
                Some((_, v)) => Expr::Num(*v),
                None => Expr::Var(n.clone()),
            },
            Expr::Neg(e) => Expr::Neg(Box::new(e.bind(params))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.bind(params)), Box::new(b.bind(params))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.bind(params)), Box::new(b.bind(params))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.bind(params)), Box::new(b.bind(params))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.bind(params)), Box::new(b.bind(params))),
            Expr::Pow(e, n) => Expr::Pow(Box::new(e.bind(params)), *n),
            Expr::Sqrt(e) => Expr::Sqrt(Box::new(e.bind(params))),
            Expr::Exp(e) => Expr::Exp(Box::new(e.bind(params))),
            Expr::Sin(e) => Expr::Sin(Box::new(e.bind(params))),
            Expr::Cos(e) => Expr::Cos(Box::new(e.bind(params))),
        }
    }

    /// Evaluate with jet-valued variables from `vars: (name, jet)` pairs.
    pub fn eval_jet(&self, vars: &[(&str, Jet)]) -> Result<Jet, ExprError> {
        let order = vars.first().map(|(_, j)| j.order()).unwrap_or(3);
        match self {
            Expr::Num(v) => Ok(Jet::constant(*v, order)),
            Expr::Var(n) => vars
                .iter()
                .find(|(name, _)| name == n)
                .map(|(_, j)| *j)
                .ok_or_else(|| ExprError::UnknownIdentifier(n.clone())),
            Expr::Neg(e) => Ok(-e.eval_jet(vars)?),
            Expr::Add(a, b) => Ok(a.eval_jet(vars)? + b.eval_jet(vars)?),
            Expr::Sub(a, b) => Ok(a.eval_jet(vars)? - b.eval_jet(vars)?),
            Expr::Mul(a, b) => Ok(a.eval_jet(vars)? * b.eval_jet(vars)?),
            Expr::Div(a, b) => Ok(a.eval_jet(vars)?.div(&b.eval_jet(vars)?)?),
            Expr::Pow(e, n) => Ok(e.eval_jet(vars)?.powi(*n)?),
            Expr::Sqrt(e) => Ok(e.eval_jet(vars)?.sqrt()?),
            Expr::Exp(e) => Ok(e.eval_jet(vars)?.exp()?),
            Expr::Sin(e) => Ok(e.eval_jet(vars)?.sin()?),
            Expr::Cos(e) => Ok(e.eval_jet(vars)?.cos()?),
        }
    }

    /// Plain numeric evaluation.
    pub fn eval_f64(&self, vars: &[(&str, f64)]) -> Result<f64, ExprError> {
        let jets: Vec<(&str, Jet)> = vars
            .iter()
            .map(|&(n, v)| (n, Jet::constant(v, 0)))
            .collect();
        Ok(self.eval_jet(&jets)?.value())
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(n) => Expr::Num(if n == var { 1.0 } else { 0.0 }),
            Expr::Neg(e) => Expr::Neg(Box::new(e.diff(var))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.diff(var)), Box::new(b.diff(var))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.diff(var)), Box::new(b.diff(var))),
            Expr::Mul(a, b) => Expr::Add(
                Box::new(Expr::Mul(Box::new(a.diff(var)), b.clone())),
                Box::new(Expr::Mul(a.clone(), Box::new(b.diff(var)))),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(Expr::Sub(
                    Box::new(Expr::Mul(Box::new(a.diff(var)), b.clone())),
                    Box::new(Expr::Mul(a.clone(), Box::new(b.diff(var)))),
                )),
                Box::new(Expr::Pow(b.clone(), 2)),
            ),
            Expr::Pow(e, n) => Expr::Mul(
                Box::new(Expr::Mul(
                    Box::new(Expr::Num(*n as f64)),
                    Box::new(Expr::Pow(e.clone(), n - 1)),
                )),
                Box::new(e.diff(var)),
            ),
            Expr::Sqrt(e) => Expr::Div(
                Box::new(e.diff(var)),
                Box::new(Expr::Mul(
                    Box::new(Expr::Num(2.0)),
                    Box::new(Expr::Sqrt(e.clone())),
                )),
            ),
            Expr::Exp(e) => Expr::Mul(Box::new(Expr::Exp(e.clone())), Box::new(e.diff(var))),
            Expr::Sin(e) => Expr::Mul(Box::new(Expr::Cos(e.clone())), Box::new(e.diff(var))),
            Expr::Cos(e) => Expr::Neg(Box::new(Expr::Mul(
                Box::new(Expr::Sin(e.clone())),
                Box::new(e.diff(var)),
            ))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(e, n) => write!(f, "{e}^{n}"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Cos(e) => write!(f, "cos({e})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn parse_all(&mut self) -> Result<Expr, ExprError> {
        let e = self.additive()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.err("trailing input"));
        }
        Ok(e)
    }

    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse(self.pos, msg.to_string())
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn additive(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.multiplicative()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.multiplicative()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.multiplicative()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.integer_exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, ExprError> {
        self.skip_ws();
        let parens = self.peek() == Some(b'(');
        if parens {
            self.pos += 1;
        }
        self.skip_ws();
        let neg = self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let mut n: i32 = digits
            .parse()
            .map_err(|_| self.err("exponent out of range"))?;
        if neg {
            n = -n;
        }
        if parens {
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)` after exponent"));
            }
            self.pos += 1;
        }
        Ok(n)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.additive()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(self.err("expected a number, identifier or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // scientific notation
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = mark; // not an exponent after all
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.err("malformed number"))
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let arg = self.additive()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)` after function argument"));
            }
            self.pos += 1;
            return match name.as_str() {
                "sqrt" => Ok(Expr::Sqrt(Box::new(arg))),
                "exp" => Ok(Expr::Exp(Box::new(arg))),
                "sin" => Ok(Expr::Sin(Box::new(arg))),
                "cos" => Ok(Expr::Cos(Box::new(arg))),
                _ => Err(ExprError::Parse(start, format!("unknown function `{name}`"))),
            };
        }
        Ok(Expr::Var(name))
    }
}
