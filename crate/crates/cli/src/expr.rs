//! Cost formulas over `x[k]` and `y[k]`, parsed once and evaluated per cell.
//!
//! Grammar, loosest first: comparison (`< <= > >= == !=`, yielding 0 or 1),
//! `+ -`, `* /`, unary minus, right-associative `^`, then atoms: numbers,
//! `x[k]`, `y[k]`, `pi`, parentheses and calls of `abs min max sqrt exp log`.

use motpaver::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(String),
    X(usize),
    Y(usize),
    Pi,
    Neg(Box<Expr>),
    Binary(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    Sqrt,
    Exp,
    Log,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }

    fn exact(self) -> bool {
        matches!(self, Func::Abs | Func::Min | Func::Max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for ExprError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at character {}: {}", self.position, self.message)
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_space(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_space();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_space();
        if self.text[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ExprError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(format!("expected `{token}`"))
        }
    }

    fn comparison(&mut self) -> Result<Expr, ExprError> {
        let left = self.additive()?;
        let op = [("<=", Op::Le), (">=", Op::Ge), ("==", Op::Eq), ("!=", Op::Ne), ("<", Op::Lt), (">", Op::Gt)]
            .into_iter()
            .find(|(token, _)| self.eat(token));
        match op {
            Some((_, op)) => Ok(Expr::Binary(op, Box::new(left), Box::new(self.additive()?))),
            None => Ok(left),
        }
    }

    fn additive(&mut self) -> Result<Expr, ExprError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = if self.eat("+") {
                Op::Add
            } else if self.eat("-") {
                Op::Sub
            } else {
                return Ok(left);
            };
            left = Expr::Binary(op, Box::new(left), Box::new(self.multiplicative()?));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ExprError> {
        let mut left = self.unary()?;
        loop {
            let op = if self.eat("*") {
                Op::Mul
            } else if self.eat("/") {
                Op::Div
            } else {
                return Ok(left);
            };
            left = Expr::Binary(op, Box::new(left), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat("+") {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat("^") {
            return Ok(Expr::Binary(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn index(&mut self) -> Result<usize, ExprError> {
        self.expect("[")?;
        self.skip_space();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii digits");
        let parsed: Option<usize> = digits.parse().ok();
        self.pos = start;
        let k = match parsed {
            Some(k) => k,
            None => return self.error("expected a coordinate index"),
        };
        if k >= self.dim {
            return self.error(format!("coordinate {k} out of range for dimension {}", self.dim));
        }
        self.pos += digits.len();
        self.expect("]")?;
        Ok(k)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => self.error("unexpected end of formula"),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.comparison()?;
                self.expect(")")?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.text.len() && (self.text[self.pos].is_ascii_digit() || self.text[self.pos] == b'.') {
                    self.pos += 1;
                }
                if self.pos < self.text.len() && matches!(self.text[self.pos], b'e' | b'E') {
                    let mark = self.pos;
                    self.pos += 1;
                    if self.pos < self.text.len() && matches!(self.text[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    let digits = self.pos;
                    while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if digits == self.pos {
                        self.pos = mark;
                    }
                }
                let literal = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii literal");
                Ok(Expr::Number(literal.to_string()))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.text.len() && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii name");
                match name {
                    "x" => Ok(Expr::X(self.index()?)),
                    "y" => Ok(Expr::Y(self.index()?)),
                    "pi" => Ok(Expr::Pi),
                    _ => {
                        let Some(func) = Func::from_name(name) else {
                            self.pos = start;
                            return self.error(format!("unknown name `{name}`"));
                        };
                        self.expect("(")?;
                        let mut args = vec![self.comparison()?];
                        while self.eat(",") {
                            args.push(self.comparison()?);
                        }
                        self.expect(")")?;
                        let arity_ok = match func {
                            Func::Min | Func::Max => !args.is_empty(),
                            _ => args.len() == 1,
                        };
                        if !arity_ok {
                            return self.error(format!("wrong number of arguments to `{name}`"));
                        }
                        Ok(Expr::Call(func, args))
                    }
                }
            }
            Some(c) => self.error(format!("unexpected character `{}`", c as char)),
        }
    }
}

/// Parses a formula over points of dimension `dim`.
pub fn parse(formula: &str, dim: usize) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        text: formula.as_bytes(),
        pos: 0,
        dim,
    };
    let expr = parser.comparison()?;
    if parser.peek().is_some() {
        return parser.error("trailing input");
    }
    Ok(expr)
}

fn truth<S: Scalar>(b: bool) -> S {
    if b {
        S::one()
    } else {
        S::zero()
    }
}

fn power<S: Scalar>(base: S, exponent: S) -> Result<S, String> {
    let e = exponent.to_f64();
    let integral = e.fract() == 0.0 && e.abs() <= 64.0 && S::from_i64(e as i64) == exponent;
    if !integral {
        if S::EXACT {
            return Err("exact mode needs integer exponents up to 64".into());
        }
        return S::from_f64(base.to_f64().powf(e)).ok_or_else(|| "power is not finite".to_string());
    }
    let k = e as i64;
    let mut out = S::one();
    for _ in 0..k.unsigned_abs() {
        out = out.mul_ref(&base);
    }
    if k < 0 {
        if out.is_zero_tol(motpaver::Tolerance(0.0)) {
            return Err("zero raised to a negative power".into());
        }
        out = S::one() / out;
    }
    Ok(out)
}

fn float_only<S: Scalar>(value: f64, name: &str) -> Result<S, String> {
    S::from_f64(value).ok_or_else(|| format!("`{name}` is not finite here"))
}

/// Evaluates at `(x, y)`. Exact mode rejects `sqrt`, `exp`, `log`, `pi`
/// and non-integer powers, whose values are irrational in general.
pub fn eval<S: Scalar>(expr: &Expr, x: &[S], y: &[S]) -> Result<S, String> {
    let zero_tol = motpaver::Tolerance(0.0);
    Ok(match expr {
        Expr::Number(text) => S::parse(text).ok_or_else(|| format!("bad number `{text}`"))?,
        Expr::X(k) => x[*k].clone(),
        Expr::Y(k) => y[*k].clone(),
        Expr::Pi => {
            if S::EXACT {
                return Err("`pi` is irrational; use float mode".into());
            }
            float_only(std::f64::consts::PI, "pi")?
        }
        Expr::Neg(inner) => -eval(inner, x, y)?,
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval::<S>(a, x, y)?, eval::<S>(b, x, y)?);
            let diff = || (a.clone() - b.clone()).sign(zero_tol);
            use std::cmp::Ordering::*;
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => {
                    if b.is_zero_tol(zero_tol) {
                        return Err("division by zero".into());
                    }
                    a / b
                }
                Op::Pow => power(a, b)?,
                Op::Lt => truth(diff() == Less),
                Op::Le => truth(diff() != Greater),
                Op::Gt => truth(diff() == Greater),
                Op::Ge => truth(diff() != Less),
                Op::Eq => truth(diff() == Equal),
                Op::Ne => truth(diff() != Equal),
            }
        }
        Expr::Call(func, args) => {
            if S::EXACT && !func.exact() {
                return Err(format!("`{func:?}` is not exact; use float mode").to_lowercase());
            }
            let values = args.iter().map(|a| eval::<S>(a, x, y)).collect::<Result<Vec<S>, String>>()?;
            let first = values[0].clone();
            match func {
                Func::Abs => first.abs_val(),
                Func::Min => values.into_iter().fold(first, |m, v| if v < m { v } else { m }),
                Func::Max => values.into_iter().fold(first, |m, v| if v > m { v } else { m }),
                Func::Sqrt => float_only(first.to_f64().sqrt(), "sqrt")?,
                Func::Exp => float_only(first.to_f64().exp(), "exp")?,
                Func::Log => float_only(first.to_f64().ln(), "log")?,
            }
        }
    })
}
