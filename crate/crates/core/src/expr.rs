//! Small expression language for parametrizations and scalar maps.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' '-'? integer)?
//! base   := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers are `u1..u9`, `x1..x9`, `t` (same as `t1`), `t1..t9` and `s`;
//! functions are `sqrt`, `sin`, `cos`, `exp` and `log`.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};

/// A variable. Indices are zero-based: `u1` is `U(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    U(usize),
    X(usize),
    T(usize),
    /// Horizontal radius `|x̃|` in radial distance profiles.
    S,
}

impl Var {
    /// The `k` parameter variables `u1..uk`.
    pub fn params(k: usize) -> Vec<Var> {
        (0..k).map(Var::U).collect()
    }

    /// The `d` coordinate variables `x1..xd`.
    pub fn coords(d: usize) -> Vec<Var> {
        (0..d).map(Var::X).collect()
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::U(i) => write!(f, "u{}", i + 1),
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::T(0) => write!(f, "t"),
            Var::T(i) => write!(f, "t{}", i + 1),
            Var::S => write!(f, "s"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env<'a> {
    u: &'a [f64],
    x: &'a [f64],
    t: &'a [f64],
    s: Option<f64>,
}

impl<'a> Env<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_u(mut self, u: &'a [f64]) -> Self {
        self.u = u;
        self
    }

    pub fn with_x(mut self, x: &'a [f64]) -> Self {
        self.x = x;
        self
    }

    pub fn with_t(mut self, t: &'a [f64]) -> Self {
        self.t = t;
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::U(i) => self.u.get(i).copied(),
            Var::X(i) => self.x.get(i).copied(),
            Var::T(i) => self.t.get(i).copied(),
            Var::S => self.s,
        }
    }
}

// Simplifying constructors. They keep derivative output readable and cheap.

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => c(x + y),
        (Expr::Const(0.0), e) | (e, Expr::Const(0.0)) => e,
        (a, Expr::Neg(b)) => sub(a, *b),
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => c(x - y),
        (e, Expr::Const(0.0)) => e,
        (Expr::Const(0.0), e) => neg(e),
        (a, Expr::Neg(b)) => add(a, *b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => c(-x),
        Expr::Neg(e) => *e,
        e => Expr::Neg(Box::new(e)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => c(x * y),
        (Expr::Const(0.0), _) | (_, Expr::Const(0.0)) => c(0.0),
        (Expr::Const(1.0), e) | (e, Expr::Const(1.0)) => e,
        (Expr::Const(-1.0), e) | (e, Expr::Const(-1.0)) => neg(e),
        (Expr::Const(x), Expr::Mul(l, r)) if matches!(*l, Expr::Const(_)) => {
            let Expr::Const(y) = *l else { unreachable!() };
            mul(c(x * y), *r)
        }
        (e, Expr::Const(x)) => mul(c(x), e),
        (Expr::Neg(a), b) => neg(mul(*a, b)),
        (a, Expr::Neg(b)) => neg(mul(a, *b)),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) if y != 0.0 => c(x / y),
        (Expr::Const(0.0), _) => c(0.0),
        (e, Expr::Const(1.0)) => e,
        (Expr::Mul(l, r), Expr::Const(y)) if y != 0.0 && matches!(*l, Expr::Const(_)) => {
            let Expr::Const(x) = *l else { unreachable!() };
            mul(c(x / y), *r)
        }
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, k: i32) -> Expr {
    match (a, k) {
        (_, 0) => c(1.0),
        (e, 1) => e,
        (Expr::Const(x), k) => c(x.powi(k)),
        (e, k) => Expr::Pow(Box::new(e), k),
    }
}

fn func(f: Func, a: Expr) -> Expr {
    Expr::Func(f, Box::new(a))
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        c(v)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(z) if *z == 0.0)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Variables occurring in the expression, sorted and deduplicated.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.collect_vars(out),
        }
    }

    /// Symbolic partial derivative.
    pub fn diff(&self, v: Var) -> Expr {
        match self {
            Expr::Const(_) => c(0.0),
            Expr::Var(w) => c(if *w == v { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => add(
                mul(a.diff(v), (**b).clone()),
                mul((**a).clone(), b.diff(v)),
            ),
            Expr::Div(a, b) => {
                let db = b.diff(v);
                if db.is_zero() {
                    div(a.diff(v), (**b).clone())
                } else {
                    div(
                        sub(
                            mul(a.diff(v), (**b).clone()),
                            mul((**a).clone(), db),
                        ),
                        pow((**b).clone(), 2),
                    )
                }
            }
            Expr::Neg(a) => neg(a.diff(v)),
            Expr::Pow(a, k) => mul(
                mul(c(*k as f64), pow((**a).clone(), k - 1)),
                a.diff(v),
            ),
            Expr::Func(f, a) => {
                let da = a.diff(v);
                if da.is_zero() {
                    return c(0.0);
                }
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sqrt => div(c(0.5), func(Func::Sqrt, inner)),
                    Func::Sin => func(Func::Cos, inner),
                    Func::Cos => neg(func(Func::Sin, inner)),
                    Func::Exp => func(Func::Exp, inner),
                    Func::Log => div(c(1.0), inner),
                };
                mul(outer, da)
            }
        }
    }

    /// Evaluates with domain guards: division by zero, `sqrt`/`log` outside their
    /// domains, unbound variables and non-finite results are errors.
    pub fn eval(&self, env: &Env) -> Result<f64> {
        let v = match self {
            Expr::Const(v) => *v,
            Expr::Var(w) => env
                .get(*w)
                .ok_or_else(|| Error::Eval(format!("unbound variable {w}")))?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => {
                let d = b.eval(env)?;
                if d == 0.0 {
                    return Err(Error::Eval(format!("division by zero in {self}")));
                }
                a.eval(env)? / d
            }
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Pow(a, k) => {
                let base = a.eval(env)?;
                if base == 0.0 && *k < 0 {
                    return Err(Error::Eval(format!("zero to a negative power in {self}")));
                }
                base.powi(*k)
            }
            Expr::Func(f, a) => {
                let x = a.eval(env)?;
                match f {
                    Func::Sqrt if x < 0.0 => {
                        return Err(Error::Eval(format!("sqrt of negative value {x:e}")))
                    }
                    Func::Log if x <= 0.0 => {
                        return Err(Error::Eval(format!("log of non-positive value {x:e}")))
                    }
                    Func::Sqrt => x.sqrt(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval(format!("non-finite value in {self}")))
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(v) if *v < 0.0 => 3,
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => {
                if *v < 0.0 {
                    write!(f, "-")?;
                }
                write!(f, "{}", v.abs())
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " + ")?;
                b.fmt_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " - ")?;
                b.fmt_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "*")?;
                b.fmt_child(f, 3)
            }
            Expr::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "/")?;
                b.fmt_child(f, 4)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 3)
            }
            Expr::Pow(a, k) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{k}")
            }
            Expr::Func(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

/// Parses `text`, accepting only identifiers listed in `vars`.
pub fn parse(text: &str, vars: &[Var]) -> std::result::Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [Var],
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expect(&mut self, ch: u8) -> std::result::Result<(), ParseError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", ch as char)))
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> std::result::Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let negative = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.syntax("expected integer exponent"));
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let k: i32 = digits.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: "exponent out of range".into(),
            })?;
            return Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }));
        }
        Ok(base)
    }

    fn base(&mut self) -> std::result::Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => self.ident(),
            Some(ch) => Err(self.syntax(format!("unexpected `{}`", ch as char))),
        }
    }

    fn number(&mut self) -> std::result::Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn ident(&mut self) -> std::result::Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(g) = Func::from_name(name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::Func(g, Box::new(arg)));
        }
        let unknown = || ParseError::UnknownIdentifier {
            name: name.to_string(),
            offset: start,
        };
        let var = resolve(name).ok_or_else(unknown)?;
        if !self.vars.contains(&var) {
            return Err(unknown());
        }
        Ok(Expr::Var(var))
    }
}

fn resolve(name: &str) -> Option<Var> {
    match name {
        "s" => return Some(Var::S),
        "t" => return Some(Var::T(0)),
        _ => {}
    }
    let (head, tail) = name.split_at(1);
    if tail.len() != 1 {
        return None;
    }
    let d = tail.as_bytes()[0];
    if !(b'1'..=b'9').contains(&d) {
        return None;
    }
    let i = (d - b'1') as usize;
    match head {
        "u" => Some(Var::U(i)),
        "x" => Some(Var::X(i)),
        "t" => Some(Var::T(i)),
        _ => None,
    }
}
