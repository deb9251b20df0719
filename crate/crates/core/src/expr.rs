//! Scalar expressions over named real variables.
//!
//! Expressions are immutable, cheaply clonable trees. They can be parsed from
//! text, printed back, differentiated symbolically and evaluated either by
//! name lookup or through a [`Compiled`] form bound to a fixed variable order.
//!
//! Evaluation never produces NaN or infinities: out-of-domain arguments and
//! overflow surface as [`EvalError`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

/// Elementary functions recognised by the parser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> Result<f64, EvalError> {
        let r = match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => {
                if v.cos() == 0.0 {
                    return Err(EvalError::Domain { func: "tan", arg: v });
                }
                v.tan()
            }
            Func::Exp => v.exp(),
            Func::Log => {
                if v <= 0.0 {
                    return Err(EvalError::Domain { func: "log", arg: v });
                }
                v.ln()
            }
            Func::Sqrt => {
                if v < 0.0 {
                    return Err(EvalError::Domain { func: "sqrt", arg: v });
                }
                v.sqrt()
            }
        };
        finite(r)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// An immutable symbolic expression.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("power undefined for base {base} and exponent {exp}")]
    PowDomain { base: f64, exp: f64 },
    #[error("non-finite result")]
    NonFinite,
    #[error("unbound variable `{0}`")]
    Unbound(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn div(a: f64, b: f64) -> Result<f64, EvalError> {
    if b == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    finite(a / b)
}

fn pow(base: f64, exp: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exp < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if base < 0.0 && exp.fract() != 0.0 {
        return Err(EvalError::PowDomain { base, exp });
    }
    let r = if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    };
    finite(r)
}

impl Expr {
    fn new(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn num(v: f64) -> Expr {
        Expr::new(Node::Num(v))
    }

    pub fn zero() -> Expr {
        Expr::num(0.0)
    }

    pub fn one() -> Expr {
        Expr::num(1.0)
    }

    pub fn var(name: &str) -> Expr {
        Expr::new(Node::Var(Arc::from(name)))
    }

    /// Returns the value if the expression is a numeric literal.
    pub fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        // literals fold only when the value is defined, so domain errors survive
        if let Some(Ok(r)) = arg.as_const().map(|v| f.apply(v)) {
            return Expr::num(r);
        }
        Expr::new(Node::Call(f, arg))
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self.clone())
    }
    pub fn tan(&self) -> Expr {
        Expr::call(Func::Tan, self.clone())
    }
    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self.clone())
    }
    pub fn log(&self) -> Expr {
        Expr::call(Func::Log, self.clone())
    }
    pub fn sqrt(&self) -> Expr {
        Expr::call(Func::Sqrt, self.clone())
    }

    pub fn pow(&self, e: &Expr) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), e.as_const()) {
            if let Ok(r) = pow(a, b) {
                return Expr::num(r);
            }
        }
        Expr::new(Node::Pow(self.clone(), e.clone()))
    }

    pub fn powi(&self, k: i32) -> Expr {
        self.pow(&Expr::num(k as f64))
    }

    /// Sorted set of variable names occurring in the expression.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match &*self.0 {
            Node::Num(_) => {}
            Node::Var(n) => {
                out.insert(n.to_string());
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates with variables resolved through `env`.
    pub fn eval_with<F>(&self, env: &F) -> Result<f64, EvalError>
    where
        F: Fn(&str) -> Option<f64>,
    {
        match &*self.0 {
            Node::Num(v) => Ok(*v),
            Node::Var(n) => env(n).ok_or_else(|| EvalError::Unbound(n.to_string())),
            Node::Neg(a) => Ok(-a.eval_with(env)?),
            Node::Add(a, b) => finite(a.eval_with(env)? + b.eval_with(env)?),
            Node::Sub(a, b) => finite(a.eval_with(env)? - b.eval_with(env)?),
            Node::Mul(a, b) => finite(a.eval_with(env)? * b.eval_with(env)?),
            Node::Div(a, b) => div(a.eval_with(env)?, b.eval_with(env)?),
            Node::Pow(a, b) => pow(a.eval_with(env)?, b.eval_with(env)?),
            Node::Call(f, a) => f.apply(a.eval_with(env)?),
        }
    }

    /// Evaluates with `names[i]` bound to `values[i]`.
    pub fn eval(&self, names: &[String], values: &[f64]) -> Result<f64, EvalError> {
        self.eval_with(&|n: &str| names.iter().position(|x| x == n).map(|i| values[i]))
    }

    pub fn eval_map(&self, env: &HashMap<String, f64>) -> Result<f64, EvalError> {
        self.eval_with(&|n: &str| env.get(n).copied())
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        match &*self.0 {
            Node::Num(_) => Expr::zero(),
            Node::Var(n) => {
                if &**n == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => -a.diff(var),
            Node::Add(a, b) => a.diff(var) + b.diff(var),
            Node::Sub(a, b) => a.diff(var) - b.diff(var),
            Node::Mul(a, b) => a.diff(var) * b + a * b.diff(var),
            Node::Div(a, b) => (a.diff(var) * b - a * b.diff(var)) / b.powi(2),
            Node::Pow(a, b) => {
                let db = b.diff(var);
                let da = a.diff(var);
                if db.is_zero() {
                    b * a.pow(&(b - Expr::one())) * da
                } else {
                    self * (db * a.log() + b * da / a)
                }
            }
            Node::Call(f, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Tan => Expr::one() / a.cos().powi(2),
                    Func::Exp => self.clone(),
                    Func::Log => Expr::one() / a,
                    Func::Sqrt => Expr::num(0.5) / self,
                };
                outer * da
            }
        }
    }

    /// Replaces variables by expressions. Unmapped variables are kept.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match &*self.0 {
            Node::Num(_) => self.clone(),
            Node::Var(n) => map.get(&**n).cloned().unwrap_or_else(|| self.clone()),
            Node::Neg(a) => -a.substitute(map),
            Node::Add(a, b) => a.substitute(map) + b.substitute(map),
            Node::Sub(a, b) => a.substitute(map) - b.substitute(map),
            Node::Mul(a, b) => a.substitute(map) * b.substitute(map),
            Node::Div(a, b) => a.substitute(map) / b.substitute(map),
            Node::Pow(a, b) => a.substitute(map).pow(&b.substitute(map)),
            Node::Call(f, a) => Expr::call(*f, a.substitute(map)),
        }
    }

    /// Renames variables. Convenience wrapper over [`Expr::substitute`].
    pub fn rename(&self, pairs: &[(&str, &str)]) -> Expr {
        let map = pairs
            .iter()
            .map(|(a, b)| (a.to_string(), Expr::var(b)))
            .collect();
        self.substitute(&map)
    }

    /// Binds the variable order for fast repeated evaluation.
    pub fn compile(&self, names: &[String]) -> Result<Compiled, EvalError> {
        Ok(Compiled(self.lower(names)?))
    }

    fn lower(&self, names: &[String]) -> Result<CNode, EvalError> {
        Ok(match &*self.0 {
            Node::Num(v) => CNode::Num(*v),
            Node::Var(n) => CNode::Var(
                names
                    .iter()
                    .position(|x| **x == **n)
                    .ok_or_else(|| EvalError::Unbound(n.to_string()))?,
            ),
            Node::Neg(a) => CNode::Neg(Box::new(a.lower(names)?)),
            Node::Add(a, b) => CNode::Bin(Bin::Add, Box::new((a.lower(names)?, b.lower(names)?))),
            Node::Sub(a, b) => CNode::Bin(Bin::Sub, Box::new((a.lower(names)?, b.lower(names)?))),
            Node::Mul(a, b) => CNode::Bin(Bin::Mul, Box::new((a.lower(names)?, b.lower(names)?))),
            Node::Div(a, b) => CNode::Bin(Bin::Div, Box::new((a.lower(names)?, b.lower(names)?))),
            Node::Pow(a, b) => CNode::Bin(Bin::Pow, Box::new((a.lower(names)?, b.lower(names)?))),
            Node::Call(f, a) => CNode::Call(*f, Box::new(a.lower(names)?)),
        })
    }

    /// Node count, used to keep generated expressions bounded in tests.
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Num(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Bin {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug)]
enum CNode {
    Num(f64),
    Var(usize),
    Neg(Box<CNode>),
    Bin(Bin, Box<(CNode, CNode)>),
    Call(Func, Box<CNode>),
}

impl CNode {
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        match self {
            CNode::Num(v) => Ok(*v),
            CNode::Var(i) => Ok(x[*i]),
            CNode::Neg(a) => Ok(-a.eval(x)?),
            CNode::Bin(op, ab) => {
                let a = ab.0.eval(x)?;
                let b = ab.1.eval(x)?;
                match op {
                    Bin::Add => finite(a + b),
                    Bin::Sub => finite(a - b),
                    Bin::Mul => finite(a * b),
                    Bin::Div => div(a, b),
                    Bin::Pow => pow(a, b),
                }
            }
            CNode::Call(f, a) => f.apply(a.eval(x)?),
        }
    }
}

/// An expression with variables resolved to positions in a point slice.
#[derive(Clone, Debug)]
pub struct Compiled(CNode);

impl Compiled {
    /// Evaluates at `x`; the slice must cover every bound position.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.0.eval(x)
    }
}

// ---------------------------------------------------------------------------
// arithmetic with constant folding

fn add(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if (x + y).is_finite() => Expr::num(x + y),
        (Some(x), _) if x == 0.0 => b.clone(),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => Expr::new(Node::Add(a.clone(), b.clone())),
    }
}

fn sub(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if (x - y).is_finite() => Expr::num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => Expr::new(Node::Sub(a.clone(), b.clone())),
    }
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if (x * y).is_finite() => Expr::num(x * y),
        (Some(x), _) if x == 0.0 => Expr::zero(),
        (_, Some(y)) if y == 0.0 => Expr::zero(),
        (Some(x), _) if x == 1.0 => b.clone(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::new(Node::Mul(a.clone(), b.clone())),
    }
}

fn divide(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 && (x / y).is_finite() => Expr::num(x / y),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (Some(x), _) if x == 0.0 => Expr::zero(),
        _ => Expr::new(Node::Div(a.clone(), b.clone())),
    }
}

fn neg(a: &Expr) -> Expr {
    match &*a.0 {
        Node::Num(v) => Expr::num(-v),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::new(Node::Neg(a.clone())),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                $f(&self, &Expr::num(rhs))
            }
        }
        impl ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                $f(self, &Expr::num(rhs))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, divide);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::num(v)
    }
}

// ---------------------------------------------------------------------------
// printing
//
// Every binary operand that is not atomic is parenthesised, so the printed
// form re-parses to the same tree and evaluates bit-identically.

impl Expr {
    fn is_atom(&self) -> bool {
        match &*self.0 {
            Node::Num(v) => *v >= 0.0 && !(v.is_sign_negative()),
            Node::Var(_) | Node::Call(..) => true,
            _ => false,
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_atom() {
            write!(f, "{}", self)
        } else {
            write!(f, "({})", self)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{:?}", v)
                }
            }
            Node::Var(n) => write!(f, "{}", n),
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_operand(f)
            }
            Node::Call(func, a) => write!(f, "{}({})", func.name(), a),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                let op = match &*self.0 {
                    Node::Add(..) => "+",
                    Node::Sub(..) => "-",
                    Node::Mul(..) => "*",
                    Node::Div(..) => "/",
                    _ => "^",
                };
                a.fmt_operand(f)?;
                write!(f, " {} ", op)?;
                b.fmt_operand(f)
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
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
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number `{}`", text),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError {
                offset: i,
                message: format!("unexpected character `{}`", c),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
    _src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.len)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            message: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::new(Node::Add(lhs, self.term()?));
            } else if self.eat('-') {
                lhs = Expr::new(Node::Sub(lhs, self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::new(Node::Mul(lhs, self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::new(Node::Div(lhs, self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let b = self.base()?;
        if self.eat('^') {
            let e = self.factor()?;
            return Ok(Expr::new(Node::Pow(b, e)));
        }
        Ok(b)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::num(v))
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                let inner = self.base()?;
                Ok(match &*inner.0 {
                    // a negated literal is kept as a literal so printing round-trips
                    Node::Num(v) => Expr::num(-v),
                    _ => Expr::new(Node::Neg(inner)),
                })
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let at = self.offset();
                self.pos += 1;
                if self.eat('(') {
                    let f = match Func::from_name(&name) {
                        Some(f) => f,
                        None => {
                            return Err(ParseError {
                                offset: at,
                                message: format!("unknown function `{}`", name),
                            })
                        }
                    };
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.err("expected `)`");
                    }
                    return Ok(Expr::new(Node::Call(f, arg)));
                }
                if name == "pi" {
                    return Ok(Expr::num(std::f64::consts::PI));
                }
                if Func::from_name(&name).is_some() {
                    return Err(ParseError {
                        offset: at,
                        message: format!("reserved word `{}` used as a variable", name),
                    });
                }
                Ok(Expr::var(&name))
            }
            Some(t) => self.err(format!("unexpected token {:?}", t)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression. The tree is kept as written: no folding happens at
/// parse time, so `print` followed by `parse` reproduces it exactly.
///
/// Unary minus binds to a base, so `-x^2` reads as `(-x)^2`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        len: src.len(),
        _src: src,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

/// Names `prefix1 .. prefixN`.
pub fn coordinate_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{}{}", prefix, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, names: &[&str], vals: &[f64]) -> Result<f64, EvalError> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        parse(s).unwrap().eval(&names, vals)
    }

    #[test]
    fn derivative_of_log_sin() {
        let e = parse("sin(x)*log(x)").unwrap();
        let d = e.diff("x");
        let x = 1.3_f64;
        let want = x.cos() * x.ln() + x.sin() / x;
        let got = d.eval(&["x".to_string()], &[x]).unwrap();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn polynomial_derivative_at_zero() {
        let d = parse("x^3 + 2*x").unwrap().diff("x");
        assert_eq!(d.eval(&["x".to_string()], &[0.0]).unwrap(), 2.0);
    }

    #[test]
    fn log_of_negative_is_domain_error() {
        assert!(matches!(
            ev("log(x)", &["x"], &[-1.0]),
            Err(EvalError::Domain { func: "log", .. })
        ));
    }

    #[test]
    fn other_domain_errors() {
        assert_eq!(ev("1/x", &["x"], &[0.0]), Err(EvalError::DivisionByZero));
        assert!(ev("sqrt(x)", &["x"], &[-0.5]).is_err());
        assert!(ev("x^0.5", &["x"], &[-2.0]).is_err());
        assert_eq!(ev("exp(x)", &["x"], &[1000.0]), Err(EvalError::NonFinite));
        assert_eq!(ev("y", &["x"], &[1.0]), Err(EvalError::Unbound("y".into())));
    }

    #[test]
    fn unary_minus_binds_to_base() {
        assert_eq!(ev("-x^2", &["x"], &[3.0]).unwrap(), 9.0);
        assert_eq!(ev("-(x^2)", &["x"], &[3.0]).unwrap(), -9.0);
        assert_eq!(ev("2^3^2", &[], &[]).unwrap(), 512.0);
        assert_eq!(ev("8/2/2", &[], &[]).unwrap(), 2.0);
        assert_eq!(ev("1-2-3", &[], &[]).unwrap(), -4.0);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let e = parse("1 + * 2").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(parse("foo(x)").is_err());
        assert!(parse("sin").is_err());
        assert!(parse("(x").is_err());
        assert!(parse("x $ y").is_err());
        assert!(parse("x y").is_err());
    }

    #[test]
    fn pi_and_scientific_literals() {
        assert_eq!(ev("pi", &[], &[]).unwrap(), std::f64::consts::PI);
        assert_eq!(ev("1.5e-3*2", &[], &[]).unwrap(), 3e-3);
    }

    #[test]
    fn folding_keeps_error_sites() {
        let e = Expr::num(1.0) / Expr::num(0.0);
        assert_eq!(e.eval(&[], &[]), Err(EvalError::DivisionByZero));
        let l = Expr::num(-1.0).log();
        assert!(l.eval(&[], &[]).is_err());
    }

    #[test]
    fn print_round_trip_simple() {
        for s in ["-x^2", "x - (y - z)", "a / (b * c)", "(-2.5) * x", "exp(-x) + 1e-300", "-(-x)"] {
            let e = parse(s).unwrap();
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            assert_eq!(e, back, "{} -> {}", s, printed);
        }
    }

    #[test]
    fn compiled_matches_named() {
        let names = coordinate_names("x", 3);
        let e = parse("x1*sin(x2) + x3^2/(1 + x1^2)").unwrap();
        let c = e.compile(&names).unwrap();
        let p = [0.3, -1.2, 2.0];
        assert_eq!(c.eval(&p).unwrap(), e.eval(&names, &p).unwrap());
        assert!(parse("q").unwrap().compile(&names).is_err());
    }

    #[test]
    fn substitution_composes() {
        let e = parse("x^2 + y").unwrap();
        let mut m = HashMap::new();
        m.insert("x".to_string(), parse("sin(t)").unwrap());
        let s = e.substitute(&m);
        let t = 0.7_f64;
        let got = s.eval(&["t".into(), "y".into()], &[t, 2.0]).unwrap();
        assert!((got - (t.sin().powi(2) + 2.0)).abs() < 1e-15);
    }
}
