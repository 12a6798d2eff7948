//! Scalar expression language used for metric components and potentials.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | constant | coordinate | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is `2^(-1)`. Functions: exp, log, sin, cos, tan,
//! sinh, cosh, tanh, sqrt. Constants: `pi`, `e`. Non-smooth functions such
//! as `abs` are rejected.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::{powi, DomainKind, Func, Scalar};

const NON_SMOOTH: [&str; 8] = ["abs", "sign", "floor", "ceil", "min", "max", "step", "heaviside"];
const CONSTANTS: [&str; 2] = ["pi", "e"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Syntax tree. Variables are indices into the owning coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    pub fn neg(inner: Expr) -> Expr {
        Expr::Neg(Box::new(inner))
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Expr::Var(_) => true,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_vars(),
            Expr::Binary(_, a, b) => a.has_vars() || b.has_vars(),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Num(_) | Expr::Const(_) => None,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn map_vars(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Var(i) => f(*i),
            Expr::Num(_) | Expr::Const(_) => self.clone(),
            Expr::Neg(a) => Expr::neg(a.map_vars(f)),
            Expr::Call(g, a) => Expr::call(*g, a.map_vars(f)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.map_vars(f), b.map_vars(f)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Num(x) if *x < 0.0 || x.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at column {column}: expected {expected}, found {found}")]
    Syntax {
        column: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },
    #[error("`{name}` at column {column} is not smooth and is not supported")]
    NonSmooth { name: String, column: usize },
    #[error("invalid coordinate list: {0}")]
    InvalidCoordinates(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{kind} in `{expr}` (argument value {value})")]
    Domain {
        kind: DomainKind,
        expr: String,
        value: f64,
    },
    #[error("expected {expected} bindings, got {got}")]
    Bindings { expected: usize, got: usize },
    #[error("bindings do not share one jet dimension")]
    DimensionMismatch,
}

/// A parsed, immutable expression together with its coordinate names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Arc<Expr>,
    coords: Arc<[String]>,
}

impl Expression {
    /// Parse `source` against the given coordinate names.
    pub fn parse<S: AsRef<str>>(source: &str, coordinate_names: &[S]) -> Result<Self, ParseError> {
        let coords = validate_coordinates(coordinate_names)?;
        let root = Parser::new(source, &coords)?.parse_all()?;
        Ok(Expression {
            root: Arc::new(root),
            coords,
        })
    }

    /// Wrap a tree built programmatically.
    pub fn from_expr(root: Expr, coords: Arc<[String]>) -> Result<Self, ParseError> {
        if coords.is_empty() {
            return Err(ParseError::InvalidCoordinates("no coordinates".into()));
        }
        if let Some(i) = root.max_var() {
            if i >= coords.len() {
                return Err(ParseError::InvalidCoordinates(format!(
                    "variable index {i} out of range for {} coordinates",
                    coords.len()
                )));
            }
        }
        Ok(Expression {
            root: Arc::new(root),
            coords,
        })
    }

    pub fn constant(c: f64, coords: Arc<[String]>) -> Self {
        Expression {
            root: Arc::new(Expr::Num(c)),
            coords,
        }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn coordinates(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn is_coordinate(&self, index: usize) -> bool {
        matches!(*self.root, Expr::Var(i) if i == index)
    }

    /// Rebind variables by name onto a different coordinate list.
    pub fn with_coordinates(&self, coords: Arc<[String]>) -> Result<Self, ParseError> {
        let mut used = Vec::new();
        collect_vars(&self.root, &mut used);
        let mut map = vec![0usize; self.coords.len()];
        for i in used {
            let name = &self.coords[i];
            map[i] = coords
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| ParseError::UnknownIdentifier {
                    name: name.clone(),
                    column: 0,
                })?;
        }
        let root = self.root.map_vars(&|i| Expr::Var(map[i]));
        Expression::from_expr(root, coords)
    }

    /// Replace coordinate `index` by another expression over the same coordinates.
    pub fn substitute(&self, index: usize, replacement: &Expression) -> Self {
        assert_eq!(self.coords, replacement.coords, "coordinate lists differ");
        let rep = replacement.root.as_ref().clone();
        let root = self
            .root
            .map_vars(&|i| if i == index { rep.clone() } else { Expr::Var(i) });
        Expression {
            root: Arc::new(root),
            coords: self.coords.clone(),
        }
    }

    /// AST-level product `self * other`.
    pub fn times(&self, other: &Expression) -> Self {
        assert_eq!(self.coords, other.coords, "coordinate lists differ");
        Expression {
            root: Arc::new(Expr::binary(
                BinOp::Mul,
                self.root.as_ref().clone(),
                other.root.as_ref().clone(),
            )),
            coords: self.coords.clone(),
        }
    }

    /// Evaluate with positional bindings, one per coordinate.
    pub fn evaluate<S: Scalar>(&self, bindings: &[S]) -> Result<S, EvalError> {
        if bindings.len() != self.coords.len() {
            return Err(EvalError::Bindings {
                expected: self.coords.len(),
                got: bindings.len(),
            });
        }
        eval_node(&self.root, bindings, &self.coords)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.evaluate(point)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.root, &self.coords)
    }
}

fn collect_vars(e: &Expr, out: &mut Vec<usize>) {
    match e {
        Expr::Var(i) => out.push(*i),
        Expr::Num(_) | Expr::Const(_) => {}
        Expr::Neg(a) | Expr::Call(_, a) => collect_vars(a, out),
        Expr::Binary(_, a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
    }
}

fn validate_coordinates<S: AsRef<str>>(names: &[S]) -> Result<Arc<[String]>, ParseError> {
    if names.is_empty() {
        return Err(ParseError::InvalidCoordinates("no coordinates".into()));
    }
    let mut out: Vec<String> = Vec::with_capacity(names.len());
    for n in names {
        let n = n.as_ref();
        let valid = n
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(ParseError::InvalidCoordinates(format!("`{n}` is not an identifier")));
        }
        if CONSTANTS.contains(&n) || Func::from_name(n).is_some() || NON_SMOOTH.contains(&n) {
            return Err(ParseError::InvalidCoordinates(format!("`{n}` is a reserved name")));
        }
        if out.iter().any(|o| o == n) {
            return Err(ParseError::InvalidCoordinates(format!("duplicate coordinate `{n}`")));
        }
        out.push(n.to_string());
    }
    Ok(out.into())
}

fn domain_error<S: Scalar>(kind: DomainKind, node: &Expr, arg: &S, coords: &[String]) -> EvalError {
    if kind == DomainKind::DimensionMismatch {
        return EvalError::DimensionMismatch;
    }
    EvalError::Domain {
        kind,
        expr: ExprDisplay { expr: node, coords }.to_string(),
        value: arg.value(),
    }
}

fn eval_node<S: Scalar>(node: &Expr, b: &[S], coords: &[String]) -> Result<S, EvalError> {
    let template = &b[0];
    match node {
        Expr::Num(x) => Ok(template.constant_like(*x)),
        Expr::Const(c) => Ok(template.constant_like(c.value())),
        Expr::Var(i) => Ok(b[*i].clone()),
        Expr::Neg(a) => Ok(eval_node(a, b, coords)?.neg()),
        Expr::Call(func, a) => {
            let x = eval_node(a, b, coords)?;
            x.apply(*func).map_err(|k| domain_error(k, node, &x, coords))
        }
        Expr::Binary(BinOp::Pow, base, exponent) => {
            let x = eval_node(base, b, coords)?;
            if !exponent.has_vars() {
                let k: f64 = eval_node(exponent, &[0.0f64], &[])?;
                if k.fract() == 0.0 && k.abs() <= 1024.0 {
                    return powi(&x, k as i64).map_err(|e| domain_error(e, node, &x, coords));
                }
                let lx = x.apply(Func::Log).map_err(|e| domain_error(e, node, &x, coords))?;
                let prod = lx.mul(&x.constant_like(k)).map_err(|e| domain_error(e, node, &x, coords))?;
                return prod.apply(Func::Exp).map_err(|e| domain_error(e, node, &x, coords));
            }
            let y = eval_node(exponent, b, coords)?;
            let lx = x.apply(Func::Log).map_err(|e| domain_error(e, node, &x, coords))?;
            let prod = y.mul(&lx).map_err(|e| domain_error(e, node, &x, coords))?;
            prod.apply(Func::Exp).map_err(|e| domain_error(e, node, &x, coords))
        }
        Expr::Binary(op, l, r) => {
            let x = eval_node(l, b, coords)?;
            let y = eval_node(r, b, coords)?;
            let res = match op {
                BinOp::Add => x.add(&y),
                BinOp::Sub => x.sub(&y),
                BinOp::Mul => x.mul(&y),
                BinOp::Div => x.div(&y),
                BinOp::Pow => unreachable!(),
            };
            res.map_err(|k| domain_error(k, node, &y, coords))
        }
    }
}

struct ExprDisplay<'a> {
    expr: &'a Expr,
    coords: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.coords)
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8, coords: &[String]) -> fmt::Result {
    if e.precedence() < min_prec {
        f.write_str("(")?;
        write_expr(f, e, coords)?;
        f.write_str(")")
    } else {
        write_expr(f, e, coords)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, coords: &[String]) -> fmt::Result {
    match e {
        Expr::Num(x) => {
            if x.is_sign_negative() {
                write!(f, "-{}", -x)
            } else {
                write!(f, "{x}")
            }
        }
        Expr::Const(c) => f.write_str(c.name()),
        Expr::Var(i) => match coords.get(*i) {
            Some(n) => f.write_str(n),
            None => write!(f, "x{i}"),
        },
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_operand(f, a, 3, coords)
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, coords)?;
            f.write_str(")")
        }
        Expr::Binary(op, l, r) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => (" * ", 2, 3),
                BinOp::Div => (" / ", 2, 3),
                BinOp::Pow => ("^", 5, 3),
            };
            write_operand(f, l, lp, coords)?;
            f.write_str(sym)?;
            write_operand(f, r, rp, coords)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(source: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                column,
                expected: "number".into(),
                found: text.clone(),
            })?;
            out.push((Tok::Num(value), column));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), column));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), column));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                column,
                expected: "number, identifier, operator or parenthesis".into(),
                found: format!("`{c}`"),
            });
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    coords: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(source: &str, coords: &'a [String]) -> Result<Self, ParseError> {
        let toks = lex(source)?;
        if toks.len() == 1 {
            return Err(ParseError::Empty);
        }
        Ok(Parser { toks, pos: 0, coords })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            column: self.column(),
            expected: expected.into(),
            found: self.peek().to_string(),
        }
    }

    fn parse_all(mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        if *self.peek() != Tok::End {
            return Err(self.error("operator or end of input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let column = self.column();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(Constant::Pi)),
                    "e" => return Ok(Expr::Const(Constant::E)),
                    _ => {}
                }
                if NON_SMOOTH.contains(&name.as_str()) {
                    return Err(ParseError::NonSmooth { name, column });
                }
                match Func::from_name(&name) {
                    Some(func) => {
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::call(func, arg))
                    }
                    None => Err(ParseError::UnknownIdentifier { name, column }),
                }
            }
            _ => Err(self.error("number, identifier, `-` or `(`")),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, c: &[&str]) -> Expression {
        Expression::parse(s, c).unwrap()
    }

    #[test]
    fn power_binds_tighter_than_call_result() {
        let e = p("sin(t)^2", &["t"]);
        assert_eq!(
            *e.root(),
            Expr::binary(BinOp::Pow, Expr::call(Func::Sin, Expr::Var(0)), Expr::Num(2.0))
        );
        let v = e.eval_f64(&[1.0]).unwrap();
        assert!((v - 0.708_073_418_273_571_2).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = p("-x^2", &["x"]);
        assert_eq!(e.eval_f64(&[3.0]).unwrap(), -9.0);
        let e = p("2^3^2", &["x"]);
        assert_eq!(e.eval_f64(&[0.0]).unwrap(), 512.0);
        let e = p("2^-1 * 3", &["x"]);
        assert_eq!(e.eval_f64(&[0.0]).unwrap(), 1.5);
        let e = p("8 / 4 / 2 - 1 - 1", &["x"]);
        assert_eq!(e.eval_f64(&[0.0]).unwrap(), -1.0);
    }

    #[test]
    fn constants_and_arithmetic() {
        let e = p("e^(2*t)", &["t", "x", "y"]);
        assert_eq!(e.eval_f64(&[0.0, 5.0, 7.0]).unwrap(), 1.0);
        let e = p("1/(r^2)", &["r", "th"]);
        assert_eq!(e.eval_f64(&[2.0, 0.0]).unwrap(), 0.25);
        let e = p("pi", &["x"]);
        assert_eq!(e.eval_f64(&[0.0]).unwrap(), std::f64::consts::PI);
        let e = p("1.5e-3 * 2E2", &["x"]);
        assert!((e.eval_f64(&[0.0]).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn integer_powers_accept_negative_bases() {
        let e = p("x^3", &["x"]);
        assert_eq!(e.eval_f64(&[-2.0]).unwrap(), -8.0);
        let e = p("x^-2", &["x"]);
        assert_eq!(e.eval_f64(&[-2.0]).unwrap(), 0.25);
        let e = p("x^0.5", &["x"]);
        assert!(matches!(
            e.eval_f64(&[-2.0]),
            Err(EvalError::Domain { kind: DomainKind::LogNonPositive, .. })
        ));
        assert!((e.eval_f64(&[4.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(Expression::parse("", &["x"]), Err(ParseError::Empty));
        assert_eq!(Expression::parse("   ", &["x"]), Err(ParseError::Empty));
        assert!(matches!(
            Expression::parse("x + y", &["x"]),
            Err(ParseError::UnknownIdentifier { ref name, column: 5 }) if name == "y"
        ));
        assert!(matches!(
            Expression::parse("abs(x)", &["x"]),
            Err(ParseError::NonSmooth { .. })
        ));
        assert!(matches!(
            Expression::parse("foo(x)", &["x"]),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            Expression::parse("(x + 1", &["x"]),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(Expression::parse("x y", &["x", "y"]), Err(ParseError::Syntax { .. })));
        assert!(matches!(Expression::parse("sin x", &["x"]), Err(ParseError::Syntax { .. })));
        assert!(matches!(Expression::parse("x $ 2", &["x"]), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            Expression::parse("x", &["x", "x"]),
            Err(ParseError::InvalidCoordinates(_))
        ));
        assert!(matches!(
            Expression::parse("x", &["pi"]),
            Err(ParseError::InvalidCoordinates(_))
        ));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = p("2 + 1/r", &["r"]);
        match e.eval_f64(&[0.0]) {
            Err(EvalError::Domain { kind, expr, .. }) => {
                assert_eq!(kind, DomainKind::DivisionByZero);
                assert_eq!(expr, "1 / r");
            }
            other => panic!("{other:?}"),
        }
        let e = p("log(x - 1)", &["x"]);
        assert!(matches!(
            e.eval_f64(&[0.5]),
            Err(EvalError::Domain { kind: DomainKind::LogNonPositive, .. })
        ));
        let e = p("sqrt(x)", &["x"]);
        assert!(e.eval_f64(&[-0.5]).is_err());
        let e = p("x^-1", &["x"]);
        assert!(matches!(
            e.eval_f64(&[0.0]),
            Err(EvalError::Domain { kind: DomainKind::ZeroToNegativePower, .. })
        ));
    }

    #[test]
    fn rebinding_and_substitution() {
        let phi = p("sin(t)", &["t"]);
        let coords: Arc<[String]> = vec!["t".to_string(), "y".to_string()].into();
        let moved = phi.with_coordinates(coords.clone()).unwrap();
        assert_eq!(moved.eval_f64(&[1.0, 9.0]).unwrap(), 1.0f64.sin());
        let bad: Arc<[String]> = vec!["s".to_string()].into();
        assert!(phi.with_coordinates(bad).is_err());

        let f = Expression::parse("t^2 + y", &coords).unwrap();
        let g = Expression::parse("2*y", &coords).unwrap();
        let h = f.substitute(0, &g);
        assert_eq!(h.eval_f64(&[0.0, 3.0]).unwrap(), 39.0);
    }

    fn arb_expr(nvars: usize) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|k| Expr::Num(k as f64 / 8.0)),
            Just(Expr::Const(Constant::Pi)),
            Just(Expr::Const(Constant::E)),
            (0..nvars).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Expr::neg),
                (0usize..9, inner.clone()).prop_map(|(k, a)| Expr::call(Func::ALL[k], a)),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(e in arb_expr(3)) {
            let coords: Arc<[String]> = vec!["t".into(), "x".into(), "y".into()].into();
            let expr = Expression::from_expr(e, coords.clone()).unwrap();
            let text = expr.to_string();
            let back = Expression::parse(&text, &coords).unwrap();
            prop_assert_eq!(back.root(), expr.root(), "{}", text);
        }

        #[test]
        fn undeclared_identifiers_are_rejected(name in "[a-d][a-z0-9_]{0,4}") {
            let declared = ["x", "y"];
            prop_assume!(!declared.contains(&name.as_str()) && name != "e");
            prop_assume!(Func::from_name(&name).is_none());
            let src = format!("x + {name}");
            prop_assert!(Expression::parse(&src, &declared).is_err());
        }
    }
}
