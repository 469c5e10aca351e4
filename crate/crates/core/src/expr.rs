//! Expression trees over one variable `x`, with symbolic differentiation.
//!
//! Used for the built-in problem corpus and for user-supplied problems.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::function::ScalarFunction;
use crate::numerics::{eval_elementary, Elementary, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Cos,
    Sin,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn elementary(self) -> Elementary {
        match self {
            Func::Cos => Elementary::Cos,
            Func::Sin => Elementary::Sin,
            Func::Exp => Elementary::Exp,
            Func::Log => Elementary::Log,
            Func::Sqrt => Elementary::Sqrt,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    /// Decimal literal, kept as text so it is parsed at the working precision.
    Decimal(String),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

// Smart constructors fold the trivial cases so repeated differentiation
// stays small.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(v)
    }

    fn as_int(&self) -> Option<i64> {
        match self {
            Expr::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Int(v) => Expr::Int(-v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(0), _) => b,
            (_, Some(0)) => a,
            (Some(x), Some(y)) if x.checked_add(y).is_some() => Expr::Int(x + y),
            _ => match b {
                Expr::Neg(inner) => Expr::Sub(Box::new(a), inner),
                b => Expr::Add(Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (_, Some(0)) => a,
            (Some(0), _) => Expr::neg(b),
            (Some(x), Some(y)) if x.checked_sub(y).is_some() => Expr::Int(x - y),
            _ => match b {
                Expr::Neg(inner) => Expr::Add(Box::new(a), inner),
                b => Expr::Sub(Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(0), _) | (_, Some(0)) => Expr::Int(0),
            (Some(1), _) => b,
            (_, Some(1)) => a,
            (Some(-1), _) => Expr::neg(b),
            (_, Some(-1)) => Expr::neg(a),
            (Some(x), Some(y)) if x.checked_mul(y).is_some() => Expr::Int(x * y),
            _ => match (a, b) {
                (Expr::Neg(a), Expr::Neg(b)) => Expr::Mul(a, b),
                (Expr::Neg(a), b) => Expr::neg(Expr::mul(*a, b)),
                (a, Expr::Neg(b)) => Expr::neg(Expr::mul(a, *b)),
                (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_int(), b.as_int()) {
            (Some(0), _) => Expr::Int(0),
            (_, Some(1)) => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match n {
            0 => Expr::Int(1),
            1 => a,
            _ => match a.as_int() {
                Some(0) if n > 0 => Expr::Int(0),
                Some(1) => Expr::Int(1),
                _ => Expr::Pow(Box::new(a), n),
            },
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn eval<R: Real>(&self, x: &R) -> Result<R, Error> {
        Ok(match self {
            Expr::Int(v) => x.int(*v),
            Expr::Decimal(text) => R::parse_decimal(text, x.precision())?,
            Expr::X => x.clone(),
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => a.eval(x)? / b.eval(x)?,
            Expr::Pow(a, n) => eval_elementary(Elementary::PowInt(*n), &a.eval(x)?)?,
            Expr::Call(f, a) => eval_elementary(f.elementary(), &a.eval(x)?)?,
        })
    }

    /// Symbolic derivative with respect to `x`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Int(_) | Expr::Decimal(_) => Expr::Int(0),
            Expr::X => Expr::Int(1),
            Expr::Neg(a) => Expr::neg(a.derivative()),
            Expr::Add(a, b) => Expr::add(a.derivative(), b.derivative()),
            Expr::Sub(a, b) => Expr::sub(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative()),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.derivative(), (**b).clone()),
                    Expr::mul((**a).clone(), b.derivative()),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::Int(i64::from(*n)), Expr::pow((**a).clone(), n - 1)),
                a.derivative(),
            ),
            Expr::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, inner)),
                    Func::Sin => Expr::call(Func::Cos, inner),
                    Func::Exp => Expr::call(Func::Exp, inner),
                    Func::Log => Expr::div(Expr::Int(1), inner),
                    Func::Sqrt => Expr::div(
                        Expr::Int(1),
                        Expr::mul(Expr::Int(2), Expr::call(Func::Sqrt, inner)),
                    ),
                };
                Expr::mul(outer, a.derivative())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Int(v) if *v < 0 => 3,
            Expr::Decimal(t) if t.starts_with('-') => 3,
            _ => 5,
        }
    }
}

fn leads_with_minus(e: &Expr) -> bool {
    match e {
        Expr::Neg(_) => true,
        Expr::Int(v) => *v < 0,
        Expr::Decimal(t) => t.starts_with('-'),
        Expr::Add(a, _) | Expr::Sub(a, _) | Expr::Mul(a, _) | Expr::Div(a, _) => {
            leads_with_minus(a)
        }
        _ => false,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_right(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min || leads_with_minus(e) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Decimal(t) => f.write_str(t),
            Expr::X => f.write_str("x"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_operand(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str("+")?;
                write_right(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str("-")?;
                write_right(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str("*")?;
                write_right(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str("/")?;
                write_right(f, b, 3)
            }
            Expr::Pow(a, n) => {
                write_operand(f, a, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// An expression together with its derivatives up to a fixed order and an
/// optional fixed-point form `x = g(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Analytic {
    derivatives: Vec<Expr>,
    fixed_point: Option<Expr>,
}

impl Analytic {
    pub fn new(expr: Expr, max_order: usize) -> Self {
        let mut derivatives = Vec::with_capacity(max_order + 1);
        derivatives.push(expr);
        for k in 0..max_order {
            let next = derivatives[k].derivative();
            derivatives.push(next);
        }
        Analytic {
            derivatives,
            fixed_point: None,
        }
    }

    pub fn with_fixed_point(mut self, g: Expr) -> Self {
        self.fixed_point = Some(g);
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.derivatives[0]
    }

    pub fn derivative_expr(&self, order: usize) -> Option<&Expr> {
        self.derivatives.get(order)
    }

    pub fn fixed_point(&self) -> Option<&Expr> {
        self.fixed_point.as_ref()
    }
}

impl<R: Real> ScalarFunction<R> for Analytic {
    fn derivative(&self, x: &R, order: usize) -> Result<R, Error> {
        self.derivatives
            .get(order)
            .ok_or(Error::MissingDerivative { order })?
            .eval(x)
    }

    fn max_order(&self) -> usize {
        self.derivatives.len() - 1
    }

    fn fixed_point_map(&self, x: &R) -> Option<Result<R, Error>> {
        self.fixed_point.as_ref().map(|g| g.eval(x))
    }
}

/// Syntax error with a 1-based character column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub column: usize,
    pub message: &'static str,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl core::error::Error for ParseError {}

/// Parses an expression in `x`.
///
/// Grammar: numbers, `x`, `+ - * /`, `^` with an integer exponent
/// (right-associative), parentheses, and `cos sin exp log sqrt`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected input"));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &'static str) -> ParseError {
        ParseError {
            column: self.pos + 1,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), self.exponent()?));
        }
        Ok(base)
    }

    /// Integer exponent, optionally signed or parenthesised; a further `^`
    /// binds to the right.
    fn exponent(&mut self) -> Result<i32, ParseError> {
        let start = self.pos;
        let paren = self.eat('(');
        let negative = self.eat('-');
        if !negative {
            self.eat('+');
        }
        self.skip_ws();
        let digits_at = self.pos;
        while self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == digits_at {
            return Err(self.error("expected an integer exponent"));
        }
        let text: String = self.chars[digits_at..self.pos].iter().collect();
        let mut value: i32 = text.parse().map_err(|_| ParseError {
            column: start + 1,
            message: "exponent is too large",
        })?;
        if negative {
            value = -value;
        }
        if paren && !self.eat(')') {
            return Err(self.error("expected ')'"));
        }
        if self.eat('^') {
            let outer = self.exponent()?;
            let power = u32::try_from(outer).map_err(|_| ParseError {
                column: start + 1,
                message: "exponent must be an integer",
            })?;
            value = value.checked_pow(power).ok_or(ParseError {
                column: start + 1,
                message: "exponent is too large",
            })?;
        }
        Ok(value)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.sum()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self
                .chars
                .get(self.pos)
                .is_some_and(char::is_ascii_alphanumeric)
            {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos].iter().collect();
            if name == "x" {
                return Ok(Expr::X);
            }
            let func = Func::from_name(&name).ok_or(ParseError {
                column: start + 1,
                message: "unknown identifier",
            })?;
            if !self.eat('(') {
                return Err(self.error("expected '('"));
            }
            let arg = self.sum()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Expr::call(func, arg));
        }
        Err(self.error("unexpected character"))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digit = |p: &Parser| p.chars.get(p.pos).is_some_and(char::is_ascii_digit);
        while digit(self) {
            self.pos += 1;
        }
        let mut integral = true;
        if self.chars.get(self.pos) == Some(&'.') {
            integral = false;
            self.pos += 1;
            while digit(self) {
                self.pos += 1;
            }
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if digit(self) {
                integral = false;
                while digit(self) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if text == "." {
            return Err(ParseError {
                column: start + 1,
                message: "malformed number",
            });
        }
        if integral {
            if let Ok(v) = text.parse::<i64>() {
                return Ok(Expr::Int(v));
            }
        }
        Ok(Expr::Decimal(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn x() -> Expr {
        Expr::X
    }

    #[test]
    fn power_rule_and_folding() {
        let f = Expr::sub(Expr::pow(x(), 2), Expr::Int(2));
        let d = f.derivative();
        assert_eq!(d.to_string(), "2*x");
        assert_eq!(d.eval(&3.0).unwrap(), 6.0);
        assert_eq!(d.derivative().to_string(), "2");
        assert_eq!(d.derivative().derivative(), Expr::Int(0));
    }

    #[test]
    fn chain_rule_for_calls() {
        let f = Expr::sub(Expr::call(Func::Cos, x()), x());
        assert_eq!(f.derivative().to_string(), "-sin(x)-1");
        let g = Expr::mul(x(), Expr::call(Func::Exp, x()));
        let g1 = g.derivative();
        let at = 0.5f64;
        assert!((g1.eval(&at).unwrap() - (1.0 + at) * at.exp()).abs() < 1e-14);
        let s = Expr::call(Func::Sqrt, Expr::mul(Expr::Int(3), x()));
        assert!((s.derivative().eval(&2.0).unwrap() - 3.0 / (2.0 * 6f64.sqrt())).abs() < 1e-14);
        let l = Expr::call(Func::Log, Expr::pow(x(), 2));
        assert!((l.derivative().eval(&4.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule() {
        let q = Expr::div(Expr::Int(1), x());
        assert!((q.derivative().eval(&2.0).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn analytic_reports_missing_orders() {
        let a = Analytic::new(Expr::pow(x(), 3), 2);
        assert_eq!(ScalarFunction::<f64>::max_order(&a), 2);
        assert_eq!(a.derivative(&2.0f64, 2).unwrap(), 12.0);
        assert_eq!(
            a.derivative(&2.0f64, 3),
            Err(Error::MissingDerivative { order: 3 })
        );
        assert!(ScalarFunction::<f64>::fixed_point_map(&a, &1.0).is_none());
    }

    #[test]
    fn domain_errors_surface() {
        let l = Expr::call(Func::Log, x());
        assert!(matches!(l.eval(&-1.0f64), Err(Error::Numeric(_))));
    }

    #[test]
    fn parses_and_prints_round_trip() {
        for src in [
            "cos(x)-x",
            "x^2-2",
            "x*exp(x)",
            "(x-2)^2+1",
            "x^4-2*x^2",
            "exp(x)-2*x-1",
            "-x^2",
            "x-(-2)",
            "1.5e-3*x",
        ] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src}");
        }
        assert_eq!(
            parse("2^3^2").unwrap(),
            Expr::Pow(Box::new(Expr::Int(2)), 9)
        );
        assert_eq!(parse("x^(-2)").unwrap(), Expr::Pow(Box::new(Expr::X), -2));
    }

    #[test]
    fn parsed_values_and_derivatives() {
        let f = Analytic::new(parse("cos(x)-x").unwrap(), 1);
        assert_eq!(f.value(&3.0f64).unwrap(), 3f64.cos() - 3.0);
        let g = Analytic::new(parse("x^2-2").unwrap(), 1);
        assert_eq!(g.derivative(&3.0f64, 1).unwrap(), 6.0);
        assert_eq!(parse("-x^2").unwrap().eval(&3.0f64).unwrap(), -9.0);
        assert_eq!(parse("2*x+3*x").unwrap().eval(&1.0f64).unwrap(), 5.0);
        assert_eq!(parse("8/2/2").unwrap().eval(&0.0f64).unwrap(), 2.0);
    }

    #[test]
    fn parse_errors_carry_columns() {
        assert_eq!(parse("log(x").unwrap_err().column, 6);
        assert_eq!(parse("x+").unwrap_err().column, 3);
        assert_eq!(parse("foo(x)").unwrap_err().column, 1);
        assert_eq!(parse("x^y").unwrap_err().column, 3);
        assert_eq!(parse("x)").unwrap_err().column, 2);
        assert_eq!(parse("").unwrap_err().column, 1);
    }

    #[test]
    fn display_parenthesises_by_precedence() {
        let e = Expr::mul(
            Expr::add(x(), Expr::Int(1)),
            Expr::pow(Expr::sub(x(), Expr::Int(2)), 3),
        );
        assert_eq!(e.to_string(), "(x+1)*(x-2)^3");
        let n = Expr::neg(Expr::pow(x(), 2));
        assert_eq!(n.to_string(), "-x^2");
        assert_eq!(Expr::pow(x(), -2).to_string(), "x^(-2)");
    }
}
