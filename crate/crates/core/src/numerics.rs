//! Configurable-precision real arithmetic.
//!
//! Every solver in this crate is generic over [`Real`]. Two backends are
//! provided: plain `f64` (53-bit, hardware) and [`BigReal`], a binary
//! floating-point number with a run-time precision and round-to-nearest-even
//! arithmetic.
//!
//! A `BigReal` carries its precision. Combining two values of different
//! precision is a programming error and panics; create every constant of a
//! run from the same [`Precision`].

use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use thiserror::Error;

const ROUNDING: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: u32 = 64;

/// Errors raised by the arithmetic layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    /// An elementary function was evaluated outside its domain.
    #[error("{function} is undefined at the given argument")]
    Domain { function: &'static str },
    /// A decimal string could not be parsed.
    #[error("invalid decimal number `{0}`")]
    Parse(String),
    /// The requested mantissa width is below the supported minimum.
    #[error("precision of {0} bits is below the minimum of 64")]
    PrecisionTooLow(u32),
}

/// Mantissa width in bits.
///
/// Multiprecision widths are rounded up to whole 64-bit words, so the value
/// reported by [`Precision::bits`] is always the width actually used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 64;
    /// Default working precision.
    pub const DEFAULT: Precision = Precision(256);
    /// Precision used for reference solutions.
    pub const REFERENCE: Precision = Precision(1024);
    /// IEEE double.
    pub const DOUBLE: Precision = Precision(53);

    pub fn new(bits: u32) -> Result<Self, NumError> {
        if bits < Self::MIN_BITS {
            return Err(NumError::PrecisionTooLow(bits));
        }
        Ok(Precision(bits.div_ceil(WORD_BITS) * WORD_BITS))
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// Significant decimal digits that identify every value at this precision.
    pub fn decimal_digits(self) -> usize {
        (f64::from(self.0) * core::f64::consts::LOG10_2).ceil() as usize + 1
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Real scalar used throughout the iteration schemes.
pub trait Real:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn precision(&self) -> Precision;
    fn from_i64(value: i64, precision: Precision) -> Self;
    /// Exact conversion of a binary double.
    fn from_f64(value: f64, precision: Precision) -> Self;
    fn parse_decimal(src: &str, precision: Precision) -> Result<Self, NumError>;
    /// Scientific notation `d.ddd…e±nn` with `digits` significant digits.
    fn to_decimal(&self, digits: usize) -> String;
    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn is_zero(&self) -> bool;

    fn sqrt(&self) -> Result<Self, NumError>;
    fn ln(&self) -> Result<Self, NumError>;
    fn exp(&self) -> Self;
    fn cos(&self) -> Self;
    fn sin(&self) -> Self;
    fn powi(&self, n: i32) -> Self;

    /// Integer constant at the precision of `self`.
    fn int(&self, value: i64) -> Self {
        Self::from_i64(value, self.precision())
    }

    fn zero_like(&self) -> Self {
        self.int(0)
    }

    fn one_like(&self) -> Self {
        self.int(1)
    }

    /// `2^-bits` at the given precision.
    fn unit_roundoff(precision: Precision) -> Self {
        Self::from_i64(2, precision).powi(-(precision.bits() as i32))
    }

    /// `10^exponent`.
    fn pow10(exponent: i32, precision: Precision) -> Self {
        Self::from_i64(10, precision).powi(exponent)
    }

    fn is_negative(&self) -> bool {
        *self < self.zero_like()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Elementary functions available to problem definitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementary {
    Cos,
    Sin,
    Exp,
    Log,
    Sqrt,
    PowInt(i32),
}

pub fn eval_elementary<R: Real>(function: Elementary, x: &R) -> Result<R, NumError> {
    match function {
        Elementary::Cos => Ok(x.cos()),
        Elementary::Sin => Ok(x.sin()),
        Elementary::Exp => Ok(x.exp()),
        Elementary::Log => x.ln(),
        Elementary::Sqrt => x.sqrt(),
        Elementary::PowInt(n) => {
            if n < 0 && x.is_zero() {
                return Err(NumError::Domain { function: "pow" });
            }
            Ok(x.powi(n))
        }
    }
}

/// Rounds a decimal mantissa (digit string, implicit point after the first
/// digit) to `digits` places and renders `d.ddd…e±nn`.
pub(crate) fn render_scientific(
    negative: bool,
    mantissa: &str,
    exponent: i64,
    digits: usize,
) -> String {
    let digits = digits.max(1);
    let mut kept: alloc::vec::Vec<u8> = mantissa.bytes().take(digits).collect();
    while kept.len() < digits {
        kept.push(b'0');
    }
    let mut exponent = exponent;
    if mantissa.as_bytes().get(digits).is_some_and(|&d| d >= b'5') {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, b'1');
                kept.pop();
                exponent += 1;
                break;
            }
            i -= 1;
            if kept[i] == b'9' {
                kept[i] = b'0';
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let mut out = String::with_capacity(digits + 8);
    if negative {
        out.push('-');
    }
    out.push(kept[0] as char);
    if digits > 1 {
        out.push('.');
        out.extend(kept[1..].iter().map(|&b| b as char));
    }
    out.push('e');
    out.push(if exponent < 0 { '-' } else { '+' });
    let magnitude = exponent.unsigned_abs();
    if magnitude < 10 {
        out.push('0');
    }
    out.push_str(&magnitude.to_string());
    out
}

/// Splits `[-]d.ddde±n` (any mantissa layout) into sign, normalised digit
/// string and the exponent of the leading digit. Zero yields `None`.
fn split_scientific(src: &str) -> Option<(bool, String, i64)> {
    let (negative, body) = match src.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, src.strip_prefix('+').unwrap_or(src)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let all: String = int_part.chars().chain(frac_part.chars()).collect();
    let lead = all.bytes().position(|b| b != b'0')?;
    let digits = all[lead..].to_string();
    let point_exponent = int_part.len() as i64 - 1 - lead as i64;
    Some((negative, digits, exponent + point_exponent))
}

fn zero_scientific(digits: usize) -> String {
    render_scientific(false, "0", 0, digits)
}

impl Real for f64 {
    fn precision(&self) -> Precision {
        Precision::DOUBLE
    }

    fn from_i64(value: i64, _: Precision) -> Self {
        value as f64
    }

    fn from_f64(value: f64, _: Precision) -> Self {
        value
    }

    fn parse_decimal(src: &str, _: Precision) -> Result<Self, NumError> {
        src.trim()
            .parse::<f64>()
            .map_err(|_| NumError::Parse(src.to_string()))
    }

    fn to_decimal(&self, digits: usize) -> String {
        if !f64::is_finite(*self) {
            return format!("{self}");
        }
        if *self == 0.0 {
            return zero_scientific(digits);
        }
        let raw = format!("{:.*e}", digits.max(1) - 1, self);
        match split_scientific(&raw) {
            Some((negative, mantissa, exponent)) => {
                render_scientific(negative, &mantissa, exponent, digits)
            }
            None => zero_scientific(digits),
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        libm::fabs(*self)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn sqrt(&self) -> Result<Self, NumError> {
        if *self < 0.0 {
            return Err(NumError::Domain { function: "sqrt" });
        }
        Ok(libm::sqrt(*self))
    }

    fn ln(&self) -> Result<Self, NumError> {
        if *self <= 0.0 {
            return Err(NumError::Domain { function: "log" });
        }
        Ok(libm::log(*self))
    }

    fn exp(&self) -> Self {
        libm::exp(*self)
    }

    fn cos(&self) -> Self {
        libm::cos(*self)
    }

    fn sin(&self) -> Self {
        libm::sin(*self)
    }

    fn powi(&self, n: i32) -> Self {
        libm::pow(*self, f64::from(n))
    }
}

/// Multiprecision binary floating-point value.
#[derive(Clone)]
pub struct BigReal {
    value: BigFloat,
    precision: Precision,
}

fn consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

impl BigReal {
    fn wrap(value: BigFloat, precision: Precision) -> Self {
        BigReal { value, precision }
    }

    fn bits(&self) -> usize {
        self.precision.bits() as usize
    }

    fn check(&self, other: &Self) {
        assert!(
            self.precision == other.precision,
            "mixed precisions: {} and {}",
            self.precision,
            other.precision
        );
    }

    pub fn is_nan(&self) -> bool {
        self.value.is_nan()
    }

    /// Full decimal expansion as produced by the backend.
    fn raw_decimal(&self) -> String {
        self.value
            .format(Radix::Dec, ROUNDING, &mut consts())
            .unwrap_or_else(|_| String::from("NaN"))
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(self.precision.decimal_digits()))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(self.precision.decimal_digits());
        f.write_str(&self.to_decimal(digits))
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

macro_rules! big_binary_op {
    ($trait:ident, $method:ident) => {
        impl $trait for BigReal {
            type Output = BigReal;

            fn $method(self, rhs: BigReal) -> BigReal {
                self.check(&rhs);
                let value = self.value.$method(&rhs.value, self.bits(), ROUNDING);
                BigReal::wrap(value, self.precision)
            }
        }
    };
}

big_binary_op!(Add, add);
big_binary_op!(Sub, sub);
big_binary_op!(Mul, mul);
big_binary_op!(Div, div);

impl Neg for BigReal {
    type Output = BigReal;

    fn neg(self) -> BigReal {
        BigReal::wrap(self.value.neg(), self.precision)
    }
}

impl Real for BigReal {
    fn precision(&self) -> Precision {
        self.precision
    }

    fn from_i64(value: i64, precision: Precision) -> Self {
        BigReal::wrap(
            BigFloat::from_i64(value, precision.bits() as usize),
            precision,
        )
    }

    fn from_f64(value: f64, precision: Precision) -> Self {
        BigReal::wrap(
            BigFloat::from_f64(value, precision.bits() as usize),
            precision,
        )
    }

    fn parse_decimal(src: &str, precision: Precision) -> Result<Self, NumError> {
        let trimmed = src.trim();
        let well_formed = !trimmed.is_empty()
            && trimmed
                .bytes()
                .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
            && trimmed.bytes().any(|b| b.is_ascii_digit());
        if !well_formed {
            return Err(NumError::Parse(src.to_string()));
        }
        let value = BigFloat::parse(
            trimmed,
            Radix::Dec,
            precision.bits() as usize,
            ROUNDING,
            &mut consts(),
        );
        if value.is_nan() {
            return Err(NumError::Parse(src.to_string()));
        }
        Ok(BigReal::wrap(value, precision))
    }

    fn to_decimal(&self, digits: usize) -> String {
        if self.value.is_nan() {
            return String::from("NaN");
        }
        if self.value.is_inf_pos() {
            return String::from("inf");
        }
        if self.value.is_inf_neg() {
            return String::from("-inf");
        }
        if self.value.is_zero() {
            return zero_scientific(digits);
        }
        match split_scientific(&self.raw_decimal()) {
            Some((negative, mantissa, exponent)) => {
                render_scientific(negative, &mantissa, exponent, digits)
            }
            None => zero_scientific(digits),
        }
    }

    fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.value.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        self.to_decimal(19).parse::<f64>().unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        BigReal::wrap(self.value.abs(), self.precision)
    }

    fn is_finite(&self) -> bool {
        !self.value.is_nan() && !self.value.is_inf()
    }

    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn sqrt(&self) -> Result<Self, NumError> {
        if self.value.is_negative() && !self.value.is_zero() {
            return Err(NumError::Domain { function: "sqrt" });
        }
        Ok(BigReal::wrap(
            self.value.sqrt(self.bits(), ROUNDING),
            self.precision,
        ))
    }

    fn ln(&self) -> Result<Self, NumError> {
        if !self.value.is_positive() || self.value.is_zero() {
            return Err(NumError::Domain { function: "log" });
        }
        let value = self.value.ln(self.bits(), ROUNDING, &mut consts());
        Ok(BigReal::wrap(value, self.precision))
    }

    fn exp(&self) -> Self {
        let value = self.value.exp(self.bits(), ROUNDING, &mut consts());
        BigReal::wrap(value, self.precision)
    }

    fn cos(&self) -> Self {
        let value = self.value.cos(self.bits(), ROUNDING, &mut consts());
        BigReal::wrap(value, self.precision)
    }

    fn sin(&self) -> Self {
        let value = self.value.sin(self.bits(), ROUNDING, &mut consts());
        BigReal::wrap(value, self.precision)
    }

    fn powi(&self, n: i32) -> Self {
        let p = self.bits();
        let magnitude = self.value.powi(n.unsigned_abs() as usize, p, ROUNDING);
        let value = if n < 0 {
            magnitude.reciprocal(p, ROUNDING)
        } else {
            magnitude
        };
        BigReal::wrap(value, self.precision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64, bits: u32) -> BigReal {
        BigReal::from_i64(v, Precision::new(bits).unwrap())
    }

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    #[test]
    fn precision_rounds_to_words_and_rejects_narrow() {
        assert_eq!(Precision::new(64).unwrap().bits(), 64);
        assert_eq!(Precision::new(100).unwrap().bits(), 128);
        assert_eq!(Precision::new(63), Err(NumError::PrecisionTooLow(63)));
    }

    #[test]
    fn cos_of_zero_is_one() {
        let x = big(0, 256);
        assert_eq!(eval_elementary(Elementary::Cos, &x).unwrap(), big(1, 256));
    }

    #[test]
    fn sqrt_two_matches_newton_oracle() {
        // y <- (y + 2/y)/2 from y = 1.5, iterated well past convergence
        let prec = p(64);
        let two = BigReal::from_i64(2, prec);
        let mut y = BigReal::parse_decimal("1.5", prec).unwrap();
        for _ in 0..10 {
            y = (y.clone() + two.clone() / y.clone()) / two.clone();
        }
        let root = eval_elementary(Elementary::Sqrt, &two).unwrap();
        let ulp = BigReal::unit_roundoff(prec) * two.clone();
        assert!((root.clone() - y).abs() <= ulp.clone() + ulp);
        assert!(root.to_decimal(20).starts_with("1.41421356237309504"));
    }

    #[test]
    fn cos_three_matches_taylor_oracle() {
        // Taylor series with the remainder bounded by the first omitted term.
        let prec = p(256);
        let x = BigReal::from_i64(3, prec);
        let mut term = x.one_like();
        let mut sum = term.clone();
        let mut k = 0i64;
        loop {
            term = -term * x.clone() * x.clone() / x.int((2 * k + 1) * (2 * k + 2));
            k += 1;
            sum = sum + term.clone();
            if term.abs() < BigReal::pow10(-90, prec) {
                break;
            }
        }
        let c = x.cos();
        assert!((c.clone() - sum).abs() < BigReal::pow10(-70, prec));
        assert!(c.to_decimal(15).starts_with("-9.8999249660044"));
    }

    #[test]
    fn log_and_sqrt_reject_negative_arguments() {
        let x = big(-1, 128);
        assert_eq!(x.ln(), Err(NumError::Domain { function: "log" }));
        assert_eq!(x.sqrt(), Err(NumError::Domain { function: "sqrt" }));
        assert!(eval_elementary(Elementary::Log, &-1.0f64).is_err());
        assert!(big(0, 128).ln().is_err());
    }

    #[test]
    fn scientific_rendering() {
        let prec = p(256);
        let v = BigReal::parse_decimal("0.000123456", prec).unwrap();
        assert_eq!(v.to_decimal(3), "1.23e-04");
        assert_eq!(v.to_decimal(5), "1.2346e-04");
        assert_eq!((-v).to_decimal(1), "-1e-04");
        let nine = BigReal::parse_decimal("9.996", prec).unwrap();
        assert_eq!(nine.to_decimal(3), "1.00e+01");
        assert_eq!(big(0, 64).to_decimal(3), "0.00e+00");
        assert_eq!(2.26f64.to_decimal(3), "2.26e+00");
        assert_eq!((-1.5e-126f64).to_decimal(2), "-1.5e-126");
        let tiny = BigReal::parse_decimal("6.25e-125", p(512)).unwrap();
        assert_eq!(tiny.to_decimal(3), "6.25e-125");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(BigReal::parse_decimal("abc", p(64)).is_err());
        assert!(BigReal::parse_decimal("", p(64)).is_err());
        assert!(f64::parse_decimal("1.2.3", Precision::DOUBLE).is_err());
    }

    #[test]
    #[should_panic(expected = "mixed precisions")]
    fn mixing_precisions_panics() {
        let _ = big(1, 128) + big(1, 256);
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let two = big(2, 128);
        assert_eq!(
            two.powi(-2),
            BigReal::parse_decimal("0.25", p(128)).unwrap()
        );
        assert_eq!(two.powi(0), big(1, 128));
        assert!(eval_elementary(Elementary::PowInt(-1), &big(0, 128)).is_err());
    }

    #[test]
    fn to_f64_is_close() {
        let third = big(1, 256) / big(3, 256);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
    }

    proptest::proptest! {
        #[test]
        fn add_sub_round_trip(a in -1.0e6f64..1.0e6, b in -1.0e6f64..1.0e6) {
            let prec = p(256);
            let (x, y) = (BigReal::from_f64(a, prec), BigReal::from_f64(b, prec));
            let back = (x.clone() + y.clone()) - y;
            let tol = BigReal::unit_roundoff(prec) * BigReal::from_f64(2.0e6, prec);
            proptest::prop_assert!((back - x).abs() <= tol);
        }

        #[test]
        fn decimal_round_trip(a in -1.0e30f64..1.0e30, digits in 5usize..60) {
            let prec = p(256);
            let x = BigReal::from_f64(a, prec) / BigReal::from_i64(7, prec);
            let text = x.to_decimal(digits);
            let back = BigReal::parse_decimal(&text, prec).unwrap();
            proptest::prop_assert_eq!(back.to_decimal(digits), text);
        }
    }
}
