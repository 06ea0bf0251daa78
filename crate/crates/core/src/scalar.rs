//! The single number type of the engine.
//!
//! A [`Scalar`] is either an exact rational or a binary floating-point value
//! with an explicit precision (in bits). Arithmetic between an exact and a
//! float operand promotes the exact side to the float's precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_base::{Abs, Signed};
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Binary arbitrary-precision float used in float mode.
pub type Real = FBig<HalfEven, 2>;

/// Smallest precision accepted in float mode.
pub const MIN_FLOAT_BITS: usize = 128;
/// Default precision in float mode.
pub const DEFAULT_FLOAT_BITS: usize = 256;

/// Arithmetic mode of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float { bits: usize },
}

impl Mode {
    /// Float mode at `bits` of precision; rejects anything below 128 bits.
    pub fn float(bits: usize) -> Result<Mode> {
        if bits < MIN_FLOAT_BITS {
            return Err(Error::Precision(format!(
                "float mode needs at least {MIN_FLOAT_BITS} bits, got {bits}"
            )));
        }
        Ok(Mode::Float { bits })
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Mode::Exact)
    }

    pub fn bits(self) -> Option<usize> {
        match self {
            Mode::Exact => None,
            Mode::Float { bits } => Some(bits),
        }
    }

    pub fn zero(self) -> Scalar {
        self.int(0)
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }

    pub fn int(self, v: i64) -> Scalar {
        self.rational(RBig::from(v))
    }

    /// `num / den`; panics if `den == 0`.
    pub fn ratio(self, num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        self.rational(RBig::from_parts_signed(IBig::from(num), IBig::from(den)))
    }

    pub fn rational(self, r: RBig) -> Scalar {
        match self {
            Mode::Exact => Scalar::Exact(r),
            Mode::Float { bits } => Scalar::Float(r.to_float::<HalfEven, 2>(bits).value()),
        }
    }

    /// Parses `"a/b"`, an integer, or a decimal such as `"0.3"` or `"1.5e-3"`.
    ///
    /// Decimals are read as exact rationals first, so `"0.3"` is `3/10` in
    /// exact mode and the correctly rounded binary value in float mode.
    pub fn parse(self, s: &str) -> Result<Scalar> {
        Ok(self.rational(parse_rational(s)?))
    }

    /// Converts `x` into this mode. Float to exact is rejected.
    pub fn convert(self, x: &Scalar) -> Result<Scalar> {
        match (self, x) {
            (Mode::Exact, Scalar::Exact(_)) => Ok(x.clone()),
            (Mode::Exact, Scalar::Float(_)) => Err(Error::Parameter(
                "cannot convert a float value to exact mode".into(),
            )),
            (Mode::Float { bits }, Scalar::Exact(r)) => {
                Ok(Scalar::Float(r.to_float::<HalfEven, 2>(bits).value()))
            }
            (Mode::Float { bits }, Scalar::Float(f)) => {
                Ok(Scalar::Float(f.clone().with_precision(bits).value()))
            }
        }
    }

    /// `10^exp` in this mode.
    pub fn pow10(self, exp: i32) -> Scalar {
        self.int(10).powi(exp as i64)
    }
}

fn parse_rational(s: &str) -> Result<RBig> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse number {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n.trim()).ok_or_else(bad)?;
        let d = parse_decimal(d.trim()).ok_or_else(bad)?;
        if d == RBig::ZERO {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<RBig> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = RBig::from(IBig::from(all.parse::<UBig>().ok()?));
    let scale = exp - frac_part.len() as i64;
    value *= RBig::from(10).pow(scale as isize);
    Some(if neg { -value } else { value })
}

/// Exact rational or arbitrary-precision real.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(RBig),
    Float(Real),
}

fn promote(r: &RBig, precision: usize) -> Real {
    r.to_float::<HalfEven, 2>(precision.max(MIN_FLOAT_BITS)).value()
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(f) => Mode::Float {
                bits: f.precision(),
            },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Exact zero test; float values compare their stored bits.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => *r == RBig::ZERO,
            Scalar::Float(f) => f.repr().significand().is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(f) => f.repr().sign() == dashu_base::Sign::Negative && !f.repr().significand().is_zero(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.clone().abs()),
            Scalar::Float(f) => Scalar::Float(f.clone().abs()),
        }
    }

    pub fn zero_like(&self) -> Scalar {
        self.mode().zero()
    }

    pub fn one_like(&self) -> Scalar {
        self.mode().one()
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / rhs)
    }

    pub fn recip(&self) -> Result<Scalar> {
        self.one_like().checked_div(self)
    }

    /// Integer power; negative exponents invert (panics on `0^-n`).
    pub fn powi(&self, e: i64) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.pow(e as isize)),
            Scalar::Float(f) => {
                if e == 0 {
                    Scalar::Float(Real::ONE.with_precision(f.precision()).value())
                } else if e > 0 {
                    Scalar::Float(f.powi(IBig::from(e)))
                } else {
                    let inv = Real::ONE.with_precision(f.precision()).value() / f;
                    Scalar::Float(inv.powi(IBig::from(-e)))
                }
            }
        }
    }

    pub fn square(&self) -> Scalar {
        self * self
    }

    pub fn max_abs<'a>(a: &'a Scalar, b: &'a Scalar) -> &'a Scalar {
        if a.abs() >= b.abs() {
            a
        } else {
            b
        }
    }

    /// `|self| <= tol`.
    pub fn within(&self, tol: &Scalar) -> bool {
        self.abs() <= *tol
    }

    /// `|self - other| <= tol`.
    pub fn approx_eq(&self, other: &Scalar, tol: &Scalar) -> bool {
        (self - other).within(tol)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().value(),
            Scalar::Float(f) => f.to_f64().value(),
        }
    }

    /// Float copy of the value at `bits` of precision.
    pub fn to_float(&self, bits: usize) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Float(promote(r, bits)),
            Scalar::Float(f) => Scalar::Float(f.clone().with_precision(bits).value()),
        }
    }

    pub fn as_rational(&self) -> Option<&RBig> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Natural logarithm as a float; exact inputs use `bits` of precision.
    pub fn ln(&self, bits: usize) -> Result<Scalar> {
        if !self.is_positive() {
            return Err(Error::Parameter(format!("ln of non-positive value {self}")));
        }
        let f = match self {
            Scalar::Exact(r) => promote(r, bits),
            Scalar::Float(f) => f.clone(),
        };
        Ok(Scalar::Float(f.ln()))
    }

    /// Decimal rendering with `digits` significant digits (floats only;
    /// exact values always print as `num/den`).
    pub fn to_string_digits(&self, digits: usize) -> String {
        match self {
            Scalar::Exact(r) => format_rational(r),
            Scalar::Float(f) => format_real(f, digits),
        }
    }

    /// Decimal rendering with `digits` significant digits in either mode.
    pub fn approx_string(&self, digits: usize) -> String {
        match self.to_float(DEFAULT_FLOAT_BITS) {
            Scalar::Float(f) => format_real(&f, digits),
            Scalar::Exact(_) => unreachable!("to_float returns a float"),
        }
    }
}

fn format_rational(r: &RBig) -> String {
    if *r.denominator() == UBig::ONE {
        r.numerator().to_string()
    } else {
        format!("{}/{}", r.numerator(), r.denominator())
    }
}

fn format_real(f: &Real, digits: usize) -> String {
    if f.repr().significand().is_zero() {
        return "0".into();
    }
    let dec = f.to_decimal().value().with_precision(digits.max(1)).value();
    format!("{dec:e}")
}

/// Significant decimal digits carried by a float of `bits` precision.
pub fn decimal_digits(bits: usize) -> usize {
    ((bits as f64) * std::f64::consts::LOG10_2).floor() as usize
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => f.write_str(&format_rational(r)),
            Scalar::Float(x) => f.write_str(&format_real(x, decimal_digits(x.precision()))),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a, 'b> $tr<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a $op b),
                    (Scalar::Exact(a), Scalar::Float(b)) => {
                        Scalar::Float(&promote(a, b.precision()) $op b)
                    }
                    (Scalar::Float(a), Scalar::Exact(b)) => {
                        Scalar::Float(a $op &promote(b, a.precision()))
                    }
                }
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
        impl<'b> $tr<&'b Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}

impl PartialEq for Scalar {
    /// Value equality. Float code paths compare through [`Scalar::approx_eq`]
    /// instead; this impl exists for exact-mode assertions.
    fn eq(&self, other: &Scalar) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        Some(match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.cmp(b),
            (Scalar::Exact(a), Scalar::Float(b)) => promote(a, b.precision()).cmp(b),
            (Scalar::Float(a), Scalar::Exact(b)) => a.cmp(&promote(b, a.precision())),
        })
    }
}

impl std::iter::Sum for Scalar {
    /// Sums a non-empty iterator; an empty one yields exact zero.
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        let mut it = iter;
        match it.next() {
            None => Mode::Exact.zero(),
            Some(first) => it.fold(first, |acc, x| acc + x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_zeroth_power_keeps_precision() {
        let m = Mode::Float { bits: 256 };
        let x = m.ratio(3, 10).powi(0);
        assert_eq!(x.mode(), m);
        assert!((&x - &m.one()).checked_div(&m.int(2)).unwrap().is_zero());
    }

    #[test]
    fn parse_forms() {
        let m = Mode::Exact;
        assert_eq!(m.parse("3/10").unwrap(), m.ratio(3, 10));
        assert_eq!(m.parse("0.3").unwrap(), m.ratio(3, 10));
        assert_eq!(m.parse("-1.5e-2").unwrap(), m.ratio(-3, 200));
        assert_eq!(m.parse("7").unwrap(), m.int(7));
        assert!(m.parse("abc").is_err());
        assert!(m.parse("1/0").is_err());
    }

    #[test]
    fn float_needs_min_precision() {
        assert!(Mode::float(64).is_err());
        assert!(Mode::float(128).is_ok());
    }

    #[test]
    fn mixed_arithmetic_promotes() {
        let f = Mode::float(256).unwrap();
        let x = f.ratio(1, 3) + Mode::Exact.ratio(1, 3);
        assert_eq!(x.mode(), f);
        let tol = f.pow10(-70);
        assert!(x.approx_eq(&f.ratio(2, 3), &tol));
    }

    #[test]
    fn powers_and_display() {
        let m = Mode::Exact;
        let q = m.ratio(1, 2);
        assert_eq!(q.powi(-3), m.int(8));
        assert_eq!(q.powi(3).to_string(), "1/8");
        let f = Mode::float(128).unwrap();
        assert_eq!(f.ratio(1, 2).powi(-3).to_f64(), 8.0);
        assert_eq!(f.zero().to_string(), "0");
    }

    #[test]
    fn ln_of_half() {
        let v = Mode::Exact.ratio(1, 2).ln(256).unwrap();
        assert!((v.to_f64() + std::f64::consts::LN_2).abs() < 1e-15);
        assert!(Mode::Exact.zero().ln(256).is_err());
    }
}
