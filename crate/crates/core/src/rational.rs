//! Exact rational numbers used for every score and weight.
//!
//! Serialized as `{"num": .., "den": .., "decimal": ".."}`. Deserialization also
//! accepts decimal strings (`"0.25"`), fraction strings (`"1/4"`) and plain JSON
//! numbers, all converted exactly.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Significant digits used whenever a rational is shown as a decimal.
pub const DISPLAY_SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

impl Rational {
    /// Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Rational(BigRational::new(num, den)))
        }
    }

    /// Ratio of two counts. Panics if `den` is zero.
    pub fn ratio(num: usize, den: usize) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Exact binary value of a finite float.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// True when `0 <= self <= 1`.
    pub fn is_unit_interval(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Decimal rendering rounded (half away from zero) to `digits` significant
    /// digits, without exponent and without trailing zeros.
    pub fn to_decimal(&self, digits: usize) -> String {
        assert!(digits > 0);
        if self.0.is_zero() {
            return "0".to_string();
        }
        let negative = self.0.is_negative();
        let num = self.0.numer().abs();
        let den = self.0.denom().clone();
        let ten = BigInt::from(10u32);
        let lower = ten.pow(digits as u32 - 1);
        let upper = ten.pow(digits as u32);

        // scale so that lower <= num * 10^k / den < upper
        let mut k: i64 = digits as i64 - 1 - (num.to_string().len() as i64 - den.to_string().len() as i64);
        let scaled = |k: i64| -> (BigInt, BigInt) {
            if k >= 0 {
                (&num * ten.pow(k as u32), den.clone())
            } else {
                (num.clone(), &den * ten.pow((-k) as u32))
            }
        };
        loop {
            let (n, d) = scaled(k);
            let q = &n / &d;
            if q < lower {
                k += 1;
            } else if q >= upper {
                k -= 1;
            } else {
                break;
            }
        }
        let (n, d) = scaled(k);
        let (mut q, r) = n.div_rem(&d);
        if &r * 2u32 >= d {
            q += 1u32;
        }
        if q == upper {
            q /= 10u32;
            k -= 1;
        }

        let digits_str = q.to_string();
        let mut out = if k <= 0 {
            let mut s = digits_str;
            s.extend(std::iter::repeat_n('0', (-k) as usize));
            s
        } else {
            let k = k as usize;
            if k >= digits_str.len() {
                let mut s = String::from("0.");
                s.extend(std::iter::repeat_n('0', k - digits_str.len()));
                s.push_str(&digits_str);
                s
            } else {
                let split = digits_str.len() - k;
                format!("{}.{}", &digits_str[..split], &digits_str[split..])
            }
        };
        if out.contains('.') {
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
        if negative {
            out.insert(0, '-');
        }
        out
    }

    /// Twelve-significant-digit decimal used by every presentation surface.
    pub fn display_decimal(&self) -> String {
        self.to_decimal(DISPLAY_SIGNIFICANT_DIGITS)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

fn parse_bigint(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('+').unwrap_or(s);
    if digits.is_empty() {
        return None;
    }
    let (neg, body) = match digits.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, digits),
    };
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mag = BigInt::parse_bytes(body.as_bytes(), 10)?;
    Some(if neg { -mag } else { mag })
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseRationalError {
            input: input.to_string(),
            reason,
        };
        let s = input.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_bigint(n.trim()).ok_or_else(|| err("bad numerator"))?;
            let d = parse_bigint(d.trim()).ok_or_else(|| err("bad denominator"))?;
            return Rational::from_bigints(n, d).ok_or_else(|| err("zero denominator"));
        }

        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i64 = s[i + 1..].parse().map_err(|_| err("bad exponent"))?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (neg, mantissa) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("no digits"));
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err("unexpected character"));
        }
        if exponent.unsigned_abs() > 10_000 {
            return Err(err("exponent out of range"));
        }
        let all_digits = format!("{int_part}{frac_part}");
        let mut num = BigInt::parse_bytes(all_digits.as_bytes(), 10).unwrap_or_default();
        if neg {
            num = -num;
        }
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10u32);
        let value = if scale >= 0 {
            BigRational::from_integer(num * ten.pow(scale as u32))
        } else {
            BigRational::new(num, ten.pow((-scale) as u32))
        };
        Ok(Rational(value))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    /// Panics on division by zero.
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

fn int_to_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(n.to_string()),
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("num", &int_to_json(self.numer()))?;
        map.serialize_entry("den", &int_to_json(self.denom()))?;
        map.serialize_entry("decimal", &self.display_decimal())?;
        map.end()
    }
}

struct RationalVisitor;

fn json_to_int<E: de::Error>(v: &serde_json::Value) -> Result<BigInt, E> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(E::custom("rational component must be an integer"))
            }
        }
        serde_json::Value::String(s) => {
            parse_bigint(s.trim()).ok_or_else(|| E::custom("rational component must be an integer"))
        }
        _ => Err(E::custom("rational component must be an integer")),
    }
}

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational as {num, den}, a decimal string, or a number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        // shortest round-trip representation is what the user typed
        format!("{v}").parse().map_err(E::custom)
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Rational, A::Error> {
        let mut num = None;
        let mut den = None;
        while let Some(key) = map.next_key::<String>()? {
            let value: serde_json::Value = map.next_value()?;
            match key.as_str() {
                "num" => num = Some(json_to_int::<A::Error>(&value)?),
                "den" => den = Some(json_to_int::<A::Error>(&value)?),
                _ => {}
            }
        }
        let num = num.ok_or_else(|| de::Error::missing_field("num"))?;
        let den = den.unwrap_or_else(BigInt::one);
        Rational::from_bigints(num, den).ok_or_else(|| de::Error::custom("zero denominator"))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

impl Rational {
    pub fn signum(&self) -> Sign {
        self.0.numer().sign()
    }
}
