//! Exact rational helpers shared by the rubric, scoring and interchange layers.
//!
//! All weight and score arithmetic is carried out on [`Exact`] values. Floats
//! only ever appear when a weight has to be written back out as a JSON number.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Arbitrary precision rational used for every aggregate.
pub type Exact = BigRational;

pub fn from_int(value: i64) -> Exact {
    BigRational::from_integer(BigInt::from(value))
}

/// Parses a plain or scientific decimal literal (`25`, `16.7`, `1e3`, `-0.5`) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Exact> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Renders `value` as a finite decimal string if its reduced denominator
/// has no prime factors besides 2 and 5. Returns `None` otherwise.
pub fn to_terminating_decimal(value: &Exact) -> Option<String> {
    let den = value.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut rest = den.clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return None;
    }
    let places = twos.max(fives);
    Some(fixed_point(value, places, false))
}

/// Renders `value` with exactly `places` fractional digits, rounding half away from zero.
pub fn to_fixed(value: &Exact, places: usize) -> String {
    fixed_point(value, places, true)
}

fn fixed_point(value: &Exact, places: usize, pad: bool) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = value.abs() * BigRational::from_integer(scale.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2u32));
    let rounded = (scaled + half).floor().to_integer();
    let negative = value.is_negative() && !rounded.is_zero();
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if places > 0 {
        let mut frac = frac_part.to_string();
        while frac.len() < places {
            frac.insert(0, '0');
        }
        if !pad {
            while frac.ends_with('0') {
                frac.pop();
            }
        }
        if !frac.is_empty() {
            out.push('.');
            out.push_str(&frac);
        }
    }
    out
}

/// Nearest integer, ties rounding up (toward positive infinity).
pub fn round_half_up(value: &Exact) -> i64 {
    let half = BigRational::new(BigInt::one(), BigInt::from(2u32));
    (value + half)
        .floor()
        .to_integer()
        .to_i64()
        .expect("display value fits in i64")
}

/// Serde adapter that writes an exact value as `{"num", "den", "decimal"}`.
///
/// Numerator and denominator are JSON integers when they fit in 64 bits and
/// decimal strings otherwise; `decimal` always carries four fractional digits.
pub struct ExactJson<'a>(pub &'a Exact);

impl Serialize for ExactJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Exact", 3)?;
        s.serialize_field("num", &BigIntJson(self.0.numer()))?;
        s.serialize_field("den", &BigIntJson(self.0.denom()))?;
        s.serialize_field("decimal", &to_fixed(self.0, 4))?;
        s.end()
    }
}

struct BigIntJson<'a>(&'a BigInt);

impl Serialize for BigIntJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => serializer.serialize_i64(v),
            None => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

pub(crate) fn serialize_exact<S: Serializer>(value: &Exact, serializer: S) -> Result<S::Ok, S::Error> {
    ExactJson(value).serialize(serializer)
}
