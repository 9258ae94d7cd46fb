//! Exact rational numbers and their textual form.
//!
//! Every quantity in a game (threshold, endowments, reward levels, bounds,
//! intervention amounts) is a [`Rational`]. Text input accepts decimal
//! literals (`"12"`, `"-0.35"`) and fractions (`"4/11"`); decimals are read
//! exactly, so `"0.35"` is `7/20` and never a binary float.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses a decimal or fraction literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(|| malformed(text))?;
        let den = parse_decimal(den.trim()).ok_or_else(|| malformed(text))?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(text.to_owned()));
        }
        return Ok(num / den);
    }
    parse_decimal(text).ok_or_else(|| malformed(text))
}

fn malformed(text: &str) -> ParseRationalError {
    ParseRationalError::Malformed(text.to_owned())
}

/// `[+-]digits[.digits]`, also `.5` and `5.`; at least one digit overall.
fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Lowest-terms rendering: `"7/20"`, or `"12"` when the denominator is 1.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Smallest integer `k` with `k >= value`.
pub fn ceil_to_int(value: &Rational) -> BigInt {
    value.ceil().to_integer()
}

/// Least common multiple of the denominators of `values` (1 for none).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub(crate) fn is_strictly_between_zero_and_one(value: &Rational) -> bool {
    value.is_positive() && value < &Rational::one()
}

/// Rational from an integer.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Rational `numer/denom`; panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}
