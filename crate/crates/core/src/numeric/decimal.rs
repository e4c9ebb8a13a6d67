//! Decimal and rational literals, significant-digit rounding and an
//! arbitrary-precision `exp` used to turn Boltzmann factors into rationals.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Default number of significant digits kept when a literal or a
/// transcendental value is stored as a rational.
pub const DEFAULT_SIGNIFICANT_DIGITS: u32 = 30;

fn pow10(e: u32) -> BigInt {
    BigInt::from(10u32).pow(e)
}

/// Parses `p/q`, an integer, or a decimal with optional exponent
/// (`1.25`, `-3e-2`, `.5`). The result is exact.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
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
    let mut value = BigRational::from_integer(all.parse::<BigInt>().ok()?);
    let shift = exponent - frac_part.len() as i64;
    if shift.unsigned_abs() > 100_000 {
        return None;
    }
    let scale = BigRational::from_integer(pow10(shift.unsigned_abs() as u32));
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Some(if negative { -value } else { value })
}

/// Number of decimal digits of a positive integer.
fn decimal_digits(n: &BigUint) -> u32 {
    n.to_string().len() as u32
}

/// Rounds a rational to `digits` significant decimal digits (half away from zero).
pub fn round_significant(r: &BigRational, digits: u32) -> BigRational {
    if r.is_zero() || digits == 0 {
        return r.clone();
    }
    let negative = r.is_negative();
    let a = r.abs();
    // e such that 10^(e-1) <= a < 10^e, estimated then corrected
    let int_digits = decimal_digits(a.numer().magnitude()) as i64 - decimal_digits(a.denom().magnitude()) as i64;
    let mut e = int_digits;
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(pow10(k as u32))
        } else {
            BigRational::from_integer(pow10((-k) as u32)).recip()
        }
    };
    while a >= pow(e) {
        e += 1;
    }
    while a < pow(e - 1) {
        e -= 1;
    }
    let scale = pow(digits as i64 - e);
    let scaled = &a * &scale;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = (scaled + half).floor();
    let mut out = rounded / scale;
    if negative {
        out = -out;
    }
    out
}

/// `exp(x)` for a rational `x`, rounded to `digits` significant digits.
///
/// Evaluated in fixed point with `digits + 20` guard digits: the argument is
/// halved until it is below 1/2, the Taylor series is summed, and the result
/// is squared back.
pub fn exp_rational(x: &BigRational, digits: u32) -> BigRational {
    let guard = digits + 20;
    let mut halvings = 0u32;
    let mut reduced = x.clone();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    while reduced.abs() > half {
        reduced /= BigInt::from(2);
        halvings += 1;
    }
    // extra precision lost in squaring: ~halvings bits
    let work = guard + halvings / 3 + 1;
    let one = pow10(work);
    let xr = (&reduced * BigRational::from_integer(one.clone())).round().to_integer();
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut k = 1u32;
    loop {
        term = &term * &xr / &one / BigInt::from(k);
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    for _ in 0..halvings {
        sum = &sum * &sum / &one;
    }
    let value = BigRational::new(sum, one);
    round_significant(&value, digits)
}

/// Least common multiple of the denominators.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("2"), Some(q(2, 1)));
        assert_eq!(parse_rational("3/4"), Some(q(3, 4)));
        assert_eq!(parse_rational("0.125"), Some(q(1, 8)));
        assert_eq!(parse_rational("-1.5e2"), Some(q(-150, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("2.5E-1"), Some(q(1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(parse_rational("1..2"), None);
    }

    #[test]
    fn rounds_to_significant_digits() {
        assert_eq!(round_significant(&q(123456, 1), 3), q(123000, 1));
        assert_eq!(round_significant(&q(1, 3), 2), q(33, 100));
        assert_eq!(round_significant(&q(2, 3), 2), q(67, 100));
        assert_eq!(round_significant(&q(-2, 3), 1), q(-7, 10));
        assert_eq!(round_significant(&q(999, 1), 2), q(1000, 1));
    }

    #[test]
    fn exp_matches_known_digits() {
        // e = 2.71828182845904523536028747135266...
        let e = exp_rational(&q(1, 1), 30);
        let expected = parse_rational("2.71828182845904523536028747135").unwrap();
        assert_eq!(e, expected);
        let inv = exp_rational(&q(-1, 1), 20);
        assert_eq!(inv, parse_rational("0.3678794411714423216").unwrap());
        assert_eq!(exp_rational(&q(0, 1), 30), q(1, 1));
        // e^10 = 22026.465794806716516957900645284...
        let e10 = exp_rational(&q(10, 1), 25);
        assert_eq!(e10, parse_rational("22026.46579480671651695790").unwrap());
    }
}
