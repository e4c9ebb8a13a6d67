//! Scalar types the counting, sampling and series code is generic over.
//!
//! The exact pipeline runs on [`Rational`](crate::Rational) (or
//! [`Natural`](crate::Natural) once weights are scaled to integers). The fast
//! path runs on [`WideFloat`], an `f64` mantissa paired with a 64-bit binary
//! exponent, which keeps a 53-bit mantissa while never overflowing on counts
//! such as `4.33^4096`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A commutative semiring element with conversions into floating point.
///
/// Every DP in this crate only adds and multiplies, so this is all it needs.
pub trait Scalar: Clone + fmt::Debug + PartialOrd + Zero + One + Send + Sync + 'static {
    fn add_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;

    /// Converts an exact rational. `None` when the type cannot hold it
    /// (e.g. a fraction into [`BigUint`]).
    fn from_rational(r: &BigRational) -> Option<Self>;
    fn from_natural(n: &BigUint) -> Self;

    fn to_f64(&self) -> f64;

    /// Natural logarithm as `f64`. Stays finite where `to_f64` would overflow;
    /// `-inf` for zero.
    fn ln(&self) -> f64;

    fn add_assign_ref(&mut self, rhs: &Self) {
        *self = self.add_ref(rhs);
    }
}

impl Scalar for BigRational {
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn from_rational(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }
    fn from_natural(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }
    fn to_f64(&self) -> f64 {
        WideFloat::from_rational(self).to_f64()
    }
    fn ln(&self) -> f64 {
        ln_rational(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
}

impl Scalar for BigUint {
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn from_rational(r: &BigRational) -> Option<Self> {
        if r.is_integer() && !r.is_negative() {
            r.numer().to_biguint()
        } else {
            None
        }
    }
    fn from_natural(n: &BigUint) -> Self {
        n.clone()
    }
    fn to_f64(&self) -> f64 {
        WideFloat::from_natural(self).to_f64()
    }
    fn ln(&self) -> f64 {
        ln_natural(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn add_ref(&self, rhs: &Self) -> Self {
                self + rhs
            }
            fn mul_ref(&self, rhs: &Self) -> Self {
                self * rhs
            }
            fn from_rational(r: &BigRational) -> Option<Self> {
                Some(WideFloat::from_rational(r).to_f64() as $t)
            }
            fn from_natural(n: &BigUint) -> Self {
                WideFloat::from_natural(n).to_f64() as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn ln(&self) -> f64 {
                (*self as f64).ln()
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// Natural log of a nonnegative big integer.
pub fn ln_natural(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return ToPrimitive::to_f64(n).unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = ToPrimitive::to_f64(&(n >> shift)).unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational; `-inf` for zero, NaN for negatives.
pub fn ln_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    if r.is_negative() {
        return f64::NAN;
    }
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    ln_natural(num) - ln_natural(den)
}

/// Nearest-ish `f64` of a rational, with over/underflow mapped to inf/0.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    WideFloat::from_rational(r).to_f64()
}

/// Floating point with an `f64` mantissa and an unbounded (i64) binary exponent.
///
/// Invariant: either `mant == 0.0` or `0.5 <= |mant| < 1`.
#[derive(Clone, Copy, Debug)]
pub struct WideFloat {
    mant: f64,
    exp: i64,
}

const EXP_MASK: u64 = 0x7ff << 52;

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let mut bits = x.to_bits();
    let mut e = ((bits & EXP_MASK) >> 52) as i64;
    let mut bias = 0;
    if e == 0 {
        // subnormal
        let scaled = x * f64::from_bits(((1023 + 64) as u64) << 52);
        bits = scaled.to_bits();
        e = ((bits & EXP_MASK) >> 52) as i64;
        bias = 64;
    }
    let mant = f64::from_bits((bits & !EXP_MASK) | (1022u64 << 52));
    (mant, e - 1022 - bias)
}

fn ldexp(x: f64, e: i64) -> f64 {
    if x == 0.0 {
        return x;
    }
    let mut v = x;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

impl WideFloat {
    pub const ZERO: WideFloat = WideFloat { mant: 0.0, exp: 0 };

    pub fn from_f64(x: f64) -> Self {
        let (mant, exp) = frexp(x);
        WideFloat { mant, exp }
    }

    /// Builds `exp(l)` without going through an `f64` that could overflow.
    pub fn from_ln(l: f64) -> Self {
        if l == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e = (l / std::f64::consts::LN_2).floor();
        let rest = l - e * std::f64::consts::LN_2;
        let mut out = Self::from_f64(rest.exp());
        out.exp += e as i64;
        out
    }

    pub fn from_natural(n: &BigUint) -> Self {
        let bits = n.bits();
        if bits <= 64 {
            return Self::from_f64(ToPrimitive::to_f64(n).unwrap_or(0.0));
        }
        let shift = bits - 64;
        let mut out = Self::from_f64(ToPrimitive::to_f64(&(n >> shift)).unwrap_or(0.0));
        out.exp += shift as i64;
        out
    }

    pub fn from_rational(r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::ZERO;
        }
        let num = r.numer().magnitude();
        let den = r.denom().magnitude();
        // scale so the integer quotient carries ~66 significant bits
        let k = den.bits() as i64 - num.bits() as i64 + 66;
        let q = if k >= 0 {
            (num << (k as u64)) / den
        } else {
            (num >> ((-k) as u64)) / den
        };
        let mut out = Self::from_natural(&q);
        out.exp -= k;
        if r.numer().sign() == Sign::Minus {
            out.mant = -out.mant;
        }
        out
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    pub fn ln(self) -> f64 {
        if self.mant == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.mant.ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn log10(self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    pub fn sqrt(self) -> Self {
        if self.mant == 0.0 {
            return self;
        }
        let (m, e) = if self.exp % 2 == 0 {
            (self.mant, self.exp)
        } else {
            (self.mant * 2.0, self.exp - 1)
        };
        let mut out = Self::from_f64(m.sqrt());
        out.exp += e / 2;
        out
    }

    pub fn powi(self, k: i64) -> Self {
        Self::from_ln(self.ln() * k as f64)
    }

    pub fn is_zero_value(&self) -> bool {
        self.mant == 0.0
    }

    fn normalized(mant: f64, exp: i64) -> Self {
        let (m, e) = frexp(mant);
        if m == 0.0 {
            return Self::ZERO;
        }
        WideFloat { mant: m, exp: exp + e }
    }
}

impl Add for WideFloat {
    type Output = WideFloat;
    fn add(self, rhs: Self) -> Self {
        if self.mant == 0.0 {
            return rhs;
        }
        if rhs.mant == 0.0 {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let d = big.exp - small.exp;
        if d > 64 {
            return big;
        }
        WideFloat::normalized(big.mant + ldexp(small.mant, -d), big.exp)
    }
}

impl Mul for WideFloat {
    type Output = WideFloat;
    fn mul(self, rhs: Self) -> Self {
        if self.mant == 0.0 || rhs.mant == 0.0 {
            return Self::ZERO;
        }
        WideFloat::normalized(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for WideFloat {
    type Output = WideFloat;
    fn div(self, rhs: Self) -> Self {
        if self.mant == 0.0 {
            return Self::ZERO;
        }
        WideFloat::normalized(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl Zero for WideFloat {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.mant == 0.0
    }
}

impl One for WideFloat {
    fn one() -> Self {
        WideFloat { mant: 0.5, exp: 1 }
    }
}

impl PartialEq for WideFloat {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for WideFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sa = self.mant.partial_cmp(&0.0)?;
        let sb = other.mant.partial_cmp(&0.0)?;
        if sa != sb || sa == Ordering::Equal {
            return Some(sa.cmp(&sb));
        }
        let mag = self
            .exp
            .cmp(&other.exp)
            .then(self.mant.abs().partial_cmp(&other.mant.abs())?);
        Some(if sa == Ordering::Greater { mag } else { mag.reverse() })
    }
}

impl fmt::Display for WideFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mant == 0.0 {
            return write!(f, "0");
        }
        let prec = f.precision().unwrap_or(6);
        let l10 = self.mant.abs().log10() + self.exp as f64 * std::f64::consts::LOG10_2;
        let mut e10 = l10.floor();
        let mut m10 = 10f64.powf(l10 - e10);
        // rounding can push the mantissa to 10.0
        let scale = 10f64.powi(prec as i32);
        if (m10 * scale).round() / scale >= 10.0 {
            m10 /= 10.0;
            e10 += 1.0;
        }
        let sign = if self.mant < 0.0 { "-" } else { "" };
        write!(f, "{sign}{m10:.prec$}e{}", e10 as i64)
    }
}

impl Scalar for WideFloat {
    fn add_ref(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        *self * *rhs
    }
    fn from_rational(r: &BigRational) -> Option<Self> {
        Some(WideFloat::from_rational(r))
    }
    fn from_natural(n: &BigUint) -> Self {
        WideFloat::from_natural(n)
    }
    fn to_f64(&self) -> f64 {
        WideFloat::to_f64(*self)
    }
    fn ln(&self) -> f64 {
        WideFloat::ln(*self)
    }
}

/// Exact `BigInt` view of a nonnegative natural, used by helpers below.
pub(crate) fn natural_to_rational(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn frexp_roundtrip() {
        for x in [1.0, 0.75, 3.0e300, 1.0e-310, 12345.678] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m), "{m}");
            assert_eq!(ldexp(m, e), x);
        }
    }

    #[test]
    fn wide_float_survives_overflow() {
        let base = WideFloat::from_f64(4.33);
        let big = base.powi(4096);
        assert!((big.ln() - 4096.0 * 4.33f64.ln()).abs() < 1e-9);
        assert!(big.to_f64().is_infinite());
        let ratio = (big * base) / big;
        assert!((ratio.to_f64() - 4.33).abs() < 1e-12);
    }

    #[test]
    fn wide_float_addition_and_order() {
        let a = WideFloat::from_f64(1.5);
        let b = WideFloat::from_f64(2.25);
        assert_eq!((a + b).to_f64(), 3.75);
        assert!(a < b);
        assert!(WideFloat::ZERO < a);
        assert!(WideFloat::from_f64(-1.0) < WideFloat::ZERO);
        assert!(WideFloat::from_f64(-4.0) < WideFloat::from_f64(-1.0));
    }

    #[test]
    fn rational_conversions() {
        assert_eq!(rational_to_f64(&q(1, 3)), 1.0 / 3.0);
        assert_eq!(rational_to_f64(&q(-7, 2)), -3.5);
        let huge = BigRational::from_integer(BigInt::from(3u8).pow(2000));
        assert!((ln_rational(&huge) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        let tiny = huge.recip();
        assert!((WideFloat::from_rational(&tiny).ln() + 2000.0 * 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn display_is_scientific() {
        assert_eq!(format!("{:.3}", WideFloat::from_f64(1234.0)), "1.234e3");
        assert_eq!(format!("{:.2}", WideFloat::from_f64(9.999)), "1.00e1");
        assert_eq!(format!("{}", WideFloat::ZERO), "0");
    }
}
