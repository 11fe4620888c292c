use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};

use num_bigint::{BigInt, BigUint};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number backed by arbitrary-precision integers.
pub type Rational = num_rational::BigRational;

/// Field-like numeric type used for probability weights.
///
/// `tolerance` is the slack used for normalization and ordering checks and
/// `witness_tolerance` the slack accepted for reconstructed images; both
/// are zero for exact types.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn tolerance() -> Self;
    fn witness_tolerance() -> Self;
    fn from_count(count: &BigUint) -> Self;
    fn from_rational(value: &Rational) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
    fn witness_tolerance() -> Self {
        1e-9
    }
    fn from_count(count: &BigUint) -> Self {
        count.to_f64().unwrap_or(f64::INFINITY)
    }
    fn from_rational(value: &Rational) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
    fn witness_tolerance() -> Self {
        1e-4
    }
    fn from_count(count: &BigUint) -> Self {
        count.to_f32().unwrap_or(f32::INFINITY)
    }
    fn from_rational(value: &Rational) -> Self {
        value.to_f32().unwrap_or(f32::NAN)
    }
}

impl Scalar for Rational {
    fn tolerance() -> Self {
        Rational::zero()
    }
    fn witness_tolerance() -> Self {
        Rational::zero()
    }
    fn from_count(count: &BigUint) -> Self {
        Rational::from_integer(BigInt::from(count.clone()))
    }
    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }
}

/// Natural logarithm of an arbitrary-precision integer.
///
/// Uses the top 64 bits as mantissa, so the relative error stays below
/// `2^-52`. Returns `-inf` for zero.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (n.to_u64().expect("fits in u64") as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("top 64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidNumber(x.to_string()))
}

/// Parses `"3"`, `"-0.25"`, `"1/3"` or `"2.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::InvalidNumber(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str_radix(if all_digits.is_empty() { "0" } else { &all_digits }, 10)
        .map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

pub(crate) fn rational_from_u64(x: u64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

pub(crate) fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Extended real with exact finite values, used for window endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtReal {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtReal {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtReal::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(r) => rational_to_f64(r),
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ExtReal::NegInf => 0,
            ExtReal::Finite(_) => 1,
            ExtReal::PosInf => 2,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::str::FromStr for ExtReal {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.trim() {
            "-inf" => Ok(ExtReal::NegInf),
            "+inf" | "inf" => Ok(ExtReal::PosInf),
            other => parse_rational(other).map(ExtReal::Finite),
        }
    }
}

impl serde::Serialize for ExtReal {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(r) => write!(f, "{r}"),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}
