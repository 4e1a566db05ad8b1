//! Scalar abstraction shared by the model, solvers and analyzers.
//!
//! Priorities, the discount factor and every derived utility are carried in a
//! generic scalar `S`. Exact rationals are the default everywhere; `f64`/`f32`
//! are supported for quick approximate runs. Solvers never optimise in `S`
//! directly: they lift values to [`Rational`] and scale to integer costs, so
//! the chosen allocation is identical for every scalar type that represents
//! the inputs exactly.

use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Numeric type usable for priorities, discounts and utilities.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + FromPrimitive + Send + Sync + 'static
{
    /// Exact rational value of `self`. Non-finite floats map to `None`.
    fn to_exact(&self) -> Option<Rational>;

    /// Nearest representable value to `value`.
    fn from_exact(value: &Rational) -> Self;

    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for Rational {
    fn to_exact(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn from_exact(value: &Rational) -> Self {
        value.clone()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn to_exact(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn from_exact(value: &Rational) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn to_exact(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn from_exact(value: &Rational) -> Self {
        value.to_f32().unwrap_or(f32::NAN)
    }

    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

/// `base^exp` for any scalar.
pub fn powi<S: Scalar>(base: &S, exp: usize) -> S {
    num_traits::pow(base.clone(), exp)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// Parses `"0.95"`, `"-3"`, `"19/20"` or `"1.5e-2"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&joined).map_err(|_| err())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Renders `value` as a terminating decimal when one exists, otherwise as `p/q`.
///
/// `parse_rational(&render_rational(x)) == x` for every rational.
pub fn render_rational(value: &Rational) -> String {
    let den = value.denom();
    let mut rest = den.clone();
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    let (mut twos, mut fives) = (0usize, 0usize);
    while rest.is_even() && !rest.is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", value.numer(), den);
    }
    let places = twos.max(fives);
    if places == 0 {
        return value.numer().to_string();
    }
    let scaled = value * Rational::from_integer(num_traits::pow(BigInt::from(10u8), places));
    let digits = scaled.to_integer();
    let negative = digits.sign() == Sign::Minus;
    let mut body = digits.abs().to_string();
    if body.len() <= places {
        body = format!("{}{}", "0".repeat(places + 1 - body.len()), body);
    }
    let split = body.len() - places;
    let frac = body[split..].trim_end_matches('0');
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&body[..split]);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// Fixed-point rendering rounded half away from zero.
pub fn format_fixed(value: &Rational, places: usize) -> String {
    let factor = Rational::from_integer(num_traits::pow(BigInt::from(10u8), places));
    let scaled = (value * factor).round().to_integer();
    let negative = scaled.sign() == Sign::Minus;
    let mut body = scaled.abs().to_string();
    if body.len() <= places {
        body = format!("{}{}", "0".repeat(places + 1 - body.len()), body);
    }
    let split = body.len() - places;
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{body}")
    } else {
        format!("{sign}{}.{}", &body[..split], &body[split..])
    }
}

/// Display adapter printing any scalar with six decimals.
pub struct Fixed6<'a, S>(pub &'a S);

impl<S: Scalar> Display for Fixed6<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.to_exact() {
            Some(exact) => f.write_str(&format_fixed(&exact, 6)),
            None => write!(f, "{:.6}", self.0.to_f64_lossy()),
        }
    }
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a Rational>,
{
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `value * scale`, which must be an integer.
pub fn scale_to_integer(value: &Rational, scale: &BigInt) -> BigInt {
    let scaled = value * Rational::from_integer(scale.clone());
    debug_assert!(scaled.is_integer(), "scale does not clear denominator");
    scaled.to_integer()
}
