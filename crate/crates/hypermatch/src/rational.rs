//! Exact rational scalars and their text format.
//!
//! All arithmetic in this crate happens over arbitrary-precision rationals
//! ([`Rat`]).  The wire format is a plain string, `"num/den"` or `"num"`,
//! never a float; [`parse_rat`] and [`format_rat`] round-trip it.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, the scalar type of the whole crate.
pub type Rat = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.  Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed integer part in rational literal {0:?}")]
    BadInteger(String),
    #[error("rational literal {0:?} has more than one '/'")]
    ExtraSlash(String),
    #[error("zero denominator in rational literal {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"a/b"` or `"a"` (optional leading `-` or `+`) into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseRatError::Empty);
    }
    let mut parts = t.splitn(3, '/');
    let num_part = parts.next().unwrap_or("");
    let den_part = parts.next();
    if parts.next().is_some() {
        return Err(ParseRatError::ExtraSlash(s.to_string()));
    }
    let num: BigInt = num_part
        .trim()
        .parse()
        .map_err(|_| ParseRatError::BadInteger(s.to_string()))?;
    let den: BigInt = match den_part {
        None => BigInt::one(),
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| ParseRatError::BadInteger(s.to_string()))?,
    };
    if den.is_zero() {
        return Err(ParseRatError::ZeroDenominator(s.to_string()));
    }
    Ok(Rat::new(num, den))
}

/// Formats a rational canonically: `"a/b"` in lowest terms, or `"a"` when the
/// denominator is 1.  `parse_rat(&format_rat(r)) == r` for every `r`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders `r` as a fixed-point decimal with `places` digits after the point,
/// rounding half away from zero.  Used for human-readable tables; exact
/// comparisons always go through [`Rat`] directly.
pub fn decimal_str(r: &Rat, places: usize) -> String {
    let neg = r.is_negative();
    let abs = r.abs();
    let scale = BigInt::from(10u32).pow(places as u32);
    // round(|r| * 10^places) with ties away from zero: floor((2n + d) / 2d)
    let scaled = &abs * Rat::from_integer(scale);
    let rounded: BigInt = num_integer::Integer::div_floor(
        &(scaled.numer() * 2 + scaled.denom()),
        &(scaled.denom() * 2),
    );
    let digits = rounded.to_string();
    let (int_part, frac_part) = if places == 0 {
        (digits.clone(), String::new())
    } else if digits.len() <= places {
        (
            "0".to_string(),
            format!("{:0>width$}", digits, width = places),
        )
    } else {
        let split = digits.len() - places;
        (digits[..split].to_string(), digits[split..].to_string())
    };
    let sign = if neg && rounded != BigInt::zero() {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// `r` as an `f64`, for diagnostics and sampling only.
pub fn to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_integer_and_fraction() {
        assert_eq!(parse_rat("3").unwrap(), rat_int(3));
        assert_eq!(parse_rat("-3").unwrap(), rat_int(-3));
        assert_eq!(parse_rat("2/3").unwrap(), rat(2, 3));
        assert_eq!(parse_rat(" -4/6 ").unwrap(), rat(-2, 3));
        assert_eq!(parse_rat("4/-6").unwrap(), rat(-2, 3));
        assert_eq!(parse_rat("+7/3").unwrap(), rat(7, 3));
    }

    #[test]
    fn parse_rejects_malformed() {
        assert_eq!(parse_rat(""), Err(ParseRatError::Empty));
        assert!(matches!(
            parse_rat("1/0"),
            Err(ParseRatError::ZeroDenominator(_))
        ));
        assert!(matches!(
            parse_rat("a/b"),
            Err(ParseRatError::BadInteger(_))
        ));
        assert!(matches!(
            parse_rat("1/2/3"),
            Err(ParseRatError::ExtraSlash(_))
        ));
        assert!(matches!(
            parse_rat("1.5"),
            Err(ParseRatError::BadInteger(_))
        ));
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format_rat(&rat(4, 6)), "2/3");
        assert_eq!(format_rat(&rat(6, 3)), "2");
        assert_eq!(format_rat(&rat(-4, 6)), "-2/3");
        assert_eq!(format_rat(&rat_int(0)), "0");
    }

    #[test]
    fn format_parse_round_trip() {
        for r in [rat(22, 7), rat(-1, 3), rat_int(5), rat(1000001, 999999)] {
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
    }

    #[test]
    fn decimal_rounding_half_away_from_zero() {
        assert_eq!(decimal_str(&rat(1, 2), 0), "1");
        assert_eq!(decimal_str(&rat(1, 3), 4), "0.3333");
        assert_eq!(decimal_str(&rat(2, 3), 4), "0.6667");
        assert_eq!(decimal_str(&rat(5, 8), 4), "0.6250");
        assert_eq!(decimal_str(&rat(1, 20000), 4), "0.0001"); // 0.00005 rounds up
        assert_eq!(decimal_str(&rat(-1, 20000), 4), "-0.0001");
        assert_eq!(decimal_str(&rat(123456, 1000), 2), "123.46");
        assert_eq!(decimal_str(&rat_int(7), 3), "7.000");
        assert_eq!(decimal_str(&rat(-1, 100000), 4), "0.0000");
    }
}
