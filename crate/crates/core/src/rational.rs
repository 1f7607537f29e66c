//! Exact rational numbers used for potentials, tick amounts and LP coefficients.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Formats as `a/b`, or as a plain integer when the denominator is 1.
pub fn fmt_rat(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational `{0}`")]
pub struct ParseRationalError(pub String);

/// Parses `n`, `-n`, `n/d` or `-n/d`.
pub fn parse_rat(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, t),
    };
    let q = match body.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() || n.is_negative() || d.is_negative() {
                return Err(err());
            }
            Rational::new(n, d)
        }
        None => {
            let n = BigInt::from_str(body).map_err(|_| err())?;
            if n.is_negative() {
                return Err(err());
            }
            Rational::from_integer(n)
        }
    };
    Ok(if neg { -q } else { q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_integers_and_fractions() {
        assert_eq!(fmt_rat(&rat(4)), "4");
        assert_eq!(fmt_rat(&ratio(2, 4)), "1/2");
        assert_eq!(fmt_rat(&ratio(-3, 2)), "-3/2");
    }

    #[test]
    fn parses_signed_fractions() {
        assert_eq!(parse_rat("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rat("-7").unwrap(), rat(-7));
        assert_eq!(parse_rat("- 3/6").unwrap(), ratio(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
