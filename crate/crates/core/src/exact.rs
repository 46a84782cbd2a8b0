//! Small helpers around `num`'s exact rational type.
//!
//! Every quantity that admits an exact value is carried as a [`Rational`];
//! the canonical text form is `num/den` (reduced, positive denominator,
//! bare integer when the denominator is 1) so that serialized reports
//! never round.

use num::bigint::{BigInt, Sign};
use num::rational::Ratio;
use num::{BigUint, Integer, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact reduced fraction with positive denominator (`num::BigRational`).
pub type Rational = Ratio<BigInt>;

/// Builds a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// Builds a rational from an unsigned pair.
pub fn rat_u(num: u64, den: u64) -> Rational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// p^e as a rational, for possibly negative e.
pub fn prime_power(p: u64, e: i64) -> Rational {
    let base = BigInt::from(p);
    if e >= 0 {
        Ratio::from_integer(base.pow(e as u32))
    } else {
        Ratio::new(BigInt::one(), base.pow((-e) as u32))
    }
}

/// Canonical rendering: `num/den` in lowest terms, bare integer when the
/// denominator is 1.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `num/den` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::OutOfRange(format!("`{s}` is not a rational (expected num/den)"));
    let mut parts = s.splitn(2, '/');
    let num: BigInt = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    let den: BigInt = match parts.next() {
        Some(d) => d.trim().parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::OutOfRange(format!("`{s}` has a zero denominator")));
    }
    Ok(Ratio::new(num, den))
}

/// Height of a/n in lowest terms: max(|a|, n).
pub fn height(x: &Rational) -> BigUint {
    let num = x.numer().abs().to_biguint().expect("abs is nonnegative");
    let den = x.denom().to_biguint().expect("denominator is positive");
    num.max(den)
}

/// The denominator of `x` is free of the prime `p`.
pub fn denominator_coprime_to(x: &Rational, p: u64) -> bool {
    !x.denom().magnitude().is_multiple_of(&BigUint::from(p))
}

/// Floor of a rational as a BigInt.
pub fn floor_int(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// Ceiling of a rational as a BigInt.
pub fn ceil_int(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// Fractional part in [0, 1): x - floor(x).
pub fn frac_part(x: &Rational) -> Rational {
    x - Ratio::from_integer(floor_int(x))
}

/// A value that is exact when the arithmetic allows it and a float otherwise
/// (fractional powers).  The float field is always populated.
#[derive(Debug, Clone, PartialEq)]
pub struct MaybeExact {
    pub exact: Option<Rational>,
    pub value: f64,
}

impl MaybeExact {
    pub fn exact(x: Rational) -> Self {
        let value = rational_to_f64(&x);
        MaybeExact {
            exact: Some(x),
            value,
        }
    }

    pub fn approx(value: f64) -> Self {
        MaybeExact { exact: None, value }
    }
}

/// Rounds a rational to f64 (for display and slope fitting only).
pub fn rational_to_f64(x: &Rational) -> f64 {
    // Scale into the f64 range first so gigantic numerators/denominators
    // (harmonic-sum denominators easily exceed 10^4000) do not overflow.
    let num = x.numer();
    let den = x.denom();
    if num.is_zero() {
        return 0.0;
    }
    let sign = match num.sign() {
        Sign::Minus => -1.0,
        _ => 1.0,
    };
    let nbits = num.magnitude().bits() as i64;
    let dbits = den.magnitude().bits() as i64;
    let shift = (nbits.max(dbits) - 900).max(0) as u64;
    let num_f = biguint_to_f64(&(num.magnitude() >> shift));
    let den_f = biguint_to_f64(&(den.magnitude() >> shift));
    if den_f == 0.0 {
        // Denominator vanished under the shift: the value is astronomically
        // large; saturate.
        return sign * f64::INFINITY;
    }
    sign * num_f / den_f
}

fn biguint_to_f64(x: &BigUint) -> f64 {
    let mut acc = 0.0f64;
    for digit in x.to_u64_digits().iter().rev() {
        acc = acc * 1.8446744073709552e19 + *digit as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let x = parse_rational("32/27").unwrap();
        assert_eq!(format_rational(&x), "32/27");
        let y = parse_rational("-6/4").unwrap();
        assert_eq!(format_rational(&y), "-3/2");
        let z = parse_rational("7").unwrap();
        assert_eq!(format_rational(&z), "7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn height_takes_the_larger_of_numerator_and_denominator() {
        assert_eq!(height(&rat(50, 3)), BigUint::from(50u32));
        assert_eq!(height(&rat(-3, 10)), BigUint::from(10u32));
        assert_eq!(height(&rat(0, 1)), BigUint::from(1u32));
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(3, -2), rat(1, 9));
        assert_eq!(prime_power(5, 3), rat(125, 1));
        assert_eq!(prime_power(2, 0), rat(1, 1));
    }

    #[test]
    fn f64_rounding_handles_huge_denominators() {
        let tiny = Ratio::new(BigInt::one(), BigInt::from(10u8).pow(2000));
        assert_eq!(rational_to_f64(&tiny), 0.0);
        let half = rat(1, 2);
        assert_eq!(rational_to_f64(&half), 0.5);
        let neg = rat(-7, 2);
        assert_eq!(rational_to_f64(&neg), -3.5);
    }
}
