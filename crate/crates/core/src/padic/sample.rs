use num::{BigUint, Integer, ToPrimitive};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::padic::place::is_prime_u64;

/// A p-adic integer known to finite precision: the first `L` base-p digits,
/// i.e. a residue mod `p^L`.  The digit budget is hard — any query that
/// would need digits beyond `L` reports so instead of guessing.
///
/// Construction enforces `p^L <= u64::MAX`, so residues and modular products
/// (via u128 intermediates) stay exact machine arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicSample {
    p: u64,
    digits: Vec<u64>,
}

/// Valuation of a quantity that is only known mod `p^L`: either exactly
/// determined (strictly below the precision) or only bounded from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceValuation {
    Exact(u32),
    AtLeast(u32),
}

impl PAdicSample {
    /// From explicit base-p digits, least significant first.
    pub fn from_digits(p: u64, digits: Vec<u64>) -> Result<PAdicSample> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if digits.is_empty() {
            return Err(Error::InvalidSample("a sample needs at least one digit".into()));
        }
        if digits.iter().any(|&d| d >= p) {
            return Err(Error::InvalidSample(format!("digit out of range for base {p}")));
        }
        if checked_prime_power(p, digits.len() as u32).is_none() {
            return Err(Error::InvalidSample(format!(
                "p^L = {p}^{} exceeds the u64 residue budget",
                digits.len()
            )));
        }
        Ok(PAdicSample { p, digits })
    }

    /// From a residue mod `p^precision`.
    pub fn from_residue(p: u64, residue: u64, precision: u32) -> Result<PAdicSample> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if precision == 0 {
            return Err(Error::InvalidSample("precision must be at least 1".into()));
        }
        let modulus = checked_prime_power(p, precision).ok_or_else(|| {
            Error::InvalidSample(format!("p^L = {p}^{precision} exceeds the u64 residue budget"))
        })?;
        if residue >= modulus {
            return Err(Error::InvalidSample(format!(
                "residue {residue} is not reduced mod {p}^{precision}"
            )));
        }
        let mut digits = Vec::with_capacity(precision as usize);
        let mut rest = residue;
        for _ in 0..precision {
            digits.push(rest % p);
            rest /= p;
        }
        Ok(PAdicSample { p, digits })
    }

    /// Digit expansion of a rational lying in Z_p (p must not divide the
    /// denominator).
    pub fn from_rational(x: &Rational, p: u64, precision: u32) -> Result<PAdicSample> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if precision == 0 {
            return Err(Error::InvalidSample("precision must be at least 1".into()));
        }
        let modulus = checked_prime_power(p, precision).ok_or_else(|| {
            Error::InvalidSample(format!("p^L = {p}^{precision} exceeds the u64 residue budget"))
        })?;
        let m = BigUint::from(modulus);
        let den = x.denom().magnitude() % &m;
        let inv = modular_inverse(&den, &m).ok_or_else(|| {
            Error::InvalidSample(format!("{p} divides the denominator: not a p-adic integer"))
        })?;
        let num = x.numer().mod_floor(&m.clone().into());
        let residue = (num.magnitude() * inv) % &m;
        Self::from_residue(
            p,
            residue.to_u64().expect("residue is reduced mod a u64 modulus"),
            precision,
        )
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Number of known digits L.
    pub fn precision(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// The residue mod `p^e` for `e <= L`.
    pub fn residue(&self, e: u32) -> u64 {
        assert!(
            e <= self.precision(),
            "residue query beyond sample precision"
        );
        let mut acc = 0u64;
        for &d in self.digits[..e as usize].iter().rev() {
            acc = acc * self.p + d;
        }
        acc
    }

    /// Valuation of `n*x - a` for this sample `x`, as far as `L` digits can
    /// tell: `Exact(v)` when v < L, otherwise `AtLeast(L)`.  Requires p ∤ n.
    pub fn distance_valuation(&self, n: u64, a: u64) -> Result<DistanceValuation> {
        if n == 0 || n % self.p == 0 {
            return Err(Error::OutOfRange(format!(
                "distance valuation needs a denominator coprime to {}, got {n}",
                self.p
            )));
        }
        let l = self.precision();
        let modulus = checked_prime_power(self.p, l).expect("validated at construction");
        let r = self.residue(l);
        let prod = (n as u128 * r as u128) % modulus as u128;
        let a_red = (a as u128) % modulus as u128;
        let w = ((prod + modulus as u128) - a_red) % modulus as u128;
        if w == 0 {
            return Ok(DistanceValuation::AtLeast(l));
        }
        let mut v = 0u32;
        let mut w = w as u64;
        while w % self.p == 0 {
            w /= self.p;
            v += 1;
        }
        debug_assert!(v < l);
        Ok(DistanceValuation::Exact(v))
    }
}

/// `p^e` as u64, or None on overflow.
pub fn checked_prime_power(p: u64, e: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

fn modular_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let e = num::BigInt::from(a.clone()).extended_gcd(&num::BigInt::from(m.clone()));
    if e.gcd != num::BigInt::from(1u8) {
        return None;
    }
    let m_int = num::BigInt::from(m.clone());
    Some(e.x.mod_floor(&m_int).magnitude().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn digits_of_one_half_in_z3() {
        // 1/2 = (3^L + 1)/2 mod 3^L: digits 2,1,1,1,...
        let s = PAdicSample::from_rational(&rat(1, 2), 3, 10).unwrap();
        assert_eq!(s.digits()[0], 2);
        assert!(s.digits()[1..].iter().all(|&d| d == 1));
        // 2 * (1/2) - 1 = 0: indistinguishable from zero at any precision.
        assert_eq!(s.distance_valuation(2, 1).unwrap(), DistanceValuation::AtLeast(10));
    }

    #[test]
    fn exact_valuations_below_the_precision() {
        let zero = PAdicSample::from_rational(&rat(0, 1), 3, 5).unwrap();
        assert_eq!(zero.distance_valuation(1, 1).unwrap(), DistanceValuation::Exact(0));
        assert_eq!(zero.distance_valuation(2, 9).unwrap(), DistanceValuation::Exact(2));
        assert_eq!(zero.distance_valuation(1, 0).unwrap(), DistanceValuation::AtLeast(5));
    }

    #[test]
    fn residues_and_round_trip() {
        let s = PAdicSample::from_residue(5, 117, 4).unwrap();
        assert_eq!(s.residue(4), 117);
        assert_eq!(s.residue(2), 117 % 25);
        assert_eq!(s.residue(1), 2);
        let t = PAdicSample::from_digits(5, s.digits().to_vec()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn rational_expansion_matches_modular_arithmetic() {
        // 7/4 mod 3^6: 4^{-1} mod 729.
        let s = PAdicSample::from_rational(&rat(7, 4), 3, 6).unwrap();
        let r = s.residue(6);
        assert_eq!((r as u128 * 4) % 729, 7 % 729);
    }

    #[test]
    fn denominators_divisible_by_p_are_rejected() {
        assert!(PAdicSample::from_rational(&rat(1, 5), 5, 3).is_err());
        assert!(PAdicSample::from_rational(&rat(3, 10), 5, 3).is_err());
    }

    #[test]
    fn construction_guards() {
        assert!(PAdicSample::from_digits(6, vec![0]).is_err());
        assert!(PAdicSample::from_digits(3, vec![]).is_err());
        assert!(PAdicSample::from_digits(3, vec![3]).is_err());
        assert!(PAdicSample::from_residue(3, 9, 2).is_err());
        assert!(PAdicSample::from_residue(3, 0, 0).is_err());
        // 3^41 > u64::MAX.
        assert!(PAdicSample::from_residue(3, 0, 41).is_err());
        assert!(PAdicSample::from_residue(3, 0, 40).is_ok());
    }

    #[test]
    fn distance_valuation_requires_coprime_n() {
        let s = PAdicSample::from_residue(3, 5, 4).unwrap();
        assert!(s.distance_valuation(3, 1).is_err());
        assert!(s.distance_valuation(0, 1).is_err());
    }
}
