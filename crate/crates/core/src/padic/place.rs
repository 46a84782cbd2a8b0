use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A place of Q: a prime p (with the p-adic norm) or the archimedean place.
/// The prime variant is only constructible through [`Place::prime`], which
/// certifies primality, so every `Place::Prime(p)` in circulation is genuine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Place {
    Prime(u64),
    Archimedean,
}

impl Place {
    /// Certifies `p` prime (deterministic Miller–Rabin, exact for u64).
    pub fn prime(p: u64) -> Result<Place> {
        if is_prime_u64(p) {
            Ok(Place::Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn archimedean() -> Place {
        Place::Archimedean
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Archimedean)
    }

    /// The prime at a finite place.
    pub fn prime_value(&self) -> Result<u64> {
        match self {
            Place::Prime(p) => Ok(*p),
            Place::Archimedean => Err(Error::ExpectedPrime),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "p{p}"),
            Place::Archimedean => write!(f, "inf"),
        }
    }
}

/// Deterministic Miller–Rabin primality test, exact over the full u64 range
/// with the standard 12-base witness set.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}
