//! Places of Q, exact valuations and norms, balls at a place, and
//! finite-precision p-adic sample points.

mod ball;
mod place;
mod sample;

pub use ball::{Ball, BallIntersection};
pub use place::Place;
pub use sample::{checked_prime_power, DistanceValuation, PAdicSample};

use num::{BigUint, Integer, Signed, Zero};

use crate::exact::{prime_power, Rational};

/// p-adic valuation with the valuation of zero kept as a distinguished
/// sentinel.  `Infinite` compares greater than every finite valuation, which
/// is exactly the ordering the ultrametric inequality wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// The finite value, if any.
    pub fn finite(&self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }
}

/// Exponent of `p` in a positive big integer.
fn valuation_biguint(x: &BigUint, p: u64) -> u64 {
    debug_assert!(!x.is_zero());
    let p = BigUint::from(p);
    let mut v = 0u64;
    let mut rest = x.clone();
    loop {
        let (q, r) = rest.div_rem(&p);
        if r.is_zero() {
            v += 1;
            rest = q;
        } else {
            return v;
        }
    }
}

/// p-adic valuation of a rational: v_p(num) - v_p(den), with v_p(0)
/// infinite.  `p` must be prime; this is the caller's obligation (the
/// [`Place`] constructor certifies it).
pub fn valuation(x: &Rational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let vn = valuation_biguint(x.numer().magnitude(), p) as i64;
    if vn > 0 {
        // The fraction is reduced, so p cannot also divide the denominator.
        return Valuation::Finite(vn);
    }
    let vd = valuation_biguint(x.denom().magnitude(), p) as i64;
    Valuation::Finite(-vd)
}

/// Norm of `x` at a place: `p^{-v_p(x)}` at a finite place (0 for x = 0),
/// the absolute value at the archimedean place.  Always an exact
/// nonnegative rational.
pub fn norm(x: &Rational, place: &Place) -> Rational {
    match place {
        Place::Prime(p) => match valuation(x, *p) {
            Valuation::Infinite => Rational::zero(),
            Valuation::Finite(v) => prime_power(*p, -v),
        },
        Place::Archimedean => x.abs(),
    }
}
