use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{format_rational, frac_part, prime_power, Rational};
use crate::padic::{valuation, Valuation};

/// A ball at a place of Q.
///
/// * `PAdic`: the closed ball `{ x in Z_p : v_p(x - center) >= exponent }`,
///   radius `p^-exponent`, Haar probability measure `p^-exponent`.  (A chord
///   of rationals at distance exactly `p^-exponent` from the center belongs
///   to the ball; this closed convention is what makes the ball's measure
///   equal its radius exactly.)
/// * `Arc`: the half-open arc `[left, left + length)` of R/Z, so arcs of
///   length `1/m` tile the circle without double counting.
///
/// Build through [`Ball::padic`] / [`Ball::arc`]; the constructors enforce
/// the invariants (prime place, center in Z_p, `left` in [0,1), `length` in
/// (0,1]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ball {
    PAdic {
        p: u64,
        center: Rational,
        exponent: u32,
    },
    Arc {
        left: Rational,
        length: Rational,
    },
}

/// Outcome of intersecting two p-adic balls at the same prime: ultrametric
/// balls are nested or disjoint, never partially overlapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BallIntersection {
    /// One ball contains the other; `inner` is the contained ball and
    /// `measure` its Haar measure (the measure of the intersection).
    Nested { inner: Ball, measure: Rational },
    Disjoint,
}

impl Ball {
    /// Closed p-adic ball of radius `p^-exponent` around `center`.
    pub fn padic(p: u64, center: Rational, exponent: u32) -> Result<Ball> {
        let place = super::Place::prime(p)?;
        let p = place.prime_value().expect("just built a prime place");
        if valuation(&center, p) < Valuation::Finite(0) {
            return Err(Error::InvalidBall(format!(
                "center {} lies outside Z_{p}",
                format_rational(&center)
            )));
        }
        Ok(Ball::PAdic {
            p,
            center,
            exponent,
        })
    }

    /// Half-open arc `[left, left + length)` of R/Z.
    pub fn arc(left: Rational, length: Rational) -> Result<Ball> {
        if left < Rational::zero() || left >= Rational::one() {
            return Err(Error::InvalidBall(format!(
                "arc left endpoint {} outside [0, 1)",
                format_rational(&left)
            )));
        }
        if length <= Rational::zero() || length > Rational::one() {
            return Err(Error::InvalidBall(format!(
                "arc length {} outside (0, 1]",
                format_rational(&length)
            )));
        }
        Ok(Ball::Arc { left, length })
    }

    /// The full circle `[0, 1)`, the arc with no restriction at all.
    pub fn full_arc() -> Ball {
        Ball::Arc {
            left: Rational::zero(),
            length: Rational::one(),
        }
    }

    /// The whole of Z_p, the p-adic ball with no restriction beyond
    /// integrality.
    pub fn full_padic(p: u64) -> Result<Ball> {
        Ball::padic(p, Rational::zero(), 0)
    }

    /// The place this ball lives at: `Prime(p)` for a p-adic ball, the
    /// archimedean place for an arc of R/Z.
    pub fn place(&self) -> super::Place {
        match self {
            Ball::PAdic { p, .. } => super::Place::Prime(*p),
            Ball::Arc { .. } => super::Place::Archimedean,
        }
    }

    /// Haar measure: `p^-exponent` for a p-adic ball (as a subset of Z_p
    /// with its probability Haar measure), the length for an arc.
    pub fn measure(&self) -> Rational {
        match self {
            Ball::PAdic { p, exponent, .. } => prime_power(*p, -(*exponent as i64)),
            Ball::Arc { length, .. } => length.clone(),
        }
    }

    /// Membership of an exact rational.  For a p-adic ball a rational with
    /// p in its denominator is simply outside.  For an arc, membership is of
    /// the coset of `x` in R/Z, taken with representative in [0, 1).
    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            Ball::PAdic {
                p,
                center,
                exponent,
            } => valuation(&(x - center), *p) >= Valuation::Finite(*exponent as i64),
            Ball::Arc { left, length } => {
                let c = frac_part(x);
                let right = left + length;
                if right <= Rational::one() {
                    c >= *left && c < right
                } else {
                    // The arc wraps through 0.
                    c >= *left || c < right - Rational::one()
                }
            }
        }
    }

    /// Intersects two p-adic balls at the same prime.  Ultrametric balls are
    /// nested or disjoint; on ties (equal balls) the second ball is reported
    /// as the inner one.
    pub fn intersect(&self, other: &Ball) -> Result<BallIntersection> {
        match (self, other) {
            (
                Ball::PAdic {
                    p: p1,
                    center: c1,
                    exponent: k1,
                },
                Ball::PAdic {
                    p: p2,
                    center: c2,
                    exponent: k2,
                },
            ) => {
                if p1 != p2 {
                    return Err(Error::UnsupportedBallCombination(format!(
                        "balls at different primes {p1} and {p2}"
                    )));
                }
                let outer_exp = (*k1).min(*k2) as i64;
                if valuation(&(c1 - c2), *p1) >= Valuation::Finite(outer_exp) {
                    let inner = if k2 >= k1 { other } else { self };
                    Ok(BallIntersection::Nested {
                        inner: inner.clone(),
                        measure: inner.measure(),
                    })
                } else {
                    Ok(BallIntersection::Disjoint)
                }
            }
            _ => Err(Error::UnsupportedBallCombination(
                "intersection is only defined for two p-adic balls at the same prime".into(),
            )),
        }
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ball::PAdic {
                p,
                center,
                exponent,
            } => write!(f, "p{p}:{}:k{exponent}", format_rational(center)),
            Ball::Arc { left, length } => {
                write!(f, "{}:{}", format_rational(left), format_rational(length))
            }
        }
    }
}
