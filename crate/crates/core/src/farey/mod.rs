//! Enumeration of reduced fractions inside a source ball, and the
//! ball-restricted totient φ^B with its partial sums.
//!
//! For a ball B at one place and a height n, the fractions of interest are
//! the reduced a/n, 1 ≤ a ≤ n, lying in B — as a coset of ℝ/ℤ when B is an
//! arc, as a p₁-adic point when B is p-adic.  φ^B(n) counts them; summing
//! φ^B over heights coprime to the target prime (the Σ′ convention) is the
//! growth quantity the first-moment identities are built on.
//!
//! Two counting paths exist for φ^B: direct trial over a ∈ [1, n], and an
//! inclusion–exclusion path over the distinct primes of n (for arcs: counts
//! in integer ranges; for p-adic balls: counts in one congruence class mod
//! p₁^k).  The counting path is used for large n and throughout table
//! construction; the trial path is the oracle the counting path is tested
//! against.

mod count;
mod sieve;

use std::io::{self, Write};

use num::{BigUint, Integer, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{ceil_int, Rational};
use crate::padic::{checked_prime_power, Ball, Place};

pub use count::{
    coprime_congruent_in_range, coprime_congruent_upto, coprime_in_range, coprime_upto,
    inverse_mod,
};
pub use sieve::{for_each_totient, primes_upto};

/// Heights above which φ^B switches from trial enumeration to
/// inclusion–exclusion counting.
const TRIAL_LIMIT: u64 = 100_000;

/// A source ball together with the target place the approximation will be
/// measured at, and the Σ′ height filter.
///
/// The two places must differ.  `coprimality_filter` controls whether sums
/// over heights skip n divisible by the target prime (the primed sums Σ′);
/// it is ignored for an archimedean target.  The filter never changes the
/// per-height count φ^B(n) itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpec {
    ball: Ball,
    target: Place,
    coprimality_filter: bool,
}

impl SourceSpec {
    /// Source/target pair with the height filter on (the usual setup).
    pub fn new(ball: Ball, target: Place) -> Result<SourceSpec> {
        SourceSpec::with_filter(ball, target, true)
    }

    pub fn with_filter(ball: Ball, target: Place, coprimality_filter: bool) -> Result<SourceSpec> {
        if ball.place() == target {
            return Err(Error::SamePlace);
        }
        Ok(SourceSpec {
            ball,
            target,
            coprimality_filter,
        })
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn target(&self) -> &Place {
        &self.target
    }

    /// The target prime, when the target is a finite place.
    pub fn target_prime(&self) -> Option<u64> {
        match self.target {
            Place::Prime(p) => Some(p),
            Place::Archimedean => None,
        }
    }

    /// Whether primed sums actually skip heights (prime target with the
    /// filter requested).
    pub fn filter_active(&self) -> bool {
        self.coprimality_filter && !self.target.is_archimedean()
    }

    /// Whether height n participates in primed sums.
    pub fn height_allowed(&self, n: u64) -> bool {
        match (self.filter_active(), &self.target) {
            (true, Place::Prime(p)) => n % p != 0,
            _ => true,
        }
    }
}

/// One row of a [`TotientTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TotientRow {
    pub n: u64,
    /// Euler's φ(n).
    pub phi: u64,
    /// Ball-restricted φ^B(n) (unfiltered: the Σ′ filter only affects sums).
    pub phi_ball: u64,
    /// Σ′_{m ≤ n} φ^B(m), the primed running sum.
    pub restricted_prefix: u128,
}

/// φ and φ^B tabulated for all heights 1..=n_max, with primed running sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotientTable {
    n_max: u64,
    rows: Vec<TotientRow>,
}

impl TotientTable {
    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn rows(&self) -> &[TotientRow] {
        &self.rows
    }

    pub fn row(&self, n: u64) -> &TotientRow {
        &self.rows[(n - 1) as usize]
    }

    /// Σ′_{n ≤ n_max} φ^B(n): the primed sum over the whole table.
    pub fn restricted_sum(&self) -> u128 {
        self.rows.last().map_or(0, |r| r.restricted_prefix)
    }

    /// Least N₀ such that Σ′_{n≤N} φ^B(n) ≥ c·N² for every N in
    /// [N₀, n_max]; `None` when the bound fails at n_max itself.
    pub fn empirical_n0(&self, c: &Rational) -> Option<u64> {
        let num = c.numer().magnitude();
        let den = c.denom().magnitude();
        let mut last_fail = 0u64;
        for row in &self.rows {
            let lhs = BigUint::from(row.restricted_prefix) * den;
            let rhs = BigUint::from(row.n) * BigUint::from(row.n) * num;
            if lhs < rhs {
                last_fail = row.n;
            }
        }
        if last_fail == self.n_max {
            None
        } else {
            Some(last_fail + 1)
        }
    }

    /// The largest constant the quadratic growth bound supports from N = 1:
    /// min over n of Σ′_{m≤n} φ^B(m) / n², as an exact rational.  With
    /// c equal to this value, `empirical_n0(c)` is 1.
    pub fn min_quadratic_ratio(&self) -> Rational {
        let mut best: Option<Rational> = None;
        for row in &self.rows {
            let ratio = Rational::new(
                BigUint::from(row.restricted_prefix).into(),
                (BigUint::from(row.n) * BigUint::from(row.n)).into(),
            );
            if best.as_ref().is_none_or(|b| ratio < *b) {
                best = Some(ratio);
            }
        }
        best.unwrap_or_else(Rational::zero)
    }

    /// CSV export: `n,phi,phiB,restricted_sum` with the primed running sum.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,phi,phiB,restricted_sum")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                row.n, row.phi, row.phi_ball, row.restricted_prefix
            )?;
        }
        Ok(())
    }
}

/// All reduced fractions a/n (1 ≤ a ≤ n, gcd(a,n) = 1) lying in the source
/// ball, sorted by a.  Under an active height filter, a height divisible by
/// the target prime returns the empty list.
pub fn fractions_at_level(spec: &SourceSpec, n: u64) -> Result<Vec<Rational>> {
    if n == 0 {
        return Err(Error::OutOfRange("heights start at n = 1".into()));
    }
    if !spec.height_allowed(n) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for a in 1..=n {
        if a.gcd(&n) == 1 {
            let x = Rational::new(a.into(), n.into());
            if spec.ball().contains(&x) {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// φ^B(n): the number of reduced a/n, 1 ≤ a ≤ n, in the ball.  The Σ′
/// height filter is *not* applied here — it lives in the primed sums.
///
/// Dispatches to trial enumeration for small n and to inclusion–exclusion
/// counting above [`TRIAL_LIMIT`] (where trial would be too slow); the two
/// paths are cross-tested.
pub fn restricted_totient(spec: &SourceSpec, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::OutOfRange("heights start at n = 1".into()));
    }
    if n <= TRIAL_LIMIT {
        Ok(restricted_totient_trial(spec.ball(), n))
    } else {
        let primes = distinct_primes(n);
        Ok(restricted_totient_counting(spec.ball(), n, &primes))
    }
}

/// Totient table for heights 1..=n_max, built with the segmented sieve and
/// the counting path, with primed running sums per the source spec's filter.
pub fn totient_table(spec: &SourceSpec, n_max: u64) -> Result<TotientTable> {
    if n_max == 0 {
        return Err(Error::OutOfRange("table needs n_max >= 1".into()));
    }
    let mut rows = Vec::with_capacity(n_max.min(1 << 26) as usize);
    let mut sum: u128 = 0;
    for_each_totient(1, n_max, |n, phi, primes| {
        debug_assert_eq!(phi_product_check(n, primes), true);
        let phi_ball = restricted_totient_counting(spec.ball(), n, primes);
        if spec.height_allowed(n) {
            sum += phi_ball as u128;
        }
        rows.push(TotientRow {
            n,
            phi,
            phi_ball,
            restricted_prefix: sum,
        });
    });
    Ok(TotientTable { n_max, rows })
}

/// Exact ratios φ^B(n)/φ(n) for n in [lo, hi].  For a p-adic source ball,
/// heights divisible by p₁ are skipped (no point of Z_{p₁} has such a
/// denominator, so the ratio would measure nothing); arcs keep every height.
/// The Σ′ filter does not apply — ratios are per-height quantities.
pub fn equidistribution_ratio(
    spec: &SourceSpec,
    lo: u64,
    hi: u64,
) -> Result<Vec<(u64, Rational)>> {
    if lo == 0 || lo > hi {
        return Err(Error::OutOfRange(format!(
            "ratio range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
        )));
    }
    let source_prime = match spec.ball() {
        Ball::PAdic { p, .. } => Some(*p),
        Ball::Arc { .. } => None,
    };
    let mut out = Vec::new();
    for_each_totient(lo, hi, |n, phi, primes| {
        if source_prime.is_some_and(|p| n % p == 0) {
            return;
        }
        let phi_ball = restricted_totient_counting(spec.ball(), n, primes);
        out.push((n, Rational::new(phi_ball.into(), phi.into())));
    });
    Ok(out)
}

/// How the admissible numerators at height n sit inside [1, n]: the shape
/// the counting paths (and the solution counter, which layers a target
/// congruence on top) work from.  Coprimality to n is *not* encoded here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NumeratorConstraint {
    /// No admissible numerator at all (p₁ divides the height).
    Empty,
    /// At most the single listed candidate (height 1, or a ball modulus
    /// beyond u64, which exceeds every height).
    Single(Option<u64>),
    /// Union of at most two closed integer ranges within [1, n-1] (arcs).
    Ranges([Option<(u64, u64)>; 2]),
    /// a ≡ r (mod q) with q a p₁-power coprime to n (p-adic balls).
    Congruence { q: u64, r: u64 },
}

/// The numerator constraint of a ball at height n.
pub(crate) fn numerator_constraint(ball: &Ball, n: u64) -> NumeratorConstraint {
    debug_assert!(n >= 1);
    if n == 1 {
        let candidate = ball.contains(&Rational::one()).then_some(1);
        return NumeratorConstraint::Single(candidate);
    }
    match ball {
        Ball::Arc { left, length } => {
            // For n >= 2 every coprime numerator lies in [1, n-1] and its
            // coset is a/n itself; split the arc at 0 into plain intervals
            // [x, y) of [0, 1], each giving ceil(nx) <= a <= ceil(ny) - 1.
            let right = left + length;
            let intervals: [Option<(Rational, Rational)>; 2] = if right <= Rational::one() {
                [Some((left.clone(), right)), None]
            } else {
                [
                    Some((left.clone(), Rational::one())),
                    Some((Rational::zero(), right - Rational::one())),
                ]
            };
            let n_big = Rational::from_integer(n.into());
            let ranges = intervals.map(|iv| {
                let (x, y) = iv?;
                let lo = ceil_int(&(&n_big * &x)).to_u64().unwrap_or(0).max(1);
                let hi = ceil_int(&(&n_big * &y))
                    .to_u64()
                    .unwrap_or(0)
                    .saturating_sub(1)
                    .min(n - 1);
                (lo <= hi).then_some((lo, hi))
            });
            NumeratorConstraint::Ranges(ranges)
        }
        Ball::PAdic {
            p,
            center,
            exponent,
        } => {
            if n % p == 0 {
                // a/n is not a p-adic integer when p | n and gcd(a, n) = 1.
                return NumeratorConstraint::Empty;
            }
            // Membership v_p(a/n - c) >= k is the congruence a ≡ c·n mod p^k.
            match checked_prime_power(*p, *exponent) {
                Some(q) => NumeratorConstraint::Congruence {
                    q,
                    r: center_times_mod(center, n, q),
                },
                None => {
                    // p^k exceeds u64, hence exceeds n: one candidate at most.
                    let q = BigUint::from(*p).pow(*exponent);
                    let r = center_times_mod_big(center, n, &q);
                    let candidate = r.to_u64().filter(|a| (1..=n).contains(a));
                    NumeratorConstraint::Single(candidate)
                }
            }
        }
    }
}

/// Calls `f` with every admissible numerator: 1 ≤ a ≤ n, gcd(a, n) = 1,
/// a/n in the ball.  Walks the numerator constraint instead of scanning
/// [1, n], so the cost is proportional to the candidates, not the height.
pub(crate) fn for_each_admissible_numerator(ball: &Ball, n: u64, mut f: impl FnMut(u64)) {
    match numerator_constraint(ball, n) {
        NumeratorConstraint::Empty => {}
        NumeratorConstraint::Single(candidate) => {
            if let Some(a) = candidate {
                if a.gcd(&n) == 1 {
                    f(a);
                }
            }
        }
        NumeratorConstraint::Ranges(ranges) => {
            for &(lo, hi) in ranges.iter().flatten() {
                for a in lo..=hi {
                    if a.gcd(&n) == 1 {
                        f(a);
                    }
                }
            }
        }
        NumeratorConstraint::Congruence { q, r } => {
            let mut a = if r == 0 { q } else { r };
            while a <= n {
                if a.gcd(&n) == 1 {
                    f(a);
                }
                a += q;
            }
        }
    }
}

/// Trial path: direct membership test for every candidate numerator.
fn restricted_totient_trial(ball: &Ball, n: u64) -> u64 {
    let mut count = 0;
    for a in 1..=n {
        if a.gcd(&n) == 1 && ball.contains(&Rational::new(a.into(), n.into())) {
            count += 1;
        }
    }
    count
}

/// Counting path: inclusion–exclusion over the distinct primes of n.
pub(crate) fn restricted_totient_counting(ball: &Ball, n: u64, primes: &[u64]) -> u64 {
    match numerator_constraint(ball, n) {
        NumeratorConstraint::Empty => 0,
        NumeratorConstraint::Single(candidate) => {
            candidate.is_some_and(|a| a.gcd(&n) == 1) as u64
        }
        NumeratorConstraint::Ranges(ranges) => ranges
            .into_iter()
            .flatten()
            .map(|(lo, hi)| coprime_in_range(primes, lo, hi))
            .sum(),
        NumeratorConstraint::Congruence { q, r } => coprime_congruent_upto(primes, n, q, r),
    }
}

/// (center · n) mod q for a rational center with denominator prime to q.
fn center_times_mod(center: &Rational, n: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    let num = center.numer().mod_floor(&q.into());
    let den = center.denom().mod_floor(&q.into());
    let num = num.to_u64().expect("reduced mod q");
    let den = den.to_u64().expect("reduced mod q");
    let c = (num as u128 * inverse_mod(den, q) as u128 % q as u128) as u64;
    (c as u128 * (n % q) as u128 % q as u128) as u64
}

fn center_times_mod_big(center: &Rational, n: u64, q: &BigUint) -> BigUint {
    use num::bigint::BigInt;
    let q_int = BigInt::from(q.clone());
    let num = center.numer().mod_floor(&q_int);
    let den = center.denom().mod_floor(&q_int);
    let inv = den
        .extended_gcd(&q_int)
        .x
        .mod_floor(&q_int);
    ((num * inv).mod_floor(&q_int) * BigInt::from(n))
        .mod_floor(&q_int)
        .to_biguint()
        .expect("mod_floor result is nonnegative")
}

fn distinct_primes(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(debug_assertions)]
fn phi_product_check(n: u64, primes: &[u64]) -> bool {
    primes.iter().all(|p| n % p == 0)
}
#[cfg(not(debug_assertions))]
fn phi_product_check(_: u64, _: &[u64]) -> bool {
    true
}
