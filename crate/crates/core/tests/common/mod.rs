//! Brute-force recounts shared by the integration suites.  These walk every
//! candidate pair (n, a) directly — plain gcds, exact rational ball
//! membership, and digit-level valuations — sharing none of the library's
//! counting machinery, so agreement is meaningful evidence.

// Each test target compiles its own copy, and not every target uses both
// oracles.
#![allow(dead_code)]

use ballapprox::approx::DeltaCounts;
use ballapprox::exact::Rational;
use ballapprox::farey::SourceSpec;
use ballapprox::padic::{checked_prime_power, PAdicSample};
use ballapprox::psi::ApproxFunction;
use num::{Integer, Zero};
use std::cmp::Ordering;

/// Strict and nonstrict Δ_N at a p-adic target, by double loop.
///
/// Panics if any height's strict threshold exceeds the sample's precision —
/// callers must size the sample so the count is determined.
pub fn naive_delta_padic(
    spec: &SourceSpec,
    psi: &ApproxFunction,
    sample: &PAdicSample,
    n_max: u64,
) -> DeltaCounts {
    let p2 = sample.prime();
    let depth = sample.precision();
    let modulus = checked_prime_power(p2, depth).expect("sample modulus fits u64") as u128;
    let residue = sample.residue(depth) as u128;
    let mut counts = DeltaCounts::default();
    for n in 1..=n_max {
        if !spec.height_allowed(n) {
            continue;
        }
        let star = psi.psi_star(n, p2).expect("psi defined at n");
        let t = star.exponent.max(0) as u32;
        let s = psi.strict_exponent(n, p2).expect("psi defined at n").max(0) as u32;
        assert!(
            s <= depth,
            "oracle needs {s} digits at n = {n}, sample has {depth}"
        );
        for a in 1..=n {
            if a.gcd(&n) != 1 {
                continue;
            }
            if !spec.ball().contains(&Rational::new(a.into(), n.into())) {
                continue;
            }
            // v_{p2}(n·α − a), exact whenever it is < depth.
            let w = (n as u128 * residue + modulus - a as u128 % modulus) % modulus;
            let v = if w == 0 {
                depth
            } else {
                let mut w = w;
                let mut v = 0u32;
                while w % p2 as u128 == 0 {
                    w /= p2 as u128;
                    v += 1;
                }
                v
            };
            counts.nonstrict += (v >= t) as u64;
            counts.strict += (v >= s) as u64;
        }
    }
    counts
}

/// Strict and nonstrict Δ_N at a real target (circle distance), by double
/// loop over the source ball's fractions.
pub fn naive_delta_real(
    spec: &SourceSpec,
    psi: &ApproxFunction,
    alpha: &Rational,
    n_max: u64,
) -> DeltaCounts {
    let one = Rational::from_integer(1.into());
    let half = Rational::new(1.into(), 2.into());
    let mut counts = DeltaCounts::default();
    for n in 1..=n_max {
        for a in 1..=n {
            if a.gcd(&n) != 1 {
                continue;
            }
            let point = Rational::new(a.into(), n.into());
            if !spec.ball().contains(&point) {
                continue;
            }
            let mut gap = alpha - &point;
            if gap < Rational::zero() {
                gap += &one;
            }
            let distance = if gap > half { &one - &gap } else { gap };
            match psi.cmp_value(n, &distance).expect("psi defined at n") {
                Ordering::Greater => {
                    counts.strict += 1;
                    counts.nonstrict += 1;
                }
                Ordering::Equal => counts.nonstrict += 1,
                Ordering::Less => {}
            }
        }
    }
    counts
}
