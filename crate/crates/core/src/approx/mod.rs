//! Exact approximation statistics over a prime target place: the height sum
//! Ψ(N), the solution counter Δ_N, its first and second moments, pair
//! intersection counts with their combinatorial bounds, and the
//! Paley–Zygmund lower bound those moments feed.
//!
//! Everything here is exact rational arithmetic.  The only float in the
//! module is the normalized ratio c₁ = M1/√M2² inside [`MomentReport`]
//! (a square root has no home in ℚ) and the Paley–Zygmund prediction built
//! from it.
//!
//! Two second moments are exposed.  `m2sq_exact` integrates the square of
//! the (nonstrict) counter: two solution balls overlap exactly when their
//! centers agree to the coarser of the two radii, closed-ball geometry, and
//! the result always dominates M1² as a true second moment must.
//! `m2sq_strict_centers` instead demands the centers be *strictly* closer
//! than the coarser radius.  That variant undercounts overlaps — it can dip
//! below M1², so it is not an integral of anything — but it is the natural
//! companion of the strict counter and is kept for diagnostics.

mod counter;

pub use counter::{
    delta_n, required_precision, DeltaCounts, DeltaResult, SolutionCounter, SolutionRecord,
    TargetPoint,
};

use std::collections::HashMap;

use num::{Integer, Zero};

use crate::error::{Error, Result};
use crate::exact::{prime_power, rational_to_f64, Rational};
use crate::farey::{for_each_totient, restricted_totient_counting, SourceSpec};
use crate::padic::Place;
use crate::psi::ApproxFunction;

/// Height cap for the exhaustive pair machinery behind the second moments.
pub const PAIR_HEIGHT_LIMIT: u64 = 300;
/// Height cap for the enumeration-based first-moment cross-check.
pub const M1_INTEGRAL_HEIGHT_LIMIT: u64 = 10_000;
/// Cap on n·m for direct pair counting.
pub const PAIR_ENUM_LIMIT: u64 = 1 << 26;

/// Ψ(N) = Σ_{n ≤ N} n·ψ(n), exact.  Defined only when every ψ(n) is
/// rational: power laws with fractional exponents take irrational values
/// and are rejected.  Summed pairwise (balanced tree) so that denominators
/// grow by merging rather than by one giant accumulating lcm.
pub fn big_psi(psi: &ApproxFunction, n_max: u64) -> Result<Rational> {
    if n_max == 0 {
        return Err(Error::OutOfRange("Ψ(N) needs N >= 1".into()));
    }
    check_domain(psi, n_max)?;
    let mut terms = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        terms.push(psi.eval_rational(n)? * Rational::from_integer(n.into()));
    }
    Ok(tree_sum(&terms))
}

/// Balanced pairwise sum: keeps intermediate denominators near the size of
/// the subrange lcm instead of the full-range lcm at every step.
fn tree_sum(terms: &[Rational]) -> Rational {
    match terms.len() {
        0 => Rational::zero(),
        1 => terms[0].clone(),
        len => {
            let (lo, hi) = terms.split_at(len / 2);
            tree_sum(lo) + tree_sum(hi)
        }
    }
}

fn check_domain(psi: &ApproxFunction, n_max: u64) -> Result<()> {
    if let Some(end) = psi.domain_end() {
        if n_max > end {
            return Err(Error::InvalidFunction(format!(
                "ψ table ends at {end}, below N = {n_max}"
            )));
        }
    }
    Ok(())
}

fn target_prime(spec: &SourceSpec) -> Result<u64> {
    spec.target_prime().ok_or(Error::ExpectedPrime)
}

/// Haar measure of one solution ball of scale ψ*(n) = p^{-t}: p^{-t} when
/// t ≥ 0, and 1 when the nominal radius exceeds the whole space.
fn ball_measure(p: u64, exponent: i64) -> Rational {
    prime_power(p, -exponent.max(0))
}

/// First moment M1(N) = Σ φ^B(n)·ψ*(n) over admissible heights n ≤ N
/// (heights divisible by the target prime are skipped while the source spec's
/// coprimality filter is active, which is the default).  Computed by the
/// inclusion–exclusion counting path, no fraction ever materialized.
pub fn m1_exact(spec: &SourceSpec, psi: &ApproxFunction, n_max: u64) -> Result<Rational> {
    let p2 = target_prime(spec)?;
    if n_max == 0 {
        return Err(Error::OutOfRange("M1 needs N >= 1".into()));
    }
    check_domain(psi, n_max)?;
    let mut terms = Vec::new();
    for_each_totient(1, n_max, |n, _phi, primes| {
        if !spec.height_allowed(n) {
            return;
        }
        let phi_ball = restricted_totient_counting(spec.ball(), n, primes);
        if phi_ball == 0 {
            return;
        }
        let star = psi.psi_star(n, p2).expect("domain checked above");
        terms.push(ball_measure(p2, star.exponent) * Rational::from_integer(phi_ball.into()));
    });
    Ok(tree_sum(&terms))
}

/// The same first moment, assembled the slow way: walk every admissible
/// reduced fraction by trial membership and add its ball measure.  An
/// independent check on [`m1_exact`] — the two must agree bit for bit.
pub fn m1_via_integral(spec: &SourceSpec, psi: &ApproxFunction, n_max: u64) -> Result<Rational> {
    if n_max > M1_INTEGRAL_HEIGHT_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "enumeration height for the first-moment cross-check",
            requested: n_max,
            limit: M1_INTEGRAL_HEIGHT_LIMIT,
        });
    }
    let p2 = target_prime(spec)?;
    if n_max == 0 {
        return Err(Error::OutOfRange("M1 needs N >= 1".into()));
    }
    check_domain(psi, n_max)?;
    let mut terms = Vec::new();
    for (n, _a) in enumerate_fractions(spec, n_max) {
        let star = psi.psi_star(n, p2)?;
        terms.push(ball_measure(p2, star.exponent));
    }
    Ok(tree_sum(&terms))
}

/// Every admissible reduced fraction a/n with n ≤ n_max, by trial
/// membership.
fn enumerate_fractions(spec: &SourceSpec, n_max: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        if !spec.height_allowed(n) {
            continue;
        }
        for a in 1..=n {
            if a.gcd(&n) == 1
                && spec
                    .ball()
                    .contains(&Rational::new(a.into(), n.into()))
            {
                out.push((n, a));
            }
        }
    }
    out
}

/// Second moment M2²(N) = ∫ Δ̄_N(α)² dα of the nonstrict counter, exact.
/// Diagonal pairs give M1; an off-diagonal pair of solution balls
/// contributes the smaller measure exactly when the centers are congruent
/// modulo the coarser scale (balls at a finite place are nested or
/// disjoint).  Satisfies M1² ≤ M2² always.
pub fn m2sq_exact(spec: &SourceSpec, psi: &ApproxFunction, n_max: u64) -> Result<Rational> {
    second_moment(spec, psi, n_max, 0)
}

/// Variant second moment in which off-diagonal centers must be *strictly*
/// closer than the coarser scale (one level deeper congruence).  Not an
/// integral of the counter — it can fall below M1² — but useful as the
/// pessimistic companion when auditing which overlap convention a bound
/// needs.
pub fn m2sq_strict_centers(
    spec: &SourceSpec,
    psi: &ApproxFunction,
    n_max: u64,
) -> Result<Rational> {
    second_moment(spec, psi, n_max, 1)
}

fn second_moment(
    spec: &SourceSpec,
    psi: &ApproxFunction,
    n_max: u64,
    extra_level: u32,
) -> Result<Rational> {
    if n_max > PAIR_HEIGHT_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "pair-enumeration height for the second moment",
            requested: n_max,
            limit: PAIR_HEIGHT_LIMIT,
        });
    }
    let p2 = target_prime(spec)?;
    if n_max == 0 {
        return Err(Error::OutOfRange("M2² needs N >= 1".into()));
    }
    if !spec.filter_active() {
        return Err(Error::UnsupportedBallCombination(
            "second moments need the height filter: with the target prime dividing a height, \
             the fraction is not integral at the target place and the ball-overlap formula \
             does not apply"
                .into(),
        ));
    }
    check_domain(psi, n_max)?;

    // Scale exponent and center residue for every admissible fraction.
    let mut entries: Vec<(u32, u64)> = Vec::new();
    let mut t_max = 0u32;
    let fractions = enumerate_fractions(spec, n_max);
    for &(n, _a) in &fractions {
        let star = psi.psi_star(n, p2)?;
        t_max = t_max.max(star.exponent.max(0) as u32);
    }
    let cap = t_max + extra_level;
    let modulus = crate::padic::checked_prime_power(p2, cap).ok_or_else(|| {
        Error::OutOfRange(format!(
            "ball scales reach p^-{cap}, beyond native residue arithmetic"
        ))
    })?;
    for (n, a) in fractions {
        let star = psi.psi_star(n, p2)?;
        let t = star.exponent.max(0) as u32;
        // Center a/n as a residue: a · n^{-1} modulo the deepest scale.
        let inv = crate::farey::inverse_mod(n % modulus, modulus);
        let c = (a as u128 * inv as u128 % modulus as u128) as u64;
        entries.push((t, c));
    }
    // Smaller scales (coarser balls) first; ties in insertion order.
    entries.sort_by_key(|e| e.0);

    let mut diagonal = Rational::zero();
    let mut off_unordered = Rational::zero();
    // seen[t]: residues mod p^{t+extra} of already-processed entries of
    // exponent exactly t, with multiplicity.
    let mut seen: Vec<HashMap<u64, u64>> = vec![HashMap::new(); t_max as usize + 1];
    let mut level_modulus: Vec<u64> = (0..=t_max)
        .map(|t| p2.pow(t + extra_level))
        .collect();
    level_modulus.push(p2.pow(t_max + extra_level));
    for &(t_j, c_j) in &entries {
        let measure = prime_power(p2, -(t_j as i64));
        diagonal += &measure;
        let mut overlaps = 0u64;
        // Earlier entries all have exponent ≤ t_j; the pair overlaps iff
        // the centers agree at the earlier (coarser) scale.
        for t in 0..=t_j {
            let m = level_modulus[t as usize];
            if let Some(&k) = seen[t as usize].get(&(c_j % m)) {
                overlaps += k;
            }
        }
        if overlaps > 0 {
            off_unordered += measure * Rational::from_integer(overlaps.into());
        }
        let m_j = level_modulus[t_j as usize];
        *seen[t_j as usize].entry(c_j % m_j).or_insert(0) += 1;
    }
    Ok(diagonal + off_unordered * Rational::from_integer(2.into()))
}

/// Count report for center collisions between two Farey levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCountReport {
    pub n: u64,
    pub m: u64,
    /// Reduced pairs (a/n, b/m) with |a/n − b/m| at the target prime
    /// strictly below max(ψ*(n), ψ*(m)); for n = m only a ≠ b counts.
    pub count: u64,
    /// 4·n·m·max(ψ*(n), ψ*(m)).
    pub bound: Rational,
    pub bound_holds: bool,
    /// For n = m, the sharper ceiling n²·ψ*(n).
    pub same_height_bound: Option<Rational>,
    pub same_height_holds: Option<bool>,
}

/// Exhaustively counts close center pairs between levels n and m and checks
/// the combinatorial ceilings.  Demands the target prime divide neither
/// height.
pub fn pair_count(n: u64, m: u64, psi: &ApproxFunction, p2: u64) -> Result<PairCountReport> {
    Place::prime(p2)?;
    if n == 0 || m == 0 {
        return Err(Error::OutOfRange("pair counting needs heights >= 1".into()));
    }
    if n % p2 == 0 || m % p2 == 0 {
        return Err(Error::OutOfRange(format!(
            "target prime {p2} divides a height ({n}, {m}); centers must be integral at the \
             target place"
        )));
    }
    if n.saturating_mul(m) > PAIR_ENUM_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "pair enumeration size n·m",
            requested: n.saturating_mul(m),
            limit: PAIR_ENUM_LIMIT,
        });
    }
    check_domain(psi, n.max(m))?;
    let star_n = psi.psi_star(n, p2)?;
    let star_m = psi.psi_star(m, p2)?;
    // Coarser scale p^{-T}; strictly closer than that means congruent one
    // level deeper.
    let t_min = star_n.exponent.min(star_m.exponent);
    let needed = t_min + 1;
    let mut count = 0u64;
    for a in (1..=n).filter(|a| a.gcd(&n) == 1) {
        for b in (1..=m).filter(|b| b.gcd(&m) == 1) {
            if n == m && a == b {
                continue;
            }
            // |a/n − b/m| = |am − bn| at the target place (units below).
            let diff = a as i128 * m as i128 - b as i128 * n as i128;
            if integer_valuation_at_least(diff, p2, needed) {
                count += 1;
            }
        }
    }
    let max_star = if star_n.value >= star_m.value {
        star_n.value.clone()
    } else {
        star_m.value.clone()
    };
    let bound = Rational::from_integer((4 * n * m).into()) * max_star;
    let bound_holds = Rational::from_integer(count.into()) <= bound;
    let (same_height_bound, same_height_holds) = if n == m {
        let b = Rational::from_integer((n * n).into()) * star_n.value;
        let holds = Rational::from_integer(count.into()) <= b;
        (Some(b), Some(holds))
    } else {
        (None, None)
    };
    Ok(PairCountReport {
        n,
        m,
        count,
        bound,
        bound_holds,
        same_height_bound,
        same_height_holds,
    })
}

/// Whether v_p(x) ≥ needed (zero qualifies for any demand).
fn integer_valuation_at_least(x: i128, p: u64, needed: i64) -> bool {
    if needed <= 0 || x == 0 {
        return true;
    }
    let p = p as i128;
    let mut x = x.abs();
    for _ in 0..needed {
        if x % p != 0 {
            return false;
        }
        x /= p;
    }
    true
}

/// The exact moments of one configuration, plus the normalized ratio that
/// drives the Paley–Zygmund bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub n_max: u64,
    /// Ψ(N).
    pub psi_sum: Rational,
    pub m1: Rational,
    pub m2sq: Rational,
    /// M1/√M2² (0 when there are no solutions at all).  The one float in
    /// the module.
    pub c1: f64,
}

impl MomentReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n_max,
            "Psi": crate::exact::format_rational(&self.psi_sum),
            "M1": crate::exact::format_rational(&self.m1),
            "M2sq": crate::exact::format_rational(&self.m2sq),
            "c1": self.c1,
        })
    }
}

/// Assembles Ψ(N), M1, M2² and c₁ for one configuration.  Subject to the
/// second-moment height cap.
pub fn moment_report(spec: &SourceSpec, psi: &ApproxFunction, n_max: u64) -> Result<MomentReport> {
    let m1 = m1_exact(spec, psi, n_max)?;
    let m2sq = m2sq_exact(spec, psi, n_max)?;
    let psi_sum = big_psi(psi, n_max)?;
    let c1 = if m2sq.is_zero() {
        0.0
    } else {
        rational_to_f64(&m1) / rational_to_f64(&m2sq).sqrt()
    };
    Ok(MomentReport {
        n_max,
        psi_sum,
        m1,
        m2sq,
        c1,
    })
}

/// The Paley–Zygmund lower bound: the set where the counter reaches c₂·M2
/// has measure at least (c₁ − c₂)², for 0 ≤ c₂ ≤ c₁.
pub fn paley_zygmund_prediction(report: &MomentReport, c2: f64) -> Result<f64> {
    if !(c2 >= 0.0) || c2 > report.c1 {
        return Err(Error::OutOfRange(format!(
            "threshold ratio c2 = {c2} outside [0, c1 = {}]",
            report.c1
        )));
    }
    let gap = report.c1 - c2;
    Ok(gap * gap)
}
