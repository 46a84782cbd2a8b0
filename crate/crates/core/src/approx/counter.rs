//! The solution counter Δ_N: how many reduced fractions a/n from the source
//! ball approximate a target point to within ψ(n) at the target place.
//!
//! For a prime target p₂ the condition |nα − a|_{p₂} < ψ(n) depends on α
//! only through α mod p₂^{s(n)}, where p₂^{-s(n)} is the largest p₂-power
//! strictly below ψ(n).  The counter therefore prepares, once per
//! (source, ψ, N), a per-height table of congruence exponents and numerator
//! constraints, and then answers each sample by pure residue counting —
//! inclusion–exclusion over the distinct primes of n, never a scan of the
//! numerators.  Both the strict (< ψ) and the nonstrict (≤ ψ, equivalently
//! ≤ ψ*) counters are computed; their difference is the boundary mass.
//!
//! Precision is a refusal, not a rounding: if a sample carries fewer digits
//! than the largest exponent any height needs, counting errors out naming
//! the smallest offending height.

use num::Integer;

use crate::error::{Error, Result};
use crate::exact::{frac_part, prime_power, Rational};
use crate::farey::{
    coprime_congruent_in_range, coprime_congruent_upto, inverse_mod, numerator_constraint,
    NumeratorConstraint, SourceSpec,
};
use crate::padic::{DistanceValuation, PAdicSample, Place};
use crate::psi::ApproxFunction;

/// A point approximations are measured against: a p-adic integer known to
/// finitely many digits, or an exact rational on the circle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetPoint {
    Padic(PAdicSample),
    Real(Rational),
}

impl TargetPoint {
    /// Real target on the circle; the representative must lie in [0, 1).
    pub fn real(x: Rational) -> Result<TargetPoint> {
        if x < Rational::from_integer(0.into()) || x >= Rational::from_integer(1.into()) {
            return Err(Error::OutOfRange(format!(
                "real target {} outside [0, 1)",
                crate::exact::format_rational(&x)
            )));
        }
        Ok(TargetPoint::Real(x))
    }

    pub fn padic(sample: PAdicSample) -> TargetPoint {
        TargetPoint::Padic(sample)
    }
}

/// Strict and nonstrict solution counts at one height bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeltaCounts {
    /// Solutions of |nα − a| < ψ(n) (the canonical condition).
    pub strict: u64,
    /// Solutions of |nα − a| ≤ ψ(n); never smaller than `strict`.
    pub nonstrict: u64,
}

impl DeltaCounts {
    /// Mass sitting exactly on the threshold.
    pub fn boundary(&self) -> u64 {
        self.nonstrict - self.strict
    }
}

/// One recorded solution pair (a, n).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub n: u64,
    pub a: u64,
    /// Target-place distance |nα − a| (p-adic) or circle gap |α − a/n|.
    /// Exact when `distance_exact`; otherwise an upper bound at the sample's
    /// resolution (still strictly below the threshold, by the precision
    /// guard).
    pub distance: Rational,
    pub distance_exact: bool,
    /// ψ(n) when it is rational (power families with fractional exponents
    /// have irrational values; the float field always carries an estimate).
    pub threshold: Option<Rational>,
    pub threshold_f64: f64,
    /// Whether the strict inequality holds (false = exactly on the
    /// threshold, counted only by the nonstrict counter).
    pub strict: bool,
}

impl SolutionRecord {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "a": self.a,
            "distance": crate::exact::format_rational(&self.distance),
            "distance_exact": self.distance_exact,
            "threshold": self.threshold.as_ref().map(crate::exact::format_rational),
            "threshold_approx": self.threshold_f64,
            "strict": self.strict,
        })
    }
}

/// Full result of a Δ_N evaluation: both counters plus per-solution records
/// (the records list the nonstrict solutions, each flagged).
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaResult {
    pub counts: DeltaCounts,
    pub records: Vec<SolutionRecord>,
}

/// Per-height data for the prime-target fast path.
#[derive(Debug, Clone)]
struct CounterRow {
    n: u64,
    /// Distinct primes of n, minus p₂ when p₂ | n (the congruence then
    /// decides divisibility by p₂ on its own).
    primes: Vec<u64>,
    p2_divides_n: bool,
    /// Exponents e: the condition is a ≡ nα (mod p₂^e), clamped at 0.
    strict_exp: u32,
    nonstrict_exp: u32,
    source: NumeratorConstraint,
}

/// Prepared Δ_N counter for a prime target: reusable across any number of
/// samples of the same target place.
#[derive(Debug, Clone)]
pub struct SolutionCounter {
    p2: u64,
    n_max: u64,
    rows: Vec<CounterRow>,
    /// Largest congruence exponent any height needs (the precision demand).
    max_exp: u32,
}

impl SolutionCounter {
    /// Builds the per-height table for heights 1..=n_max.
    pub fn prepare(
        spec: &SourceSpec,
        psi: &ApproxFunction,
        n_max: u64,
    ) -> Result<SolutionCounter> {
        let p2 = spec
            .target_prime()
            .ok_or_else(|| Error::ExpectedPrime)?;
        if n_max == 0 {
            return Err(Error::OutOfRange("Δ_N needs N >= 1".into()));
        }
        if let Some(end) = psi.domain_end() {
            if n_max > end {
                return Err(Error::InvalidFunction(format!(
                    "ψ table ends at {end}, below N = {n_max}"
                )));
            }
        }
        let mut rows = Vec::new();
        let mut max_exp = 0u32;
        crate::farey::for_each_totient(1, n_max, |n, _phi, primes| {
            if !spec.height_allowed(n) {
                return;
            }
            let source = numerator_constraint(spec.ball(), n);
            match &source {
                NumeratorConstraint::Empty | NumeratorConstraint::Single(None) => return,
                NumeratorConstraint::Ranges(ranges) if ranges.iter().all(|r| r.is_none()) => {
                    return
                }
                _ => {}
            }
            // Candidate with a common factor can never be a solution pair.
            let source = match source {
                NumeratorConstraint::Single(Some(a)) if a.gcd(&n) != 1 => return,
                other => other,
            };
            let star = psi
                .psi_star(n, p2)
                .expect("heights within the checked domain");
            let nonstrict_exp = star.exponent.max(0) as u32;
            let strict_exp = if star.equals_psi {
                (star.exponent + 1).max(0) as u32
            } else {
                nonstrict_exp
            };
            max_exp = max_exp.max(strict_exp);
            let p2_divides_n = n % p2 == 0;
            let primes = if p2_divides_n {
                primes.iter().copied().filter(|&p| p != p2).collect()
            } else {
                primes.to_vec()
            };
            rows.push(CounterRow {
                n,
                primes,
                p2_divides_n,
                strict_exp,
                nonstrict_exp,
                source,
            });
        });
        Ok(SolutionCounter {
            p2,
            n_max,
            rows,
            max_exp,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Digits a sample must carry for every threshold to be decidable.
    pub fn required_precision(&self) -> u32 {
        self.max_exp
    }

    fn check_sample(&self, sample: &PAdicSample) -> Result<()> {
        if sample.prime() != self.p2 {
            return Err(Error::InvalidSample(format!(
                "sample lives at p = {}, counter at p = {}",
                sample.prime(),
                self.p2
            )));
        }
        let available = sample.precision();
        if available < self.max_exp {
            // Name the smallest height whose threshold is unresolvable.
            let offender = self
                .rows
                .iter()
                .find(|row| row.strict_exp > available)
                .expect("some row attains max_exp");
            return Err(Error::PrecisionInsufficient {
                offending_n: offender.n,
                required: offender.strict_exp,
                available,
            });
        }
        Ok(())
    }

    /// α mod p₂^e for every e up to max_exp, plus the matching powers.
    fn residue_prefixes(&self, sample: &PAdicSample) -> (Vec<u64>, Vec<u64>) {
        let e_max = self.max_exp as usize;
        let mut powers = Vec::with_capacity(e_max + 1);
        let mut residues = Vec::with_capacity(e_max + 1);
        powers.push(1u64);
        residues.push(0u64);
        let digits = sample.digits();
        for e in 1..=e_max {
            let pw = powers[e - 1] * self.p2;
            residues.push(residues[e - 1] + digits[e - 1] * powers[e - 1]);
            powers.push(pw);
        }
        (powers, residues)
    }

    /// Counts solutions with height ≤ each grid entry, in one pass.  The
    /// grid must be strictly increasing with final entry ≤ n_max.
    pub fn counts_at(&self, sample: &PAdicSample, grid: &[u64]) -> Result<Vec<DeltaCounts>> {
        self.check_sample(sample)?;
        if grid.is_empty()
            || grid.windows(2).any(|w| w[0] >= w[1])
            || *grid.last().unwrap() > self.n_max
        {
            return Err(Error::OutOfRange(
                "height grid must be strictly increasing within the prepared bound".into(),
            ));
        }
        let (powers, residues) = self.residue_prefixes(sample);
        let mut out = Vec::with_capacity(grid.len());
        let mut running = DeltaCounts::default();
        let mut next = 0usize;
        for row in &self.rows {
            while next < grid.len() && row.n > grid[next] {
                out.push(running);
                next += 1;
            }
            if next == grid.len() {
                break;
            }
            running.strict += self.count_row(row, row.strict_exp, &powers, &residues);
            running.nonstrict += self.count_row(row, row.nonstrict_exp, &powers, &residues);
        }
        while next < grid.len() {
            out.push(running);
            next += 1;
        }
        Ok(out)
    }

    /// Both counters at the full prepared height.
    pub fn counts(&self, sample: &PAdicSample) -> Result<DeltaCounts> {
        Ok(self.counts_at(sample, &[self.n_max])?[0])
    }

    /// Number of a in [1, n] admissible for `row` with a ≡ nα (mod p₂^e).
    fn count_row(&self, row: &CounterRow, e: u32, powers: &[u64], residues: &[u64]) -> u64 {
        let q2 = powers[e as usize];
        let r2 = mul_mod(row.n % q2, residues[e as usize] % q2, q2);
        // With p₂ | n, coprimality to n forbids p₂ | a; the congruence
        // settles that divisibility by itself.
        if row.p2_divides_n && e >= 1 && r2 % self.p2 == 0 {
            return 0;
        }
        match &row.source {
            NumeratorConstraint::Empty | NumeratorConstraint::Single(None) => 0,
            NumeratorConstraint::Single(Some(a)) => (a % q2 == r2) as u64,
            NumeratorConstraint::Ranges(ranges) => ranges
                .iter()
                .flatten()
                .map(|&(lo, hi)| coprime_congruent_in_range(&row.primes, lo, hi, q2, r2))
                .sum(),
            NumeratorConstraint::Congruence { q: q1, r: r1 } => {
                let (q12, r12) = crt_combine(*q1, *r1, q2, r2);
                if q12 <= row.n as u128 {
                    coprime_congruent_upto(&row.primes, row.n, q12 as u64, r12 as u64)
                } else {
                    // One candidate class representative at most.
                    (r12 >= 1 && r12 <= row.n as u128 && (r12 as u64).gcd(&row.n) == 1) as u64
                }
            }
        }
    }

    /// Counts and per-solution records (nonstrict solutions, flagged).
    pub fn delta_with_records(
        &self,
        psi: &ApproxFunction,
        sample: &PAdicSample,
    ) -> Result<DeltaResult> {
        self.check_sample(sample)?;
        let (powers, residues) = self.residue_prefixes(sample);
        let mut records = Vec::new();
        let mut counts = DeltaCounts::default();
        for row in &self.rows {
            let e = row.nonstrict_exp;
            let q2 = powers[e as usize];
            let r2 = mul_mod(row.n % q2, residues[e as usize] % q2, q2);
            for a in candidate_numerators(row, q2, r2) {
                if a.gcd(&row.n) != 1 {
                    continue;
                }
                let (distance, distance_exact, v_at_least) =
                    match sample.distance_valuation(row.n, a)? {
                        DistanceValuation::Exact(v) => {
                            (prime_power(self.p2, -(v as i64)), true, v as i64)
                        }
                        DistanceValuation::AtLeast(l) => {
                            (prime_power(self.p2, -(l as i64)), false, l as i64)
                        }
                    };
                debug_assert!(v_at_least >= row.nonstrict_exp as i64);
                let strict = v_at_least >= row.strict_exp as i64;
                counts.nonstrict += 1;
                counts.strict += strict as u64;
                records.push(SolutionRecord {
                    n: row.n,
                    a,
                    distance,
                    distance_exact,
                    threshold: psi.eval_exact(row.n)?,
                    threshold_f64: psi.eval_f64(row.n)?,
                    strict,
                });
            }
        }
        Ok(DeltaResult { counts, records })
    }
}

/// Candidates a in [1, n] meeting the source constraint and a ≡ r2 (mod q2).
/// Enumeration path (used for records); the counting path never materializes
/// these lists.
fn candidate_numerators(row: &CounterRow, q2: u64, r2: u64) -> Vec<u64> {
    let n = row.n;
    let class = |q: u128, r: u128| -> Vec<u64> {
        let mut out = Vec::new();
        let mut a = if r == 0 { q } else { r };
        while a <= n as u128 {
            out.push(a as u64);
            a += q;
        }
        out
    };
    match &row.source {
        NumeratorConstraint::Empty | NumeratorConstraint::Single(None) => Vec::new(),
        NumeratorConstraint::Single(Some(a)) => {
            if a % q2 == r2 {
                vec![*a]
            } else {
                Vec::new()
            }
        }
        NumeratorConstraint::Ranges(ranges) => class(q2 as u128, r2 as u128)
            .into_iter()
            .filter(|a| {
                ranges
                    .iter()
                    .flatten()
                    .any(|&(lo, hi)| (lo..=hi).contains(a))
            })
            .collect(),
        NumeratorConstraint::Congruence { q: q1, r: r1 } => {
            let (q12, r12) = crt_combine(*q1, *r1, q2, r2);
            class(q12, r12)
        }
    }
}

/// Combines a ≡ r1 (mod q1) and a ≡ r2 (mod q2) for coprime q1, q2 into the
/// single class mod q1·q2 (all in u128; no overflow for u64 inputs).
fn crt_combine(q1: u64, r1: u64, q2: u64, r2: u64) -> (u128, u128) {
    if q2 == 1 {
        return (q1 as u128, r1 as u128);
    }
    if q1 == 1 {
        return (q2 as u128, r2 as u128);
    }
    let diff = (r2 as u128 + q2 as u128 - (r1 % q2) as u128) % q2 as u128;
    let t = diff * inverse_mod(q1 % q2, q2) as u128 % q2 as u128;
    (q1 as u128 * q2 as u128, r1 as u128 + q1 as u128 * t)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 {
        return 0;
    }
    (a as u128 * b as u128 % m as u128) as u64
}

/// Recommended sample precision for heights up to N: the least L with
/// p₂^{-L} < ψ*(N)·p₂^{-2}, i.e. two guard digits past the deepest
/// threshold.
pub fn required_precision(psi: &ApproxFunction, n_max: u64, p2: u64) -> Result<u32> {
    let star = psi.psi_star(n_max, p2)?;
    Ok((star.exponent + 3).max(1) as u32)
}

/// Δ_N with records, for either kind of target.  The target must live at
/// the source spec's target place.
pub fn delta_n(
    spec: &SourceSpec,
    psi: &ApproxFunction,
    target: &TargetPoint,
    n_max: u64,
) -> Result<DeltaResult> {
    match (target, spec.target()) {
        (TargetPoint::Padic(sample), Place::Prime(p)) if sample.prime() == *p => {
            let counter = SolutionCounter::prepare(spec, psi, n_max)?;
            let result = counter.delta_with_records(psi, sample)?;
            debug_assert_eq!(result.counts, counter.counts(sample)?);
            Ok(result)
        }
        (TargetPoint::Real(x), Place::Archimedean) => delta_real(spec, psi, x, n_max),
        (TargetPoint::Padic(sample), place) => Err(Error::InvalidSample(format!(
            "target sample at p = {} does not match the source spec's target place {place}",
            sample.prime()
        ))),
        (TargetPoint::Real(_), place) => Err(Error::InvalidSample(format!(
            "real target point against a finite target place {place}"
        ))),
    }
}

/// Real-target counter: |α − a/n| < ψ(n) on the circle, fractions from the
/// (necessarily p-adic) source ball.  Candidates are enumerated from the
/// source congruence class and tested exactly; ψ(n) may be irrational — the
/// comparison is still exact.
fn delta_real(
    spec: &SourceSpec,
    psi: &ApproxFunction,
    alpha: &Rational,
    n_max: u64,
) -> Result<DeltaResult> {
    use std::cmp::Ordering;
    if *alpha < Rational::from_integer(0.into()) || *alpha >= Rational::from_integer(1.into()) {
        return Err(Error::OutOfRange(
            "real target must be given by its representative in [0, 1)".into(),
        ));
    }
    if let Some(end) = psi.domain_end() {
        if n_max > end {
            return Err(Error::InvalidFunction(format!(
                "ψ table ends at {end}, below N = {n_max}"
            )));
        }
    }
    let mut counts = DeltaCounts::default();
    let mut records = Vec::new();
    let half = Rational::new(1.into(), 2.into());
    for n in 1..=n_max {
        let candidates: Vec<u64> = match numerator_constraint(spec.ball(), n) {
            NumeratorConstraint::Empty | NumeratorConstraint::Single(None) => Vec::new(),
            NumeratorConstraint::Single(Some(a)) => vec![a],
            NumeratorConstraint::Ranges(ranges) => ranges
                .iter()
                .flatten()
                .flat_map(|&(lo, hi)| lo..=hi)
                .collect(),
            NumeratorConstraint::Congruence { q, r } => {
                let mut v = Vec::new();
                let mut a = if r == 0 { q } else { r };
                while a <= n {
                    v.push(a);
                    a += q;
                }
                v
            }
        };
        for a in candidates {
            if a.gcd(&n) != 1 {
                continue;
            }
            // Circle distance between α and a/n.
            let gap = frac_part(&(alpha - Rational::new(a.into(), n.into())));
            let distance = if gap > half {
                Rational::from_integer(1.into()) - gap
            } else {
                gap
            };
            let nonstrict = psi.cmp_value(n, &distance)? != Ordering::Less;
            if !nonstrict {
                continue;
            }
            let strict = psi.cmp_value(n, &distance)? == Ordering::Greater;
            counts.nonstrict += 1;
            counts.strict += strict as u64;
            records.push(SolutionRecord {
                n,
                a,
                distance: distance.clone(),
                distance_exact: true,
                threshold: psi.eval_exact(n)?,
                threshold_f64: psi.eval_f64(n)?,
                strict,
            });
        }
    }
    Ok(DeltaResult { counts, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::padic::Ball;

    fn spec(ball: Ball, p2: u64) -> SourceSpec {
        SourceSpec::new(ball, Place::prime(p2).unwrap()).unwrap()
    }

    /// Brute-force oracle: scan every reduced a/n in the ball and decide the
    /// condition from the sample's residue arithmetic directly.
    fn oracle_counts(
        spec: &SourceSpec,
        psi: &ApproxFunction,
        sample: &PAdicSample,
        n_max: u64,
    ) -> DeltaCounts {
        let p2 = sample.prime();
        let mut counts = DeltaCounts::default();
        for n in 1..=n_max {
            if !spec.height_allowed(n) {
                continue;
            }
            for a in 1..=n {
                if a.gcd(&n) != 1 {
                    continue;
                }
                if !spec
                    .ball()
                    .contains(&Rational::new(a.into(), n.into()))
                {
                    continue;
                }
                let star = psi.psi_star(n, p2).unwrap();
                let (t, s) = (
                    star.exponent.max(0),
                    if star.equals_psi {
                        (star.exponent + 1).max(0)
                    } else {
                        star.exponent.max(0)
                    },
                );
                let v = match sample.distance_valuation(n, a).unwrap() {
                    DistanceValuation::Exact(v) => v as i64,
                    DistanceValuation::AtLeast(l) => l as i64,
                };
                if v >= t {
                    counts.nonstrict += 1;
                }
                if v >= s {
                    counts.strict += 1;
                }
            }
        }
        counts
    }

    #[test]
    fn zero_target_has_no_cubic_solutions_to_one_hundred() {
        // α = 0 at p₂ = 3: |n·0 − a|₃ = |a|₃ ≥ 1/a, while ψ(n) = n^{-3} is
        // far smaller for n ≥ 2; the (1, 1) pair sits exactly on the
        // threshold (|1|₃ = 1 = ψ(1)), failing the strict inequality.
        let spec = spec(Ball::full_padic(5).unwrap(), 3);
        let psi = ApproxFunction::power_law(rat(3, 1)).unwrap();
        let zero = PAdicSample::from_residue(3, 0, 20).unwrap();
        let result = delta_n(&spec, &psi, &TargetPoint::Padic(zero.clone()), 100).unwrap();
        assert_eq!(result.counts.strict, 0);
        // Nonstrict picks up exactly the boundary pair (1, 1).
        assert_eq!(result.counts.nonstrict, 1);
        assert_eq!(result.records.len(), 1);
        assert_eq!((result.records[0].n, result.records[0].a), (1, 1));
        assert!(!result.records[0].strict);
        assert_eq!(oracle_counts(&spec, &psi, &zero, 100).strict, 0);
    }

    #[test]
    fn half_in_z3_is_approximated_by_one_half() {
        // α = 1/2 in Z₃, ψ = q^{-1}, arc source: (a, n) = (1, 2) has
        // distance 0 < 1/2.
        let spec = spec(Ball::full_arc(), 3);
        let psi = ApproxFunction::power_law(rat(1, 1)).unwrap();
        let half = PAdicSample::from_rational(&rat(1, 2), 3, 20).unwrap();
        let result = delta_n(&spec, &psi, &TargetPoint::Padic(half), 2).unwrap();
        assert!(result.counts.strict >= 1);
        assert!(result
            .records
            .iter()
            .any(|r| r.n == 2 && r.a == 1 && r.strict));
    }

    #[test]
    fn fast_path_matches_oracle_across_specs_and_samples() {
        let specs = [
            spec(Ball::full_arc(), 3),
            spec(Ball::arc(rat(0, 1), rat(1, 2)).unwrap(), 3),
            spec(Ball::arc(rat(2, 3), rat(1, 2)).unwrap(), 5),
            spec(Ball::full_padic(5).unwrap(), 3),
            spec(Ball::padic(5, rat(0, 1), 1).unwrap(), 3),
            spec(Ball::padic(2, rat(1, 3), 2).unwrap(), 7),
        ];
        let psis = [
            ApproxFunction::power_law(rat(2, 1)).unwrap(),
            ApproxFunction::power_law(rat(5, 2)).unwrap(),
            ApproxFunction::power_log(rat(1, 1)).unwrap(),
        ];
        for sp in &specs {
            let p2 = sp.target_prime().unwrap();
            for psi in &psis {
                let counter = SolutionCounter::prepare(sp, psi, 60).unwrap();
                for seed_residue in [0u64, 1, 7, 19] {
                    let l = required_precision(psi, 60, p2).unwrap().max(12);
                    let sample = PAdicSample::from_residue(
                        p2,
                        seed_residue % crate::padic::checked_prime_power(p2, 8).unwrap(),
                        l,
                    )
                    .unwrap();
                    let fast = counter.counts(&sample).unwrap();
                    let slow = oracle_counts(sp, psi, &sample, 60);
                    assert_eq!(fast, slow, "spec {:?}, psi {}", sp.ball(), psi.describe());
                    let recs = counter.delta_with_records(psi, &sample).unwrap();
                    assert_eq!(recs.counts, fast);
                    assert_eq!(recs.records.len() as u64, fast.nonstrict);
                    assert!(fast.strict <= fast.nonstrict);
                }
            }
        }
    }

    #[test]
    fn grid_counts_are_monotone_and_match_single_calls() {
        let sp = spec(Ball::full_arc(), 3);
        let psi = ApproxFunction::power_law(rat(2, 1)).unwrap();
        let counter = SolutionCounter::prepare(&sp, &psi, 200).unwrap();
        let sample = PAdicSample::from_rational(&rat(5, 7), 3, 24).unwrap();
        let grid = [10u64, 50, 100, 200];
        let by_grid = counter.counts_at(&sample, &grid).unwrap();
        let mut prev = DeltaCounts::default();
        for (i, &n) in grid.iter().enumerate() {
            let single = SolutionCounter::prepare(&sp, &psi, n)
                .unwrap()
                .counts(&sample)
                .unwrap();
            assert_eq!(by_grid[i], single, "N = {n}");
            assert!(by_grid[i].strict >= prev.strict);
            assert!(by_grid[i].nonstrict >= prev.nonstrict);
            prev = by_grid[i];
        }
    }

    #[test]
    fn insufficient_digits_name_the_smallest_offending_height() {
        let sp = spec(Ball::full_arc(), 3);
        let psi = ApproxFunction::power_law(rat(2, 1)).unwrap();
        let counter = SolutionCounter::prepare(&sp, &psi, 100).unwrap();
        // ψ(100) = 10^-4 needs 3^-9 ≤ 10^-4: exponent 9; give fewer digits.
        let sample = PAdicSample::from_residue(3, 5, 4).unwrap();
        match counter.counts(&sample) {
            Err(Error::PrecisionInsufficient {
                offending_n,
                required,
                available,
            }) => {
                assert_eq!(available, 4);
                assert_eq!(required, 5);
                // The offender is the smallest admissible height needing
                // more than 4 digits: 81 < 10² ≤ 243 puts ψ*(10) = 3^-5
                // (height 9 would already need 5, but 3 | 9 filters it).
                assert_eq!(offending_n, 10);
            }
            other => panic!("expected a precision refusal, got {other:?}"),
        }
    }

    #[test]
    fn recommended_precision_brackets_the_deepest_threshold() {
        let psi = ApproxFunction::power_law(rat(2, 1)).unwrap();
        // ψ(100) = 10^-4; ψ* = 3^-9; two guard digits on top.
        assert_eq!(required_precision(&psi, 100, 3).unwrap(), 12);
        let counter = SolutionCounter::prepare(
            &spec(Ball::full_arc(), 3),
            &psi,
            100,
        )
        .unwrap();
        assert!(counter.required_precision() <= 12);
    }

    #[test]
    fn real_target_counts_by_exact_circle_distance() {
        // Source Z₅, target the circle, α = 1/3, ψ = q^{-1}: every height
        // n ≤ 3 coprime to 5 yields at least one solution (ψ is huge), and
        // all distances are exact rationals.
        let sp = SourceSpec::new(Ball::full_padic(5).unwrap(), Place::archimedean()).unwrap();
        let psi = ApproxFunction::power_law(rat(1, 1)).unwrap();
        let target = TargetPoint::real(rat(1, 3)).unwrap();
        let result = delta_n(&sp, &psi, &target, 3).unwrap();
        assert!(result.counts.strict >= 3);
        assert!(result.records.iter().all(|r| r.distance_exact));
        // (a, n) = (1, 3) hits α exactly: distance 0.
        assert!(result
            .records
            .iter()
            .any(|r| r.n == 3 && r.a == 1 && r.distance == rat(0, 1)));

        // Oracle: plain double loop with rational arithmetic.
        let oracle = |n_max: u64| -> u64 {
            let alpha = rat(1, 3);
            let mut count = 0;
            for n in 1..=n_max {
                if n % 5 == 0 {
                    continue;
                }
                for a in 1..=n {
                    if a.gcd(&n) != 1 {
                        continue;
                    }
                    let gap = frac_part(&(&alpha - rat(a as i64, n as i64)));
                    let d = if gap > rat(1, 2) { rat(1, 1) - gap } else { gap };
                    if psi.cmp_value(n, &d).unwrap() == std::cmp::Ordering::Greater {
                        count += 1;
                    }
                }
            }
            count
        };
        for n_max in [1u64, 2, 5, 17] {
            let got = delta_n(&sp, &psi, &target, n_max).unwrap();
            assert_eq!(got.counts.strict, oracle(n_max), "N = {n_max}");
        }
    }

    #[test]
    fn mismatched_targets_are_rejected() {
        let sp = spec(Ball::full_arc(), 3);
        let psi = ApproxFunction::power_law(rat(2, 1)).unwrap();
        let wrong_prime = PAdicSample::from_residue(5, 0, 10).unwrap();
        assert!(matches!(
            delta_n(&sp, &psi, &TargetPoint::Padic(wrong_prime), 10),
            Err(Error::InvalidSample(_))
        ));
        assert!(matches!(
            delta_n(&sp, &psi, &TargetPoint::Real(rat(1, 3)), 10),
            Err(Error::InvalidSample(_))
        ));
        assert!(TargetPoint::real(rat(3, 2)).is_err());
    }
}
