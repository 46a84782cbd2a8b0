//! Reproducible experiment harnesses: Haar-uniform target sampling, the
//! growth-vs-saturation dichotomy for the solution counter, an exhaustive
//! (hence exact) Paley–Zygmund check, the translate-partition fact behind
//! ball-to-ball transfer, and the center-translation reduction.
//!
//! Everything is deterministic given the seed: sampling uses a counter-based
//! generator with one stream per sample index, and all aggregation is
//! integer or rational arithmetic, so reports are identical across runs and
//! thread schedules.  Whenever the whole residue space at the working depth
//! is small, the harness enumerates it exhaustively instead of sampling —
//! the counter factors through that finite quotient, so exhaustive numbers
//! are exact population values, not estimates.

use num::{Integer, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approx::{big_psi, m1_exact, m2sq_exact, DeltaCounts, SolutionCounter, TargetPoint};
use crate::error::{Error, Result};
use crate::exact::{ceil_int, format_rational, rational_to_f64, MaybeExact, Rational};
use crate::farey::{for_each_admissible_numerator, SourceSpec};
use crate::padic::{checked_prime_power, Ball, PAdicSample, Place};
use crate::psi::ApproxFunction;

/// Residue spaces up to this size are enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// Counter thresholds reported as tail fractions.
pub const TAIL_THRESHOLDS: [u64; 3] = [1, 3, 10];

/// Verdict-rule constants: the band around the fitted linear growth, and
/// the minimum mean increment across the top half of the grid that counts
/// as growth.  Artifact choices — the dichotomy itself is asymptotic.
pub const BAND_LOW: f64 = 0.1;
pub const BAND_HIGH: f64 = 10.0;
pub const MIN_GROWTH_INCREMENT: f64 = 0.1;

/// One experiment's full configuration.  The seed determines every random
/// choice; two runs with equal configs produce identical reports.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub spec: SourceSpec,
    pub psi: ApproxFunction,
    /// Samples drawn when exhaustive enumeration is out of reach.
    pub sample_count: u64,
    /// Strictly increasing height checkpoints.
    pub n_grid: Vec<u64>,
    pub seed: u64,
    /// Sample resolution: digits at a prime target.
    pub precision: u32,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::OutOfRange("sample_count must be >= 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(Error::OutOfRange(
                "the height grid needs at least one positive entry".into(),
            ));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::OutOfRange(
                "the height grid must be strictly increasing".into(),
            ));
        }
        if self.precision == 0 {
            return Err(Error::OutOfRange("precision must be >= 1 digit".into()));
        }
        Ok(())
    }
}

/// Haar-uniform target at a place: independent uniform digits at a prime,
/// an exact dyadic rational u/2^resolution on the circle.  Deterministic in
/// the generator state.
pub fn sample_target<R: Rng>(
    place: &Place,
    resolution: u32,
    rng: &mut R,
) -> Result<TargetPoint> {
    match place {
        Place::Prime(p) => {
            if resolution == 0 {
                return Err(Error::OutOfRange("need at least one digit".into()));
            }
            let digits: Vec<u64> = (0..resolution).map(|_| rng.random_range(0..*p)).collect();
            Ok(TargetPoint::Padic(PAdicSample::from_digits(*p, digits)?))
        }
        Place::Archimedean => {
            if resolution == 0 || resolution > 62 {
                return Err(Error::OutOfRange(
                    "dyadic resolution must be within 1..=62 bits".into(),
                ));
            }
            let den = 1u64 << resolution;
            let u = rng.random_range(0..den);
            TargetPoint::real(Rational::new(u.into(), den.into()))
        }
    }
}

/// Per-checkpoint aggregate over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyRow {
    pub n_max: u64,
    /// Exact mean of the strict counter over the samples.
    pub mean_delta: Rational,
    /// Samples with Δ ≥ K for K in TAIL_THRESHOLDS.
    pub count_ge: [u64; 3],
    pub samples: u64,
    /// Ψ(N), exact for rational ψ.
    pub psi_sum: MaybeExact,
}

impl DichotomyRow {
    pub fn fraction_ge(&self, idx: usize) -> f64 {
        self.count_ge[idx] as f64 / self.samples as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Mean counter grows in step with Ψ(N) across the top of the grid.
    GrowthConsistent,
    /// Mean counter has stalled: the height sum no longer buys solutions.
    SaturationConsistent,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::GrowthConsistent => "growth-consistent",
            Verdict::SaturationConsistent => "saturation-consistent",
        }
    }
}

/// One sample's counter values along the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrace {
    /// Sample index, or the residue itself in exhaustive mode.
    pub id: u64,
    pub counts: Vec<DeltaCounts>,
}

#[derive(Debug, Clone)]
pub struct DichotomyReport {
    pub rows: Vec<DichotomyRow>,
    pub verdict: Verdict,
    /// Least-squares slope through the origin of mean Δ against Ψ(N).
    pub fitted_c: f64,
    /// Whether the whole residue space was enumerated instead of sampled.
    pub exhaustive: bool,
    pub samples_used: u64,
    pub per_sample: Vec<SampleTrace>,
}

impl DichotomyReport {
    /// Flat per-(sample, checkpoint) table.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sample,N,delta_strict,delta_nonstrict")?;
        for trace in &self.per_sample {
            for (row, counts) in self.rows.iter().zip(&trace.counts) {
                writeln!(
                    w,
                    "{},{},{},{}",
                    trace.id, row.n_max, counts.strict, counts.nonstrict
                )?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.verdict.as_str(),
            "fitted_c": self.fitted_c,
            "exhaustive": self.exhaustive,
            "samples": self.samples_used,
            "rows": self.rows.iter().map(|row| {
                serde_json::json!({
                    "N": row.n_max,
                    "mean_delta": format_rational(&row.mean_delta),
                    "mean_delta_approx": rational_to_f64(&row.mean_delta),
                    "frac_ge_1": row.fraction_ge(0),
                    "frac_ge_3": row.fraction_ge(1),
                    "frac_ge_10": row.fraction_ge(2),
                    "Psi": match &row.psi_sum.exact {
                        Some(x) => serde_json::json!(format_rational(x)),
                        None => serde_json::json!(row.psi_sum.value),
                    },
                })
            }).collect::<Vec<_>>(),
        })
    }
}

/// Ψ(N) preferring the exact value, falling back to floats for irrational
/// ψ.
fn psi_sum_maybe(psi: &ApproxFunction, n_max: u64) -> Result<MaybeExact> {
    match big_psi(psi, n_max) {
        Ok(x) => Ok(MaybeExact::exact(x)),
        Err(Error::InvalidFunction(_)) => {
            let mut total = 0.0;
            for n in 1..=n_max {
                total += n as f64 * psi.eval_f64(n)?;
            }
            Ok(MaybeExact::approx(total))
        }
        Err(e) => Err(e),
    }
}

/// Runs the counter over sampled (or exhaustively enumerated) targets and
/// judges whether its mean tracks the height sum Ψ(N) — the observable
/// trace of the zero-full dichotomy at finite height.
pub fn run_dichotomy(config: &TrialConfig) -> Result<DichotomyReport> {
    config.validate()?;
    let p2 = config.spec.target_prime().ok_or(Error::ExpectedPrime)?;
    let n_max = *config.n_grid.last().unwrap();
    let counter = SolutionCounter::prepare(&config.spec, &config.psi, n_max)?;

    let space = checked_prime_power(p2, config.precision).filter(|&m| m <= EXHAUSTIVE_LIMIT);
    let per_sample: Vec<SampleTrace> = match space {
        Some(modulus) => (0..modulus)
            .into_par_iter()
            .map(|residue| {
                let sample = PAdicSample::from_residue(p2, residue, config.precision)?;
                Ok(SampleTrace {
                    id: residue,
                    counts: counter.counts_at(&sample, &config.n_grid)?,
                })
            })
            .collect::<Result<_>>()?,
        None => (0..config.sample_count)
            .into_par_iter()
            .map(|index| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(index);
                let digits: Vec<u64> =
                    (0..config.precision).map(|_| rng.random_range(0..p2)).collect();
                let sample = PAdicSample::from_digits(p2, digits)?;
                Ok(SampleTrace {
                    id: index,
                    counts: counter.counts_at(&sample, &config.n_grid)?,
                })
            })
            .collect::<Result<_>>()?,
    };
    let samples = per_sample.len() as u64;

    let mut rows = Vec::with_capacity(config.n_grid.len());
    for (i, &n) in config.n_grid.iter().enumerate() {
        let mut sum: u128 = 0;
        let mut count_ge = [0u64; 3];
        for trace in &per_sample {
            let delta = trace.counts[i].strict;
            sum += delta as u128;
            for (slot, &k) in count_ge.iter_mut().zip(&TAIL_THRESHOLDS) {
                *slot += (delta >= k) as u64;
            }
        }
        rows.push(DichotomyRow {
            n_max: n,
            mean_delta: Rational::new(sum.into(), (samples as u128).into()),
            count_ge,
            samples,
            psi_sum: psi_sum_maybe(&config.psi, n)?,
        });
    }

    let (verdict, fitted_c) = decide_verdict(&rows);
    Ok(DichotomyReport {
        rows,
        verdict,
        fitted_c,
        exhaustive: space.is_some(),
        samples_used: samples,
        per_sample,
    })
}

/// Growth requires the top half of the grid to sit inside
/// [BAND_LOW, BAND_HIGH]·ĉ·Ψ(N) for the fitted ĉ *and* the mean to keep
/// moving (increment ≥ MIN_GROWTH_INCREMENT across the top half); a stalled
/// mean is saturation no matter how well  a flat line fits.
fn decide_verdict(rows: &[DichotomyRow]) -> (Verdict, f64) {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.psi_sum.value, rational_to_f64(&r.mean_delta)))
        .collect();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let top = &points[rows.len() / 2..];
    let in_band = top.iter().all(|&(x, y)| {
        let center = c * x;
        y >= BAND_LOW * center && y <= BAND_HIGH * center
    });
    let increment = top.last().map(|l| l.1).unwrap_or(0.0)
        - top.first().map(|f| f.1).unwrap_or(0.0);
    let verdict = if in_band && increment >= MIN_GROWTH_INCREMENT && c > 0.0 {
        Verdict::GrowthConsistent
    } else {
        Verdict::SaturationConsistent
    };
    (verdict, c)
}

/// One row of the Paley–Zygmund table at threshold ratio γ ∈ [0, 1]: the
/// counter exceeds γ·M1 (equivalently γc₁·M2, all exact) on a set of
/// measure at least (1−γ)²·M1²/M2².
#[derive(Debug, Clone, PartialEq)]
pub struct PaleyZygmundRow {
    pub gamma: Rational,
    /// γ·M1, the exact counter threshold.
    pub threshold: Rational,
    /// (1−γ)²·M1²/M2², the exact predicted lower bound.
    pub predicted: Rational,
    /// Exact measure of {α : Δ̄_N(α) ≥ γ·M1} from full residue enumeration.
    pub empirical: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct PaleyZygmundReport {
    pub n_max: u64,
    pub depth: u32,
    pub m1: Rational,
    pub m2sq: Rational,
    /// M1/√M2², for display.
    pub c1: f64,
    pub rows: Vec<PaleyZygmundRow>,
}

impl PaleyZygmundReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n_max,
            "depth": self.depth,
            "M1": format_rational(&self.m1),
            "M2sq": format_rational(&self.m2sq),
            "c1": self.c1,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "gamma": format_rational(&r.gamma),
                "threshold": format_rational(&r.threshold),
                "predicted": format_rational(&r.predicted),
                "empirical": format_rational(&r.empirical),
                "holds": r.holds,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "gamma,threshold,predicted,empirical,holds")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                format_rational(&r.gamma),
                format_rational(&r.threshold),
                format_rational(&r.predicted),
                format_rational(&r.empirical),
                r.holds
            )?;
        }
        Ok(())
    }
}

/// Exhaustive Paley–Zygmund check: computes M1 and M2² exactly, enumerates
/// every residue at the working depth (the nonstrict counter factors
/// through it), and verifies the measure lower bound *exactly* at each
/// threshold ratio.  A violation is reported as an identity failure — the
/// inequality is a theorem, so failing it means the arithmetic is wrong.
pub fn run_paley_zygmund(
    spec: &SourceSpec,
    psi: &ApproxFunction,
    n_max: u64,
    depth: u32,
    gammas: &[Rational],
) -> Result<PaleyZygmundReport> {
    let p2 = spec.target_prime().ok_or(Error::ExpectedPrime)?;
    for g in gammas {
        if *g < Rational::zero() || *g > Rational::one() {
            return Err(Error::OutOfRange(format!(
                "threshold ratio γ = {g} outside [0, 1]"
            )));
        }
    }
    let modulus = checked_prime_power(p2, depth)
        .filter(|&m| m <= EXHAUSTIVE_LIMIT)
        .ok_or(Error::BudgetExceeded {
            what: "residue space for exhaustive enumeration",
            requested: depth as u64,
            limit: EXHAUSTIVE_LIMIT,
        })?;
    let m1 = m1_exact(spec, psi, n_max)?;
    let m2sq = m2sq_exact(spec, psi, n_max)?;
    let counter = SolutionCounter::prepare(spec, psi, n_max)?;

    // Δ̄ of every residue class at the working depth.
    let deltas: Vec<u64> = (0..modulus)
        .into_par_iter()
        .map(|residue| {
            let sample = PAdicSample::from_residue(p2, residue, depth)?;
            Ok(counter.counts(&sample)?.nonstrict)
        })
        .collect::<Result<_>>()?;

    let c1 = if m2sq.is_zero() {
        0.0
    } else {
        rational_to_f64(&m1) / rational_to_f64(&m2sq).sqrt()
    };
    let one = Rational::one();
    let mut rows = Vec::with_capacity(gammas.len());
    for gamma in gammas {
        let threshold = gamma * &m1;
        // Integer form of Δ ≥ γ·M1.
        let int_threshold = ceil_int(&threshold).to_u64().unwrap_or(u64::MAX);
        let favorable = deltas.iter().filter(|&&d| d >= int_threshold).count() as u64;
        let empirical = Rational::new(favorable.into(), modulus.into());
        let gap = &one - gamma;
        let predicted = if m2sq.is_zero() {
            Rational::zero()
        } else {
            gap.clone() * gap * &m1 * &m1 / &m2sq
        };
        let holds = empirical >= predicted;
        if !holds {
            return Err(Error::IdentityFailure(format!(
                "measure lower bound failed at γ = {gamma}: empirical {} < predicted {}",
                format_rational(&empirical),
                format_rational(&predicted)
            )));
        }
        rows.push(PaleyZygmundRow {
            gamma: gamma.clone(),
            threshold,
            predicted,
            empirical,
            holds,
        });
    }
    Ok(PaleyZygmundReport {
        n_max,
        depth,
        m1,
        m2sq,
        c1,
        rows,
    })
}

/// Verifies that the translates {z·p1^k : z mod p2^l} cover every residue
/// class mod p2^l exactly once — the partition behind transferring a ball
/// at one prime across another.  True for any distinct primes; this checks
/// it by explicit permutation rather than by trusting the coprimality
/// argument.
pub fn check_translate_partition(p1: u64, k: u32, p2: u64, l: u32) -> Result<bool> {
    Place::prime(p1)?;
    Place::prime(p2)?;
    if p1 == p2 {
        return Err(Error::SamePlace);
    }
    let modulus = checked_prime_power(p2, l)
        .filter(|&m| m <= EXHAUSTIVE_LIMIT)
        .ok_or(Error::BudgetExceeded {
            what: "translate residue space",
            requested: l as u64,
            limit: EXHAUSTIVE_LIMIT,
        })?;
    // p1^k mod p2^l by repeated squaring.
    let mut step = 1u64;
    let mut base = p1 % modulus;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            step = (step as u128 * base as u128 % modulus as u128) as u64;
        }
        base = (base as u128 * base as u128 % modulus as u128) as u64;
        e >>= 1;
    }
    let mut seen = vec![false; modulus as usize];
    let mut z_times_step = 0u64;
    for _ in 0..modulus {
        if seen[z_times_step as usize] {
            return Ok(false);
        }
        seen[z_times_step as usize] = true;
        z_times_step = (z_times_step + step) % modulus;
    }
    Ok(seen.iter().all(|&s| s))
}

/// A target point after the center-translation reduction: subtracting the
/// ball's center moves the problem to the origin-centered ball, and
/// dividing by the ball's scale normalizes it to the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTarget {
    /// x − r/s.
    pub translated: Rational,
    /// (x − r/s)/p^k, the fully rescaled point.
    pub scaled: Rational,
}

/// The translation-and-scaling that reduces approximation inside
/// B(r/s, p^{-k}) to approximation inside the origin ball.  Distances to
/// fractions are preserved verbatim by the translation (each approximant
/// a/n moves to a/n − r/s); [`translated_delta`] exercises that count
/// equality.
pub fn reduction_transform(x: &Rational, ball: &Ball) -> Result<ReducedTarget> {
    match ball {
        Ball::PAdic { p, exponent, center } => {
            let translated = x - center;
            let scaled = &translated * crate::exact::prime_power(*p, -(*exponent as i64));
            Ok(ReducedTarget { translated, scaled })
        }
        Ball::Arc { .. } => Err(Error::UnsupportedBallCombination(
            "the center-translation reduction applies to a ball at a prime source".into(),
        )),
    }
}

/// Left side: |x − a/n| < ψ(n) over admissible a/n ∈ ball, n ≤ n_max,
/// walked through the constraint machinery.
pub fn ball_delta_real(
    ball: &Ball,
    psi: &ApproxFunction,
    x: &Rational,
    n_max: u64,
) -> Result<u64> {
    use std::cmp::Ordering;
    let mut count = 0u64;
    for n in 1..=n_max {
        let mut numerators = Vec::new();
        for_each_admissible_numerator(ball, n, |a| numerators.push(a));
        for a in numerators {
            let gap = x - Rational::new(a.into(), n.into());
            let gap = if gap < Rational::zero() { -gap } else { gap };
            if psi.cmp_value(n, &gap)? == Ordering::Greater {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Right side of the reduction identity: count fractions of the *origin*
/// ball obtained as translates a/n − r/s, tested by direct rational
/// membership (no constraint machinery), against the translated target.
pub fn translated_delta(
    ball: &Ball,
    psi: &ApproxFunction,
    x: &Rational,
    n_max: u64,
) -> Result<u64> {
    use std::cmp::Ordering;
    let (p, exponent, center) = match ball {
        Ball::PAdic {
            p,
            exponent,
            center,
        } => (*p, *exponent, center.clone()),
        Ball::Arc { .. } => {
            return Err(Error::UnsupportedBallCombination(
                "the center-translation reduction applies to a ball at a prime source".into(),
            ))
        }
    };
    let origin_ball = Ball::padic(p, Rational::zero(), exponent)?;
    let x_translated = x - &center;
    let mut count = 0u64;
    for n in 1..=n_max {
        for a in 1..=n {
            if a.gcd(&n) != 1 {
                continue;
            }
            let moved = Rational::new(a.into(), n.into()) - &center;
            if !origin_ball.contains(&moved) {
                continue;
            }
            let gap = &x_translated - &moved;
            let gap = if gap < Rational::zero() { -gap } else { gap };
            if psi.cmp_value(n, &gap)? == Ordering::Greater {
                count += 1;
            }
        }
    }
    Ok(count)
}
