//! Dimension functions, f-volume cover sums for convergence arguments, and
//! a box-counting estimator for the dimension of the well-approximable set,
//! whose predicted value is the exponent 2/τ.
//!
//! Cover sums are exact rationals whenever the composed values are rational
//! and honest floats otherwise.  Box counting does every hit test in exact
//! rational arithmetic — a box is marked only if it provably meets a
//! solution ball — and floats appear solely in the final log–log slope fit.

use std::io::{self, Write};

use num::{BigUint, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{floor_int, rational_to_f64, MaybeExact, Rational};
use crate::farey::{for_each_admissible_numerator, inverse_mod};
use crate::padic::{checked_prime_power, Place};
use crate::psi::ApproxFunction;

/// Largest numerator/denominator accepted in a dimension-function exponent.
const MAX_EXPONENT_PART: u32 = 1 << 16;

/// Scales 2^0 .. 2^-PROBE_DEPTH used for the construction-time checks.
const PROBE_DEPTH: u32 = 40;

#[derive(Debug, Clone, PartialEq)]
enum DimForm {
    /// f(r) = r^s.
    Power { u: u32, v: u32 },
    /// f(r) = r^s · log₂(2/r): the logarithmic refinement of r^s.
    PowerLog { u: u32, v: u32 },
    /// Step function from breakpoints (r_i, f_i), r_i increasing, f_i > 0
    /// nondecreasing; below the first breakpoint it decays linearly to 0.
    Table { breakpoints: Vec<(Rational, Rational)> },
}

/// A gauge r ↦ f(r) against which covers are priced: continuous (table form:
/// along its grid), nondecreasing, vanishing at 0 (except the constant
/// f(r) = r⁰ = 1, which prices boxes by count alone), and doubling.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFunction {
    form: DimForm,
    /// Probed doubling constant: f(2x) ≤ λ·f(x) held on the dyadic probe
    /// grid with this λ.
    doubling: f64,
}

fn exponent_parts(s: &Rational) -> Result<(u32, u32)> {
    if s < &Rational::zero() {
        return Err(Error::InvalidFunction(format!(
            "dimension exponent {s} must be nonnegative"
        )));
    }
    let u = s.numer().magnitude().to_u32().filter(|&u| u <= MAX_EXPONENT_PART);
    let v = s.denom().magnitude().to_u32().filter(|&v| v <= MAX_EXPONENT_PART);
    match (u, v) {
        (Some(u), Some(v)) => Ok((u, v)),
        _ => Err(Error::InvalidFunction(format!(
            "dimension exponent {s} is too large to exponentiate exactly"
        ))),
    }
}

/// x^(u/v) as an exact rational, when x is a perfect v-th power.
fn exact_rational_pow(x: &Rational, u: u32, v: u32) -> Option<Rational> {
    if u == 0 {
        return Some(Rational::one());
    }
    if x.is_zero() {
        return Some(Rational::zero());
    }
    let root = |part: &BigUint| -> Option<BigUint> {
        if v == 1 {
            return Some(part.clone());
        }
        let r = part.nth_root(v);
        (r.pow(v) == *part).then_some(r)
    };
    let num = root(x.numer().magnitude())?;
    let den = root(x.denom().magnitude())?;
    Some(Rational::new(num.pow(u).into(), den.pow(u).into()))
}

impl DimensionFunction {
    /// f(r) = r^s with s ≥ 0.  s = 0 is the constant gauge (counting
    /// measure); every s > 0 vanishes at 0.  Doubling constant 2^s.
    pub fn power(s: Rational) -> Result<DimensionFunction> {
        let (u, v) = exponent_parts(&s)?;
        let doubling = 2f64.powf(u as f64 / v as f64).max(1.0 + 1e-9);
        Ok(DimensionFunction {
            form: DimForm::Power { u, v },
            doubling,
        })
    }

    /// f(r) = r^s·log₂(2/r) with s ≥ 1.  Below s = 1 the logarithm wins on
    /// coarse dyadic scales and the gauge stops being nondecreasing there,
    /// so such exponents are rejected.
    pub fn power_log(s: Rational) -> Result<DimensionFunction> {
        let (u, v) = exponent_parts(&s)?;
        if Rational::new(u.into(), v.into()) < Rational::one() {
            return Err(Error::InvalidFunction(format!(
                "logarithmic gauge needs exponent >= 1 to stay monotone (got {s})"
            )));
        }
        let f = DimensionFunction {
            form: DimForm::PowerLog { u, v },
            doubling: 1.0,
        };
        let doubling = f.probe_doubling()?;
        Ok(DimensionFunction {
            form: f.form,
            doubling,
        })
    }

    /// Step gauge through the given (radius, value) breakpoints; radii
    /// strictly increasing, values positive and nondecreasing.  Below the
    /// first breakpoint the gauge decays linearly to 0.
    pub fn table(breakpoints: Vec<(Rational, Rational)>) -> Result<DimensionFunction> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidFunction(
                "a table gauge needs at least one breakpoint".into(),
            ));
        }
        for window in breakpoints.windows(2) {
            if window[0].0 >= window[1].0 {
                return Err(Error::InvalidFunction(
                    "table gauge radii must be strictly increasing".into(),
                ));
            }
            if window[0].1 > window[1].1 {
                return Err(Error::InvalidFunction(
                    "table gauge values must be nondecreasing".into(),
                ));
            }
        }
        if breakpoints[0].0 <= Rational::zero() || breakpoints[0].1 <= Rational::zero() {
            return Err(Error::InvalidFunction(
                "table gauge radii and values must be positive".into(),
            ));
        }
        let f = DimensionFunction {
            form: DimForm::Table { breakpoints },
            doubling: 1.0,
        };
        let doubling = f.probe_doubling()?;
        Ok(DimensionFunction {
            form: f.form,
            doubling,
        })
    }

    /// The probed doubling constant λ with f(2x) ≤ λ·f(x) on the dyadic
    /// grid.
    pub fn doubling_constant(&self) -> f64 {
        self.doubling
    }

    /// Max of f(2x)/f(x) on the dyadic probe grid (table gauges also probe
    /// their own breakpoints).
    fn probe_doubling(&self) -> Result<f64> {
        let mut grid: Vec<Rational> = (0..=PROBE_DEPTH)
            .map(|j| Rational::new(1.into(), BigUint::from(2u32).pow(j).into()))
            .collect();
        if let DimForm::Table { breakpoints } = &self.form {
            for (r, _) in breakpoints {
                grid.push(r.clone());
                grid.push(r.clone() / Rational::from_integer(2.into()));
            }
        }
        let mut lambda = 1.0 + 1e-9_f64;
        let two = Rational::from_integer(2.into());
        for r in &grid {
            let low = self.eval_f64(r)?;
            let high = self.eval_f64(&(r * &two))?;
            if low > 0.0 && high.is_finite() {
                lambda = lambda.max(high / low);
            }
        }
        Ok(lambda)
    }

    /// f(r), exact when the arithmetic allows it.
    pub fn eval_exact(&self, r: &Rational) -> Result<Option<Rational>> {
        if r <= &Rational::zero() {
            return Err(Error::OutOfRange(
                "gauges are evaluated at positive radii".into(),
            ));
        }
        Ok(match &self.form {
            DimForm::Power { u, v } => exact_rational_pow(r, *u, *v),
            DimForm::PowerLog { .. } => None,
            DimForm::Table { breakpoints } => Some(eval_table(breakpoints, r)),
        })
    }

    /// f(r) as a float.
    pub fn eval_f64(&self, r: &Rational) -> Result<f64> {
        if r <= &Rational::zero() {
            return Err(Error::OutOfRange(
                "gauges are evaluated at positive radii".into(),
            ));
        }
        Ok(match &self.form {
            DimForm::Table { breakpoints } => rational_to_f64(&eval_table(breakpoints, r)),
            _ => self.eval_f64_at(rational_to_f64(r)),
        })
    }

    /// f at a float radius (for radii that are themselves irrational).
    /// Table gauges compare against their breakpoints in floating point on
    /// this path.
    pub fn eval_f64_at(&self, rf: f64) -> f64 {
        match &self.form {
            DimForm::Power { u, v } => rf.powf(*u as f64 / *v as f64),
            DimForm::PowerLog { u, v } => rf.powf(*u as f64 / *v as f64) * (2.0 / rf).log2(),
            DimForm::Table { breakpoints } => {
                let (r0, f0) = &breakpoints[0];
                let r0f = rational_to_f64(r0);
                if rf < r0f {
                    return rational_to_f64(f0) * rf / r0f;
                }
                let mut value = rational_to_f64(f0);
                for (ri, fi) in breakpoints {
                    if rational_to_f64(ri) <= rf {
                        value = rational_to_f64(fi);
                    } else {
                        break;
                    }
                }
                value
            }
        }
    }

    /// The exponent s for pure power gauges r^s.
    pub fn power_exponent(&self) -> Option<Rational> {
        match &self.form {
            DimForm::Power { u, v } => Some(Rational::new((*u).into(), (*v).into())),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.form {
            DimForm::Power { u, v } if *v == 1 => format!("power:{u}"),
            DimForm::Power { u, v } => format!("power:{u}/{v}"),
            DimForm::PowerLog { u, v } if *v == 1 => format!("powerlog:{u}"),
            DimForm::PowerLog { u, v } => format!("powerlog:{u}/{v}"),
            DimForm::Table { breakpoints } => format!("table[{}]", breakpoints.len()),
        }
    }
}

fn eval_table(breakpoints: &[(Rational, Rational)], r: &Rational) -> Rational {
    let (r0, f0) = &breakpoints[0];
    if r < r0 {
        // Linear ramp to zero keeps the gauge monotone and doubling.
        return f0 * r / r0;
    }
    let mut value = f0.clone();
    for (ri, fi) in breakpoints {
        if ri <= r {
            value = fi.clone();
        } else {
            break;
        }
    }
    value
}

/// The f-volume of a ball of radius r: f(r), radius convention.
pub fn f_volume(f: &DimensionFunction, r: &Rational) -> Result<f64> {
    f.eval_f64(r)
}

/// A truncated cover price Σ_{n = start}^{end} 2n·f(ψ(n)) together with the
/// tail comparison it admits.
#[derive(Debug, Clone)]
pub struct CoverSum {
    pub n_start: u64,
    pub n_end: u64,
    /// The truncated sum, exact when every term is rational.
    pub partial: MaybeExact,
    /// Integral-comparison bound on the discarded tail Σ_{n > end}; only
    /// power gauge ∘ power law admits one, and only when it converges.
    pub tail_bound: Option<f64>,
    /// partial + tail bound, when the latter exists.
    pub total: Option<f64>,
    /// The covering radius implied by the start height: ρ = ψ(start).
    pub rho: f64,
    /// Power gauge ∘ power law with s·τ ≤ 2: the full series provably
    /// diverges and no truncation says anything about the limit set.
    pub divergent: bool,
}

/// Prices the standard cover of the height-≥-start solution set: each level
/// n contributes at most 2n balls of radius ψ(n), so the f-price is bounded
/// by Σ 2n·f(ψ(n)).  Truncation at `n_end`; for power/power data the tail
/// is bounded by the comparison integral and the divergent regime
/// s·τ ≤ 2 is flagged instead of silently truncated.
pub fn cover_sum(
    psi: &ApproxFunction,
    f: &DimensionFunction,
    n_start: u64,
    n_end: u64,
) -> Result<CoverSum> {
    if n_start == 0 || n_start > n_end {
        return Err(Error::OutOfRange(format!(
            "cover sum needs 1 <= start <= end (got {n_start}..={n_end})"
        )));
    }
    if let Some(end) = psi.domain_end() {
        if n_end > end {
            return Err(Error::InvalidFunction(format!(
                "ψ table ends at {end}, below the cover end {n_end}"
            )));
        }
    }
    let mut exact_terms: Option<Vec<Rational>> = Some(Vec::new());
    let mut float_sum = 0.0f64;
    for n in n_start..=n_end {
        let psi_exact = psi.eval_exact(n)?;
        let f_exact = match &psi_exact {
            Some(r) => f.eval_exact(r)?,
            None => None,
        };
        match (&mut exact_terms, f_exact) {
            (Some(terms), Some(val)) => {
                terms.push(val * Rational::from_integer((2 * n).into()))
            }
            (slot, _) => *slot = None,
        }
        let f_of_psi = match &psi_exact {
            Some(r) => f.eval_f64(r)?,
            None => f.eval_f64_at(psi.eval_f64(n)?),
        };
        float_sum += 2.0 * n as f64 * f_of_psi;
    }
    let partial = match exact_terms {
        Some(terms) => {
            let mut total = Rational::zero();
            for t in terms {
                total += t;
            }
            MaybeExact::exact(total)
        }
        None => MaybeExact::approx(float_sum),
    };

    // Strength of the power/power case: s·τ decides everything.
    let s_tau = match (f.power_exponent(), psi.power_exponent()) {
        (Some(s), Some(tau)) => Some(s * tau),
        _ => None,
    };
    let divergent = matches!(&s_tau, Some(st) if *st <= Rational::from_integer(2.into()));
    let tail_bound = match &s_tau {
        Some(st) if *st > Rational::from_integer(2.into()) => {
            // Σ_{n > M} 2n^{1-sτ} ≤ 2·M^{2-sτ}/(sτ-2).
            let st = rational_to_f64(st);
            Some(2.0 * (n_end as f64).powf(2.0 - st) / (st - 2.0))
        }
        _ => None,
    };
    let total = tail_bound.map(|t| partial.value + t);
    Ok(CoverSum {
        n_start,
        n_end,
        partial,
        tail_bound,
        total,
        rho: psi.eval_f64(n_start)?,
        divergent,
    })
}

/// The predicted dimension of the τ-approximable set: 2/τ, valid for τ ≥ 2.
pub fn jb_exponent(tau: &Rational) -> Result<Rational> {
    if *tau < Rational::from_integer(2.into()) {
        return Err(Error::OutOfRange(format!(
            "the dimension formula 2/τ needs τ >= 2 (got {tau}); below that the set has full \
             measure and the formula does not apply"
        )));
    }
    Ok(Rational::new(2.into(), 1.into()) / tau.clone())
}

/// Knobs for the box-counting estimator.
#[derive(Debug, Clone)]
pub struct BoxCountConfig {
    /// Height window per scale δ: [low·δ^{-1/τ}, high·δ^{-1/τ}].  The
    /// solution balls of those heights have radius comparable to the box
    /// size, the regime in which hit boxes of the finite union track the
    /// limit set.
    pub h_low_factor: f64,
    pub h_high_factor: f64,
    /// Scales whose count reaches this fraction of all boxes are dropped
    /// from the fit (saturated), as are those with fewer hits than the
    /// sparse minimum.
    pub saturation_fraction: f64,
    pub sparse_minimum: u64,
    /// Cap on boxes per scale.
    pub max_boxes: u64,
}

impl Default for BoxCountConfig {
    fn default() -> Self {
        BoxCountConfig {
            h_low_factor: 0.25,
            h_high_factor: 4.0,
            saturation_fraction: 0.99,
            sparse_minimum: 32,
            max_boxes: 1 << 24,
        }
    }
}

/// One counted scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRow {
    /// scale = base^{-exponent}.
    pub exponent: u32,
    pub scale: f64,
    /// Number of base^{-exponent}-boxes meeting some solution ball of a
    /// height inside the window.
    pub count: u64,
    /// Total boxes at this scale.
    pub ambient: u64,
    pub h_low: u64,
    pub h_high: u64,
    /// Whether the row enters the slope fit.
    pub used_in_fit: bool,
}

/// Box-counting result: per-scale counts plus the log–log fit.
#[derive(Debug, Clone)]
pub struct BoxCountReport {
    /// Box geometry base: the target prime, or 2 on the circle.
    pub base: u64,
    pub tau: Rational,
    /// Predicted dimension 2/τ.
    pub target_dim: f64,
    pub rows: Vec<ScaleRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl BoxCountReport {
    /// Two-column plot table.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "scale,count")?;
        for row in &self.rows {
            writeln!(w, "{},{}", row.scale, row.count)?;
        }
        Ok(())
    }

    pub fn fit_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": self.base,
            "tau": crate::exact::format_rational(&self.tau),
            "target_dim": self.target_dim,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "scales_used": self.rows.iter().filter(|r| r.used_in_fit).count(),
        })
    }
}

/// Counts boxes (dyadic intervals of the circle, or p-adic cylinders)
/// meeting the union of solution balls B(a/n, n^{-τ}) over admissible
/// fractions with heights in a per-scale window, then fits
/// log count against log 1/scale.  Hit tests are exact; saturated and
/// sparse scales are dropped from the fit.
pub fn box_count(
    tau: &Rational,
    spec: &crate::farey::SourceSpec,
    exponents: &[u32],
    config: &BoxCountConfig,
) -> Result<BoxCountReport> {
    if *tau < Rational::from_integer(2.into()) {
        return Err(Error::OutOfRange(format!(
            "box counting targets the τ >= 2 regime (got {tau})"
        )));
    }
    if exponents.is_empty() {
        return Err(Error::OutOfRange("no scales requested".into()));
    }
    let psi = ApproxFunction::power_law(tau.clone())?;
    let base = match spec.target() {
        Place::Prime(p) => *p,
        Place::Archimedean => 2,
    };
    let tau_f = rational_to_f64(tau);
    let mut rows = Vec::with_capacity(exponents.len());
    for &l in exponents {
        let ambient = checked_prime_power(base, l)
            .filter(|&a| a <= config.max_boxes)
            .ok_or(Error::BudgetExceeded {
                what: "boxes at the requested scale",
                requested: l as u64,
                limit: config.max_boxes,
            })?;
        // Heights whose ball radius is comparable to the box size.
        let x = (ambient as f64).powf(1.0 / tau_f);
        let h_low = ((x * config.h_low_factor).floor() as u64).max(1);
        let h_high = ((x * config.h_high_factor).ceil() as u64).max(h_low);
        let count = match spec.target() {
            Place::Archimedean => count_circle_boxes(&psi, spec, ambient, h_low, h_high)?,
            Place::Prime(p) => count_cylinders(&psi, spec, *p, l, ambient, h_low, h_high)?,
        };
        rows.push(ScaleRow {
            exponent: l,
            scale: 1.0 / ambient as f64,
            count,
            ambient,
            h_low,
            h_high,
            used_in_fit: false,
        });
    }
    for row in &mut rows {
        let saturated = row.count as f64 >= config.saturation_fraction * row.ambient as f64;
        row.used_in_fit = row.count >= config.sparse_minimum && !saturated;
    }
    let used: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.used_in_fit)
        .map(|r| ((r.ambient as f64).ln(), (r.count as f64).ln()))
        .collect();
    if used.len() < 3 {
        return Err(Error::OutOfRange(format!(
            "degenerate scaling window: {} usable scales after dropping saturated/sparse ones, \
             need 3",
            used.len()
        )));
    }
    let (slope, intercept, r_squared) = least_squares(&used);
    Ok(BoxCountReport {
        base,
        tau: tau.clone(),
        target_dim: rational_to_f64(&jb_exponent(tau)?),
        rows,
        slope,
        intercept,
        r_squared,
    })
}

/// Marks dyadic intervals [i/ambient, (i+1)/ambient) of the circle meeting
/// some closed ball [a/n − ψ(n), a/n + ψ(n)].  Every edge comparison is an
/// exact rational inequality through the ψ comparator.
fn count_circle_boxes(
    psi: &ApproxFunction,
    spec: &crate::farey::SourceSpec,
    ambient: u64,
    h_low: u64,
    h_high: u64,
) -> Result<u64> {
    use std::cmp::Ordering;
    let mut hit = vec![false; ambient as usize];
    let mut mark = |i: i64| {
        let idx = i.rem_euclid(ambient as i64) as usize;
        hit[idx] = true;
    };
    for n in h_low..=h_high {
        if !spec.height_allowed(n) {
            continue;
        }
        let mut numerators = Vec::new();
        for_each_admissible_numerator(spec.ball(), n, |a| numerators.push(a));
        for a in numerators {
            let c = Rational::new(a.into(), n.into());
            // Center box: floor(c·ambient), on the universal cover.
            let center = floor_int(&(&c * Rational::from_integer(ambient.into())))
                .to_i64()
                .expect("a/n·ambient fits i64");
            mark(center);
            // Expand right while the box's left edge stays within the ball:
            // i/ambient − c ≤ ψ(n).
            let mut i = center + 1;
            while (i - center) < ambient as i64 {
                let d = Rational::new(i.into(), ambient.into()) - &c;
                let inside = d <= Rational::zero() || psi.cmp_value(n, &d)? != Ordering::Less;
                if !inside {
                    break;
                }
                mark(i);
                i += 1;
            }
            // Expand left while the box's right edge is strictly past the
            // ball's lower end: c − (i+1)/ambient < ψ(n).
            let mut i = center - 1;
            while (center - i) < ambient as i64 {
                let d = &c - Rational::new((i + 1).into(), ambient.into());
                let inside = d < Rational::zero() || psi.cmp_value(n, &d)? == Ordering::Greater;
                if !inside {
                    break;
                }
                mark(i);
                i -= 1;
            }
        }
    }
    Ok(hit.iter().filter(|&&h| h).count() as u64)
}

/// Marks depth-l cylinders (residue classes mod p^l) meeting some solution
/// ball: the ball around a/n is the residue class of a·n^{-1} modulo
/// p^{t(n)}, with p^{-t(n)} the largest p-power within ψ(n).
fn count_cylinders(
    psi: &ApproxFunction,
    spec: &crate::farey::SourceSpec,
    p: u64,
    l: u32,
    ambient: u64,
    h_low: u64,
    h_high: u64,
) -> Result<u64> {
    let mut hit = vec![false; ambient as usize];
    for n in h_low..=h_high {
        if !spec.height_allowed(n) || n % p == 0 {
            continue;
        }
        let star = psi.psi_star(n, p)?;
        let t = (star.exponent.max(0) as u32).min(l);
        let step = checked_prime_power(p, t).expect("t <= l so p^t fits");
        let copies = ambient / step;
        let inv = inverse_mod(n % ambient, ambient);
        let mut numerators = Vec::new();
        for_each_admissible_numerator(spec.ball(), n, |a| numerators.push(a));
        for a in numerators {
            let c = (a as u128 * inv as u128 % ambient as u128) as u64;
            let r = c % step;
            for k in 0..copies {
                hit[(r + k * step) as usize] = true;
            }
        }
    }
    Ok(hit.iter().filter(|&&h| h).count() as u64)
}

/// Least squares through (x, y) pairs: slope, intercept, R².
fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum();
    let mean_y = sy / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    (slope, intercept, r_squared)
}

/// Inclusive range of scale exponents (helper for callers assembling scale
/// sets).
pub fn scale_range(lo: u32, hi: u32) -> Vec<u32> {
    (lo..=hi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::farey::SourceSpec;
    use crate::padic::Ball;

    fn arc_to_prime(p: u64) -> SourceSpec {
        SourceSpec::new(Ball::full_arc(), Place::prime(p).unwrap()).unwrap()
    }

    fn padic_to_real(p: u64) -> SourceSpec {
        SourceSpec::new(Ball::full_padic(p).unwrap(), Place::archimedean()).unwrap()
    }

    #[test]
    fn gauge_values_at_simple_points() {
        let half = DimensionFunction::power(rat(1, 2)).unwrap();
        assert_eq!(half.eval_exact(&rat(1, 4)).unwrap(), Some(rat(1, 2)));
        assert!((f_volume(&half, &rat(1, 4)).unwrap() - 0.5).abs() < 1e-15);

        let identity = DimensionFunction::power(rat(1, 1)).unwrap();
        for r in [rat(1, 3), rat(2, 7), rat(1, 9)] {
            assert_eq!(identity.eval_exact(&r).unwrap(), Some(r.clone()));
        }

        let constant = DimensionFunction::power(rat(0, 1)).unwrap();
        assert_eq!(constant.eval_exact(&rat(1, 1000)).unwrap(), Some(rat(1, 1)));
        assert_eq!(f_volume(&constant, &rat(9, 10)).unwrap(), 1.0);
    }

    #[test]
    fn gauge_validation_and_doubling() {
        assert!(DimensionFunction::power(rat(-1, 2)).is_err());
        let identity = DimensionFunction::power(rat(1, 1)).unwrap();
        assert!((identity.doubling_constant() - 2.0).abs() < 1e-9);
        // Non-perfect powers have no exact value but a float one.
        let half = DimensionFunction::power(rat(1, 2)).unwrap();
        assert_eq!(half.eval_exact(&rat(1, 3)).unwrap(), None);
        assert!(half.eval_f64(&rat(1, 3)).unwrap() > 0.0);
        // Logarithmic gauges below exponent 1 are not monotone on dyadic
        // scales and are rejected.
        assert!(DimensionFunction::power_log(rat(1, 2)).is_err());
        let plog = DimensionFunction::power_log(rat(1, 1)).unwrap();
        assert!(plog.doubling_constant() <= 2.0 + 1e-9);
        // Monotone along dyadic scales.
        let mut prev = 0.0;
        for j in (1..=20).rev() {
            let r = Rational::new(1.into(), BigUint::from(2u32).pow(j).into());
            let v = plog.eval_f64(&r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn table_gauges_step_and_ramp() {
        let t = DimensionFunction::table(vec![(rat(1, 8), rat(1, 10)), (rat(1, 2), rat(1, 2))])
            .unwrap();
        assert_eq!(t.eval_exact(&rat(1, 2)).unwrap(), Some(rat(1, 2)));
        assert_eq!(t.eval_exact(&rat(1, 4)).unwrap(), Some(rat(1, 10)));
        // Below the first breakpoint: linear ramp f(r) = (1/10)·(r/(1/8)).
        assert_eq!(t.eval_exact(&rat(1, 16)).unwrap(), Some(rat(1, 20)));
        assert!(DimensionFunction::table(vec![]).is_err());
        assert!(
            DimensionFunction::table(vec![(rat(1, 2), rat(1, 2)), (rat(1, 4), rat(1, 4))])
                .is_err()
        );
    }

    #[test]
    fn cover_sum_of_the_cubic_window_is_exact() {
        // Σ_{n=2..4} 2n·ψ(n) with ψ = q^{-3}: 2(1/4 + 1/9 + 1/16) = 61/72.
        let psi = ApproxFunction::power_law(rat(3, 1)).unwrap();
        let f = DimensionFunction::power(rat(1, 1)).unwrap();
        let sum = cover_sum(&psi, &f, 2, 4).unwrap();
        assert_eq!(sum.partial.exact, Some(rat(61, 72)));
        assert!(!sum.divergent);
        assert!(sum.tail_bound.unwrap() > 0.0);
        assert!((sum.rho - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn critical_products_are_flagged_divergent() {
        let psi = ApproxFunction::power_law(rat(2, 1)).unwrap();
        let f = DimensionFunction::power(rat(1, 1)).unwrap();
        let sum = cover_sum(&psi, &f, 1, 50).unwrap();
        assert!(sum.divergent);
        assert!(sum.tail_bound.is_none());
        // s·τ = 3/2 < 2 likewise.
        let f = DimensionFunction::power(rat(3, 4)).unwrap();
        assert!(cover_sum(&psi, &f, 1, 50).unwrap().divergent);
    }

    #[test]
    fn convergent_tails_shrink_with_the_start_height() {
        // s·τ = 2.4 > 2: partials from successive starts decrease and the
        // grand total (from 1) stays finite.  Terms are 2n^{-7/5}, so the
        // remainder from 1000 is ≈ 5·1000^{-2/5} ≈ 0.315.
        let psi = ApproxFunction::power_law(rat(3, 1)).unwrap();
        let f = DimensionFunction::power(rat(4, 5)).unwrap();
        let mut prev = f64::INFINITY;
        for start in [10u64, 100, 1000] {
            let sum = cover_sum(&psi, &f, start, 5000).unwrap();
            assert!(sum.partial.exact.is_none(), "n^{{-12/5}} is irrational");
            let total = sum.total.unwrap();
            assert!(total < prev);
            prev = total;
        }
        assert!(
            (0.25..0.35).contains(&prev),
            "tail from 1000 should be near 5·1000^(-2/5), got {prev}"
        );
    }

    #[test]
    fn non_power_data_get_partial_sums_only() {
        let psi = ApproxFunction::power_log(rat(1, 1)).unwrap();
        let f = DimensionFunction::power(rat(1, 1)).unwrap();
        let sum = cover_sum(&psi, &f, 1, 30).unwrap();
        assert!(sum.tail_bound.is_none());
        assert!(!sum.divergent);
        let t = DimensionFunction::table(vec![(rat(1, 2), rat(1, 2))]).unwrap();
        let psi_pow = ApproxFunction::power_law(rat(3, 1)).unwrap();
        assert!(cover_sum(&psi_pow, &t, 1, 30).unwrap().tail_bound.is_none());
    }

    #[test]
    fn predicted_exponents() {
        assert_eq!(jb_exponent(&rat(2, 1)).unwrap(), rat(1, 1));
        assert_eq!(jb_exponent(&rat(4, 1)).unwrap(), rat(1, 2));
        assert_eq!(jb_exponent(&rat(5, 2)).unwrap(), rat(4, 5));
        assert!(matches!(
            jb_exponent(&rat(3, 2)),
            Err(Error::OutOfRange(_))
        ));
    }

    /// Brute-force circle oracle: test every box against every ball with
    /// plain rational arithmetic (integer τ keeps radii rational).
    fn circle_oracle(spec: &SourceSpec, tau: i64, j: u32, h_low: u64, h_high: u64) -> u64 {
        let ambient = 1u64 << j;
        let mut count = 0;
        for i in 0..ambient {
            let lo = rat(i as i64, ambient as i64);
            let hi = rat(i as i64 + 1, ambient as i64);
            let mut hit = false;
            'outer: for n in h_low..=h_high {
                if !spec.height_allowed(n) {
                    continue;
                }
                let mut numerators = Vec::new();
                for_each_admissible_numerator(spec.ball(), n, |a| numerators.push(a));
                let radius = Rational::new(1.into(), BigUint::from(n).pow(tau as u32).into());
                for a in numerators {
                    let c = rat(a as i64, n as i64);
                    // Consider the ball and its ±1 translates (circle wrap).
                    for shift in [-1i64, 0, 1] {
                        let cs = &c + rat(shift, 1);
                        if &cs - &radius < hi && &cs + &radius >= lo {
                            hit = true;
                            break 'outer;
                        }
                    }
                }
            }
            if hit {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn circle_box_counts_match_the_brute_force_oracle() {
        let specs = [padic_to_real(5), padic_to_real(2)];
        let tau = rat(3, 1);
        let psi = ApproxFunction::power_law(tau).unwrap();
        for spec in &specs {
            for j in [5u32, 7, 8] {
                let ambient = 1u64 << j;
                let x = (ambient as f64).powf(1.0 / 3.0);
                let h_low = ((x * 0.25).floor() as u64).max(1);
                let h_high = (x * 4.0).ceil() as u64;
                let fast = count_circle_boxes(&psi, spec, ambient, h_low, h_high).unwrap();
                assert_eq!(fast, circle_oracle(spec, 3, j, h_low, h_high), "j = {j}");
            }
        }
    }

    /// Brute-force cylinder oracle.
    fn cylinder_oracle(
        spec: &SourceSpec,
        psi: &ApproxFunction,
        p: u64,
        l: u32,
        h_low: u64,
        h_high: u64,
    ) -> u64 {
        let ambient = checked_prime_power(p, l).unwrap();
        let mut count = 0;
        for r in 0..ambient {
            let mut hit = false;
            'outer: for n in h_low..=h_high {
                if !spec.height_allowed(n) || n % p == 0 {
                    continue;
                }
                let t = (psi.psi_star(n, p).unwrap().exponent.max(0) as u32).min(l);
                let m = checked_prime_power(p, t).unwrap();
                let inv = inverse_mod(n % ambient, ambient);
                let mut numerators = Vec::new();
                for_each_admissible_numerator(spec.ball(), n, |a| numerators.push(a));
                for a in numerators {
                    let c = (a as u128 * inv as u128 % ambient as u128) as u64;
                    if c % m == r % m {
                        hit = true;
                        break 'outer;
                    }
                }
            }
            if hit {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn cylinder_counts_match_the_brute_force_oracle() {
        let spec = SourceSpec::new(Ball::full_padic(5).unwrap(), Place::prime(3).unwrap()).unwrap();
        let psi = ApproxFunction::power_law(rat(3, 1)).unwrap();
        for l in [3u32, 4, 5] {
            let ambient = checked_prime_power(3, l).unwrap();
            let x = (ambient as f64).powf(1.0 / 3.0);
            let h_low = ((x * 0.25).floor() as u64).max(1);
            let h_high = (x * 4.0).ceil() as u64;
            let fast = count_cylinders(&psi, &spec, 3, l, ambient, h_low, h_high).unwrap();
            assert_eq!(
                fast,
                cylinder_oracle(&spec, &psi, 3, l, h_low, h_high),
                "l = {l}"
            );
        }
    }

    #[test]
    fn widening_the_height_window_never_loses_boxes() {
        // Raw-count monotonicity in the window; disable the usable-row
        // filters so the comparison sees every scale (a window reaching
        // n = 1 legitimately saturates — still monotone).
        let spec = arc_to_prime(3);
        let tau = rat(2, 1);
        let keep_all = BoxCountConfig {
            sparse_minimum: 1,
            saturation_fraction: 2.0,
            ..BoxCountConfig::default()
        };
        let narrow = BoxCountConfig {
            h_high_factor: 2.0,
            ..keep_all.clone()
        };
        let wide = BoxCountConfig {
            h_low_factor: 0.1,
            h_high_factor: 8.0,
            ..keep_all
        };
        let scales = [4u32, 5, 6, 7];
        let a = box_count(&tau, &spec, &scales, &narrow).unwrap();
        let b = box_count(&tau, &spec, &scales, &wide).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert!(rb.count >= ra.count, "scale 3^-{}", ra.exponent);
        }
    }

    #[test]
    fn full_measure_case_has_slope_near_one() {
        // τ = 2 on the circle from a full p-adic source: dimension 1.
        let spec = padic_to_real(5);
        let report = box_count(&rat(2, 1), &spec, &[8, 9, 10, 11, 12], &BoxCountConfig::default())
            .unwrap();
        assert!(
            (report.slope - 1.0).abs() < 0.15,
            "slope {} for target 1",
            report.slope
        );
        assert!(report.r_squared > 0.9);
        assert_eq!(report.target_dim, 1.0);
    }

    #[test]
    fn degenerate_windows_are_rejected() {
        let spec = arc_to_prime(3);
        assert!(matches!(
            box_count(&rat(2, 1), &spec, &[4, 5], &BoxCountConfig::default()),
            Err(Error::OutOfRange(_))
        ));
        assert!(box_count(&rat(3, 2), &spec, &[4, 5, 6], &BoxCountConfig::default()).is_err());
    }

    #[test]
    fn report_serializes_to_csv_and_json() {
        let spec = arc_to_prime(3);
        let report =
            box_count(&rat(2, 1), &spec, &[4, 5, 6, 7], &BoxCountConfig::default()).unwrap();
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("scale,count\n"));
        assert_eq!(text.lines().count(), 5);
        let json = report.fit_json();
        assert!(json["slope"].is_f64());
        assert_eq!(json["tau"], serde_json::json!("2"));
    }
}
