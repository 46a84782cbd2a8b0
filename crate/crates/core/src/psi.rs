//! Approximation speed functions ψ.
//!
//! A speed is a positive, monotonically nonincreasing function of the height
//! q = 1, 2, 3, ...  Three families are supported:
//!
//! * `pow:τ`     — ψ(q) = q^{-τ} for rational τ > 0;
//! * `powlog:σ`  — ψ(q) = q^{-2} · blog(q)^{-σ} where blog(q) is the dyadic
//!   log ⌊log₂ q⌋ + 1 (kept integer so values stay exactly comparable);
//! * `table:`    — an explicit table of exact rational values on 1..=K.
//!
//! For fractional exponents the *value* of ψ(q) is irrational, but every
//! comparison against a rational — in particular against powers of a prime —
//! is still exact: raise both sides to the exponent's denominator and
//! compare big integers.  That is all the counting engines ever need.

use std::cmp::Ordering;

use num::{BigInt, BigUint, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{prime_power, rational_to_f64, Rational};

/// Largest exponent numerator/denominator accepted for the power families.
/// (Comparisons raise integers to these powers; keeping them small keeps the
/// arithmetic honest and fast.)
const MAX_EXPONENT_PART: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
enum Form {
    /// ψ(q) = q^{-u/v}.
    PowerLaw { u: u32, v: u32 },
    /// ψ(q) = q^{-2} · blog(q)^{-s/r}.
    PowerLog { s: u32, r: u32 },
    /// ψ(n) = values[n-1] for n in 1..=values.len().
    Table { values: Vec<Rational> },
}

/// A certified lower bound on the regularity ratio ψ(s·n)/ψ(n): for every
/// listed scale `s`, ψ(s·n) > c · ψ(n) was verified exactly for all n up to
/// `probe_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityCertificate {
    pub scales: Vec<(u64, Rational)>,
    pub probe_bound: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxFunction {
    form: Form,
    certificate: Option<RegularityCertificate>,
}

/// ψ(n) rounded down to a power of the prime p: the largest p-power that
/// does not exceed ψ(n).  This is exactly the Haar measure of the closed
/// p-adic ball `{ |x| <= ψ(n) }`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiStar {
    /// p^{-exponent} is the rounded value (negative exponents mean ψ(n) >= p).
    pub exponent: i64,
    pub value: Rational,
    /// Whether ψ(n) is itself exactly this power of p.
    pub equals_psi: bool,
}

impl ApproxFunction {
    /// ψ(q) = q^{-τ}, τ a positive rational.
    pub fn power_law(tau: Rational) -> Result<ApproxFunction> {
        if tau <= Rational::zero() {
            return Err(Error::InvalidFunction(
                "power-law exponent must be positive".into(),
            ));
        }
        let (u, v) = small_exponent_parts(&tau)?;
        Ok(ApproxFunction {
            form: Form::PowerLaw { u, v },
            certificate: None,
        })
    }

    /// ψ(q) = q^{-2} · blog(q)^{-σ}, σ a nonnegative rational.
    pub fn power_log(sigma: Rational) -> Result<ApproxFunction> {
        if sigma < Rational::zero() {
            return Err(Error::InvalidFunction(
                "power-log exponent must be nonnegative".into(),
            ));
        }
        let (s, r) = if sigma.is_zero() {
            (0, 1)
        } else {
            small_exponent_parts(&sigma)?
        };
        Ok(ApproxFunction {
            form: Form::PowerLog { s, r },
            certificate: None,
        })
    }

    /// Explicit table on n = 1..=K.  Values must be positive and
    /// nonincreasing; the whole domain is checked on load.
    pub fn table(values: Vec<Rational>) -> Result<ApproxFunction> {
        if values.is_empty() {
            return Err(Error::InvalidFunction("empty table".into()));
        }
        for (i, val) in values.iter().enumerate() {
            if *val <= Rational::zero() {
                return Err(Error::InvalidFunction(format!(
                    "table value at n = {} is not positive",
                    i + 1
                )));
            }
            if i > 0 && *val > values[i - 1] {
                return Err(Error::InvalidFunction(format!(
                    "table is not nonincreasing at n = {}",
                    i + 1
                )));
            }
        }
        Ok(ApproxFunction {
            form: Form::Table { values },
            certificate: None,
        })
    }

    /// Largest height the function is defined for (None = unbounded).
    pub fn domain_end(&self) -> Option<u64> {
        match &self.form {
            Form::Table { values } => Some(values.len() as u64),
            _ => None,
        }
    }

    fn check_domain(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::OutOfRange("ψ is defined for heights n >= 1".into()));
        }
        if let Some(end) = self.domain_end() {
            if n > end {
                return Err(Error::InvalidFunction(format!(
                    "height {n} beyond the table domain (ends at {end})"
                )));
            }
        }
        Ok(())
    }

    /// The decay exponent τ for pure power laws ψ(q) = q^{-τ}.
    pub fn power_exponent(&self) -> Option<Rational> {
        match &self.form {
            Form::PowerLaw { u, v } => Some(Rational::new((*u).into(), (*v).into())),
            _ => None,
        }
    }

    /// The exact rational value of ψ(n), when it is rational.  Fractional
    /// exponents make most values irrational; those come back as `None`.
    pub fn eval_exact(&self, n: u64) -> Result<Option<Rational>> {
        self.check_domain(n)?;
        match &self.form {
            Form::PowerLaw { u, v } => Ok(exact_inverse_root(&BigUint::from(n).pow(*u), *v)),
            Form::PowerLog { s, r } => {
                let base = BigUint::from(n).pow(2u32) * BigUint::from(blog(n)).pow(*s);
                Ok(exact_inverse_root(&base, *r))
            }
            Form::Table { values } => Ok(Some(values[n as usize - 1].clone())),
        }
    }

    /// The exact value, or an invalid-function error when ψ(n) is
    /// irrational.  Exact-moment arithmetic refuses rather than rounds.
    pub fn eval_rational(&self, n: u64) -> Result<Rational> {
        self.eval_exact(n)?.ok_or_else(|| {
            Error::InvalidFunction(format!(
                "ψ({n}) is irrational; this operation needs exact rational values"
            ))
        })
    }

    /// Float approximation (diagnostics and slope fitting only).
    pub fn eval_f64(&self, n: u64) -> Result<f64> {
        self.check_domain(n)?;
        Ok(match &self.form {
            Form::PowerLaw { u, v } => (n as f64).powf(-(*u as f64) / *v as f64),
            Form::PowerLog { s, r } => {
                (n as f64).powi(-2) * (blog(n) as f64).powf(-(*s as f64) / *r as f64)
            }
            Form::Table { values } => rational_to_f64(&values[n as usize - 1]),
        })
    }

    /// Exact comparison of ψ(n) against a positive rational.
    pub fn cmp_value(&self, n: u64, x: &Rational) -> Result<Ordering> {
        self.check_domain(n)?;
        if *x <= Rational::zero() {
            return Ok(Ordering::Greater);
        }
        let a = x.numer().magnitude();
        let b = x.denom().magnitude();
        Ok(match &self.form {
            // n^{-u/v} vs a/b  <=>  b^v vs a^v n^u.
            Form::PowerLaw { u, v } => b.pow(*v).cmp(&(a.pow(*v) * BigUint::from(n).pow(*u))),
            // n^{-2} blog^{-s/r} vs a/b  <=>  b^r vs a^r n^{2r} blog^s.
            Form::PowerLog { s, r } => b
                .pow(*r)
                .cmp(&(a.pow(*r) * BigUint::from(n).pow(2 * *r) * BigUint::from(blog(n)).pow(*s))),
            Form::Table { values } => values[n as usize - 1].cmp(x),
        })
    }

    /// Exact truth of ψ(m) > c·ψ(n) for positive rational c.
    pub fn scaled_compare_exceeds(&self, m: u64, c: &Rational, n: u64) -> Result<bool> {
        self.check_domain(n)?;
        self.check_domain(m)?;
        let a = c.numer().magnitude();
        let b = c.denom().magnitude();
        Ok(match &self.form {
            // m^{-u/v} > (a/b) n^{-u/v}  <=>  b^v n^u > a^v m^u.
            Form::PowerLaw { u, v } => {
                b.pow(*v) * BigUint::from(n).pow(*u) > a.pow(*v) * BigUint::from(m).pow(*u)
            }
            Form::PowerLog { s, r } => {
                b.pow(*r) * BigUint::from(n).pow(2 * *r) * BigUint::from(blog(n)).pow(*s)
                    > a.pow(*r) * BigUint::from(m).pow(2 * *r) * BigUint::from(blog(m)).pow(*s)
            }
            Form::Table { values } => {
                values[m as usize - 1] > c * &values[n as usize - 1]
            }
        })
    }

    /// ψ(n) rounded down to a power of the prime p.  The result satisfies
    /// `p^{-t} <= ψ(n) < p^{-t+1}` exactly.
    pub fn psi_star(&self, n: u64, p: u64) -> Result<PsiStar> {
        self.check_domain(n)?;
        // Start from a float guess of t = ceil(-log_p ψ(n)) and correct it
        // with exact comparisons; the guess is off by at most a step or two.
        let f = self.eval_f64(n)?;
        let mut t = if f > 0.0 && f.is_finite() {
            (-f.ln() / (p as f64).ln()).ceil() as i64
        } else {
            0
        };
        // Establish p^{-t} <= ψ(n).
        while self.cmp_value(n, &prime_power(p, -t))? == Ordering::Less {
            t += 1;
        }
        // Tighten: largest such power.
        while self.cmp_value(n, &prime_power(p, -(t - 1)))? != Ordering::Less {
            t -= 1;
        }
        let value = prime_power(p, -t);
        let equals_psi = self.cmp_value(n, &value)? == Ordering::Equal;
        Ok(PsiStar {
            exponent: t,
            value,
            equals_psi,
        })
    }

    /// The smallest integer e with `p^{-e} < ψ(n)`; valuations >= e are
    /// exactly the solutions of the strict condition `|x|_p < ψ(n)`.
    pub fn strict_exponent(&self, n: u64, p: u64) -> Result<i64> {
        let star = self.psi_star(n, p)?;
        Ok(if star.equals_psi {
            star.exponent + 1
        } else {
            star.exponent
        })
    }

    /// Probes the regularity property "for every s there is c > 0 with
    /// ψ(s·n) > c·ψ(n)": for each scale in `scales`, finds a rational c and
    /// verifies the inequality exactly for all n up to `probe_bound`.
    pub fn certify_regularity(mut self, scales: &[u64], probe_bound: u64) -> Result<ApproxFunction> {
        if probe_bound == 0 {
            return Err(Error::OutOfRange("probe bound must be positive".into()));
        }
        let mut certified = Vec::new();
        for &s in scales {
            if s < 2 {
                return Err(Error::OutOfRange("regularity scales must be >= 2".into()));
            }
            let bound = match self.domain_end() {
                Some(end) => {
                    let b = end / s;
                    if b == 0 {
                        return Err(Error::InvalidFunction(format!(
                            "table too short to probe scale {s}"
                        )));
                    }
                    b.min(probe_bound)
                }
                None => probe_bound,
            };
            // Float guess of the minimum ratio, then shave and verify exactly.
            let mut min_ratio = f64::INFINITY;
            for n in 1..=bound {
                let ratio = self.eval_f64(n * s)? / self.eval_f64(n)?;
                min_ratio = min_ratio.min(ratio);
            }
            let mut c = rational_below(min_ratio * (1.0 - 1e-9));
            let verified = 'attempt: loop {
                for n in 1..=bound {
                    if !self.scaled_compare_exceeds(n * s, &c, n)? {
                        // Float slop: retreat and retry.
                        c = &c / Rational::from_integer(BigInt::from(2));
                        if c.numer().is_zero() {
                            break 'attempt false;
                        }
                        continue 'attempt;
                    }
                }
                break true;
            };
            if !verified || c <= Rational::zero() {
                return Err(Error::InvalidFunction(format!(
                    "no positive regularity constant found at scale {s}"
                )));
            }
            certified.push((s, c));
        }
        self.certificate = Some(RegularityCertificate {
            scales: certified,
            probe_bound,
        });
        Ok(self)
    }

    pub fn regularity_certificate(&self) -> Option<&RegularityCertificate> {
        self.certificate.as_ref()
    }

    /// Short human/manifest description, e.g. `pow:2`, `powlog:3/2`,
    /// `table[64]`.
    pub fn describe(&self) -> String {
        match &self.form {
            Form::PowerLaw { u, v } => {
                if *v == 1 {
                    format!("pow:{u}")
                } else {
                    format!("pow:{u}/{v}")
                }
            }
            Form::PowerLog { s, r } => {
                if *r == 1 {
                    format!("powlog:{s}")
                } else {
                    format!("powlog:{s}/{r}")
                }
            }
            Form::Table { values } => format!("table[{}]", values.len()),
        }
    }
}

/// Dyadic log: number of binary digits of n (⌊log₂ n⌋ + 1), so blog(1) = 1
/// and the values stay integers.
fn blog(n: u64) -> u64 {
    debug_assert!(n >= 1);
    64 - n.leading_zeros() as u64
}

fn small_exponent_parts(x: &Rational) -> Result<(u32, u32)> {
    let u = x.numer().magnitude().to_u32().filter(|&u| u <= MAX_EXPONENT_PART);
    let v = x.denom().magnitude().to_u32().filter(|&v| v <= MAX_EXPONENT_PART);
    match (u, v) {
        (Some(u), Some(v)) => Ok((u, v)),
        _ => Err(Error::InvalidFunction(format!(
            "exponent {x} is too large (numerator and denominator must fit below {MAX_EXPONENT_PART})"
        ))),
    }
}

/// 1 / base^{1/v} when that is exactly rational (base a perfect v-th power).
fn exact_inverse_root(base: &BigUint, v: u32) -> Option<Rational> {
    if v == 1 {
        return Some(Rational::new(BigInt::one(), BigInt::from(base.clone())));
    }
    let root = base.nth_root(v);
    if root.pow(v) == *base {
        Some(Rational::new(BigInt::one(), BigInt::from(root)))
    } else {
        None
    }
}

/// A rational slightly below the given positive float (dyadic truncation).
fn rational_below(x: f64) -> Rational {
    if !(x.is_finite() && x > 0.0) {
        return Rational::zero();
    }
    let scaled = (x * (1u64 << 40) as f64).floor();
    Rational::new(
        BigInt::from(scaled.max(0.0) as u64),
        BigInt::from(1u64 << 40),
    )
}
