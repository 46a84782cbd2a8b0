//! Exact arithmetic for metric Diophantine approximation across places of Q.
//!
//! The library works with rationals a/n that are (i) drawn from a *source*
//! ball — either a p-adic ball in some Z_p or an arc of R/Z — and (ii) used to
//! approximate a target point at a *different* place of Q (a prime p or the
//! archimedean place).  On top of that sit:
//!
//! * [`padic`]   — places, valuations, norms, balls, and finite-precision
//!   p-adic sample points; everything is an exact rational.
//! * [`psi`]     — approximation speeds ψ (power laws, power-log laws, and
//!   finite tables) with exact comparisons against powers of a prime.
//! * [`farey`]   — ball-restricted Farey enumeration and totient sums, backed
//!   by a segmented sieve and Möbius/CRT residue counting.
//! * [`approx`]  — solution counters Δ_N and the exact first/second moments
//!   used in Paley–Zygmund style positive-measure arguments.
//! * [`experiments`] — seeded dichotomy and Paley–Zygmund trials, translate
//!   partitions, and recentering of real targets against p-adic source balls.
//! * [`hausdorff`] — dimension functions, cover sums, and box-counting
//!   estimates of the Jarník–Besicovitch exponent 2/τ.
//!
//! All norms, measures, and moment identities are exact `BigRational`
//! arithmetic end to end; floating point appears only where a quantity is
//! genuinely irrational (fractional-power cover sums and log–log slope fits).

pub mod approx;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod farey;
pub mod hausdorff;
pub mod padic;
pub mod psi;

pub use error::{Error, Result};
pub use exact::Rational;
pub use padic::{Ball, PAdicSample, Place, Valuation};
pub use psi::ApproxFunction;
