//! Coprimality counting by inclusion–exclusion over distinct prime divisors.
//!
//! All counts run over subsets of the distinct primes of n (Möbius signs),
//! pruning branches whose product already exceeds the range.  Products of a
//! subset with a congruence modulus are combined by the Chinese remainder
//! theorem and kept in `u128`, so no intermediate overflows for any `u64`
//! inputs.

/// Number of a in [1, x] with gcd(a, n) = 1, where `primes` lists the
/// distinct primes of n (in any order, each once).
pub fn coprime_upto(primes: &[u64], x: u64) -> u64 {
    fn go(primes: &[u64], x: u64, prod: u64, sign: i64) -> i64 {
        match primes.split_first() {
            None => sign * (x / prod) as i64,
            Some((&p, rest)) => {
                let mut total = go(rest, x, prod, sign);
                if let Some(np) = prod.checked_mul(p) {
                    if np <= x {
                        total += go(rest, x, np, -sign);
                    }
                }
                total
            }
        }
    }
    go(primes, x, 1, 1) as u64
}

/// Number of a in [lo, hi] with gcd(a, n) = 1 (empty when lo > hi).
pub fn coprime_in_range(primes: &[u64], lo: u64, hi: u64) -> u64 {
    if lo > hi {
        return 0;
    }
    let below = if lo <= 1 { 0 } else { coprime_upto(primes, lo - 1) };
    coprime_upto(primes, hi) - below
}

/// Number of a in [1, x] with a ≡ r (mod m), 0 ≤ r < m.
fn congruent_upto(x: u64, m: u128, r: u128) -> u64 {
    debug_assert!(r < m);
    if r == 0 {
        (x as u128 / m) as u64
    } else if r > x as u128 {
        0
    } else {
        ((x as u128 - r) / m + 1) as u64
    }
}

/// Multiplicative inverse of a modulo m (gcd(a, m) = 1, m ≥ 1).
pub fn inverse_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r.abs(), 1, "inverse of non-unit");
    let inv = old_s * old_r.signum();
    inv.rem_euclid(m as i128) as u64
}

/// Number of a in [1, x] with gcd(a, n) = 1 and a ≡ r (mod q), where
/// `primes` lists the distinct primes of n and gcd(q, n) = 1.
pub fn coprime_congruent_upto(primes: &[u64], x: u64, q: u64, r: u64) -> u64 {
    debug_assert!(q >= 1 && r < q);
    debug_assert!(primes.iter().all(|p| q % p != 0), "modulus must be coprime to n");
    fn go(primes: &[u64], x: u64, q: u64, r: u64, d: u64, sign: i64) -> i64 {
        match primes.split_first() {
            None => {
                // a ≡ 0 (mod d) and a ≡ r (mod q): a = d·t with
                // t ≡ r·d⁻¹ (mod q), a single class mod d·q.
                let t = (r as u128 * inverse_mod(d % q, q) as u128) % q as u128;
                let m = d as u128 * q as u128;
                sign * congruent_upto(x, m, d as u128 * t) as i64
            }
            Some((&p, rest)) => {
                let mut total = go(rest, x, q, r, d, sign);
                if let Some(nd) = d.checked_mul(p) {
                    if nd <= x {
                        total += go(rest, x, q, r, nd, -sign);
                    }
                }
                total
            }
        }
    }
    go(primes, x, q, r, 1, 1) as u64
}

/// Number of a in [lo, hi] with gcd(a, n) = 1 and a ≡ r (mod q); see
/// [`coprime_congruent_upto`] for the conventions.
pub fn coprime_congruent_in_range(primes: &[u64], lo: u64, hi: u64, q: u64, r: u64) -> u64 {
    if lo > hi {
        return 0;
    }
    let below = if lo <= 1 {
        0
    } else {
        coprime_congruent_upto(primes, lo - 1, q, r)
    };
    coprime_congruent_upto(primes, hi, q, r) - below
}
