//! Segmented totient sieve with per-n distinct-prime lists.
//!
//! Working memory stays proportional to the segment size (2²⁰ integers), not
//! to the range: each segment carries φ(n) and a compact CSR table of the
//! distinct primes of every n, then is dropped before the next segment.

/// Segment length: a power of two keeping per-segment memory around 30 MB.
pub const SEGMENT_LEN: u64 = 1 << 20;

/// Primes up to `limit` inclusive, by a plain sieve of Eratosthenes.
pub fn primes_upto(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Calls `f(n, φ(n), distinct primes of n)` for every n in [lo, hi], in
/// increasing order.  The prime slice is valid only during the call.
pub fn for_each_totient<F: FnMut(u64, u64, &[u64])>(lo: u64, hi: u64, mut f: F) {
    assert!(lo >= 1, "totient sieve starts at 1");
    if lo > hi {
        return;
    }
    let root = (hi as f64).sqrt() as u64 + 2;
    let small_primes = primes_upto(root);

    let mut seg_lo = lo;
    while seg_lo <= hi {
        let seg_hi = seg_lo.saturating_add(SEGMENT_LEN - 1).min(hi);
        sieve_segment(seg_lo, seg_hi, &small_primes, &mut f);
        if seg_hi == u64::MAX {
            break;
        }
        seg_lo = seg_hi + 1;
    }
}

fn sieve_segment<F: FnMut(u64, u64, &[u64])>(
    lo: u64,
    hi: u64,
    small_primes: &[u64],
    f: &mut F,
) {
    let len = (hi - lo + 1) as usize;
    // val[i] carries the unfactored part of n = lo + i; phi accumulates φ.
    let mut val: Vec<u64> = (lo..=hi).collect();
    let mut phi: Vec<u64> = val.clone();
    let mut counts: Vec<u32> = vec![0; len];

    let first_multiple = |p: u64| -> u64 { p.max(lo.div_ceil(p) * p) };

    for &p in small_primes {
        if p > hi {
            break;
        }
        let mut m = first_multiple(p);
        while m <= hi {
            let i = (m - lo) as usize;
            counts[i] += 1;
            phi[i] = phi[i] / p * (p - 1);
            while val[i] % p == 0 {
                val[i] /= p;
            }
            if m > hi - p {
                break;
            }
            m += p;
        }
    }
    // Whatever remains is a single prime factor larger than √hi.
    for i in 0..len {
        if val[i] > 1 {
            counts[i] += 1;
            phi[i] = phi[i] / val[i] * (val[i] - 1);
        }
    }

    // CSR layout for the factor lists: offsets then a fill pass.
    let mut offsets = vec![0usize; len + 1];
    for i in 0..len {
        offsets[i + 1] = offsets[i] + counts[i] as usize;
    }
    let mut factors = vec![0u64; offsets[len]];
    let mut cursor = offsets.clone();
    for &p in small_primes {
        if p > hi {
            break;
        }
        let mut m = first_multiple(p);
        while m <= hi {
            let i = (m - lo) as usize;
            factors[cursor[i]] = p;
            cursor[i] += 1;
            if m > hi - p {
                break;
            }
            m += p;
        }
    }
    for i in 0..len {
        if val[i] > 1 {
            factors[cursor[i]] = val[i];
            cursor[i] += 1;
        }
    }

    for i in 0..len {
        f(lo + i as u64, phi[i], &factors[offsets[i]..offsets[i + 1]]);
    }
}
