//! Integer factorization sized for sieve moduli: trial division for the
//! small part, deterministic Miller-Rabin plus Brent's cycle variant of
//! Pollard rho for what remains. Budgeted: a stubborn cofactor is an error,
//! not an unbounded loop.

use crate::error::{Error, Result};

const TRIAL_LIMIT: u64 = 1_000_000;
const RHO_BUDGET: u64 = 1 << 22;

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic for all u64 via the standard 12-witness set.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// One non-trivial factor of odd composite n, or None if the budget runs
/// out across all polynomial offsets.
fn rho_brent(n: u64, budget: u64) -> Option<u64> {
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut cycle_len = 1u64;
        let mut spent = 0u64;
        loop {
            let anchor = x;
            let mut product = 1u64;
            let mut i = 0u64;
            while i < cycle_len {
                let chunk = (cycle_len - i).min(128);
                let save = x;
                for _ in 0..chunk {
                    x = f(x);
                    let diff = x.abs_diff(anchor);
                    if diff != 0 {
                        product = mul_mod(product, diff, n);
                    }
                }
                spent += chunk;
                let g = gcd(product, n);
                if g > 1 && g < n {
                    return Some(g);
                }
                if g == n {
                    // walk the chunk again step by step
                    let mut y = save;
                    for _ in 0..chunk {
                        y = f(y);
                        let g = gcd(y.abs_diff(anchor), n);
                        if g > 1 && g < n {
                            return Some(g);
                        }
                    }
                    break; // cycle degenerate for this c
                }
                i += chunk;
            }
            if spent >= budget {
                break;
            }
            if gcd(product, n) == n {
                break;
            }
            cycle_len *= 2;
        }
    }
    None
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Prime factorization in ascending prime order.
pub fn factorize(m: u64) -> Result<Vec<(u64, u32)>> {
    factorize_with_budget(m, RHO_BUDGET)
}

pub fn factorize_with_budget(m: u64, budget: u64) -> Result<Vec<(u64, u32)>> {
    if m == 0 {
        return Err(Error::EmptyInput("factorize(0)"));
    }
    let mut rest = m;
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |out: &mut Vec<(u64, u32)>, q: u64, e: u32| {
        match out.iter_mut().find(|(p, _)| *p == q) {
            Some((_, acc)) => *acc += e,
            None => out.push((q, e)),
        }
    };
    for q in std::iter::once(2).chain((3..).step_by(2)) {
        if q > TRIAL_LIMIT || q * q > rest {
            break;
        }
        let mut e = 0;
        while rest % q == 0 {
            rest /= q;
            e += 1;
        }
        if e > 0 {
            push(&mut out, q, e);
        }
    }
    // rest is 1, a prime, or a product of primes above the trial limit
    let mut stack = vec![rest];
    while let Some(v) = stack.pop() {
        if v == 1 {
            continue;
        }
        if is_prime(v) {
            push(&mut out, v, 1);
            continue;
        }
        let d = rho_brent(v, budget)
            .ok_or(Error::FactorizationTooHard { remaining: v as u128 })?;
        stack.push(d);
        stack.push(v / d);
    }
    out.sort_unstable();
    Ok(out)
}
