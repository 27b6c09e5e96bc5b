//! The sieve set Z(I, m): members of an interval passing per-prime residue
//! rules that keep p' nonzero at the working modulus, so roots of
//! p(z) = c (mod m) restricted to Z stay few and Hensel-liftable.
//!
//! Rules depend only on (p, q), never on the exponent of q in m or on the
//! interval. Z(I, m) is therefore nested under divisors of m; `verify_nesting`
//! re-checks that by enumeration.

pub mod factor;

use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use rayon::prelude::*;
use serde::Serialize;

/// Root scans are linear in the prime; refuse past desk scale.
const PRIME_SCAN_CAP: u64 = 10_000_000;
const MODULUS_CAP: u64 = 1 << 62;
const SMALL_RULE_CAP: u64 = 1 << 31;
const COMBINATION_CAP: u64 = 1 << 20;

/// For primes q <= d-1 (and the fallback below): membership fixes
/// z = z_q (mod q^tau) with p'(z_q) nonzero mod q^tau, using the least such
/// tau and then the least residue.
///
/// `fallback` marks a prime q >= d whose p' vanishes identically mod q
/// (q divides every coefficient of p'), which the large-prime exclusion
/// cannot handle; it is treated under the small-prime rule instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmallPrimeRule {
    pub q: u64,
    pub tau: u32,
    /// q^tau
    pub modulus: u64,
    pub z_q: u64,
    pub fallback: bool,
}

/// For primes q >= d: membership excludes exactly d-1 residues mod q,
/// namely every root of p' mod q padded upward with the smallest non-roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LargePrimeRule {
    pub q: u64,
    pub excluded: Vec<u64>,
    pub derivative_roots: u64,
}

#[derive(Debug, Clone)]
pub struct SieveSet {
    poly: IntPolynomial,
    deriv: IntPolynomial,
    m: u64,
    factorization: Vec<(u64, u32)>,
    lo: u64,
    hi: u64,
    small: Vec<SmallPrimeRule>,
    large: Vec<LargePrimeRule>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveReport {
    pub poly: String,
    pub m: u64,
    pub factorization: Vec<(u64, u32)>,
    pub lo: u64,
    pub hi: u64,
    pub small_rules: Vec<SmallPrimeRule>,
    pub large_rules: Vec<LargePrimeRule>,
    pub size: u64,
    pub interval_len: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MaxRootReport {
    pub c_star: u64,
    pub count: u64,
    /// Product of per-prime caps: d for an exclusion rule, the candidate
    /// count q^(max(alpha,tau)-tau) for a congruence rule.
    pub bound: u64,
}

pub fn build_sieve(p: &IntPolynomial, m: u64, lo: u64, hi: u64) -> Result<SieveSet> {
    SieveSet::build(p, m, lo, hi)
}

impl SieveSet {
    pub fn build(p: &IntPolynomial, m: u64, lo: u64, hi: u64) -> Result<SieveSet> {
        if m < 2 {
            return Err(Error::Precondition(format!("sieve modulus must be >= 2, got {m}")));
        }
        if m > MODULUS_CAP {
            return Err(Error::ModulusTooLarge { m, max: MODULUS_CAP });
        }
        if lo < 1 {
            return Err(Error::Precondition("sieve intervals start at 1".into()));
        }
        let deriv = p.derivative()?;
        if deriv.is_zero() {
            return Err(Error::DerivativeVanishes);
        }
        let d = p.degree() as u64;
        let factorization = factor::factorize(m)?;
        let mut small = Vec::new();
        let mut large = Vec::new();
        for &(q, _) in &factorization {
            if q > PRIME_SCAN_CAP {
                return Err(Error::Precondition(format!(
                    "prime factor {q} of {m} is past the root-scan range"
                )));
            }
            if q + 1 <= d {
                small.push(small_rule(&deriv, q, false)?);
            } else {
                match large_rule(&deriv, q, d)? {
                    Some(rule) => large.push(rule),
                    None => small.push(small_rule(&deriv, q, true)?),
                }
            }
        }
        Ok(SieveSet { poly: p.clone(), deriv, m, factorization, lo, hi, small, large })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn interval(&self) -> (u64, u64) {
        (self.lo, self.hi)
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn factorization(&self) -> &[(u64, u32)] {
        &self.factorization
    }

    pub fn small_rules(&self) -> &[SmallPrimeRule] {
        &self.small
    }

    pub fn large_rules(&self) -> &[LargePrimeRule] {
        &self.large
    }

    pub fn contains(&self, z: u64) -> bool {
        z >= self.lo
            && z <= self.hi
            && self.small.iter().all(|r| z % r.modulus == r.z_q)
            && self
                .large
                .iter()
                .all(|r| r.excluded.binary_search(&(z % r.q)).is_err())
    }

    /// Ascending members of Z.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (self.lo..=self.hi).filter(move |&z| self.contains(z))
    }

    pub fn members(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn report(&self) -> SieveReport {
        let size = self.iter().count() as u64;
        let interval_len = if self.lo > self.hi { 0 } else { self.hi - self.lo + 1 };
        SieveReport {
            poly: self.poly.to_string(),
            m: self.m,
            factorization: self.factorization.clone(),
            lo: self.lo,
            hi: self.hi,
            small_rules: self.small.clone(),
            large_rules: self.large.clone(),
            size,
            interval_len,
            ratio: if interval_len == 0 { 0.0 } else { size as f64 / interval_len as f64 },
        }
    }

    /// Exact number of z in Z with p(z) = c (mod m), by per-prime-power root
    /// construction (Hensel lifts where the rule guarantees a unit
    /// derivative, bounded candidate blocks where it fixes a congruence)
    /// combined with the Chinese remainder theorem. Debug builds re-check
    /// against a literal interval scan.
    pub fn count_roots(&self, c: u64) -> Result<u64> {
        let count = self.count_roots_inner(c)?;
        #[cfg(debug_assertions)]
        if self.hi.saturating_sub(self.lo) <= 200_000 {
            let brute = self
                .iter()
                .filter(|&z| self.poly.eval_mod(z, self.m) == c)
                .count() as u64;
            assert_eq!(count, brute, "restricted root count diverged at c = {c}");
        }
        Ok(count)
    }

    fn count_roots_inner(&self, c: u64) -> Result<u64> {
        if c >= self.m {
            return Err(Error::Precondition(format!("c = {c} is not a residue mod {}", self.m)));
        }
        if self.lo > self.hi {
            return Ok(0);
        }
        let mut residues: Vec<u64> = vec![0];
        let mut l: u64 = 1;
        for &(q, alpha) in &self.factorization {
            let (qg, roots) = self.roots_mod_prime_power(q, alpha, c)?;
            if roots.is_empty() {
                return Ok(0);
            }
            let new_l = l.checked_mul(qg).ok_or(Error::Overflow("sieve crt"))?;
            if residues.len() as u64 * roots.len() as u64 > COMBINATION_CAP {
                return Err(Error::Precondition("root combination blow-up past desk scale".into()));
            }
            let mut next = Vec::with_capacity(residues.len() * roots.len());
            for &r in &residues {
                for &s in &roots {
                    next.push(crt_pair(r, l, s, qg));
                }
            }
            residues = next;
            l = new_l;
        }
        Ok(residues
            .iter()
            .map(|&r| count_congruent(self.lo, self.hi, r, l))
            .sum())
    }

    /// Admissible residues mod q^max(alpha, tau) solving p = c mod q^alpha.
    fn roots_mod_prime_power(&self, q: u64, alpha: u32, c: u64) -> Result<(u64, Vec<u64>)> {
        let q_alpha = q.checked_pow(alpha).ok_or(Error::Overflow("sieve prime power"))?;
        let c_a = c % q_alpha;
        if let Some(rule) = self.small.iter().find(|r| r.q == q) {
            let qg = q_alpha.max(rule.modulus);
            if qg / rule.modulus > COMBINATION_CAP {
                return Err(Error::Precondition("congruence block past desk scale".into()));
            }
            let mut roots = Vec::new();
            let mut t = rule.z_q;
            while t < qg {
                if self.poly.eval_mod(t, q_alpha) == c_a {
                    roots.push(t);
                }
                t += rule.modulus;
            }
            Ok((qg, roots))
        } else {
            let rule = self
                .large
                .iter()
                .find(|r| r.q == q)
                .expect("every prime factor carries a rule");
            let c_q = c % q;
            let mut roots = Vec::new();
            for r in 0..q {
                if rule.excluded.binary_search(&r).is_ok() {
                    continue;
                }
                if self.poly.eval_mod(r, q) == c_q {
                    roots.push(self.hensel_lift(r, q, alpha, c_a));
                }
            }
            Ok((q_alpha, roots))
        }
    }

    /// Unique lift of a root with p'(r) nonzero mod q from mod q to mod
    /// q^alpha.
    fn hensel_lift(&self, root: u64, q: u64, alpha: u32, c_a: u64) -> u64 {
        let mut r = root;
        let mut qi = q;
        for _ in 1..alpha {
            let qi1 = qi * q;
            let val = (self.poly.eval_mod(r, qi1) + qi1 - c_a % qi1) % qi1;
            debug_assert_eq!(val % qi, 0);
            let t = (val / qi) % q;
            let inv = factor::pow_mod(self.deriv.eval_mod(r, q), q - 2, q);
            let s = (q - (t as u128 * inv as u128 % q as u128) as u64) % q;
            r += s * qi;
            qi = qi1;
        }
        debug_assert_eq!(self.poly.eval_mod(r, qi), c_a % qi);
        r
    }

    /// The residue c maximizing the restricted root count, with the count
    /// and the structural per-prime bound. Needs the interval to cover at
    /// least one full period of m.
    pub fn max_root_count(&self) -> Result<MaxRootReport> {
        if self.lo > self.hi || self.hi - self.lo + 1 < self.m {
            return Err(Error::Precondition(format!(
                "max_root_count needs the interval to cover a full period of {}",
                self.m
            )));
        }
        let d = self.poly.degree() as u64;
        let mut bound = 1u64;
        for &(q, alpha) in &self.factorization {
            let per = if let Some(rule) = self.small.iter().find(|r| r.q == q) {
                let qg = q.pow(alpha).max(rule.modulus);
                qg / rule.modulus
            } else {
                d
            };
            bound = bound.checked_mul(per).ok_or(Error::Overflow("sieve bound"))?;
        }
        let best = (0..self.m)
            .into_par_iter()
            .map(|c| self.count_roots_inner(c).map(|count| (count, c)))
            .try_reduce(
                || (0, u64::MAX),
                |a, b| Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
            )?;
        Ok(MaxRootReport { c_star: best.1, count: best.0, bound })
    }
}

fn small_rule(deriv: &IntPolynomial, q: u64, fallback: bool) -> Result<SmallPrimeRule> {
    let mut modulus = q;
    let mut tau = 1u32;
    loop {
        if modulus > SMALL_RULE_CAP {
            return Err(Error::Precondition(format!(
                "no usable residue for prime {q} below the exponent cap"
            )));
        }
        if let Some(z_q) = (0..modulus).find(|&z| deriv.eval_mod(z, modulus) != 0) {
            return Ok(SmallPrimeRule { q, tau, modulus, z_q, fallback });
        }
        modulus = modulus.checked_mul(q).ok_or(Error::Overflow("sieve small rule"))?;
        tau += 1;
    }
}

/// None signals p' vanishing identically mod q (the fallback case).
fn large_rule(deriv: &IntPolynomial, q: u64, d: u64) -> Result<Option<LargePrimeRule>> {
    let mut roots = Vec::new();
    for z in 0..q {
        if deriv.eval_mod(z, q) == 0 {
            roots.push(z);
        }
    }
    if roots.len() as u64 == q {
        return Ok(None);
    }
    if roots.len() as u64 > d - 1 {
        return Err(Error::InternalInvariantBroken(format!(
            "p' has {} roots mod {q}, more than degree allows",
            roots.len()
        )));
    }
    let mut excluded = roots.clone();
    let mut pad = 0u64;
    while (excluded.len() as u64) < d - 1 {
        if !roots.contains(&pad) {
            excluded.push(pad);
        }
        pad += 1;
    }
    excluded.sort_unstable();
    Ok(Some(LargePrimeRule { q, excluded, derivative_roots: roots.len() as u64 }))
}

fn crt_pair(r1: u64, n1: u64, r2: u64, n2: u64) -> u64 {
    // coprime moduli; result < n1 * n2
    let (_, inv, _) = egcd(n1 as i128, n2 as i128);
    let k = (r2 as i128 - r1 as i128).rem_euclid(n2 as i128) * inv.rem_euclid(n2 as i128) % n2 as i128;
    (r1 as i128 + k.rem_euclid(n2 as i128) * n1 as i128) as u64
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

fn count_congruent(lo: u64, hi: u64, r: u64, l: u64) -> u64 {
    let first = lo + (r + l - lo % l) % l;
    if first > hi {
        0
    } else {
        (hi - first) / l + 1
    }
}

/// Least z in [lo, hi] with p(z) distinct from alpha_i mod m_i for every
/// given constraint (at most two).
pub fn find_avoiding(
    p: &IntPolynomial,
    lo: u64,
    hi: u64,
    constraints: &[(u64, u64)],
) -> Result<Option<u64>> {
    if constraints.len() > 2 {
        return Err(Error::TooManyConstraints { given: constraints.len() });
    }
    for &(m_i, alpha_i) in constraints {
        if m_i == 0 || m_i > MODULUS_CAP {
            return Err(Error::Precondition(format!("constraint modulus {m_i} unusable")));
        }
        if alpha_i >= m_i {
            return Err(Error::Precondition(format!(
                "{alpha_i} is not a residue mod {m_i}"
            )));
        }
    }
    for z in lo..=hi {
        if constraints.iter().all(|&(m_i, a_i)| p.eval_mod(z, m_i) != a_i) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// Every member of Z(I, m) must land in Z(I, m_star) when m_star | m.
pub fn verify_nesting(
    p: &IntPolynomial,
    m: u64,
    m_star: u64,
    lo: u64,
    hi: u64,
) -> Result<bool> {
    if m_star == 0 || m % m_star != 0 {
        return Err(Error::NotADivisor { m, m_star });
    }
    let z = SieveSet::build(p, m, lo, hi)?;
    let z_star = SieveSet::build(p, m_star, lo, hi)?;
    let nested = z.iter().all(|v| z_star.contains(v));
    Ok(nested)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    #[test]
    fn square_mod_nine() {
        let p = parse_polynomial("z^2").unwrap();
        let s = SieveSet::build(&p, 9, 1, 9).unwrap();
        assert!(s.small_rules().is_empty());
        assert_eq!(s.large_rules().len(), 1);
        assert_eq!(s.large_rules()[0].q, 3);
        assert_eq!(s.large_rules()[0].excluded, vec![0]);
        assert_eq!(s.members(), vec![1, 2, 4, 5, 7, 8]);
        assert_eq!(s.count_roots(1).unwrap(), 2); // 1 and 8
        assert_eq!(s.count_roots(0).unwrap(), 0); // multiples of 3 excluded
        assert_eq!(s.count_roots(3).unwrap(), 0); // non-residue mod 9
        assert!(s.count_roots(9).is_err());
    }

    #[test]
    fn square_mod_49_misses_zero() {
        let p = parse_polynomial("z^2").unwrap();
        let s = SieveSet::build(&p, 49, 1, 49).unwrap();
        assert_eq!(s.count_roots(0).unwrap(), 0);
        assert_eq!(s.count_roots(1).unwrap(), 2);
    }

    #[test]
    fn linear_polynomial_sieves_nothing() {
        let p = parse_polynomial("z").unwrap();
        let s = SieveSet::build(&p, 12, 1, 40).unwrap();
        assert!(s.small_rules().is_empty());
        assert!(s.large_rules().iter().all(|r| r.excluded.is_empty()));
        assert_eq!(s.members().len(), 40);
        for c in 0..12 {
            // one hit per full period plus the partial tail
            let expect = (1..=40u64).filter(|&z| z % 12 == c).count() as u64;
            assert_eq!(s.count_roots(c).unwrap(), expect, "c = {c}");
        }
    }

    #[test]
    fn square_mod_six_uses_fallback() {
        let p = parse_polynomial("z^2").unwrap();
        let s = SieveSet::build(&p, 6, 1, 30).unwrap();
        let rule = &s.small_rules()[0];
        assert!(rule.fallback);
        assert_eq!((rule.q, rule.tau, rule.modulus, rule.z_q), (2, 2, 4, 1));
        assert_eq!(s.members(), vec![1, 5, 13, 17, 25, 29]);
        // the membership invariant: p' stays nonzero at the working modulus
        for z in s.iter() {
            assert_ne!(s.deriv.eval_mod(z, 4), 0);
            assert_ne!(s.deriv.eval_mod(z, 3), 0);
        }
    }

    #[test]
    fn cubic_rules_are_exponent_free() {
        let p = parse_polynomial("z^3+3z^2+2z+3").unwrap();
        let a = SieveSet::build(&p, 36, 1, 200).unwrap();
        let b = SieveSet::build(&p, 6, 1, 200).unwrap();
        // q = 2 <= d-1 is a genuine small prime here
        assert_eq!(a.small_rules(), b.small_rules());
        assert!(!a.small_rules()[0].fallback);
        assert_eq!(a.large_rules(), b.large_rules());
        assert_eq!(a.large_rules()[0].excluded.len(), 2);
        assert_eq!(a.members(), b.members());
        assert!(verify_nesting(&p, 36, 6, 1, 200).unwrap());
    }

    #[test]
    fn nesting_on_divisor_chains() {
        let p = parse_polynomial("z^2").unwrap();
        assert!(verify_nesting(&p, 441, 21, 1, 441).unwrap());
        assert!(verify_nesting(&p, 441, 441, 1, 441).unwrap());
        assert!(verify_nesting(&p, 441, 3, 1, 441).unwrap());
        assert!(matches!(
            verify_nesting(&p, 441, 10, 1, 441),
            Err(Error::NotADivisor { m: 441, m_star: 10 })
        ));
    }

    #[test]
    fn max_root_count_desk_values() {
        let p = parse_polynomial("z^2").unwrap();
        let nine = SieveSet::build(&p, 9, 1, 9).unwrap().max_root_count().unwrap();
        assert_eq!((nine.count, nine.bound), (2, 2));
        let m441 = SieveSet::build(&p, 441, 1, 441).unwrap().max_root_count().unwrap();
        assert!(m441.count <= 4);
        assert_eq!(m441.bound, 4);
        let linear = parse_polynomial("z").unwrap();
        let l = SieveSet::build(&linear, 30, 1, 30).unwrap().max_root_count().unwrap();
        assert_eq!(l.count, 1);
        // interval shorter than a period is refused
        assert!(SieveSet::build(&p, 9, 1, 8).unwrap().max_root_count().is_err());
    }

    #[test]
    fn avoiding_search() {
        let p = parse_polynomial("z^2").unwrap();
        assert_eq!(find_avoiding(&p, 1, 10, &[(5, 4), (7, 2)]).unwrap(), Some(1));
        assert_eq!(find_avoiding(&p, 2, 2, &[(5, 4)]).unwrap(), None);
        assert_eq!(find_avoiding(&p, 3, 10, &[]).unwrap(), Some(3));
        assert!(find_avoiding(&p, 1, 10, &[(5, 4), (7, 2), (3, 1)]).is_err());
        assert!(find_avoiding(&p, 1, 10, &[(5, 5)]).is_err());
    }

    #[test]
    fn empty_interval() {
        let p = parse_polynomial("z^2").unwrap();
        let s = SieveSet::build(&p, 9, 5, 4).unwrap();
        assert!(s.members().is_empty());
        assert_eq!(s.count_roots(1).unwrap(), 0);
        assert_eq!(s.report().interval_len, 0);
    }

    #[test]
    fn degenerate_targets_rejected() {
        let c = parse_polynomial("7").unwrap();
        assert!(matches!(
            SieveSet::build(&c, 9, 1, 9),
            Err(Error::DerivativeVanishes)
        ));
        let p = parse_polynomial("z^2").unwrap();
        assert!(SieveSet::build(&p, 1, 1, 9).is_err());
    }

    #[test]
    fn counts_match_brute_force_matrix() {
        // the debug-mode cross-check inside count_roots does the comparison;
        // this drives it across a polynomial/modulus grid
        for text in ["z^2", "z^3+3z^2+2z+3", "z^3-4z", "2z^2+1"] {
            let p = parse_polynomial(text).unwrap();
            for m in [4u64, 6, 9, 12, 25, 36, 49, 60, 441] {
                let s = SieveSet::build(&p, m, 1, 2 * m + 7).unwrap();
                for c in 0..m.min(60) {
                    s.count_roots(c).unwrap();
                }
            }
        }
    }
}
