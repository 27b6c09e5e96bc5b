//! Dense subsets of Z_m and the additive structure used by the stability
//! decomposition: sumsets, difference subgroups, stabilizers, and the
//! balanced-periodic decomposition of a solution-free colour class.
//!
//! Sets are bit rows (one u64 word per 64 residues); sumsets are computed by
//! OR-ing cyclically shifted rows, one shift per member of the left operand.

use crate::error::{Error, Result, StabilityPrecondition};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dense moduli cap. Everything in this module is meant for moduli that fit
/// comfortably in memory as bit rows.
pub const MAX_DENSE_MODULUS: u64 = 1 << 28;

/// A subset of Z_m, immutable after construction. Residues are canonical
/// representatives in [0, m-1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueSet {
    m: u64,
    words: Vec<u64>,
}

#[inline]
fn word_count(m: u64) -> usize {
    ((m + 63) / 64) as usize
}

/// Bits `start..start+64` of the row, read linearly; positions at or past
/// the row's end read as zero.
#[inline]
fn lin_bits(words: &[u64], start: u64) -> u64 {
    let q = (start / 64) as usize;
    let r = (start % 64) as u32;
    let lo = words.get(q).copied().unwrap_or(0) >> r;
    if r == 0 {
        lo
    } else {
        lo | (words.get(q + 1).copied().unwrap_or(0) << (64 - r))
    }
}

/// Bits `start..start+64` of an m-bit row read cyclically (mod m).
/// Bits beyond the first wrap are garbage for m < 64; callers mask.
#[inline]
fn circ_bits(words: &[u64], m: u64, start: u64) -> u64 {
    debug_assert!(start < m);
    let lin = lin_bits(words, start);
    if start + 64 <= m {
        lin
    } else {
        let used = (m - start) as u32;
        lin | (words[0] << used)
    }
}

impl ResidueSet {
    pub fn empty(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Precondition("modulus must be >= 1".into()));
        }
        if m > MAX_DENSE_MODULUS {
            return Err(Error::ModulusTooLarge {
                m,
                max: MAX_DENSE_MODULUS,
            });
        }
        Ok(ResidueSet {
            m,
            words: vec![0; word_count(m)],
        })
    }

    pub fn full(m: u64) -> Result<Self> {
        let mut s = Self::empty(m)?;
        for (i, w) in s.words.iter_mut().enumerate() {
            *w = s.m.valid_mask(i);
        }
        Ok(s)
    }

    pub fn from_members<I: IntoIterator<Item = u64>>(m: u64, members: I) -> Result<Self> {
        let mut s = Self::empty(m)?;
        for r in members {
            if r >= m {
                return Err(Error::Precondition(format!(
                    "residue {r} out of range for modulus {m}"
                )));
            }
            s.words[(r / 64) as usize] |= 1u64 << (r % 64);
        }
        Ok(s)
    }

    pub fn from_pred(m: u64, mut pred: impl FnMut(u64) -> bool) -> Result<Self> {
        let mut s = Self::empty(m)?;
        for r in 0..m {
            if pred(r) {
                s.words[(r / 64) as usize] |= 1u64 << (r % 64);
            }
        }
        Ok(s)
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, r: u64) -> bool {
        r < self.m && (self.words[(r / 64) as usize] >> (r % 64)) & 1 == 1
    }

    pub fn members(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = i as u64 * 64;
            BitIter(w).map(move |b| base + b)
        })
    }

    pub fn complement(&self) -> ResidueSet {
        let mut out = self.clone();
        for (i, w) in out.words.iter_mut().enumerate() {
            *w = !*w & self.m.valid_mask(i);
        }
        out
    }

    fn require_same_modulus(&self, other: &ResidueSet) -> Result<()> {
        if self.m != other.m {
            return Err(Error::ModulusMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Ok(())
    }

    /// A + B in Z_m, via shifted-OR bit rows: one cyclic shift of B's row per
    /// member of A, O(|A| * m / 64).
    pub fn sumset(&self, other: &ResidueSet) -> Result<ResidueSet> {
        self.require_same_modulus(other)?;
        let m = self.m;
        let mut out = ResidueSet::empty(m)?;
        for a in self.iter() {
            for wi in 0..out.words.len() {
                let start = ((wi as u64 * 64) % m + m - a % m) % m;
                out.words[wi] |= circ_bits(&other.words, m, start) & m.valid_mask(wi);
            }
        }
        Ok(out)
    }

    /// The subgroup of Z_m generated by the differences x - x' of members of
    /// X: multiples of gcd(m, pairwise differences).
    pub fn subgroup_generated(&self) -> Result<ResidueSet> {
        // g == m exactly when X is a singleton: the trivial subgroup {0}
        let g = self.difference_gcd()?;
        ResidueSet::from_members(self.m, (0..self.m).step_by(g as usize))
    }

    /// Generator of `subgroup_generated` without materializing the set.
    pub fn difference_gcd(&self) -> Result<u64> {
        let mut it = self.iter();
        let x0 = it.next().ok_or(Error::EmptyInput("subgroup_generated"))?;
        let mut g = self.m;
        for x in it {
            g = num_integer::gcd(g, (x + self.m - x0) % self.m);
        }
        Ok(g)
    }

    /// The stabilizer subgroup H = { h : h + S = S }.
    pub fn stabilizer(&self) -> Result<ResidueSet> {
        let m = self.m;
        let mut out = ResidueSet::empty(m)?;
        'next: for h in 0..m {
            for wi in 0..self.words.len() {
                let start = ((wi as u64 * 64) % m + m - h) % m;
                let rotated = circ_bits(&self.words, m, start) & m.valid_mask(wi);
                if rotated != self.words[wi] {
                    continue 'next;
                }
            }
            out.words[(h / 64) as usize] |= 1u64 << (h % 64);
        }
        Ok(out)
    }

    /// Kneser's bound for A + A: |A+A| >= 2|A| - |H(A+A)|.
    pub fn kneser_check(&self) -> Result<KneserReport> {
        if self.is_empty() {
            return Err(Error::EmptyInput("kneser_check"));
        }
        let s = self.sumset(self)?;
        let h = s.stabilizer()?;
        let lhs = s.len();
        let rhs = 2 * self.len() as i64 - h.len() as i64;
        Ok(KneserReport {
            m: self.m,
            lhs,
            rhs,
            stabilizer_size: h.len(),
            holds: lhs as i64 >= rhs,
        })
    }

    /// Image of the set under reduction mod a divisor m* of m.
    pub fn project(&self, m_star: u64) -> Result<ResidueSet> {
        if m_star == 0 || self.m % m_star != 0 {
            return Err(Error::NotADivisor {
                m: self.m,
                m_star,
            });
        }
        let mut out = ResidueSet::empty(m_star)?;
        for r in self.iter() {
            let q = r % m_star;
            out.words[(q / 64) as usize] |= 1u64 << (q % 64);
        }
        Ok(out)
    }
}

trait ValidMask {
    fn valid_mask(self, word_idx: usize) -> u64;
}

impl ValidMask for u64 {
    /// Mask of in-range bits for word `word_idx` of an m-bit row.
    #[inline]
    fn valid_mask(self, word_idx: usize) -> u64 {
        let lo = word_idx as u64 * 64;
        if lo + 64 <= self {
            !0
        } else if lo >= self {
            0
        } else {
            (1u64 << (self - lo)) - 1
        }
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as u64;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

impl Serialize for ResidueSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ResidueSet", 2)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("members", &self.members())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ResidueSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            m: u64,
            members: Vec<u64>,
        }
        let raw = Raw::deserialize(d)?;
        ResidueSet::from_members(raw.m, raw.members).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KneserReport {
    pub m: u64,
    pub lhs: u64,
    pub rhs: i64,
    pub stabilizer_size: u64,
    pub holds: bool,
}

/// Every postcondition re-checked by `stability_decomposition`. All fields
/// are true on any value this module hands out; they are serialized so
/// reports stay auditable.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityChecks {
    pub balanced_partition: bool,
    pub punctured_sumsets: bool,
    pub lifted_sumsets: bool,
    pub alpha_odd: bool,
    pub modulus_even: bool,
    pub x_translates_complement: bool,
    pub furthermore: bool,
}

/// Structure of a balanced colour class A with A + A != Z_m: the quotient
/// modulus m', the single missing residue alpha, and the projected classes.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityDecomposition {
    pub m: u64,
    pub m_prime: u64,
    pub alpha: u64,
    pub a_prime: ResidueSet,
    pub b_prime: ResidueSet,
    pub h_generator: u64,
    pub h_order: u64,
    pub checks: StabilityChecks,
}

/// Decompose a balanced class A of an even ring with deficient sumset.
///
/// Computes X = Z_m \ (A+A), H = the subgroup generated by X - X,
/// m' = m / |H|, alpha = the common image of X mod m', and the projections
/// A' and B' of A and its complement. Every structural consequence is then
/// re-verified on the concrete sets; any failure is reported as
/// [`Error::InternalInvariantBroken`], never returned silently.
pub fn stability_decomposition(a: &ResidueSet) -> Result<StabilityDecomposition> {
    let m = a.modulus();
    if m % 2 != 0 {
        return Err(Error::StabilityPrecondition(StabilityPrecondition::OddModulus));
    }
    if a.len() != m / 2 {
        return Err(Error::StabilityPrecondition(StabilityPrecondition::UnbalancedSize));
    }
    let b = a.complement();
    let aa = a.sumset(a)?;
    let x = aa.complement();
    if x.is_empty() {
        return Err(Error::StabilityPrecondition(StabilityPrecondition::FullSumset));
    }

    let g = x.difference_gcd()?; // H = g Z_m, |H| = m / g, so m' = g
    let h_order = m / g;
    let m_prime = g;

    let broken = |what: &str| Error::InternalInvariantBroken(format!("stability: {what}"));

    let x0 = x.iter().next().expect("X nonempty");
    let alpha = x0 % m_prime;
    for xv in x.iter() {
        if xv % m_prime != alpha {
            return Err(broken("X does not project to a single residue"));
        }
    }

    let a_prime = a.project(m_prime)?;
    let b_prime = b.project(m_prime)?;

    // balanced partition of the quotient ring
    if m_prime % 2 != 0 {
        return Err(broken("quotient modulus is odd"));
    }
    if a_prime.len() != m_prime / 2 || b_prime.len() != m_prime / 2 {
        return Err(broken("projections are not balanced"));
    }
    for r in 0..m_prime {
        if a_prime.contains(r) == b_prime.contains(r) {
            return Err(broken("projections do not partition the quotient ring"));
        }
    }

    // punctured sumsets downstairs
    let apap = a_prime.sumset(&a_prime)?;
    let bpbp = b_prime.sumset(&b_prime)?;
    let punct = ResidueSet::from_pred(m_prime, |r| r != alpha)?;
    if apap != punct || bpbp != punct {
        return Err(broken("A'+A' or B'+B' is not the punctured quotient ring"));
    }

    // lifted sumsets upstairs
    let bb = b.sumset(&b)?;
    let lifted = ResidueSet::from_pred(m, |r| r % m_prime != alpha)?;
    if aa != lifted || bb != lifted {
        return Err(broken("A+A or B+B is not the lift of the punctured ring"));
    }

    if alpha % 2 != 1 {
        return Err(broken("alpha is even"));
    }

    // x - A = B for every x in X
    for xv in x.iter() {
        for av in a.iter() {
            if !b.contains((xv + m - av) % m) {
                return Err(broken("x - A does not equal B"));
            }
        }
    }

    // alpha in (b + A') and in (a + B') for all a in A', b in B'
    for bv in b_prime.iter() {
        if !a_prime.contains((alpha + m_prime - bv) % m_prime) {
            return Err(broken("alpha missing from b + A'"));
        }
    }
    for av in a_prime.iter() {
        if !b_prime.contains((alpha + m_prime - av) % m_prime) {
            return Err(broken("alpha missing from a + B'"));
        }
    }

    Ok(StabilityDecomposition {
        m,
        m_prime,
        alpha,
        a_prime,
        b_prime,
        h_generator: g % m,
        h_order,
        checks: StabilityChecks {
            balanced_partition: true,
            punctured_sumsets: true,
            lifted_sumsets: true,
            alpha_odd: true,
            modulus_even: true,
            x_translates_complement: true,
            furthermore: true,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(m: u64, members: &[u64]) -> ResidueSet {
        ResidueSet::from_members(m, members.iter().copied()).unwrap()
    }

    #[test]
    fn construction_and_membership() {
        let s = rs(6, &[2, 3, 5]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(5) && !s.contains(0));
        assert_eq!(s.members(), vec![2, 3, 5]);
        assert_eq!(s.complement().members(), vec![0, 1, 4]);
        assert!(ResidueSet::from_members(6, [6]).is_err());
        assert!(ResidueSet::empty(0).is_err());
    }

    #[test]
    fn sumset_mod_6_example() {
        let a = rs(6, &[2, 3, 5]);
        let s = a.sumset(&a).unwrap();
        assert_eq!(s.members(), vec![0, 1, 2, 4, 5]);
        assert_eq!(s.complement().members(), vec![3]);
    }

    #[test]
    fn sumset_crosses_word_boundaries() {
        // m = 130 straddles three words; compare against a direct double loop
        let a = rs(130, &[0, 1, 63, 64, 65, 127, 129]);
        let b = rs(130, &[2, 62, 66, 128]);
        let fast = a.sumset(&b).unwrap();
        let mut naive = vec![false; 130];
        for x in a.iter() {
            for y in b.iter() {
                naive[((x + y) % 130) as usize] = true;
            }
        }
        for r in 0..130 {
            assert_eq!(fast.contains(r), naive[r as usize], "residue {r}");
        }
    }

    #[test]
    fn subgroup_from_differences() {
        assert_eq!(
            rs(8, &[1, 3, 5, 7]).subgroup_generated().unwrap().members(),
            vec![0, 2, 4, 6]
        );
        assert_eq!(rs(6, &[3]).subgroup_generated().unwrap().members(), vec![0]);
        assert_eq!(
            rs(12, &[1, 5]).subgroup_generated().unwrap().members(),
            vec![0, 4, 8]
        );
        assert!(ResidueSet::empty(5).unwrap().subgroup_generated().is_err());
    }

    #[test]
    fn stabilizer_examples() {
        assert_eq!(rs(6, &[0, 3]).stabilizer().unwrap().members(), vec![0, 3]);
        assert_eq!(rs(6, &[0, 1]).stabilizer().unwrap().members(), vec![0]);
        assert_eq!(
            ResidueSet::full(6).unwrap().stabilizer().unwrap().len(),
            6
        );
    }

    #[test]
    fn kneser_frozen_numbers() {
        let r = rs(6, &[0, 3]).kneser_check().unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (2, 2, true));
        let r = rs(5, &[0]).kneser_check().unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (1, 1, true));
    }

    #[test]
    fn project_examples() {
        assert_eq!(rs(12, &[0, 7]).project(6).unwrap().members(), vec![0, 1]);
        assert!(rs(12, &[0]).project(5).is_err());
    }

    #[test]
    fn stability_m4_frozen_example() {
        let d = stability_decomposition(&rs(4, &[0, 1])).unwrap();
        assert_eq!(d.m_prime, 4);
        assert_eq!(d.alpha, 3);
        assert_eq!(d.a_prime.members(), vec![0, 1]);
        assert_eq!(d.b_prime.members(), vec![2, 3]);
        assert_eq!((d.h_generator, d.h_order), (0, 1)); // trivial subgroup, g = m
    }

    #[test]
    fn stability_even_classes_example() {
        // A = 2 Z_8: quotient collapses to parity with alpha = 1
        let d = stability_decomposition(&rs(8, &[0, 2, 4, 6])).unwrap();
        assert_eq!((d.m_prime, d.alpha), (2, 1));
        assert_eq!(d.a_prime.members(), vec![0]);
        assert_eq!(d.h_order, 4);
    }

    #[test]
    fn stability_mod6_example() {
        let d = stability_decomposition(&rs(6, &[2, 3, 5])).unwrap();
        assert_eq!((d.m_prime, d.alpha), (6, 3));
        assert_eq!(d.a_prime.members(), vec![2, 3, 5]);
        assert_eq!(d.b_prime.members(), vec![0, 1, 4]);
        assert_eq!(d.h_order, 1);
    }

    #[test]
    fn stability_preconditions_are_distinguished() {
        use crate::error::StabilityPrecondition as P;
        let err = stability_decomposition(&rs(5, &[0, 1])).unwrap_err();
        assert!(matches!(err, Error::StabilityPrecondition(P::OddModulus)));
        let err = stability_decomposition(&rs(6, &[0, 1])).unwrap_err();
        assert!(matches!(err, Error::StabilityPrecondition(P::UnbalancedSize)));
        let err = stability_decomposition(&rs(8, &[0, 1, 3, 4])).unwrap_err();
        assert!(matches!(err, Error::StabilityPrecondition(P::FullSumset)));
    }

    #[test]
    fn residue_set_serde_shape() {
        let s = rs(6, &[2, 3, 5]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"m":6,"members":[2,3,5]}"#);
        let back: ResidueSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
