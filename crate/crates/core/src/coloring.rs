//! Two-colorings of the naturals: periodic classes mod m, explicit packed
//! bit arrays over [1, n], and the self-referential power-of-two coloring.
//!
//! JSON forms: `{"kind":"periodic","m":6,"neg":[2,3,5]}`,
//! `{"kind":"explicit","n":…,"rle":[…]}` (run lengths, alternating colours
//! starting with +1; a leading 0 flips the start), and `{"kind":"pow2"}`.

use crate::error::{Error, Result};
use crate::modring::ResidueSet;
use crate::poly::IntPolynomial;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the two colours, serialized as +1 / -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Plus,
    Minus,
}

impl Color {
    pub fn value(self) -> i8 {
        match self {
            Color::Plus => 1,
            Color::Minus => -1,
        }
    }

    pub fn flip(self) -> Color {
        match self {
            Color::Plus => Color::Minus,
            Color::Minus => Color::Plus,
        }
    }

    pub fn from_value(v: i8) -> Result<Color> {
        match v {
            1 => Ok(Color::Plus),
            -1 => Ok(Color::Minus),
            _ => Err(Error::Precondition(format!("colour must be +1 or -1, got {v}"))),
        }
    }
}

impl std::fmt::Display for Color {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Color::Plus => "+1",
            Color::Minus => "-1",
        })
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i8::deserialize(d)?;
        Color::from_value(v).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicColoring {
    m: u64,
    neg: ResidueSet,
}

/// Packed bit array over positions [1, n]; bit x set means colour -1.
/// Bit 0 is unused and always clear so position x maps to bit x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitColoring {
    n: u64,
    neg_bits: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerOfTwoColoring {
    // colours of 1..=64 determine the whole coloring: for x >= 4 the colour
    // is -colour(floor(log2 x) + 1), and floor(log2 x) + 1 <= 64 for any u64
    table: [Color; 65],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coloring {
    Periodic(PeriodicColoring),
    Explicit(ExplicitColoring),
    PowerOfTwo(PowerOfTwoColoring),
}

impl PeriodicColoring {
    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn neg_classes(&self) -> &ResidueSet {
        &self.neg
    }
}

impl ExplicitColoring {
    pub fn new(n: u64, mut pred_minus: impl FnMut(u64) -> bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("explicit coloring needs n >= 1".into()));
        }
        if n >= u64::MAX / 2 {
            return Err(Error::Precondition(format!("explicit coloring of {n} positions is unreasonable")));
        }
        let words = ((n + 1 + 63) / 64) as usize;
        let mut neg_bits = vec![0u64; words];
        for x in 1..=n {
            if pred_minus(x) {
                neg_bits[(x / 64) as usize] |= 1u64 << (x % 64);
            }
        }
        Ok(ExplicitColoring { n, neg_bits })
    }

    pub fn from_rle(n: u64, runs: &[u64]) -> Result<Self> {
        if runs.iter().skip(1).any(|&r| r == 0) {
            return Err(Error::Precondition("RLE runs after the first must be positive".into()));
        }
        let total: u64 = runs.iter().try_fold(0u64, |a, &r| a.checked_add(r)).ok_or(Error::Overflow("rle"))?;
        if total != n {
            return Err(Error::Precondition(format!("RLE runs sum to {total}, expected n = {n}")));
        }
        let mut pos = 1u64;
        let mut color = Color::Plus;
        let mut spans_minus = Vec::new();
        for &r in runs {
            if color == Color::Minus && r > 0 {
                spans_minus.push((pos, pos + r - 1));
            }
            pos += r;
            color = color.flip();
        }
        ExplicitColoring::new(n, |x| spans_minus.iter().any(|&(a, b)| a <= x && x <= b))
    }

    pub fn to_rle(&self) -> Vec<u64> {
        let mut runs = Vec::new();
        let mut expect = Color::Plus;
        let mut run = 0u64;
        for x in 1..=self.n {
            let c = self.color_at(x);
            if c == expect {
                run += 1;
            } else {
                runs.push(run);
                expect = expect.flip();
                run = 1;
            }
        }
        runs.push(run);
        runs
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn color_at(&self, x: u64) -> Color {
        debug_assert!(x >= 1 && x <= self.n);
        if (self.neg_bits[(x / 64) as usize] >> (x % 64)) & 1 == 1 {
            Color::Minus
        } else {
            Color::Plus
        }
    }

}

impl PowerOfTwoColoring {
    fn new() -> Self {
        let mut table = [Color::Plus; 65];
        table[1] = Color::Plus;
        table[2] = Color::Plus;
        table[3] = Color::Minus;
        for i in 4..=64u64 {
            let k = 63 - i.leading_zeros() as u64; // floor(log2 i) >= 2
            table[i as usize] = table[(k + 1) as usize].flip();
        }
        PowerOfTwoColoring { table }
    }

    #[inline]
    pub fn color_at(&self, x: u64) -> Color {
        debug_assert!(x >= 1);
        if x <= 64 {
            self.table[x as usize]
        } else {
            let k = 63 - x.leading_zeros() as u64;
            self.table[(k + 1) as usize].flip()
        }
    }
}

/// The parity coloring: odd positions get -1.
pub fn parity_coloring() -> Coloring {
    let neg = ResidueSet::from_members(2, [1]).expect("static");
    Coloring::Periodic(PeriodicColoring { m: 2, neg })
}

/// Periodic coloring with -1 exactly on the residue classes in `neg`.
/// The classes must be balanced: |neg| = m/2.
pub fn divisibility_coloring(m: u64, neg: ResidueSet) -> Result<Coloring> {
    if neg.modulus() != m {
        return Err(Error::ModulusMismatch {
            left: m,
            right: neg.modulus(),
        });
    }
    if m % 2 != 0 || neg.len() != m / 2 {
        return Err(Error::UnbalancedClasses { m, size: neg.len() });
    }
    Ok(Coloring::Periodic(PeriodicColoring { m, neg }))
}

/// Unbalanced periodic coloring; every residue class in `neg` gets -1.
/// The balanced constructor is `divisibility_coloring`.
pub fn periodic_coloring(neg: ResidueSet) -> Coloring {
    Coloring::Periodic(PeriodicColoring {
        m: neg.modulus(),
        neg,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThreeIntervalReport {
    pub n: u64,
    pub n1: u64,
    pub n2: u64,
}

/// The sparse three-interval coloring of [1, n] for a target p:
/// n2 = least z with p(z) > 2n, n1 = least z with p(z) > 2(n2 - 1);
/// colour -1 exactly on [n1, n2 - 1].
pub fn three_interval_coloring(
    p: &IntPolynomial,
    n: u64,
) -> Result<(Coloring, ThreeIntervalReport)> {
    p.require_admissible()?;
    if n == 0 {
        return Err(Error::TargetTooSmall { n });
    }
    let two_n = 2i128 * n as i128;
    let mut n2 = None;
    for z in 1..=n {
        if p.eval(z as i128)? > two_n {
            n2 = Some(z);
            break;
        }
    }
    let n2 = n2.ok_or(Error::TargetTooSmall { n })?;
    let bound1 = 2i128 * (n2 as i128 - 1);
    let mut n1 = None;
    for z in 1..=n2 {
        if p.eval(z as i128)? > bound1 {
            n1 = Some(z);
            break;
        }
    }
    // p(n2) > 2n >= 2(n2 - 1) because n2 <= n, so n1 always exists
    let n1 = n1.expect("n1 <= n2 by construction");
    let coloring = ExplicitColoring::new(n, |x| n1 <= x && x < n2)?;
    Ok((
        Coloring::Explicit(coloring),
        ThreeIntervalReport { n, n1, n2 },
    ))
}

/// The power-of-two coloring: phi(1) = phi(2) = +1, phi(3) = -1, and
/// phi(x) = -phi(k+1) for x in [2^k, 2^{k+1}) with k >= 2.
pub fn power_of_two_coloring() -> Coloring {
    Coloring::PowerOfTwo(PowerOfTwoColoring::new())
}

impl Coloring {
    /// Colour of position x >= 1. Panics on x = 0 or past an explicit
    /// coloring's domain; callers validate domains with `domain_end`.
    #[inline]
    pub fn color_at(&self, x: u64) -> Color {
        match self {
            Coloring::Periodic(p) => {
                if p.neg.contains(x % p.m) {
                    Color::Minus
                } else {
                    Color::Plus
                }
            }
            Coloring::Explicit(e) => e.color_at(x),
            Coloring::PowerOfTwo(p) => p.color_at(x),
        }
    }

    /// Last defined position for explicit colorings, None when unbounded.
    pub fn domain_end(&self) -> Option<u64> {
        match self {
            Coloring::Explicit(e) => Some(e.n),
            _ => None,
        }
    }

    /// Error unless positions [1, required] are all defined.
    pub fn require_domain(&self, required: u64) -> Result<()> {
        match self.domain_end() {
            Some(domain) if domain < required => {
                Err(Error::ColoringDomainTooShort { required, domain })
            }
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Coloring::Periodic(_) => "periodic",
            Coloring::Explicit(_) => "explicit",
            Coloring::PowerOfTwo(_) => "pow2",
        }
    }

    /// Bit row over [0, n] with bit x set iff phi(x) = -1 (bit 0 clear).
    /// This is the layout the counting kernel consumes.
    pub fn neg_mask(&self, n: u64) -> Result<Vec<u64>> {
        self.require_domain(n)?;
        let words = ((n + 1 + 63) / 64) as usize;
        match self {
            Coloring::Explicit(e) => {
                let mut out = e.neg_bits.clone();
                out.truncate(words);
                out.resize(words, 0);
                // clear bits past n in the last shared word
                if let Some(last) = out.last_mut() {
                    let lo = (words as u64 - 1) * 64;
                    if lo + 63 > n {
                        *last &= (1u64 << (n - lo + 1)) - 1;
                    }
                }
                Ok(out)
            }
            _ => {
                let mut out = vec![0u64; words];
                for x in 1..=n {
                    if self.color_at(x) == Color::Minus {
                        out[(x / 64) as usize] |= 1u64 << (x % 64);
                    }
                }
                Ok(out)
            }
        }
    }
}

impl Serialize for Coloring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        match self {
            Coloring::Periodic(p) => {
                let mut st = s.serialize_struct("Coloring", 3)?;
                st.serialize_field("kind", "periodic")?;
                st.serialize_field("m", &p.m)?;
                st.serialize_field("neg", &p.neg.members())?;
                st.end()
            }
            Coloring::Explicit(e) => {
                let mut st = s.serialize_struct("Coloring", 3)?;
                st.serialize_field("kind", "explicit")?;
                st.serialize_field("n", &e.n)?;
                st.serialize_field("rle", &e.to_rle())?;
                st.end()
            }
            Coloring::PowerOfTwo(_) => {
                let mut st = s.serialize_struct("Coloring", 1)?;
                st.serialize_field("kind", "pow2")?;
                st.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Coloring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(tag = "kind", rename_all = "lowercase")]
        enum Raw {
            Periodic { m: u64, neg: Vec<u64> },
            Explicit { n: u64, rle: Vec<u64> },
            Pow2 {},
        }
        match Raw::deserialize(d)? {
            Raw::Periodic { m, neg } => {
                let set = ResidueSet::from_members(m, neg).map_err(D::Error::custom)?;
                Ok(periodic_coloring(set))
            }
            Raw::Explicit { n, rle } => ExplicitColoring::from_rle(n, &rle)
                .map(Coloring::Explicit)
                .map_err(D::Error::custom),
            Raw::Pow2 {} => Ok(power_of_two_coloring()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    #[test]
    fn parity_alternates() {
        let phi = parity_coloring();
        assert_eq!(phi.color_at(1), Color::Minus);
        assert_eq!(phi.color_at(2), Color::Plus);
        assert_eq!(phi.color_at(99), Color::Minus);
    }

    #[test]
    fn divisibility_checks_balance() {
        let neg = ResidueSet::from_members(6, [2, 3, 5]).unwrap();
        let phi = divisibility_coloring(6, neg).unwrap();
        assert_eq!(phi.color_at(2), Color::Minus);
        assert_eq!(phi.color_at(6), Color::Plus); // 6 ≡ 0
        assert_eq!(phi.color_at(11), Color::Minus); // 11 ≡ 5

        let lopsided = ResidueSet::from_members(6, [1]).unwrap();
        assert!(matches!(
            divisibility_coloring(6, lopsided),
            Err(Error::UnbalancedClasses { m: 6, size: 1 })
        ));
        let odd = ResidueSet::from_members(5, [0, 1]).unwrap();
        assert!(divisibility_coloring(5, odd).is_err());
        let wrong_m = ResidueSet::from_members(4, [0, 1]).unwrap();
        assert!(matches!(
            divisibility_coloring(6, wrong_m),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn three_interval_frozen_example() {
        let p = parse_polynomial("z^2").unwrap();
        let (phi, rep) = three_interval_coloring(&p, 100).unwrap();
        assert_eq!((rep.n1, rep.n2), (6, 15));
        for x in 1..=5 {
            assert_eq!(phi.color_at(x), Color::Plus);
        }
        for x in 6..=14 {
            assert_eq!(phi.color_at(x), Color::Minus);
        }
        for x in 15..=100 {
            assert_eq!(phi.color_at(x), Color::Plus);
        }
    }

    #[test]
    fn three_interval_rejects_tiny_horizons() {
        let p = parse_polynomial("z").unwrap();
        // p(z) = z never exceeds 2n for z <= n
        assert!(matches!(
            three_interval_coloring(&p, 50),
            Err(Error::TargetTooSmall { .. })
        ));
    }

    #[test]
    fn pow2_frozen_values() {
        let phi = power_of_two_coloring();
        let expect = [
            (1, Color::Plus),
            (2, Color::Plus),
            (3, Color::Minus),
            (4, Color::Plus), // [4,8): -phi(3)
            (5, Color::Plus),
            (7, Color::Plus),
            (8, Color::Minus), // [8,16): -phi(4) = -(+1)
            (9, Color::Minus),
            (15, Color::Minus),
            (16, Color::Minus), // [16,32): -phi(5) = -(+1)
            (31, Color::Minus),
            (32, Color::Minus), // [32,64): -phi(6) = -(-phi(3)) = phi(3)
        ];
        for (x, c) in expect {
            assert_eq!(phi.color_at(x), c, "phi({x})");
        }
        // blocks are constant
        for x in 64..128 {
            assert_eq!(phi.color_at(x), phi.color_at(64));
        }
        // and the defining recursion holds high up
        let k = 40u64;
        assert_eq!(
            phi.color_at(1u64 << k),
            phi.color_at(k + 1).flip()
        );
    }

    #[test]
    fn explicit_rle_round_trip() {
        let e = ExplicitColoring::new(10, |x| x % 3 == 0).unwrap();
        let rle = e.to_rle();
        assert_eq!(rle, vec![2, 1, 2, 1, 2, 1, 1]);
        let back = ExplicitColoring::from_rle(10, &rle).unwrap();
        assert_eq!(back, e);

        let starts_minus = ExplicitColoring::from_rle(4, &[0, 2, 2]).unwrap();
        assert_eq!(starts_minus.color_at(1), Color::Minus);
        assert_eq!(starts_minus.color_at(3), Color::Plus);

        assert!(ExplicitColoring::from_rle(5, &[2, 2]).is_err());
        assert!(ExplicitColoring::from_rle(5, &[2, 0, 3]).is_err());
    }

    #[test]
    fn coloring_json_shapes() {
        let neg = ResidueSet::from_members(6, [2, 3, 5]).unwrap();
        let phi = divisibility_coloring(6, neg).unwrap();
        assert_eq!(
            serde_json::to_string(&phi).unwrap(),
            r#"{"kind":"periodic","m":6,"neg":[2,3,5]}"#
        );
        let back: Coloring = serde_json::from_str(r#"{"kind":"periodic","m":6,"neg":[2,3,5]}"#).unwrap();
        assert_eq!(back, phi);

        let pow: Coloring = serde_json::from_str(r#"{"kind":"pow2"}"#).unwrap();
        assert_eq!(pow, power_of_two_coloring());

        let exp = Coloring::Explicit(ExplicitColoring::new(6, |x| x > 4).unwrap());
        let json = serde_json::to_string(&exp).unwrap();
        assert_eq!(json, r#"{"kind":"explicit","n":6,"rle":[4,2]}"#);
        assert_eq!(serde_json::from_str::<Coloring>(&json).unwrap(), exp);
    }

    #[test]
    fn neg_mask_matches_color_at() {
        let neg = ResidueSet::from_members(4, [1, 2]).unwrap();
        let phi = divisibility_coloring(4, neg).unwrap();
        let mask = phi.neg_mask(200).unwrap();
        for x in 1..=200u64 {
            let bit = (mask[(x / 64) as usize] >> (x % 64)) & 1 == 1;
            assert_eq!(bit, phi.color_at(x) == Color::Minus, "x = {x}");
        }
        assert_eq!(mask[0] & 1, 0, "bit 0 stays clear");
    }

    #[test]
    fn domain_checks() {
        let e = Coloring::Explicit(ExplicitColoring::new(10, |_| false).unwrap());
        assert!(e.require_domain(10).is_ok());
        assert!(matches!(
            e.require_domain(11),
            Err(Error::ColoringDomainTooShort { required: 11, domain: 10 })
        ));
        assert!(parity_coloring().require_domain(1 << 40).is_ok());
    }
}
