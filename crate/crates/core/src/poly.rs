//! Integer polynomials with exact, checked arithmetic.
//!
//! Coefficients live in `i128` and every operation that could wrap reports
//! [`Error::Overflow`] instead of wrapping. The textual form accepted by
//! [`parse_polynomial`] is `term (('+'|'-') term)*` with
//! `term := [sign] [integer] ['z' ['^' posint]]`; whitespace is ignored.
//! `Display` prints the canonical form: descending powers, no spaces,
//! e.g. `z^3+3z^2+2z+3`.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest exponent the parser accepts. Degrees past this are always a typo
/// at desk scale and would only allocate pointlessly.
pub const MAX_PARSE_DEGREE: usize = 64;

/// Dense integer polynomial, ascending coefficients, trailing zeros trimmed.
/// The zero polynomial is stored as a single zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<i128>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        IntPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: vec![0] }
    }

    pub fn constant(c: i128) -> Self {
        IntPolynomial { coeffs: vec![c] }
    }

    /// `c * z^k`.
    pub fn monomial(c: i128, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        IntPolynomial::new(coeffs)
    }

    /// Ascending coefficients; index i is the coefficient of z^i.
    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    /// Degree, with the convention deg(0) = 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading_coeff(&self) -> i128 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0]
    }

    /// Coefficient of z^k (0 beyond the degree).
    pub fn coeff(&self, k: usize) -> i128 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    /// Horner evaluation with checked arithmetic.
    pub fn eval(&self, z: i128) -> Result<i128> {
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc
                .checked_mul(z)
                .and_then(|v| v.checked_add(c))
                .ok_or(Error::Overflow("eval"))?;
        }
        Ok(acc)
    }

    /// p(z) reduced into [0, modulus), for arguments where a direct i128
    /// evaluation could overflow. Requires modulus in [1, 2^63].
    pub fn eval_mod(&self, z: u64, modulus: u64) -> u64 {
        debug_assert!(modulus >= 1 && modulus <= 1 << 63);
        let m = modulus as u128;
        let x = z as u128 % m;
        let mut acc: u128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * x + c.rem_euclid(modulus as i128) as u128) % m;
        }
        acc as u64
    }

    /// Formal derivative p'.
    pub fn derivative(&self) -> Result<IntPolynomial> {
        if self.coeffs.len() == 1 {
            return Ok(IntPolynomial::zero());
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(c.checked_mul(i as i128).ok_or(Error::Overflow("derivative"))?);
        }
        Ok(IntPolynomial::new(out))
    }

    /// The gap polynomial q(k) = p(k+1) - p(k).
    ///
    /// deg(q) = deg(p) - 1 and its leading coefficient is d * a_d.
    pub fn forward_gap(&self) -> Result<IntPolynomial> {
        if self.degree() < 1 {
            return Err(Error::InvalidTarget(
                "forward_gap needs degree >= 1".into(),
            ));
        }
        // coefficients of p(z+1): c_j = sum_{i>=j} a_i * C(i, j)
        let d = self.degree();
        let mut shifted = vec![0i128; d + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let mut binom: i128 = 1; // C(i, j) built incrementally over j
            for (j, slot) in shifted.iter_mut().enumerate().take(i + 1) {
                let term = a.checked_mul(binom).ok_or(Error::Overflow("forward_gap"))?;
                *slot = slot.checked_add(term).ok_or(Error::Overflow("forward_gap"))?;
                // C(i, j+1) = C(i, j) * (i - j) / (j + 1), exact at every step
                binom = binom
                    .checked_mul((i - j) as i128)
                    .ok_or(Error::Overflow("forward_gap"))?
                    / (j as i128 + 1);
            }
        }
        for (j, &a) in self.coeffs.iter().enumerate() {
            shifted[j] = shifted[j].checked_sub(a).ok_or(Error::Overflow("forward_gap"))?;
        }
        Ok(IntPolynomial::new(shifted))
    }

    /// n-th finite difference with step `ell`, evaluated at `m`:
    /// sum_{i=0}^{n} (-1)^i C(n,i) p(m + (n-i) ell).
    ///
    /// Computed term by term from the definition; the closed form
    /// ell^n * n! * a_n is a theorem about this value, not a shortcut
    /// taken here. Requires deg(p) <= n and ell >= 1.
    pub fn finite_difference(&self, n: u32, m: i128, ell: i128) -> Result<i128> {
        if self.degree() > n as usize && !self.is_zero() {
            return Err(Error::DegreeTooHigh {
                degree: self.degree(),
                n,
            });
        }
        if ell < 1 {
            return Err(Error::Precondition(format!(
                "finite_difference needs ell >= 1, got {ell}"
            )));
        }
        let mut acc: i128 = 0;
        let mut binom: i128 = 1; // C(n, i)
        for i in 0..=n {
            let steps = (n - i) as i128;
            let at = steps
                .checked_mul(ell)
                .and_then(|v| v.checked_add(m))
                .ok_or(Error::Overflow("finite_difference"))?;
            let val = self.eval(at)?;
            let term = binom
                .checked_mul(val)
                .ok_or(Error::Overflow("finite_difference"))?;
            acc = if i % 2 == 0 {
                acc.checked_add(term)
            } else {
                acc.checked_sub(term)
            }
            .ok_or(Error::Overflow("finite_difference"))?;
            if i < n {
                binom = binom
                    .checked_mul((n - i) as i128)
                    .ok_or(Error::Overflow("finite_difference"))?
                    / (i as i128 + 1);
            }
        }
        Ok(acc)
    }

    /// Whether every two-coloring of the naturals admits a monochromatic
    /// solution of x + y = p(z): true iff p(1) * p(2) is even.
    ///
    /// Only defined for admissible targets (degree >= 1, positive leading
    /// coefficient).
    pub fn is_candidate_ramsey(&self) -> Result<bool> {
        self.require_admissible()?;
        let p1 = self.eval(1)?;
        let p2 = self.eval(2)?;
        Ok(p1 & 1 == 0 || p2 & 1 == 0)
    }

    /// degree >= 1 and positive leading coefficient.
    pub fn require_admissible(&self) -> Result<()> {
        if self.degree() < 1 {
            return Err(Error::InvalidTarget(format!(
                "degree must be >= 1, got constant {}",
                self.leading_coeff()
            )));
        }
        if self.leading_coeff() <= 0 {
            return Err(Error::InvalidTarget(format!(
                "leading coefficient must be positive, got {}",
                self.leading_coeff()
            )));
        }
        Ok(())
    }

    pub fn parse(input: &str) -> Result<IntPolynomial> {
        parse_polynomial(input)
    }
}

impl std::fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for k in (0..=self.degree()).rev() {
            let c = self.coeffs[k];
            if c == 0 {
                continue;
            }
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
                first = false;
            } else if c < 0 {
                f.write_str("-")?;
            } else {
                f.write_str("+")?;
            }
            let mag = c.unsigned_abs();
            if mag != 1 || k == 0 {
                write!(f, "{mag}")?;
            }
            if k >= 1 {
                f.write_str("z")?;
                if k >= 2 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        IntPolynomial::parse(&text).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn integer(&mut self) -> Result<i128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ascii")
            .parse::<i128>()
            .map_err(|_| Error::Parse {
                position: start,
                message: "coefficient does not fit in 128 bits".into(),
            })
    }

    /// One term: optional sign, then coefficient and/or z-power.
    fn term(&mut self) -> Result<(i128, usize)> {
        let mut sign: i128 = 1;
        loop {
            match self.peek() {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    sign = -sign;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        let coeff = match self.peek() {
            Some(c) if c.is_ascii_digit() => self.integer()?,
            Some(b'z') => 1,
            _ => return self.err("expected a coefficient or 'z'"),
        };
        let mut power = 0usize;
        if self.peek() == Some(b'z') {
            self.pos += 1;
            power = 1;
            if self.peek() == Some(b'^') {
                self.pos += 1;
                let e = self.integer()?;
                if e < 1 {
                    return self.err("exponent must be >= 1");
                }
                if e > MAX_PARSE_DEGREE as i128 {
                    return self.err(format!("exponent too large (max {MAX_PARSE_DEGREE})"));
                }
                power = e as usize;
            }
        }
        coeff
            .checked_mul(sign)
            .map(|c| (c, power))
            .ok_or(Error::Overflow("parse"))
    }
}

/// Parse the polynomial grammar described in the module docs.
pub fn parse_polynomial(input: &str) -> Result<IntPolynomial> {
    let mut p = Parser {
        bytes: input.as_bytes(),
        pos: 0,
    };
    if p.peek().is_none() {
        return p.err("empty polynomial");
    }
    let mut coeffs: Vec<i128> = Vec::new();
    loop {
        let (c, k) = p.term()?;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, 0);
        }
        coeffs[k] = coeffs[k].checked_add(c).ok_or(Error::Overflow("parse"))?;
        match p.peek() {
            None => break,
            Some(b'+') | Some(b'-') => continue, // consumed by the next term's sign
            Some(ch) => {
                return p.err(format!(
                    "expected '+', '-', or end of input, found {:?}",
                    ch as char
                ))
            }
        }
    }
    Ok(IntPolynomial::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        parse_polynomial(s).unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        for s in [
            "z^3+3z^2+2z+3",
            "2z^2+1",
            "z^2",
            "z",
            "5z^3-z+4",
            "-z+4",
            "0",
            "7",
            "-3",
            "z^6-1000z^5+z",
        ] {
            let q = p(s);
            assert_eq!(q.to_string(), s, "canonical form of {s}");
            assert_eq!(parse_polynomial(&q.to_string()).unwrap(), q);
        }
    }

    #[test]
    fn parse_tolerates_whitespace_and_signed_terms() {
        assert_eq!(p("2z^2 + 1"), p("2z^2+1"));
        assert_eq!(p("  z^3 + 3 z^2"), IntPolynomial::new(vec![0, 0, 3, 1]));
        assert_eq!(p("z^2+-3"), p("z^2-3"));
        assert_eq!(p("z+z"), p("2z"));
        assert_eq!(p("z^1"), p("z"));
        assert_eq!(p("3z-3z"), IntPolynomial::zero());
    }

    #[test]
    fn parse_rejects_garbage_with_position() {
        for (input, at_most) in [("", 0), ("z^", 2), ("2x", 1), ("z^0", 3), ("3 4", 2), ("+", 1)] {
            match parse_polynomial(input) {
                Err(Error::Parse { position, .. }) => {
                    assert!(position <= at_most, "{input}: position {position}")
                }
                other => panic!("{input}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn eval_basics() {
        assert_eq!(p("z^2").eval(7).unwrap(), 49);
        assert_eq!(p("z^3+3z^2+2z+3").eval(1).unwrap(), 9);
        assert_eq!(p("z^3+3z^2+2z+3").eval(2).unwrap(), 27);
        assert_eq!(p("z^3+3z^2+2z+3").eval(3).unwrap(), 63);
        assert_eq!(p("2z^2+1").eval(-3).unwrap(), 19);
        assert_eq!(IntPolynomial::zero().eval(12345).unwrap(), 0);
    }

    #[test]
    fn eval_overflow_is_reported() {
        let q = p("1000z^6");
        assert!(matches!(q.eval(1_000_000_000), Err(Error::Overflow(_))));
        // and a value that still fits is exact
        assert_eq!(q.eval(100_000).unwrap(), 1000i128 * 10i128.pow(30));
    }

    #[test]
    fn derivative_and_gap() {
        assert_eq!(p("z^3+3z^2+2z+3").derivative().unwrap(), p("3z^2+6z+2"));
        assert_eq!(p("7").derivative().unwrap(), IntPolynomial::zero());
        // gap of z^2 is 2z+1, leading coefficient d*a_d = 2
        assert_eq!(p("z^2").forward_gap().unwrap(), p("2z+1"));
        let g = p("z^3+3z^2+2z+3").forward_gap().unwrap();
        assert_eq!(g, p("3z^2+9z+6"));
        assert_eq!(g.degree(), 2);
        assert_eq!(g.leading_coeff(), 3);
        assert!(p("5").forward_gap().is_err());
    }

    #[test]
    fn finite_difference_frozen_values() {
        // n=2, m=7, ell=3 for z^2: p(13) - 2 p(10) + p(7) = 169 - 200 + 49
        assert_eq!(p("z^2").finite_difference(2, 7, 3).unwrap(), 18);
        // 5z^3 - z + 4 at n=3, m=11, ell=2: ell^n n! a_n = 8 * 6 * 5
        assert_eq!(p("5z^3-z+4").finite_difference(3, 11, 2).unwrap(), 240);
        // order above the degree annihilates
        assert_eq!(p("z^2").finite_difference(5, -9, 4).unwrap(), 0);
        assert_eq!(IntPolynomial::zero().finite_difference(0, 3, 1).unwrap(), 0);
    }

    #[test]
    fn finite_difference_rejects_bad_input() {
        assert!(matches!(
            p("z^3").finite_difference(2, 0, 1),
            Err(Error::DegreeTooHigh { degree: 3, n: 2 })
        ));
        assert!(matches!(
            p("z").finite_difference(1, 0, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn candidate_ramsey_parity_rule() {
        assert!(p("z^2").is_candidate_ramsey().unwrap()); // p(2) = 4 even
        assert!(!p("2z^2+1").is_candidate_ramsey().unwrap()); // 3 * 9 odd
        assert!(!p("z^3+3z^2+2z+3").is_candidate_ramsey().unwrap()); // 9 * 27 odd
        assert!(p("z^3-4z").is_candidate_ramsey().unwrap()); // p(2) = 0
        assert!(p("z").is_candidate_ramsey().unwrap());
        assert!(p("2z+1").is_candidate_ramsey().is_ok());
        assert!(matches!(
            p("7").is_candidate_ramsey(),
            Err(Error::InvalidTarget(_))
        ));
        assert!(matches!(
            p("-z^2+1").is_candidate_ramsey(),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn serde_uses_canonical_text() {
        let q = p("z^3+3z^2+2z+3");
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "\"z^3+3z^2+2z+3\"");
        let back: IntPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
    }
}
