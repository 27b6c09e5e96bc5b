//! Counting monochromatic solutions of x + y = p(z) and the switch
//! structure of colorings: residue classes modulo the gap m(k) =
//! p(k+1) - p(k), monotone classes, beta values, and the constructive
//! triples a non-monotone class forces.

use crate::coloring::{Color, Coloring};
use crate::error::{Error, Result};
use crate::modring::ResidueSet;
use crate::poly::IntPolynomial;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::collections::HashSet;

/// Profiles materialize every class member below p(k); refuse past this.
const PROFILE_CAP: i128 = 1_000_000_000;

/// A monochromatic solution {x, y, z}: x + y equals the target value at z,
/// all three positions share one colour, x < y, and x, y, z are pairwise
/// distinct.
///
/// Solutions are counted per (z, {x,y}) assignment. For every target in the
/// test suite t(z) + z is injective on the relevant range, so this equals
/// counting 3-element sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SolutionTriple {
    pub x: u64,
    pub y: u64,
    pub z: u64,
    pub color: Color,
}

impl SolutionTriple {
    /// Builds the canonical triple from an unordered pair and z, re-checking
    /// the sum, pairwise distinctness, and that all three share a colour.
    pub fn verified(phi: &Coloring, a: u64, b: u64, z: u64, sum: u64) -> Result<SolutionTriple> {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        if x == 0 || z == 0 {
            return Err(Error::Precondition("positions start at 1".into()));
        }
        if x == y || x == z || y == z {
            return Err(Error::Precondition(format!(
                "{{{x},{y},{z}}} is not a 3-element set"
            )));
        }
        if x.checked_add(y) != Some(sum) {
            return Err(Error::InternalInvariantBroken(format!(
                "triple sum {x}+{y} != {sum}"
            )));
        }
        let color = phi.color_at(z);
        if phi.color_at(x) != color || phi.color_at(y) != color {
            return Err(Error::InternalInvariantBroken(format!(
                "triple {{{x},{y},{z}}} is not monochromatic"
            )));
        }
        Ok(SolutionTriple { x, y, z, color })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateKind {
    /// x = y (distinct from z).
    EqualPair,
    /// z appears as x or y.
    RepeatedZ,
    /// x = y = z.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegenerateSolution {
    pub kind: DegenerateKind,
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

/// Degenerate hits are never mixed into the main count; they are tallied
/// here when requested. Counts stay exact past the item cap.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DegenerateReport {
    pub equal_pair: u64,
    pub repeated_z: u64,
    pub trivial: u64,
    pub items: Vec<DegenerateSolution>,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    pub include_degenerate: bool,
    pub collect_witnesses: bool,
    pub witness_cap: usize,
    pub degenerate_cap: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            include_degenerate: false,
            collect_witnesses: false,
            witness_cap: 1 << 20,
            degenerate_cap: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub n: u64,
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<DegenerateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<SolutionTriple>>,
    pub witnesses_truncated: bool,
}

#[inline]
fn bit(words: &[u64], i: u64) -> bool {
    (words[(i >> 6) as usize] >> (i & 63)) & 1 == 1
}

/// 64 bits of `words` starting at (possibly negative or past-the-end) bit
/// index `start`; out-of-range positions read as 0.
#[inline]
fn extract64(words: &[u64], start: i64) -> u64 {
    if start >= 0 {
        let wi = (start >> 6) as usize;
        let off = (start & 63) as u32;
        let lo = words.get(wi).copied().unwrap_or(0);
        if off == 0 {
            lo
        } else {
            lo >> off | words.get(wi + 1).copied().unwrap_or(0) << (64 - off)
        }
    } else if start > -64 {
        words.first().copied().unwrap_or(0) << (-start) as u32
    } else {
        0
    }
}

/// Counts pairs x < y with x + y = s, both in [1, n] and both set in `mask`,
/// by intersecting each word of the mask with its bit-reversed mirror at s.
fn pairs_for_sum(mask: &[u64], n: u64, s: u64) -> u64 {
    let lo = if s > n { s - n } else { 1 };
    let hi = (s - 1) >> 1;
    if lo > hi {
        return 0;
    }
    let mut total = 0u64;
    for wi in (lo >> 6) as usize..=(hi >> 6) as usize {
        let base = (wi as u64) << 6;
        let mut w = mask[wi];
        if base < lo {
            w &= !0u64 << (lo - base);
        }
        let t = hi - base;
        if t < 63 {
            w &= (1u64 << (t + 1)) - 1;
        }
        if w == 0 {
            continue;
        }
        // mirror bit u = mask bit (s - base - u)
        let mirror = extract64(mask, s as i64 - base as i64 - 63).reverse_bits();
        total += (w & mirror).count_ones() as u64;
    }
    total
}

/// Visits each such pair in ascending x order.
fn for_each_pair(mask: &[u64], n: u64, s: u64, mut visit: impl FnMut(u64, u64)) {
    let lo = if s > n { s - n } else { 1 };
    let hi = (s - 1) >> 1;
    if lo > hi {
        return;
    }
    for wi in (lo >> 6) as usize..=(hi >> 6) as usize {
        let base = (wi as u64) << 6;
        let mut w = mask[wi];
        if base < lo {
            w &= !0u64 << (lo - base);
        }
        let t = hi - base;
        if t < 63 {
            w &= (1u64 << (t + 1)) - 1;
        }
        let mirror = extract64(mask, s as i64 - base as i64 - 63).reverse_bits();
        let mut hits = w & mirror;
        while hits != 0 {
            let x = base + hits.trailing_zeros() as u64;
            visit(x, s - x);
            hits &= hits - 1;
        }
    }
}

/// Positive- and negative-colour bit rows over [0, n] (bit 0 clear).
fn build_masks(phi: &Coloring, n: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    let neg = phi.neg_mask(n)?;
    let mut pos: Vec<u64> = neg.iter().map(|w| !w).collect();
    pos[0] &= !1;
    let r = (n & 63) as u32;
    let last = pos.len() - 1;
    if r < 63 {
        pos[last] &= (1u64 << (r + 1)) - 1;
    }
    Ok((pos, neg))
}

/// The (z, p(z)) table restricted to target values that any pair in [1, n]
/// can reach. Evaluation overflow is an error, never a silent skip.
pub fn polynomial_targets(p: &IntPolynomial, n: u64) -> Result<Vec<(u64, u64)>> {
    let cap = 2 * n as i128;
    let mut out = Vec::new();
    for z in 1..=n {
        let s = p.eval(z as i128)?;
        if s >= 2 && s <= cap {
            out.push((z, s as u64));
        }
    }
    Ok(out)
}

/// The (z, 2^z) table for z up to z_max, restricted as in
/// `polynomial_targets`.
pub fn power_of_two_targets(z_max: u64, n: u64) -> Vec<(u64, u64)> {
    (1..=z_max.min(n).min(126))
        .map(|z| (z, 1u128 << z))
        .filter(|&(_, s)| s >= 2 && s <= 2 * n as u128)
        .map(|(z, s)| (z, s as u64))
        .collect()
}

/// Exact count of monochromatic triples {x, y, z} in [1, n] with
/// x + y = p(z), all pairwise distinct and same-coloured.
pub fn count_monochromatic(
    p: &IntPolynomial,
    phi: &Coloring,
    n: u64,
    opts: CountOptions,
) -> Result<CountReport> {
    let targets = polynomial_targets(p, n)?;
    count_with_targets(phi, n, &targets, opts)
}

/// The counting engine over an explicit (z, target value) table, ascending
/// in z with no repeats. Entries whose value no pair in [1, n] reaches are
/// skipped.
pub fn count_with_targets(
    phi: &Coloring,
    n: u64,
    targets: &[(u64, u64)],
    opts: CountOptions,
) -> Result<CountReport> {
    if n == 0 {
        return Err(Error::TargetTooSmall { n });
    }
    if n > 1 << 40 {
        return Err(Error::Precondition(format!("n = {n} is past the dense-mask range")));
    }
    phi.require_domain(n)?;
    debug_assert!(targets.windows(2).all(|w| w[0].0 < w[1].0));
    for &(z, _) in targets {
        if z == 0 || z > n {
            return Err(Error::Precondition(format!("target position {z} outside [1, {n}]")));
        }
    }
    let (pos, neg) = build_masks(phi, n)?;
    let live: Vec<(u64, u64)> = targets
        .iter()
        .copied()
        .filter(|&(_, s)| s >= 2 && s <= 2 * n)
        .collect();

    let count_one = |z: u64, s: u64| -> u64 {
        let mask = if phi.color_at(z) == Color::Minus { &neg } else { &pos };
        let mut c = pairs_for_sum(mask, n, s);
        if s > z {
            let partner = s - z;
            if partner <= n && partner != z && bit(mask, partner) {
                c -= 1;
            }
        }
        c
    };

    if !opts.include_degenerate && !opts.collect_witnesses {
        let count = live.par_iter().map(|&(z, s)| count_one(z, s)).sum();
        return Ok(CountReport {
            n,
            count,
            degenerate: None,
            witnesses: None,
            witnesses_truncated: false,
        });
    }

    let mut count = 0u64;
    let mut witnesses = Vec::new();
    let mut witnesses_truncated = false;
    let mut degen = DegenerateReport::default();
    let push_degen = |degen: &mut DegenerateReport, kind, x, y, z| {
        match kind {
            DegenerateKind::EqualPair => degen.equal_pair += 1,
            DegenerateKind::RepeatedZ => degen.repeated_z += 1,
            DegenerateKind::Trivial => degen.trivial += 1,
        }
        if degen.items.len() < opts.degenerate_cap {
            degen.items.push(DegenerateSolution { kind, x, y, z });
        } else {
            degen.truncated = true;
        }
    };

    for &(z, s) in &live {
        let color = phi.color_at(z);
        if opts.collect_witnesses {
            let mask = if color == Color::Minus { &neg } else { &pos };
            for_each_pair(mask, n, s, |x, y| {
                if x == z || y == z {
                    return;
                }
                count += 1;
                if witnesses.len() < opts.witness_cap {
                    witnesses.push(SolutionTriple { x, y, z, color });
                } else {
                    witnesses_truncated = true;
                }
            });
        } else {
            count += count_one(z, s);
        }
        if opts.include_degenerate {
            if s % 2 == 0 {
                let half = s / 2;
                if half <= n {
                    if half == z {
                        push_degen(&mut degen, DegenerateKind::Trivial, half, half, z);
                    } else if phi.color_at(half) == color {
                        push_degen(&mut degen, DegenerateKind::EqualPair, half, half, z);
                    }
                }
            }
            if s > z {
                let partner = s - z;
                if partner <= n && partner != z && phi.color_at(partner) == color {
                    let (a, b) = (z.min(partner), z.max(partner));
                    push_degen(&mut degen, DegenerateKind::RepeatedZ, a, b, z);
                }
            }
        }
    }
    Ok(CountReport {
        n,
        count,
        degenerate: opts.include_degenerate.then_some(degen),
        witnesses: opts.collect_witnesses.then_some(witnesses),
        witnesses_truncated,
    })
}

/// All k in [lo, hi-1] where the colour changes between k and k+1.
pub fn find_switches(phi: &Coloring, lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo < 1 || hi <= lo {
        return Err(Error::Precondition(format!("switch scan needs 1 <= lo < hi, got [{lo}, {hi}]")));
    }
    phi.require_domain(hi)?;
    let mut out = Vec::new();
    let mut prev = phi.color_at(lo);
    for k in lo..hi {
        let next = phi.color_at(k + 1);
        if next != prev {
            out.push(k);
        }
        prev = next;
    }
    Ok(out)
}

fn monochromatic_on(phi: &Coloring, lo: u64, hi: u64) -> bool {
    let c = phi.color_at(lo);
    (lo + 1..=hi).all(|x| phi.color_at(x) == c)
}

/// The colour phi(k) after confirming k actually switches.
pub fn switch_color(phi: &Coloring, k: u64) -> Result<Color> {
    if k == 0 {
        return Err(Error::Precondition("switch positions start at 1".into()));
    }
    phi.require_domain(k + 1)?;
    let c = phi.color_at(k);
    if c == phi.color_at(k + 1) {
        return Err(Error::NotASwitch { k });
    }
    Ok(c)
}

/// True iff [ceil(k/2), k] and [k+1, 2k] are each monochromatic.
pub fn is_isolated_switch(phi: &Coloring, k: u64) -> Result<bool> {
    switch_color(phi, k)?;
    phi.require_domain(2 * k)?;
    Ok(monochromatic_on(phi, k.div_ceil(2), k) && monochromatic_on(phi, k + 1, 2 * k))
}

/// beta of a residue class: the least class member coloured phi(k), if any.
/// Only meaningful (Finite/Infinite) for monotone classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaValue {
    Finite(u64),
    Infinite,
    Undefined,
}

impl Serialize for BetaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BetaValue::Finite(v) => s.serialize_u64(*v),
            BetaValue::Infinite => s.serialize_str("inf"),
            BetaValue::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRecord {
    pub j: u64,
    /// Members of the class in [1, p(k)), ascending. Residue 0 starts at
    /// m(k), not 0: colorings live on positive integers.
    pub elements: Vec<u64>,
    pub l_j: u64,
    pub monotone: bool,
    pub beta: BetaValue,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidueProfile {
    pub k: u64,
    pub switch_color: Color,
    pub p_k: u64,
    pub m_k: u64,
    pub classes: Vec<ClassRecord>,
    pub nonmonotone_classes: Vec<u64>,
}

/// Per-class structure at switch k: members below p(k), the monotonicity
/// test (colours run -phi(k) then phi(k) along the class; mirrored
/// automatically when phi(k) = -1), and beta.
pub fn residue_profile(p: &IntPolynomial, phi: &Coloring, k: u64) -> Result<ResidueProfile> {
    let sigma = switch_color(phi, k)?;
    residue_profile_forced(p, phi, k, sigma)
}

/// Same as `residue_profile` but trusts the caller's switch colour instead
/// of requiring an actual switch. Test harness entry point.
pub fn residue_profile_forced(
    p: &IntPolynomial,
    phi: &Coloring,
    k: u64,
    sigma: Color,
) -> Result<ResidueProfile> {
    if k == 0 {
        return Err(Error::Precondition("switch positions start at 1".into()));
    }
    let p_k = p.eval(k as i128)?;
    let p_k1 = p.eval(k as i128 + 1)?;
    let m_k = p_k1 - p_k;
    if m_k <= 0 || p_k <= 0 {
        return Err(Error::DegenerateGap { k, p_k, m_k });
    }
    if p_k > PROFILE_CAP {
        return Err(Error::Precondition(format!(
            "p({k}) = {p_k} is past the materializable profile range"
        )));
    }
    let pk = p_k as u64;
    let m = m_k as u64;
    if pk >= 2 {
        phi.require_domain(pk - 1)?;
    }
    let mut classes = Vec::with_capacity(m.min(1 << 20) as usize);
    let mut nonmonotone_classes = Vec::new();
    for j in 0..m {
        let mut elements = Vec::new();
        let mut h = if j == 0 { m } else { j };
        while h < pk {
            elements.push(h);
            h += m;
        }
        let l_j = if pk > j { (pk - 1 - j) / m } else { 0 };
        let mut monotone = true;
        let mut first_sigma = None;
        for &h in &elements {
            if phi.color_at(h) == sigma {
                if first_sigma.is_none() {
                    first_sigma = Some(h);
                }
            } else if first_sigma.is_some() {
                monotone = false;
            }
        }
        let beta = if !monotone {
            nonmonotone_classes.push(j);
            BetaValue::Undefined
        } else {
            match first_sigma {
                Some(b) => BetaValue::Finite(b),
                None => BetaValue::Infinite,
            }
        };
        classes.push(ClassRecord { j, elements, l_j, monotone, beta });
    }
    Ok(ResidueProfile {
        k,
        switch_color: sigma,
        p_k: pk,
        m_k: m,
        classes,
        nonmonotone_classes,
    })
}

/// The classes whose colour stays opposite to phi(k) up to p(k)/3:
/// {j : 3 beta(j) >= p(k)}, with infinite beta always in.
pub fn compute_a_k(p: &IntPolynomial, phi: &Coloring, k: u64) -> Result<ResidueSet> {
    let sigma = switch_color(phi, k)?;
    compute_a_k_forced(p, phi, k, sigma)
}

pub fn compute_a_k_forced(
    p: &IntPolynomial,
    phi: &Coloring,
    k: u64,
    sigma: Color,
) -> Result<ResidueSet> {
    let prof = residue_profile_forced(p, phi, k, sigma)?;
    if let Some(&class_j) = prof.nonmonotone_classes.first() {
        return Err(Error::NonMonotoneSwitch { k, class_j });
    }
    let pk = prof.p_k as u128;
    ResidueSet::from_members(
        prof.m_k,
        prof.classes.iter().filter_map(|c| match c.beta {
            BetaValue::Finite(b) => (3 * b as u128 >= pk).then_some(c.j),
            BetaValue::Infinite => Some(c.j),
            BetaValue::Undefined => None,
        }),
    )
}

/// How a non-monotone class certifies a monochromatic solution. The
/// guaranteed solution can collapse to a 2-element set (x = y, or z inside
/// the pair); such witnesses are still sum- and colour-checked but flagged.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SwitchWitness {
    Strict { triple: SolutionTriple },
    Degenerate { x: u64, y: u64, z: u64, color: Color },
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassWitness {
    pub class_j: u64,
    /// The class member u with colour phi(k) followed by u + m(k) of the
    /// opposite colour; determines the class, so witnesses stay distinct.
    pub violation_at: u64,
    pub witness: SwitchWitness,
}

impl ClassWitness {
    pub fn strict(&self) -> Option<&SolutionTriple> {
        match &self.witness {
            SwitchWitness::Strict { triple } => Some(triple),
            SwitchWitness::Degenerate { .. } => None,
        }
    }
}

pub fn strict_triples(witnesses: &[ClassWitness]) -> Vec<SolutionTriple> {
    witnesses.iter().filter_map(|w| w.strict().copied()).collect()
}

/// One verified monochromatic solution per non-monotone class at switch k.
///
/// A violation u (colour phi(k)) followed by u + m(k) (colour -phi(k))
/// yields y = p(k) - u, and exactly one of two candidates fires on colour:
/// {u, y, k} in phi(k), or {u + m(k), y, k+1} in -phi(k). The first
/// violation admitting a genuine 3-set wins; otherwise the first violation's
/// candidate is returned flagged degenerate.
pub fn nonmonotone_solutions(
    p: &IntPolynomial,
    phi: &Coloring,
    k: u64,
) -> Result<Vec<ClassWitness>> {
    let sigma = switch_color(phi, k)?;
    let prof = residue_profile_forced(p, phi, k, sigma)?;
    let pk = prof.p_k;
    let m = prof.m_k;
    phi.require_domain((pk + m - 1).max(k + 1))?;
    let mut out = Vec::new();
    for class in prof.classes.iter().filter(|c| !c.monotone) {
        let mut chosen: Option<ClassWitness> = None;
        for pair in class.elements.windows(2) {
            let (u, next) = (pair[0], pair[1]);
            if phi.color_at(u) != sigma || phi.color_at(next) == sigma {
                continue;
            }
            let y = pk - u;
            let (a, b, z, color) = if phi.color_at(y) == sigma {
                (u, y, k, sigma)
            } else {
                (next, y, k + 1, sigma.flip())
            };
            let strict = a != b && a != z && b != z;
            if strict {
                let triple = SolutionTriple::verified(phi, a, b, z, a + b)?;
                if triple.color != color {
                    return Err(Error::InternalInvariantBroken(format!(
                        "class {} witness colour drifted at switch {k}",
                        class.j
                    )));
                }
                chosen = Some(ClassWitness {
                    class_j: class.j,
                    violation_at: u,
                    witness: SwitchWitness::Strict { triple },
                });
                break;
            }
            if chosen.is_none() {
                verify_degenerate(phi, a, b, z, color, p)?;
                let (x, yy) = if a <= b { (a, b) } else { (b, a) };
                chosen = Some(ClassWitness {
                    class_j: class.j,
                    violation_at: u,
                    witness: SwitchWitness::Degenerate { x, y: yy, z, color },
                });
            }
        }
        out.push(chosen.ok_or_else(|| {
            Error::InternalInvariantBroken(format!(
                "class {} reported non-monotone without a violation at switch {k}",
                class.j
            ))
        })?);
    }
    let mut seen = HashSet::new();
    for w in &out {
        let z = match &w.witness {
            SwitchWitness::Strict { triple } => triple.z,
            SwitchWitness::Degenerate { z, .. } => *z,
        };
        if !seen.insert((w.violation_at, z)) {
            return Err(Error::InternalInvariantBroken(format!(
                "duplicate witness key at switch {k}"
            )));
        }
    }
    Ok(out)
}

fn verify_degenerate(
    phi: &Coloring,
    a: u64,
    b: u64,
    z: u64,
    color: Color,
    p: &IntPolynomial,
) -> Result<()> {
    let sum = a as i128 + b as i128;
    if p.eval(z as i128)? != sum {
        return Err(Error::InternalInvariantBroken(format!(
            "degenerate witness sum {a}+{b} misses the target at z = {z}"
        )));
    }
    for v in [a, b, z] {
        if phi.color_at(v) != color {
            return Err(Error::InternalInvariantBroken(format!(
                "degenerate witness {{{a},{b},{z}}} is not monochromatic"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{
        divisibility_coloring, parity_coloring, power_of_two_coloring, ExplicitColoring,
    };
    use crate::poly::parse_polynomial;
    use rand::{Rng, SeedableRng};

    fn explicit(n: u64, minus: &[u64]) -> Coloring {
        Coloring::Explicit(ExplicitColoring::new(n, |x| minus.contains(&x)).unwrap())
    }

    fn all_plus(n: u64) -> Coloring {
        Coloring::Explicit(ExplicitColoring::new(n, |_| false).unwrap())
    }

    #[test]
    fn pair_kernel_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [5u64, 63, 64, 65, 127, 129, 300] {
            let phi = Coloring::Explicit(
                ExplicitColoring::new(n, |_| rng.random_range(0..2) == 0).unwrap(),
            );
            let (pos, neg) = build_masks(&phi, n).unwrap();
            for s in 2..=2 * n {
                for mask in [&pos, &neg] {
                    let mut brute = 0;
                    for x in 1..n {
                        let y = s.wrapping_sub(x);
                        if y > x && y <= n && bit(mask, x) && bit(mask, y) {
                            brute += 1;
                        }
                    }
                    assert_eq!(pairs_for_sum(mask, n, s), brute, "n={n} s={s}");
                    let mut seen = 0;
                    for_each_pair(mask, n, s, |x, y| {
                        assert!(x < y && x + y == s && bit(mask, x) && bit(mask, y));
                        seen += 1;
                    });
                    assert_eq!(seen, brute);
                }
            }
        }
    }

    #[test]
    fn square_all_plus_tiny() {
        let p = parse_polynomial("z^2").unwrap();
        let rep = count_monochromatic(
            &p,
            &all_plus(3),
            3,
            CountOptions {
                include_degenerate: true,
                collect_witnesses: true,
                ..CountOptions::default()
            },
        )
        .unwrap();
        assert_eq!(rep.count, 1);
        assert_eq!(
            rep.witnesses.as_deref(),
            Some(
                &[SolutionTriple { x: 1, y: 3, z: 2, color: Color::Plus }][..]
            )
        );
        let degen = rep.degenerate.unwrap();
        assert_eq!(
            degen.items,
            vec![DegenerateSolution { kind: DegenerateKind::Trivial, x: 2, y: 2, z: 2 }]
        );
        assert_eq!((degen.trivial, degen.equal_pair, degen.repeated_z), (1, 0, 0));
    }

    #[test]
    fn parity_blocks_shifted_square() {
        let p = parse_polynomial("2z^2+1").unwrap();
        let rep = count_monochromatic(&p, &parity_coloring(), 2000, CountOptions::default()).unwrap();
        assert_eq!(rep.count, 0);
    }

    #[test]
    fn mod_six_blocks_cubic() {
        let p = parse_polynomial("z^3+3z^2+2z+3").unwrap();
        let neg = ResidueSet::from_members(6, [2, 3, 5]).unwrap();
        let phi = divisibility_coloring(6, neg).unwrap();
        let rep = count_monochromatic(&p, &phi, 2000, CountOptions::default()).unwrap();
        assert_eq!(rep.count, 0);
    }

    #[test]
    fn parity_square_has_solutions() {
        // {2, 14, 4}: 2 + 14 = 16, all even
        let p = parse_polynomial("z^2").unwrap();
        let opts = CountOptions { collect_witnesses: true, ..CountOptions::default() };
        let rep = count_monochromatic(&p, &parity_coloring(), 14, opts).unwrap();
        assert!(rep.count >= 1);
        assert!(rep
            .witnesses
            .unwrap()
            .contains(&SolutionTriple { x: 2, y: 14, z: 4, color: Color::Plus }));
    }

    #[test]
    fn matches_naive_oracle_on_random_colorings() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let polys = ["z^2", "2z^2+1", "z^3+3z^2+2z+3", "z^3-4z", "z"];
        for trial in 0..12 {
            let p = parse_polynomial(polys[trial % polys.len()]).unwrap();
            let n = rng.random_range(40..400);
            let phi = Coloring::Explicit(
                ExplicitColoring::new(n, |_| rng.random_range(0..2) == 0).unwrap(),
            );
            let opts = CountOptions { include_degenerate: true, ..CountOptions::default() };
            let fast = count_with_targets(&phi, n, &polynomial_targets(&p, n).unwrap(), opts).unwrap();
            let slow = crate::oracle::naive_count(&p, &phi, n).unwrap();
            assert_eq!(fast.count, slow.count, "{p} n={n}");
            let d = fast.degenerate.unwrap();
            assert_eq!(
                (d.equal_pair, d.repeated_z, d.trivial),
                (slow.equal_pair, slow.repeated_z, slow.trivial),
                "{p} n={n}"
            );
        }
    }

    #[test]
    fn power_map_targets() {
        assert_eq!(power_of_two_targets(5, 1 << 10), vec![(1, 2), (2, 4), (3, 8), (4, 16), (5, 32)]);
        // cap at 2n
        assert_eq!(power_of_two_targets(10, 8), vec![(1, 2), (2, 4), (3, 8), (4, 16)]);
        let phi = power_of_two_coloring();
        let n = 1 << 12;
        let targets = power_of_two_targets(12, n);
        let opts = CountOptions { include_degenerate: true, ..CountOptions::default() };
        let rep = count_with_targets(&phi, n, &targets, opts).unwrap();
        assert_eq!(rep.count, 0);
        let degen = rep.degenerate.unwrap();
        assert_eq!(
            degen.items,
            vec![
                DegenerateSolution { kind: DegenerateKind::Trivial, x: 1, y: 1, z: 1 },
                DegenerateSolution { kind: DegenerateKind::Trivial, x: 2, y: 2, z: 2 },
            ]
        );
    }

    #[test]
    fn switch_scan() {
        let phi = explicit(5, &[3, 4]);
        assert_eq!(find_switches(&phi, 1, 5).unwrap(), vec![2, 4]);
        assert_eq!(find_switches(&parity_coloring(), 1, 6).unwrap(), vec![1, 2, 3, 4, 5]);
        assert!(find_switches(&all_plus(10), 1, 10).unwrap().is_empty());
        assert!(find_switches(&parity_coloring(), 3, 3).is_err());
        assert!(find_switches(&explicit(4, &[]), 1, 9).is_err());
    }

    #[test]
    fn isolated_switches() {
        let block = Coloring::Explicit(ExplicitColoring::new(40, |x| x <= 10).unwrap());
        assert!(is_isolated_switch(&block, 10).unwrap());
        assert!(!is_isolated_switch(&parity_coloring(), 4).unwrap());
        let tail = Coloring::Explicit(ExplicitColoring::new(14, |x| (8..=13).contains(&x)).unwrap());
        assert!(!is_isolated_switch(&tail, 7).unwrap());
        assert!(matches!(
            is_isolated_switch(&all_plus(20), 5),
            Err(Error::NotASwitch { k: 5 })
        ));
    }

    #[test]
    fn profile_forced_square_at_four() {
        let p = parse_polynomial("z^2").unwrap();
        let prof = residue_profile_forced(&p, &all_plus(30), 4, Color::Plus).unwrap();
        assert_eq!((prof.p_k, prof.m_k), (16, 9));
        assert_eq!(prof.classes.len(), 9);
        let h1 = &prof.classes[1];
        assert_eq!(h1.elements, vec![1, 10]);
        assert_eq!(h1.l_j, 1);
        let h0 = &prof.classes[0];
        assert_eq!(h0.elements, vec![9]);
        for c in &prof.classes {
            assert!(c.monotone);
            assert_eq!(c.beta, BetaValue::Finite(c.elements[0]));
            // the next step off the end of the class lands in [p(k), p(k+1))
            let next = c.j + (c.l_j + 1) * prof.m_k;
            assert!((16..25).contains(&next), "class {}", c.j);
        }
        assert!(prof.nonmonotone_classes.is_empty());
    }

    #[test]
    fn profile_detects_nonmonotone_class() {
        let p = parse_polynomial("z^2").unwrap();
        // phi(1) = +1, phi(10) = -1 breaks class 1 at k = 4 (sigma = +1)
        let phi = explicit(30, &[5, 10]);
        let prof = residue_profile(&p, &phi, 4).unwrap();
        assert_eq!(prof.switch_color, Color::Plus);
        assert_eq!(prof.nonmonotone_classes, vec![1]);
        assert_eq!(prof.classes[1].beta, BetaValue::Undefined);
        // class 5 runs (-1, +1): non-decreasing, fine
        assert!(prof.classes[5].monotone);
        assert_eq!(prof.classes[5].beta, BetaValue::Finite(14));
    }

    #[test]
    fn profile_degenerate_gaps() {
        let shrinking = parse_polynomial("-z+10").unwrap();
        assert!(matches!(
            residue_profile_forced(&shrinking, &all_plus(30), 3, Color::Plus),
            Err(Error::DegenerateGap { k: 3, m_k: -1, .. })
        ));
        let late_start = parse_polynomial("z-5").unwrap();
        assert!(matches!(
            residue_profile_forced(&late_start, &all_plus(30), 3, Color::Plus),
            Err(Error::DegenerateGap { k: 3, p_k: -2, .. })
        ));
        let linear = parse_polynomial("z").unwrap();
        let prof = residue_profile_forced(&linear, &all_plus(30), 5, Color::Plus).unwrap();
        assert_eq!(prof.m_k, 1);
        assert_eq!(prof.classes.len(), 1);
        assert_eq!(prof.classes[0].elements, vec![1, 2, 3, 4]);
    }

    #[test]
    fn a_k_frozen_square() {
        let p = parse_polynomial("z^2").unwrap();
        let a = compute_a_k_forced(&p, &all_plus(30), 4, Color::Plus).unwrap();
        assert_eq!(a.members(), vec![0, 6, 7, 8]);
        // forcing sigma = -1 makes every beta infinite
        let full = compute_a_k_forced(&p, &all_plus(30), 4, Color::Minus).unwrap();
        assert_eq!(full.len(), 9);
        // at k = 7 every class starts below p(k)/3, so nothing qualifies
        let empty = compute_a_k_forced(&p, &all_plus(60), 7, Color::Plus).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn a_k_rejects_nonmonotone() {
        let p = parse_polynomial("z^2").unwrap();
        let phi = explicit(30, &[5, 10]);
        assert!(matches!(
            compute_a_k(&p, &phi, 4),
            Err(Error::NonMonotoneSwitch { k: 4, class_j: 1 })
        ));
    }

    #[test]
    fn switch_witness_case_one() {
        let p = parse_polynomial("z^2").unwrap();
        // switch at 4, class 1 violated at u = 1, y = 15 keeps colour +1
        let phi = explicit(24, &[5, 10]);
        let ws = nonmonotone_solutions(&p, &phi, 4).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!((ws[0].class_j, ws[0].violation_at), (1, 1));
        let t = ws[0].strict().unwrap();
        assert_eq!((t.x, t.y, t.z, t.color), (1, 15, 4, Color::Plus));
    }

    #[test]
    fn switch_witness_case_two() {
        let p = parse_polynomial("z^2").unwrap();
        // y = 15 now carries -1, so the solution shifts to k + 1
        let phi = explicit(24, &[5, 10, 15]);
        let ws = nonmonotone_solutions(&p, &phi, 4).unwrap();
        // class 6 breaks too: phi(6) = +1, phi(15) = -1
        assert_eq!(ws.len(), 2);
        let w1 = &ws[0];
        assert_eq!((w1.class_j, w1.violation_at), (1, 1));
        let t = w1.strict().unwrap();
        assert_eq!((t.x, t.y, t.z, t.color), (10, 15, 5, Color::Minus));
        let w6 = &ws[1];
        assert_eq!((w6.class_j, w6.violation_at), (6, 6));
        let t6 = w6.strict().unwrap();
        assert_eq!((t6.x, t6.y, t6.z), (10, 15, 5));
    }

    #[test]
    fn switch_witness_degenerate_fallback() {
        let p = parse_polynomial("z^2").unwrap();
        // k = 6: m(k) = 13, class 5 = {5, 18, 31}; the lone violation at
        // u = 18 forces x = y = p(k)/2 = 18
        let phi = explicit(48, &[7, 31]);
        let ws = nonmonotone_solutions(&p, &phi, 6).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!((ws[0].class_j, ws[0].violation_at), (5, 18));
        assert!(ws[0].strict().is_none());
        match ws[0].witness {
            SwitchWitness::Degenerate { x, y, z, color } => {
                assert_eq!((x, y, z, color), (18, 18, 6, Color::Plus));
            }
            _ => panic!("expected degenerate fallback"),
        }
        assert!(strict_triples(&ws).is_empty());
    }

    #[test]
    fn monotone_switch_yields_nothing() {
        let p = parse_polynomial("z^2").unwrap();
        let phi = explicit(24, &[5]);
        assert!(nonmonotone_solutions(&p, &phi, 4).unwrap().is_empty());
    }

    #[test]
    fn random_smoke_switch_witness_invariant() {
        let p = parse_polynomial("z^2").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let phi = Coloring::Explicit(
                ExplicitColoring::new(3000, |_| rng.random_range(0..2) == 0).unwrap(),
            );
            for k in find_switches(&phi, 1, 50).unwrap() {
                let prof = residue_profile(&p, &phi, k).unwrap();
                let ws = nonmonotone_solutions(&p, &phi, k).unwrap();
                assert_eq!(ws.len(), prof.nonmonotone_classes.len(), "k = {k}");
            }
        }
    }
}
