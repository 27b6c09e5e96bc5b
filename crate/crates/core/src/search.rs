//! Exhaustive searches over periodic and bounded colorings.
//!
//! Three families of questions live here: which balanced periodic
//! colorings admit no monochromatic solution of x + y = p(z) up to a
//! horizon (and what algebraic certificate explains each one), whether
//! every balanced class with a deficient sumset decomposes the way the
//! stability analysis predicts, and how low the solution count can be
//! pushed over all colorings of a short initial segment.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{count_monochromatic, polynomial_targets, CountOptions, CountReport};
use crate::coloring::{divisibility_coloring, Coloring, ExplicitColoring};
use crate::error::{Error, Result, StabilityPrecondition};
use crate::modring::{stability_decomposition, ResidueSet, StabilityDecomposition};
use crate::poly::IntPolynomial;

/// Periods beyond this make the balanced-subset enumeration explode.
pub const MAX_ENUM_PERIOD: u64 = 24;

/// Largest modulus the stability oracle will sweep; C(16,8) = 12870 sets.
pub const MAX_ORACLE_MODULUS: u64 = 16;

/// Largest n for the exhaustive landscape: 2^(n-1) colorings.
pub const MAX_EXHAUSTIVE_N: u64 = 26;

/// A congruence p(z) = residue (mod modulus) satisfied by every z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Congruence {
    pub modulus: u64,
    pub residue: u64,
}

/// One certified solution-free periodic coloring: the period, the classes
/// colored -1, the horizon the emptiness was checked to, and the algebraic
/// structure that forces emptiness at every horizon.
#[derive(Debug, Clone, Serialize)]
pub struct BadColoringRecord {
    pub m: u64,
    pub neg_classes: ResidueSet,
    pub horizon: u64,
    pub decomposition: StabilityDecomposition,
    pub congruence: Congruence,
}

/// A coloring with zero solutions up to the horizon but no certificate.
/// The characterization says this never happens once the horizon clears
/// 2 p(m); kept as data rather than an assertion so a counterexample
/// would surface loudly instead of vanishing.
#[derive(Debug, Clone, Serialize)]
pub struct UncertifiedZero {
    pub m: u64,
    pub neg_classes: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BadColoringSearch {
    pub m_max: u64,
    pub horizon: u64,
    pub colorings_examined: u64,
    pub records: Vec<BadColoringRecord>,
    pub uncertified: Vec<UncertifiedZero>,
}

/// Lexicographic k-subsets of `pool`, passed to `f` as sorted slices.
fn for_each_combination(
    pool: &[u64],
    k: usize,
    f: &mut dyn FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    let n = pool.len();
    if k > n {
        return Ok(());
    }
    if k == 0 {
        return f(&[]);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<u64> = vec![0; k];
    loop {
        for (slot, &i) in buf.iter_mut().zip(idx.iter()) {
            *slot = pool[i];
        }
        f(&buf)?;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] != n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return Ok(());
            }
        }
    }
}

/// Strict plus degenerate solutions, the emptiness notion used throughout
/// this module. A periodic coloring with a repeated-element solution still
/// realizes p(z) as a same-color sum, so degenerates count.
fn total_solutions(report: &CountReport) -> u64 {
    let degen = report
        .degenerate
        .as_ref()
        .map(|d| d.equal_pair + d.repeated_z + d.trivial)
        .unwrap_or(0);
    report.count + degen
}

/// The certificate behind a solution-free periodic coloring: the negative
/// classes decompose (quotient m', missing residue alpha) and p is
/// constantly alpha mod m'. Sound unconditionally: alpha odd is not a sum
/// of two same-color residues, so no horizon sees a solution.
///
/// Returns Ok(None) when the sumset is full (no structure to extract) or
/// when the decomposition exists but p is not constant mod m'.
fn certificate_for(
    p: &IntPolynomial,
    neg: &ResidueSet,
) -> Result<Option<(StabilityDecomposition, Congruence)>> {
    let dec = match stability_decomposition(neg) {
        Ok(d) => d,
        Err(Error::StabilityPrecondition(StabilityPrecondition::FullSumset)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let m_prime = dec.m_prime;
    let alpha = dec.alpha;
    if (1..=m_prime).all(|z| p.eval_mod(z, m_prime) == alpha) {
        Ok(Some((
            dec,
            Congruence {
                modulus: m_prime,
                residue: alpha,
            },
        )))
    } else {
        Ok(None)
    }
}

/// Enumerate balanced periodic colorings with period m <= m_max that have
/// no monochromatic solution (degenerates included) up to the horizon.
///
/// Swapping the two colors does not change solution counts, so each
/// complementary pair is represented once, by the class set avoiding
/// residue 0. Rotations are not quotiented; shifted colorings are
/// genuinely different colorings of the positive integers.
///
/// The horizon must reach 2 p(m_max) so every period under test has seen
/// at least one full wave of targets.
pub fn enumerate_bad_periodic(
    p: &IntPolynomial,
    m_max: u64,
    horizon: u64,
) -> Result<BadColoringSearch> {
    p.require_admissible()?;
    if m_max < 2 {
        return Err(Error::Precondition(format!(
            "period bound must be at least 2, got {m_max}"
        )));
    }
    if m_max > MAX_ENUM_PERIOD {
        return Err(Error::TooLargeForExhaustive {
            n: m_max,
            max: MAX_ENUM_PERIOD,
        });
    }
    let required = 2 * p.eval(m_max as i128)?.max(0) as u128;
    if (horizon as u128) < required {
        return Err(Error::HorizonTooSmall { horizon, required });
    }

    let opts = CountOptions {
        include_degenerate: true,
        ..CountOptions::default()
    };
    let mut records = Vec::new();
    let mut uncertified = Vec::new();
    let mut examined = 0u64;
    for m in (2..=m_max).step_by(2) {
        let pool: Vec<u64> = (1..m).collect();
        for_each_combination(&pool, (m / 2) as usize, &mut |members| {
            examined += 1;
            let neg = ResidueSet::from_members(m, members.iter().copied())?;
            let phi = divisibility_coloring(m, neg.clone())?;
            let report = count_monochromatic(p, &phi, horizon, opts.clone())?;
            let zero = total_solutions(&report) == 0;
            let cert = certificate_for(p, &neg)?;
            match (zero, cert) {
                (true, Some((decomposition, congruence))) => records.push(BadColoringRecord {
                    m,
                    neg_classes: neg,
                    horizon,
                    decomposition,
                    congruence,
                }),
                (true, None) => uncertified.push(UncertifiedZero {
                    m,
                    neg_classes: members.to_vec(),
                }),
                (false, Some(_)) => {
                    return Err(Error::InternalInvariantBroken(format!(
                        "classes {members:?} mod {m} carry a certificate yet \
                         {} solutions were counted below {horizon}",
                        total_solutions(&report)
                    )));
                }
                (false, None) => {}
            }
            Ok(())
        })?;
    }
    Ok(BadColoringSearch {
        m_max,
        horizon,
        colorings_examined: examined,
        records,
        uncertified,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateCount {
    pub m_prime: u64,
    pub alpha: u64,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityOracleReport {
    pub m: u64,
    pub balanced_sets: u64,
    pub full_sumset: u64,
    pub decomposed: u64,
    pub certificates: Vec<CertificateCount>,
}

/// Sweep every A in Z_m with |A| = m/2. Each one either has a full sumset
/// or must decompose; `stability_decomposition` re-verifies all of its own
/// postconditions (balanced projections, punctured sumsets, odd alpha, the
/// translate identities), so an Ok here is a checked certificate and any
/// failure is reported as the violation it would be.
pub fn exhaustive_stability_oracle(m: u64) -> Result<StabilityOracleReport> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::Precondition(format!(
            "the stability sweep needs an even modulus >= 2, got {m}"
        )));
    }
    if m > MAX_ORACLE_MODULUS {
        return Err(Error::TooLargeForExhaustive {
            n: m,
            max: MAX_ORACLE_MODULUS,
        });
    }
    let pool: Vec<u64> = (0..m).collect();
    let mut balanced_sets = 0u64;
    let mut full_sumset = 0u64;
    let mut by_certificate: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for_each_combination(&pool, (m / 2) as usize, &mut |members| {
        balanced_sets += 1;
        let a = ResidueSet::from_members(m, members.iter().copied())?;
        if a.sumset(&a)?.len() == m {
            full_sumset += 1;
            return Ok(());
        }
        let dec = stability_decomposition(&a).map_err(|e| {
            Error::InternalInvariantBroken(format!(
                "balanced set {members:?} mod {m} has a deficient sumset \
                 but failed to decompose: {e}"
            ))
        })?;
        *by_certificate.entry((dec.m_prime, dec.alpha)).or_insert(0) += 1;
        Ok(())
    })?;
    let decomposed = by_certificate.values().sum();
    Ok(StabilityOracleReport {
        m,
        balanced_sets,
        full_sumset,
        decomposed,
        certificates: by_certificate
            .into_iter()
            .map(|((m_prime, alpha), count)| CertificateCount {
                m_prime,
                alpha,
                count,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramBin {
    pub count: u64,
    pub colorings: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LandscapeReport {
    pub n: u64,
    pub mode: &'static str,
    pub colorings_examined: u64,
    pub min_count: u64,
    pub argmin: Coloring,
    pub histogram: Vec<HistogramBin>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
pub enum LandscapeMode {
    /// Every coloring of [1, n] with the color of 1 fixed to +1 (a global
    /// flip preserves counts, so this halves the space losslessly).
    Exhaustive,
    /// Independent uniform colorings drawn from a seeded generator.
    Random { samples: u64, seed: u64 },
}

/// Distribution of the strict solution count of x + y = p(z) over
/// colorings of [1, n], with the minimizer exhibited.
pub fn min_solutions_landscape(
    p: &IntPolynomial,
    n: u64,
    mode: LandscapeMode,
) -> Result<LandscapeReport> {
    match mode {
        LandscapeMode::Exhaustive => landscape_exhaustive(p, n),
        LandscapeMode::Random { samples, seed } => landscape_random(p, n, samples, seed),
    }
}

fn landscape_exhaustive(p: &IntPolynomial, n: u64) -> Result<LandscapeReport> {
    p.require_admissible()?;
    if n < 1 {
        return Err(Error::EmptyInput("landscape over an empty segment"));
    }
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLargeForExhaustive {
            n,
            max: MAX_EXHAUSTIVE_N,
        });
    }

    // Strict triples as bitmasks over positions 1..=n (bit x-1 = position x).
    let mut triples: Vec<u64> = Vec::new();
    for (z, s) in polynomial_targets(p, n)? {
        let lo = if s > n { s - n } else { 1 };
        for x in lo..=(s - 1) / 2 {
            let y = s - x;
            if x == z || y == z {
                continue;
            }
            triples.push(1 << (x - 1) | 1 << (y - 1) | 1 << (z - 1));
        }
    }

    let total: u64 = 1 << (n - 1);
    let slots = triples.len() + 1;
    struct Acc {
        min: u64,
        argw: u64,
        hist: Vec<u64>,
    }
    let acc = (0..total)
        .into_par_iter()
        .fold(
            || Acc {
                min: u64::MAX,
                argw: u64::MAX,
                hist: vec![0u64; slots],
            },
            |mut acc, w| {
                let word = w << 1; // bit 0 clear: position 1 stays +1
                let c = triples
                    .iter()
                    .filter(|&&t| {
                        let hit = word & t;
                        hit == 0 || hit == t
                    })
                    .count() as u64;
                acc.hist[c as usize] += 1;
                if c < acc.min || (c == acc.min && word < acc.argw) {
                    acc.min = c;
                    acc.argw = word;
                }
                acc
            },
        )
        .reduce(
            || Acc {
                min: u64::MAX,
                argw: u64::MAX,
                hist: vec![0u64; slots],
            },
            |mut a, b| {
                for (x, y) in a.hist.iter_mut().zip(b.hist.iter()) {
                    *x += y;
                }
                if b.min < a.min || (b.min == a.min && b.argw < a.argw) {
                    a.min = b.min;
                    a.argw = b.argw;
                }
                a
            },
        );

    let word = acc.argw;
    let argmin = Coloring::Explicit(ExplicitColoring::new(n, |x| word >> (x - 1) & 1 == 1)?);
    Ok(LandscapeReport {
        n,
        mode: "exhaustive",
        colorings_examined: total,
        min_count: acc.min,
        argmin,
        histogram: acc
            .hist
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(count, &colorings)| HistogramBin {
                count: count as u64,
                colorings,
            })
            .collect(),
        seed: None,
    })
}

fn landscape_random(p: &IntPolynomial, n: u64, samples: u64, seed: u64) -> Result<LandscapeReport> {
    p.require_admissible()?;
    if n < 1 {
        return Err(Error::EmptyInput("landscape over an empty segment"));
    }
    if samples < 1 {
        return Err(Error::EmptyInput("zero samples requested"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_count = u64::MAX;
    let mut argmin: Option<Coloring> = None;
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..samples {
        let phi = Coloring::Explicit(ExplicitColoring::new(n, |_| rng.random::<bool>())?);
        let c = count_monochromatic(p, &phi, n, CountOptions::default())?.count;
        *hist.entry(c).or_insert(0) += 1;
        if c < min_count {
            min_count = c;
            argmin = Some(phi);
        }
    }
    Ok(LandscapeReport {
        n,
        mode: "random",
        colorings_examined: samples,
        min_count,
        argmin: argmin.expect("at least one sample"),
        histogram: hist
            .into_iter()
            .map(|(count, colorings)| HistogramBin { count, colorings })
            .collect(),
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterizationReport {
    pub m: u64,
    pub horizon: u64,
    pub strict_count: u64,
    pub degenerate_count: u64,
    pub empirical_zero: bool,
    pub certified: bool,
    pub decomposition: Option<StabilityDecomposition>,
    pub congruence: Option<Congruence>,
    /// empirical_zero == certified. False means either the horizon is too
    /// short to witness a solution or, if the horizon is generous, that
    /// the characterization itself has a counterexample.
    pub agrees: bool,
}

/// Test both directions of the solution-free characterization on one
/// periodic coloring: count solutions up to the horizon, and separately
/// look for the algebraic certificate. The two sides share no code path,
/// so agreement is evidence rather than tautology.
pub fn verify_characterization(
    p: &IntPolynomial,
    m: u64,
    neg: ResidueSet,
    horizon: u64,
) -> Result<CharacterizationReport> {
    p.require_admissible()?;
    let phi = divisibility_coloring(m, neg.clone())?;
    let opts = CountOptions {
        include_degenerate: true,
        ..CountOptions::default()
    };
    let report = count_monochromatic(p, &phi, horizon, opts)?;
    let strict_count = report.count;
    let degenerate_count = total_solutions(&report) - strict_count;
    let empirical_zero = strict_count == 0 && degenerate_count == 0;

    let cert = certificate_for(p, &neg)?;
    let certified = cert.is_some();
    let (decomposition, congruence) = match cert {
        Some((d, c)) => (Some(d), Some(c)),
        None => (None, None),
    };
    Ok(CharacterizationReport {
        m,
        horizon,
        strict_count,
        degenerate_count,
        empirical_zero,
        certified,
        decomposition,
        congruence,
        agrees: empirical_zero == certified,
    })
}
