//! Slow reference implementations the fast kernels are tested against.
//! Everything here favours being obviously correct over being usable at
//! scale; nothing shares code with the bit-parallel paths.

use crate::coloring::Coloring;
use crate::error::Result;
use crate::poly::IntPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveCount {
    pub count: u64,
    pub equal_pair: u64,
    pub repeated_z: u64,
    pub trivial: u64,
}

/// Literal double loop over (z, x) classifying every x + y = p(z) hit.
pub fn naive_count(p: &IntPolynomial, phi: &Coloring, n: u64) -> Result<NaiveCount> {
    let mut targets = Vec::new();
    for z in 1..=n {
        let s = p.eval(z as i128)?;
        if s >= 2 && s <= 2 * n as i128 {
            targets.push((z, s as u64));
        }
    }
    naive_count_with_targets(phi, n, &targets)
}

pub fn naive_count_with_targets(
    phi: &Coloring,
    n: u64,
    targets: &[(u64, u64)],
) -> Result<NaiveCount> {
    phi.require_domain(n)?;
    let mut out = NaiveCount { count: 0, equal_pair: 0, repeated_z: 0, trivial: 0 };
    for &(z, s) in targets {
        if s < 2 || s > 2 * n {
            continue;
        }
        let cz = phi.color_at(z);
        for x in 1..=n.min(s - 1) {
            let y = s - x;
            if y > n {
                continue;
            }
            if y < x {
                break;
            }
            if x == y {
                if x == z {
                    out.trivial += 1;
                } else if phi.color_at(x) == cz {
                    out.equal_pair += 1;
                }
            } else if z == x || z == y {
                if phi.color_at(x) == phi.color_at(y) {
                    out.repeated_z += 1;
                }
            } else if phi.color_at(x) == cz && phi.color_at(y) == cz {
                out.count += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{parity_coloring, ExplicitColoring};
    use crate::poly::parse_polynomial;

    #[test]
    fn square_norm_three() {
        let p = parse_polynomial("z^2").unwrap();
        let phi = Coloring::Explicit(ExplicitColoring::new(3, |_| false).unwrap());
        let c = naive_count(&p, &phi, 3).unwrap();
        assert_eq!(c, NaiveCount { count: 1, equal_pair: 0, repeated_z: 0, trivial: 1 });
    }

    #[test]
    fn parity_example_small() {
        let p = parse_polynomial("2z^2+1").unwrap();
        let c = naive_count(&p, &parity_coloring(), 500).unwrap();
        assert_eq!(c.count, 0);
    }
}
