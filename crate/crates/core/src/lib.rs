//! Integer polynomials, residue-set algebra over Z_m, two-colorings of the
//! naturals, and the machinery for the equation x + y = p(z) under
//! 2-colorings: exact monochromatic-solution counting, switch and residue
//! class structure, stability decompositions of deficient sumsets, modular
//! sieves with restricted root counting, and exhaustive desk-scale
//! verifiers.

pub mod analysis;
pub mod coloring;
pub mod error;
pub mod modring;
pub mod oracle;
pub mod poly;
pub mod search;
pub mod sieve;

pub use analysis::{count_monochromatic, CountOptions, CountReport, SolutionTriple};
pub use coloring::{parity_coloring, power_of_two_coloring, Color, Coloring};
pub use error::{Error, Result};
pub use modring::{stability_decomposition, ResidueSet, StabilityDecomposition};
pub use poly::{parse_polynomial, IntPolynomial};
pub use search::{
    enumerate_bad_periodic, exhaustive_stability_oracle, min_solutions_landscape,
    verify_characterization, LandscapeMode,
};
