//! Python bindings. Scalar results come back as native Python values;
//! structured reports come back as JSON strings (parse with json.loads),
//! matching the CLI's report payloads field for field.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyType;

use ramseyforge_core::analysis::{self, CountOptions};
use ramseyforge_core::coloring;
use ramseyforge_core::error::Error;
use ramseyforge_core::modring;
use ramseyforge_core::poly;
use ramseyforge_core::search;
use ramseyforge_core::sieve;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(format!("{} ({})", e, e.kind()))
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Exact integer polynomial p(z), the right-hand side of x + y = p(z).
#[pyclass(frozen)]
struct Polynomial {
    inner: poly::IntPolynomial,
}

#[pymethods]
impl Polynomial {
    /// Parse "z^3+3z^2+2z+3" style text.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Polynomial { inner: poly::parse_polynomial(text).map_err(err)? })
    }

    /// Build from coefficients in ascending order: [a0, a1, ..., ad].
    #[classmethod]
    fn from_coeffs(_cls: &Bound<'_, PyType>, coeffs: Vec<i128>) -> Self {
        Polynomial { inner: poly::IntPolynomial::new(coeffs) }
    }

    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn coeffs(&self) -> Vec<i128> {
        self.inner.coeffs().to_vec()
    }

    fn leading_coeff(&self) -> i128 {
        self.inner.leading_coeff()
    }

    fn eval(&self, z: i128) -> PyResult<i128> {
        self.inner.eval(z).map_err(err)
    }

    fn eval_mod(&self, z: u64, m: u64) -> PyResult<u64> {
        if m == 0 {
            return Err(PyValueError::new_err("modulus must be nonzero"));
        }
        Ok(self.inner.eval_mod(z, m))
    }

    fn derivative(&self) -> PyResult<Polynomial> {
        Ok(Polynomial { inner: self.inner.derivative().map_err(err)? })
    }

    /// n-th forward difference with step ell starting at base; equals
    /// ell^n * n! * a_n exactly when n >= degree.
    fn finite_difference(&self, n: u32, base: i128, ell: i128) -> PyResult<i128> {
        self.inner.finite_difference(n, base, ell).map_err(err)
    }

    /// True when p(1) * p(2) is even, the solvable side of the dichotomy.
    fn is_candidate_ramsey(&self) -> PyResult<bool> {
        self.inner.is_candidate_ramsey().map_err(err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Polynomial(\"{}\")", self.inner)
    }
}

/// Subset of Z_m with sumset and stabilizer structure.
#[pyclass(frozen)]
struct ResidueSet {
    inner: modring::ResidueSet,
}

#[pymethods]
impl ResidueSet {
    #[new]
    fn new(m: u64, members: Vec<u64>) -> PyResult<Self> {
        Ok(ResidueSet { inner: modring::ResidueSet::from_members(m, members).map_err(err)? })
    }

    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    fn members(&self) -> Vec<u64> {
        self.inner.members()
    }

    fn __len__(&self) -> usize {
        self.inner.len() as usize
    }

    fn contains(&self, r: u64) -> bool {
        self.inner.contains(r % self.inner.modulus())
    }

    fn sumset(&self, other: &ResidueSet) -> PyResult<ResidueSet> {
        Ok(ResidueSet { inner: self.inner.sumset(&other.inner).map_err(err)? })
    }

    fn complement(&self) -> ResidueSet {
        ResidueSet { inner: self.inner.complement() }
    }

    fn stabilizer(&self) -> PyResult<ResidueSet> {
        Ok(ResidueSet { inner: self.inner.stabilizer().map_err(err)? })
    }

    /// Project to Z_m_star; requires m_star | m and the set to be a union
    /// of fibers.
    fn project(&self, m_star: u64) -> PyResult<ResidueSet> {
        Ok(ResidueSet { inner: self.inner.project(m_star).map_err(err)? })
    }

    /// JSON: sumset size >= min(m, 2|A| - |stabilizer(A+A)|) plus context.
    fn kneser_check(&self) -> PyResult<String> {
        to_json(&self.inner.kneser_check().map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("ResidueSet(m={}, members={:?})", self.inner.modulus(), self.inner.members())
    }
}

/// Two-coloring of the positive integers (periodic, explicit on [1, n],
/// or the power-of-two construction).
#[pyclass(frozen)]
struct Coloring {
    inner: coloring::Coloring,
}

#[pymethods]
impl Coloring {
    /// Build from the JSON schema the CLI uses, e.g.
    /// {"kind":"periodic","m":6,"neg":[2,3,5]}.
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        let inner: coloring::Coloring =
            serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Coloring { inner })
    }

    #[classmethod]
    fn parity(_cls: &Bound<'_, PyType>) -> Self {
        Coloring { inner: coloring::parity_coloring() }
    }

    #[classmethod]
    fn pow2(_cls: &Bound<'_, PyType>) -> Self {
        Coloring { inner: coloring::power_of_two_coloring() }
    }

    /// Periodic coloring with the given residues mod m colored -1; requires
    /// a balanced split (|neg| = m / 2).
    #[classmethod]
    fn divisibility(_cls: &Bound<'_, PyType>, m: u64, neg: Vec<u64>) -> PyResult<Self> {
        let set = modring::ResidueSet::from_members(m, neg).map_err(err)?;
        Ok(Coloring { inner: coloring::divisibility_coloring(m, set).map_err(err)? })
    }

    /// Periodic coloring without the balance requirement.
    #[classmethod]
    fn periodic(_cls: &Bound<'_, PyType>, m: u64, neg: Vec<u64>) -> PyResult<Self> {
        let set = modring::ResidueSet::from_members(m, neg).map_err(err)?;
        Ok(Coloring { inner: coloring::periodic_coloring(set) })
    }

    /// Explicit coloring of [1, n]: minus lists the positions colored -1.
    #[classmethod]
    fn explicit(_cls: &Bound<'_, PyType>, n: u64, minus: Vec<u64>) -> PyResult<Self> {
        let mut mask = vec![false; n as usize + 1];
        for x in minus {
            if x < 1 || x > n {
                return Err(PyValueError::new_err(format!("position {x} outside [1, {n}]")));
            }
            mask[x as usize] = true;
        }
        let inner = coloring::ExplicitColoring::new(n, |x| mask[x as usize]).map_err(err)?;
        Ok(Coloring { inner: coloring::Coloring::Explicit(inner) })
    }

    /// +1 or -1.
    fn color_at(&self, x: u64) -> PyResult<i8> {
        if x == 0 {
            return Err(PyValueError::new_err("colorings start at 1"));
        }
        if let Some(end) = self.inner.domain_end() {
            if x > end {
                return Err(PyValueError::new_err(format!("position {x} outside [1, {end}]")));
            }
        }
        Ok(self.inner.color_at(x).value())
    }

    /// None for colorings defined on all positive integers.
    fn domain_end(&self) -> Option<u64> {
        self.inner.domain_end()
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Coloring({})", self.inner.kind())
    }
}

/// Members of an interval whose p-image avoids the bad residues mod m and
/// whose derivative stays a unit.
#[pyclass(frozen)]
struct SieveSet {
    inner: sieve::SieveSet,
}

#[pymethods]
impl SieveSet {
    #[new]
    fn new(p: &Polynomial, m: u64, lo: u64, hi: u64) -> PyResult<Self> {
        Ok(SieveSet { inner: sieve::SieveSet::build(&p.inner, m, lo, hi).map_err(err)? })
    }

    fn contains(&self, z: u64) -> bool {
        self.inner.contains(z)
    }

    fn members(&self) -> Vec<u64> {
        self.inner.members()
    }

    fn __len__(&self) -> usize {
        self.inner.members().len()
    }

    /// Number of members with p(z) = c (mod m).
    fn count_roots(&self, c: u64) -> PyResult<u64> {
        self.inner.count_roots(c).map_err(err)
    }

    /// (c_star, count, bound): worst congruence class and its cap.
    fn max_root_count(&self) -> PyResult<(u64, u64, u64)> {
        let rep = self.inner.max_root_count().map_err(err)?;
        Ok((rep.c_star, rep.count, rep.bound))
    }

    /// JSON: factorization, per-prime rules, size, and density.
    fn report(&self) -> PyResult<String> {
        to_json(&self.inner.report())
    }
}

#[pyfunction]
fn parse_polynomial(text: &str) -> PyResult<Polynomial> {
    Polynomial::new(text)
}

/// Count monochromatic {x, y} with x + y = p(z), all three sharing a color,
/// over [1, n]. Returns the full report as JSON.
#[pyfunction]
#[pyo3(signature = (p, phi, n, include_degenerate = false, collect_witnesses = false))]
fn count_monochromatic(
    p: &Polynomial,
    phi: &Coloring,
    n: u64,
    include_degenerate: bool,
    collect_witnesses: bool,
) -> PyResult<String> {
    let opts = CountOptions { include_degenerate, collect_witnesses, ..CountOptions::default() };
    to_json(&analysis::count_monochromatic(&p.inner, &phi.inner, n, opts).map_err(err)?)
}

/// Positions k in [lo, hi) where the color changes between k and k+1.
#[pyfunction]
fn find_switches(phi: &Coloring, lo: u64, hi: u64) -> PyResult<Vec<u64>> {
    analysis::find_switches(&phi.inner, lo, hi).map_err(err)
}

/// Residue-class structure at switch k: classes mod p(k+1)-p(k) below
/// p(k), monotonicity, and the first minus-to-plus boundary of each class.
#[pyfunction]
fn residue_profile(p: &Polynomial, phi: &Coloring, k: u64) -> PyResult<String> {
    to_json(&analysis::residue_profile(&p.inner, &phi.inner, k).map_err(err)?)
}

/// One verified monochromatic witness per non-monotone class at switch k.
#[pyfunction]
fn nonmonotone_solutions(p: &Polynomial, phi: &Coloring, k: u64) -> PyResult<String> {
    to_json(&analysis::nonmonotone_solutions(&p.inner, &phi.inner, k).map_err(err)?)
}

/// Stability structure of a balanced deficient A in Z_m: the quotient
/// modulus m', the forbidden odd residue alpha, and the projections.
#[pyfunction]
fn stability_decomposition(a: &ResidueSet) -> PyResult<String> {
    to_json(&modring::stability_decomposition(&a.inner).map_err(err)?)
}

/// Least z in [lo, hi] with p(z) != alpha_i (mod m_i) for every constraint,
/// or None. At most two constraints.
#[pyfunction]
fn find_avoiding(p: &Polynomial, lo: u64, hi: u64, constraints: Vec<(u64, u64)>) -> PyResult<Option<u64>> {
    sieve::find_avoiding(&p.inner, lo, hi, &constraints).map_err(err)
}

#[pyfunction]
fn verify_nesting(p: &Polynomial, m: u64, m_star: u64, lo: u64, hi: u64) -> PyResult<bool> {
    sieve::verify_nesting(&p.inner, m, m_star, lo, hi).map_err(err)
}

/// Enumerate balanced periodic colorings with period <= m_max that are
/// solution-free to the horizon, each with its algebraic certificate.
#[pyfunction]
fn enumerate_bad_periodic(p: &Polynomial, m_max: u64, horizon: u64) -> PyResult<String> {
    to_json(&search::enumerate_bad_periodic(&p.inner, m_max, horizon).map_err(err)?)
}

/// Sweep every balanced subset of Z_m through the decomposition oracle.
#[pyfunction]
fn exhaustive_stability_oracle(m: u64) -> PyResult<String> {
    to_json(&search::exhaustive_stability_oracle(m).map_err(err)?)
}

/// Minimum solution count over colorings of [1, n]: exhaustive when
/// samples/seed are omitted, seeded random sampling otherwise.
#[pyfunction]
#[pyo3(signature = (p, n, samples = None, seed = None))]
fn min_solutions_landscape(
    p: &Polynomial,
    n: u64,
    samples: Option<u64>,
    seed: Option<u64>,
) -> PyResult<String> {
    let mode = match (samples, seed) {
        (None, None) => search::LandscapeMode::Exhaustive,
        (Some(s), Some(seed)) => search::LandscapeMode::Random { samples: s, seed },
        _ => return Err(PyValueError::new_err("random mode needs both samples and seed")),
    };
    to_json(&search::min_solutions_landscape(&p.inner, n, mode).map_err(err)?)
}

/// Count solutions of the mod-m coloring up to the horizon and compare
/// with the algebraic certificate; JSON report with both verdicts.
#[pyfunction]
fn verify_characterization(p: &Polynomial, m: u64, neg: Vec<u64>, horizon: u64) -> PyResult<String> {
    let set = modring::ResidueSet::from_members(m, neg).map_err(err)?;
    to_json(&search::verify_characterization(&p.inner, m, set, horizon).map_err(err)?)
}

/// Sparse coloring of [1, n] with -1 exactly on [n1, n2); returns
/// (coloring, n1, n2).
#[pyfunction]
fn three_interval_coloring(p: &Polynomial, n: u64) -> PyResult<(Coloring, u64, u64)> {
    let (phi, rep) = coloring::three_interval_coloring(&p.inner, n).map_err(err)?;
    Ok((Coloring { inner: phi }, rep.n1, rep.n2))
}

#[pymodule]
fn ramseyforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Polynomial>()?;
    m.add_class::<ResidueSet>()?;
    m.add_class::<Coloring>()?;
    m.add_class::<SieveSet>()?;
    m.add_function(wrap_pyfunction!(parse_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(count_monochromatic, m)?)?;
    m.add_function(wrap_pyfunction!(find_switches, m)?)?;
    m.add_function(wrap_pyfunction!(residue_profile, m)?)?;
    m.add_function(wrap_pyfunction!(nonmonotone_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(stability_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(find_avoiding, m)?)?;
    m.add_function(wrap_pyfunction!(verify_nesting, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_bad_periodic, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_stability_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(min_solutions_landscape, m)?)?;
    m.add_function(wrap_pyfunction!(verify_characterization, m)?)?;
    m.add_function(wrap_pyfunction!(three_interval_coloring, m)?)?;
    Ok(())
}
